//! Setup-phase logic: cluster-head election, member association and TDMA
//! slot allocation.
//!
//! Both protocols share the rotating threshold
//! `T = p / (1 - p * (r mod round(1/p)))` over nodes that have not served as
//! cluster head in the current epoch. Q-LEACH draws per quadrant with a cap on
//! heads per quadrant and keeps association inside the quadrant; LEACH draws
//! network-wide and lets members join any head.

mod association;
mod tdma;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FieldPartition, Node, NodeId};

pub use association::{associate_members, Association, AssociationScope, Cluster};
pub use tdma::{build_tdma_schedule, TdmaSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectionParams {
    pub p: f64,
    pub epoch_len: u64,
    pub per_area_cap: usize,
}

impl ElectionParams {
    pub fn new(p: f64, per_area_cap: usize) -> Result<Self> {
        check_probability(p)?;
        if per_area_cap == 0 {
            return Err(Error::config("election.per_area_cap", "must be >= 1"));
        }
        Ok(ElectionParams {
            p,
            epoch_len: epoch_len(p),
            per_area_cap,
        })
    }

    /// Cap defaults to the expected head count `n_nodes * p` split over four quadrants.
    pub fn with_default_cap(p: f64, n_nodes: usize) -> Result<Self> {
        check_probability(p)?;
        ElectionParams::new(p, default_cap(p, n_nodes))
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.p)?;
        if self.epoch_len != epoch_len(self.p) {
            return Err(Error::config(
                "election.epoch_len",
                format!("must equal round(1/p) = {}", epoch_len(self.p)),
            ));
        }
        if self.per_area_cap == 0 {
            return Err(Error::config("election.per_area_cap", "must be >= 1"));
        }
        Ok(())
    }

    pub fn threshold(&self, round: u64, eligible: bool) -> f64 {
        if !eligible {
            return 0.0;
        }
        let denom = 1.0 - self.p * (round % self.epoch_len) as f64;
        if denom <= 0.0 {
            return 1.0;
        }
        (self.p / denom).clamp(0.0, 1.0)
    }

    pub fn is_epoch_start(&self, round: u64) -> bool {
        round.is_multiple_of(self.epoch_len)
    }
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::config(
            "election.p",
            format!("must lie in (0, 1), got {p}"),
        ))
    }
}

fn epoch_len(p: f64) -> u64 {
    ((1.0 / p).round() as u64).max(1)
}

pub fn default_cap(p: f64, n_nodes: usize) -> usize {
    ((n_nodes as f64 * p / 4.0).ceil() as usize).max(1)
}

/// Election threshold for a node at round `r`.
pub fn leach_threshold(p: f64, r: u64, eligible: bool) -> Result<f64> {
    check_probability(p)?;
    Ok(ElectionParams {
        p,
        epoch_len: epoch_len(p),
        per_area_cap: usize::MAX,
    }
    .threshold(r, eligible))
}

/// Read-only view of the network handed to a protocol for one round.
pub struct RoundContext<'a> {
    pub round: u64,
    /// All nodes, indexed by id.
    pub nodes: &'a [Node],
    pub partition: &'a FieldPartition,
    pub rng: &'a mut dyn RngCore,
}

/// A cluster-head election rule plus the association scope it implies.
///
/// New protocols (SEP, DEEC, ...) plug in here and get registered in
/// [`ProtocolKind`].
pub trait ClusteringProtocol: Send + Sync {
    fn name(&self) -> &'static str;

    /// Elected head ids in ascending order. Does not mutate eligibility.
    fn elect(&self, ctx: &mut RoundContext<'_>, params: &ElectionParams) -> Vec<NodeId>;

    fn scope(&self) -> AssociationScope;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct QLeach;

#[derive(Debug, Clone, Copy, Default)]
pub struct Leach;

pub fn elect_cluster_heads_qleach(
    ctx: &mut RoundContext<'_>,
    params: &ElectionParams,
) -> Vec<NodeId> {
    let mut per_quadrant = [0usize; 4];
    let mut heads = Vec::new();
    for node in ctx.nodes.iter().filter(|n| n.alive && n.eligible) {
        let temp: f64 = ctx.rng.random();
        let slot = &mut per_quadrant[node.quadrant.index()];
        if temp <= params.threshold(ctx.round, true) && *slot < params.per_area_cap {
            *slot += 1;
            heads.push(node.id);
        }
    }
    heads
}

pub fn elect_cluster_heads_leach(
    ctx: &mut RoundContext<'_>,
    params: &ElectionParams,
) -> Vec<NodeId> {
    let threshold = params.threshold(ctx.round, true);
    let mut heads = Vec::new();
    for node in ctx.nodes.iter().filter(|n| n.alive && n.eligible) {
        let temp: f64 = ctx.rng.random();
        if temp <= threshold {
            heads.push(node.id);
        }
    }
    heads
}

impl ClusteringProtocol for QLeach {
    fn name(&self) -> &'static str {
        "qleach"
    }

    fn elect(&self, ctx: &mut RoundContext<'_>, params: &ElectionParams) -> Vec<NodeId> {
        elect_cluster_heads_qleach(ctx, params)
    }

    fn scope(&self) -> AssociationScope {
        AssociationScope::QuadrantLocal
    }
}

impl ClusteringProtocol for Leach {
    fn name(&self) -> &'static str {
        "leach"
    }

    fn elect(&self, ctx: &mut RoundContext<'_>, params: &ElectionParams) -> Vec<NodeId> {
        elect_cluster_heads_leach(ctx, params)
    }

    fn scope(&self) -> AssociationScope {
        AssociationScope::Global
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ProtocolKind {
    QLeach,
    Leach,
}

const PLANNED: [&str; 2] = ["sep", "deec"];

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 2] = [ProtocolKind::QLeach, ProtocolKind::Leach];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::QLeach => "qleach",
            ProtocolKind::Leach => "leach",
        }
    }

    pub fn protocol(self) -> &'static dyn ClusteringProtocol {
        match self {
            ProtocolKind::QLeach => &QLeach,
            ProtocolKind::Leach => &Leach,
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        if let Some(kind) = ProtocolKind::ALL.into_iter().find(|k| k.name() == key) {
            return Ok(kind);
        }
        if PLANNED.contains(&key.as_str()) {
            return Err(Error::NotImplemented(key));
        }
        Err(Error::UnknownProtocol {
            name: s.to_string(),
            valid: ProtocolKind::ALL.map(ProtocolKind::name).join(", "),
        })
    }
}

impl TryFrom<String> for ProtocolKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ProtocolKind> for String {
    fn from(k: ProtocolKind) -> String {
        k.name().to_string()
    }
}
