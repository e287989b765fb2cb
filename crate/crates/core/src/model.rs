//! Sensor field, node population and the four-quadrant partition.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub width: f64,
    pub height: f64,
}

impl FieldSpec {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        let field = FieldSpec { width, height };
        field.validate()?;
        Ok(field)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::config(
                "field.width",
                format!("must be > 0, got {}", self.width),
            ));
        }
        if !(self.height.is_finite() && self.height > 0.0) {
            return Err(Error::config(
                "field.height",
                format!("must be > 0, got {}", self.height),
            ));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn contains(&self, p: Position) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec {
            width: 100.0,
            height: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuadrantId {
    A1,
    A2,
    A3,
    A4,
}

impl QuadrantId {
    pub const ALL: [QuadrantId; 4] = [
        QuadrantId::A1,
        QuadrantId::A2,
        QuadrantId::A3,
        QuadrantId::A4,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    fn from_halves(high_x: bool, high_y: bool) -> Self {
        match (high_x, high_y) {
            (false, false) => QuadrantId::A1,
            (true, false) => QuadrantId::A2,
            (false, true) => QuadrantId::A3,
            (true, true) => QuadrantId::A4,
        }
    }
}

impl fmt::Display for QuadrantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}", self.index() + 1)
    }
}

/// Axis-aligned rectangle `[x0, x1) x [y0, y1)`; an edge that coincides with
/// the field boundary is closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// The field split into four equal rectangles at its midlines.
///
/// Coordinates strictly below a midline belong to the low half; coordinates
/// on or above it belong to the high half.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPartition {
    field: FieldSpec,
    mid_x: f64,
    mid_y: f64,
}

impl FieldPartition {
    pub fn new(field: FieldSpec) -> Self {
        FieldPartition {
            field,
            mid_x: field.width / 2.0,
            mid_y: field.height / 2.0,
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn midpoint(&self) -> Position {
        Position::new(self.mid_x, self.mid_y)
    }

    pub fn rect(&self, q: QuadrantId) -> Rect {
        let (x0, x1) = match q {
            QuadrantId::A1 | QuadrantId::A3 => (0.0, self.mid_x),
            QuadrantId::A2 | QuadrantId::A4 => (self.mid_x, self.field.width),
        };
        let (y0, y1) = match q {
            QuadrantId::A1 | QuadrantId::A2 => (0.0, self.mid_y),
            QuadrantId::A3 | QuadrantId::A4 => (self.mid_y, self.field.height),
        };
        Rect { x0, x1, y0, y1 }
    }

    pub fn quadrants(&self) -> [(QuadrantId, Rect); 4] {
        QuadrantId::ALL.map(|q| (q, self.rect(q)))
    }

    pub fn quadrant_of(&self, p: Position) -> Result<QuadrantId> {
        if !self.field.contains(p) {
            return Err(Error::Domain(format!(
                "position ({}, {}) lies outside the {}x{} field",
                p.x, p.y, self.field.width, self.field.height
            )));
        }
        Ok(QuadrantId::from_halves(
            p.x >= self.mid_x,
            p.y >= self.mid_y,
        ))
    }
}

pub fn partition_field(field: FieldSpec) -> FieldPartition {
    FieldPartition::new(field)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Member,
    ClusterHead,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub position: Position,
    pub energy: f64,
    pub alive: bool,
    pub quadrant: QuadrantId,
    /// Not yet elected cluster head in the current epoch.
    pub eligible: bool,
    pub role: Role,
}

impl Node {
    pub fn new(
        id: NodeId,
        position: Position,
        energy: f64,
        partition: &FieldPartition,
    ) -> Result<Self> {
        Ok(Node {
            id,
            position,
            energy,
            alive: energy > 0.0,
            quadrant: partition.quadrant_of(position)?,
            eligible: true,
            role: Role::Member,
        })
    }

    pub fn is_head(&self) -> bool {
        self.role == Role::ClusterHead
    }
}

/// Deploys `n` nodes uniformly over the field using the deployment stream of `seed`.
pub fn deploy_nodes(
    n: usize,
    field: FieldSpec,
    initial_energy: f64,
    seed: u64,
) -> Result<Vec<Node>> {
    deploy_nodes_with(n, field, initial_energy, &mut rng::deployment_stream(seed))
}

pub fn deploy_nodes_with<R: Rng + ?Sized>(
    n: usize,
    field: FieldSpec,
    initial_energy: f64,
    rng: &mut R,
) -> Result<Vec<Node>> {
    if n == 0 {
        return Err(Error::config(
            "network.nodes",
            "at least one node is required",
        ));
    }
    field.validate()?;
    if !(initial_energy.is_finite() && initial_energy > 0.0) {
        return Err(Error::config(
            "network.initial_energy",
            format!("must be > 0, got {initial_energy}"),
        ));
    }
    let partition = FieldPartition::new(field);
    (0..n)
        .map(|id| {
            let x = rng.random::<f64>() * field.width;
            let y = rng.random::<f64>() * field.height;
            Node::new(id, Position::new(x, y), initial_energy, &partition)
        })
        .collect()
}

/// Alive node counts per quadrant, indexed by `QuadrantId::index`.
pub fn alive_per_quadrant(nodes: &[Node]) -> [usize; 4] {
    let mut counts = [0; 4];
    for node in nodes.iter().filter(|n| n.alive) {
        counts[node.quadrant.index()] += 1;
    }
    counts
}
