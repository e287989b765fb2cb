//! Round driver.
//!
//! A round runs the setup phase (election, advertisement, association, join
//! requests, schedule broadcast) and then the steady-state phase (one frame
//! per member to its head, aggregation, one packet per head to the base
//! station, direct reports from unclustered nodes). Every joule removed from a
//! node is recorded as a [`Charge`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, FieldPartition, FieldSpec, Node, NodeId, Role};
use crate::protocols::{
    associate_members, build_tdma_schedule, Cluster, ElectionParams, ProtocolKind, RoundContext,
};
use crate::radio::{InverseSquare, PacketSpec, RadioModel};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_nodes: usize,
    pub field: FieldSpec,
    pub initial_energy: f64,
    pub election: ElectionParams,
    pub radio: RadioModel,
    pub packets: PacketSpec,
    pub protocol: ProtocolKind,
    pub max_rounds: u64,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_nodes: 100,
            field: FieldSpec::default(),
            initial_energy: 0.5,
            election: ElectionParams::with_default_cap(0.05, 100)
                .expect("default election parameters"),
            radio: RadioModel::default(),
            packets: PacketSpec::default(),
            protocol: ProtocolKind::QLeach,
            max_rounds: 5000,
            seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 {
            return Err(Error::config(
                "network.nodes",
                "at least one node is required",
            ));
        }
        self.field.validate()?;
        if !(self.initial_energy.is_finite() && self.initial_energy > 0.0) {
            return Err(Error::config(
                "network.initial_energy",
                format!("must be > 0, got {}", self.initial_energy),
            ));
        }
        self.election.validate()?;
        self.radio.validate()?;
        self.packets.validate()?;
        if self.max_rounds == 0 {
            return Err(Error::config("simulation.max_rounds", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChargeKind {
    AdvertTx,
    AdvertRx,
    JoinTx,
    JoinRx,
    ScheduleTx,
    ScheduleRx,
    DataTx,
    DataRx,
    Aggregate,
    HeadToBs,
    DirectToBs,
}

impl ChargeKind {
    pub fn is_rx(self) -> bool {
        matches!(
            self,
            ChargeKind::AdvertRx | ChargeKind::JoinRx | ChargeKind::ScheduleRx | ChargeKind::DataRx
        )
    }
}

/// Energy removed from one node by one radio or aggregation action.
///
/// `completed` is false when the node could not afford `cost`; it is then
/// drained (`amount` < `cost`) and dies without performing the action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Charge {
    pub node: NodeId,
    pub kind: ChargeKind,
    pub cost: f64,
    pub amount: f64,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: u64,
    pub alive: usize,
    pub ch_ids: Vec<NodeId>,
    pub packets_to_bs: u64,
    pub packets_to_chs: u64,
    pub energy_remaining: f64,
    pub alive_per_quadrant: [usize; 4],
    pub deaths: Vec<NodeId>,
}

/// Everything that happened in one round, for callers that need more than the trace.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub trace: RoundTrace,
    /// Clusters as formed by association, before join failures.
    pub clusters: Vec<Cluster>,
    /// Nodes that reported directly to the base station.
    pub fallback: Vec<NodeId>,
    pub charges: Vec<Charge>,
}

impl RoundOutcome {
    pub fn energy_charged(&self) -> f64 {
        self.charges.iter().map(|c| c.amount).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub config: SimulationConfig,
    pub rounds: Vec<RoundTrace>,
    /// Round of the first death, if any node died.
    pub fnd: Option<u64>,
    /// Round of the last death, if every node died.
    pub lnd: Option<u64>,
    pub total_packets_bs: u64,
    pub initial_energy_total: f64,
    /// Sum of all charges over the run.
    pub energy_charged: f64,
}

impl SimulationResult {
    pub fn residual_energy(&self) -> f64 {
        self.rounds
            .last()
            .map_or(self.initial_energy_total, |t| t.energy_remaining)
    }

    /// `|initial - (charged + residual)| / initial`.
    pub fn conservation_error(&self) -> f64 {
        (self.initial_energy_total - (self.energy_charged + self.residual_energy())).abs()
            / self.initial_energy_total
    }
}

/// Mutable network state for one simulation.
pub struct Simulation {
    config: SimulationConfig,
    partition: FieldPartition,
    nodes: Vec<Node>,
    rng: SimRng,
    round: u64,
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let nodes = model::deploy_nodes(
            config.n_nodes,
            config.field,
            config.initial_energy,
            config.seed,
        )?;
        Ok(Self::with_nodes(config, nodes))
    }

    /// Starts from an explicit population (ids must equal indices).
    pub fn with_nodes(config: SimulationConfig, nodes: Vec<Node>) -> Self {
        debug_assert!(nodes.iter().enumerate().all(|(i, n)| n.id == i));
        Simulation {
            partition: FieldPartition::new(config.field),
            rng: rng::protocol_stream(config.seed),
            nodes,
            config,
            round: 0,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn partition(&self) -> &FieldPartition {
        &self.partition
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn alive(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn total_energy(&self) -> f64 {
        self.nodes.iter().map(|n| n.energy).sum()
    }

    /// Runs one round. Returns `None` once every node is dead.
    pub fn step(&mut self) -> Option<RoundOutcome> {
        if self.alive() == 0 {
            return None;
        }
        let r = self.round;
        let protocol = self.config.protocol.protocol();
        let scope = protocol.scope();
        let radio = self.config.radio;
        let PacketSpec { k, ctrl_bits } = self.config.packets;
        let mut round = RoundState::default();

        // epoch reset
        let epoch_start = self.config.election.is_epoch_start(r);
        for node in self.nodes.iter_mut().filter(|n| n.alive) {
            node.role = Role::Member;
            if epoch_start {
                node.eligible = true;
            }
        }

        // election
        let heads = {
            let mut ctx = RoundContext {
                round: r,
                nodes: &self.nodes,
                partition: &self.partition,
                rng: &mut self.rng,
            };
            protocol.elect(&mut ctx, &self.config.election)
        };
        for &h in &heads {
            self.nodes[h].role = Role::ClusterHead;
            self.nodes[h].eligible = false;
        }

        // advertisement: each head broadcasts to the farthest non-head in scope
        for &h in &heads {
            if !self.nodes[h].alive {
                continue;
            }
            let listeners: Vec<NodeId> = self
                .nodes
                .iter()
                .filter(|n| n.alive && !n.is_head() && scope.in_scope(n, &self.nodes[h]))
                .map(|n| n.id)
                .collect();
            let Some(range) = self.max_distance(h, &listeners) else {
                continue;
            };
            let cost = radio
                .tx_cost(ctrl_bits, range)
                .expect("distance is non-negative");
            if !self.charge(&mut round, h, ChargeKind::AdvertTx, cost) {
                continue;
            }
            for l in listeners {
                self.charge(
                    &mut round,
                    l,
                    ChargeKind::AdvertRx,
                    radio.rx_cost(ctrl_bits),
                );
            }
        }

        // association among survivors
        let live_heads: Vec<NodeId> = heads
            .iter()
            .copied()
            .filter(|&h| self.nodes[h].alive)
            .collect();
        let association = associate_members(&self.nodes, &live_heads, scope, &InverseSquare);

        // join requests, schedule broadcast and data frames, cluster by cluster
        let mut clusters = association.clusters.clone();
        clusters.sort_by_key(|c| c.head);
        for cluster in &clusters {
            let h = cluster.head;
            let mut joined = Vec::with_capacity(cluster.members.len());
            for &m in &cluster.members {
                let cost = radio
                    .tx_cost(ctrl_bits, self.distance(m, h))
                    .expect("distance is non-negative");
                if self.charge(&mut round, m, ChargeKind::JoinTx, cost)
                    && self.charge(&mut round, h, ChargeKind::JoinRx, radio.rx_cost(ctrl_bits))
                {
                    joined.push(m);
                }
            }
            if !self.nodes[h].alive {
                continue;
            }

            let schedule = build_tdma_schedule(&Cluster {
                head: h,
                members: joined,
                quadrant: cluster.quadrant,
            });
            let mut slots = Vec::with_capacity(schedule.slots_per_frame());
            if let Some(range) = self.max_distance(h, &schedule.slot_order) {
                let cost = radio
                    .tx_cost(ctrl_bits, range)
                    .expect("distance is non-negative");
                if !self.charge(&mut round, h, ChargeKind::ScheduleTx, cost) {
                    continue;
                }
                for &m in &schedule.slot_order {
                    if self.charge(
                        &mut round,
                        m,
                        ChargeKind::ScheduleRx,
                        radio.rx_cost(ctrl_bits),
                    ) {
                        slots.push(m);
                    }
                }
            }

            // steady state: members wake only for their own slot
            let mut received = 0usize;
            for m in slots {
                let cost = radio
                    .tx_cost(k, self.distance(m, h))
                    .expect("distance is non-negative");
                if self.charge(&mut round, m, ChargeKind::DataTx, cost)
                    && self.charge(&mut round, h, ChargeKind::DataRx, radio.rx_cost(k))
                {
                    received += 1;
                    round.packets_to_chs += 1;
                }
            }
            if !self.nodes[h].alive {
                continue;
            }
            let fuse = radio
                .aggregation_cost(k, received + 1)
                .expect("at least one signal");
            if self.charge(&mut round, h, ChargeKind::Aggregate, fuse) {
                let d_bs = radio.distance_to_bs(self.nodes[h].position);
                let cost = radio.tx_cost(k, d_bs).expect("distance is non-negative");
                if self.charge(&mut round, h, ChargeKind::HeadToBs, cost) {
                    round.packets_to_bs += 1;
                }
            }
        }

        // nodes with no head in scope report straight to the base station
        for &f in &association.unclustered {
            let d_bs = radio.distance_to_bs(self.nodes[f].position);
            let cost = radio.tx_cost(k, d_bs).expect("distance is non-negative");
            if self.charge(&mut round, f, ChargeKind::DirectToBs, cost) {
                round.packets_to_bs += 1;
            }
        }

        self.round += 1;
        let trace = RoundTrace {
            round: r,
            alive: self.alive(),
            ch_ids: heads,
            packets_to_bs: round.packets_to_bs,
            packets_to_chs: round.packets_to_chs,
            energy_remaining: self.total_energy(),
            alive_per_quadrant: model::alive_per_quadrant(&self.nodes),
            deaths: round.deaths,
        };
        Some(RoundOutcome {
            trace,
            clusters: association.clusters,
            fallback: association.unclustered,
            charges: round.charges,
        })
    }

    fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        self.nodes[a].position.distance(self.nodes[b].position)
    }

    fn max_distance(&self, from: NodeId, to: &[NodeId]) -> Option<f64> {
        to.iter().map(|&t| self.distance(from, t)).reduce(f64::max)
    }

    /// Removes `cost` from the node. An unaffordable action drains the node,
    /// does not happen, and kills it. Dead nodes are never charged.
    fn charge(&mut self, round: &mut RoundState, id: NodeId, kind: ChargeKind, cost: f64) -> bool {
        let node = &mut self.nodes[id];
        if !node.alive {
            return false;
        }
        let completed = cost <= node.energy;
        let amount = if completed { cost } else { node.energy };
        node.energy -= amount;
        round.charges.push(Charge {
            node: id,
            kind,
            cost,
            amount,
            completed,
        });
        if node.energy <= 0.0 {
            node.energy = 0.0;
            node.alive = false;
            round.deaths.push(id);
        }
        completed
    }
}

#[derive(Default)]
struct RoundState {
    charges: Vec<Charge>,
    deaths: Vec<NodeId>,
    packets_to_bs: u64,
    packets_to_chs: u64,
}

pub fn run_round(sim: &mut Simulation) -> Option<RoundOutcome> {
    sim.step()
}

/// Runs until every node is dead or `max_rounds` rounds have elapsed.
pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationResult> {
    let sim = Simulation::new(config.clone())?;
    Ok(run_to_end(sim))
}

pub fn run_to_end(mut sim: Simulation) -> SimulationResult {
    let initial_energy_total = sim.total_energy();
    let mut rounds = Vec::new();
    let mut energy_charged = 0.0;
    let mut fnd = None;
    let mut lnd = None;
    while sim.round() < sim.config().max_rounds {
        let Some(outcome) = sim.step() else { break };
        energy_charged += outcome.energy_charged();
        let t = outcome.trace;
        if !t.deaths.is_empty() {
            fnd.get_or_insert(t.round);
            if t.alive == 0 {
                lnd = Some(t.round);
            }
        }
        let done = t.alive == 0;
        rounds.push(t);
        if done {
            break;
        }
    }
    SimulationResult {
        total_packets_bs: rounds.iter().map(|t| t.packets_to_bs).sum(),
        config: sim.config,
        rounds,
        fnd,
        lnd,
        initial_energy_total,
        energy_charged,
    }
}
