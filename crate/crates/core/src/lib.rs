//! Round-based simulator for cluster-hierarchy routing in wireless sensor
//! networks: Q-LEACH (quadrant-partitioned election and association) and the
//! LEACH baseline.

pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod model;
pub mod protocols;
pub mod radio;
pub mod rng;

pub use engine::{run_simulation, RoundTrace, Simulation, SimulationConfig, SimulationResult};
pub use error::{Error, Result};
