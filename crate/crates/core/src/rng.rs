//! Seeded random streams.
//!
//! Every simulation derives two independent ChaCha8 streams from one master
//! seed: one for node placement and one for protocol draws. Protocols run on
//! the same seed therefore see the same deployment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Recorded in every manifest and output header.
pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha 0.9, seed_from_u64, stream 0 = deployment, stream 1 = protocol)";

const DEPLOYMENT_STREAM: u64 = 0;
const PROTOCOL_STREAM: u64 = 1;

fn stream(seed: u64, id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn deployment_stream(seed: u64) -> SimRng {
    stream(seed, DEPLOYMENT_STREAM)
}

pub fn protocol_stream(seed: u64) -> SimRng {
    stream(seed, PROTOCOL_STREAM)
}
