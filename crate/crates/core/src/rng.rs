//! Named random streams.
//!
//! Every stochastic component draws from ChaCha8 seeded with the master seed and
//! a fixed stream id, and samples Gaussians with the ziggurat method of
//! `rand_distr::StandardNormal`. The pair is exposed as [`PRNG_NAME`] so that
//! configuration files and result files can record it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Identifier of the generator/sampler pair used everywhere.
pub const PRNG_NAME: &str = "chacha8+ziggurat";

/// Stream id namespaces. The low 32 bits carry an index inside the namespace.
pub mod stream {
    /// Synthetic environment traces.
    pub const ENV: u64 = 1 << 32;
    /// Per-hour innovations of the exponentially decaying error model.
    pub const INNOVATION: u64 = 2 << 32;
    /// Per-origin i.i.d. forecast errors.
    pub const IID: u64 = 3 << 32;
    /// Per-origin scenario perturbations.
    pub const SCENARIO: u64 = 4 << 32;
}

/// Random stream with a fixed algorithm.
#[derive(Debug, Clone)]
pub struct Stream(ChaCha8Rng);

impl Stream {
    /// Opens stream `id` under `seed`.
    pub fn new(seed: u64, id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        Stream(rng)
    }

    /// Derives the seed for an independent sub-experiment (e.g. building `b`).
    pub fn derive_seed(seed: u64, salt: u64) -> u64 {
        // splitmix64 finaliser
        let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }
}
