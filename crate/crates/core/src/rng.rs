//! Seeded random streams.
//!
//! Every randomized routine is driven by a 64-bit seed. Parallel Monte Carlo
//! splits the work into fixed-size chunks; chunk `i` draws from ChaCha stream
//! `i` of the seed, so results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Draws handled by one substream in [`Substreams::par_draws`].
pub const CHUNK: usize = 4096;

pub type Stream = ChaCha8Rng;

/// Counter-based family of independent streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Substreams {
    seed: u64,
}

impl Substreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The `index`-th stream. Stream 0 is also what [`stream`] returns.
    pub fn stream(&self, index: u64) -> Stream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// A family for a sub-experiment, derived from the seed and a label.
    /// Distinct labels give unrelated families.
    pub fn derive(&self, label: u64) -> Substreams {
        let mut rng = self.stream(u64::MAX - label);
        Substreams::new(rng.random())
    }

    /// `n` draws of `draw`, chunked over substreams and evaluated in parallel.
    /// The output order and values depend only on the seed and `n`.
    pub fn par_draws<T, F>(&self, n: usize, draw: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut Stream) -> T + Sync,
    {
        let chunks = n.div_ceil(CHUNK);
        let parts: Vec<Vec<T>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = self.stream(c as u64);
                let len = CHUNK.min(n - c * CHUNK);
                (0..len).map(|_| draw(&mut rng)).collect()
            })
            .collect();
        parts.into_iter().flatten().collect()
    }
}

/// A single stream for `seed`.
pub fn stream(seed: u64) -> Stream {
    Substreams::new(seed).stream(0)
}

/// Uniform on the half-open interval (0, 1].
pub fn uniform_open0<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Unit-mean exponential by inversion.
pub fn exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -uniform_open0(rng).ln()
}
