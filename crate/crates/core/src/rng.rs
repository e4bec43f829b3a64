//! Reproducible random streams.
//!
//! Every sampler takes an explicit generator. A [`RngStream`] names one
//! ChaCha8 keystream by `(seed, stream_id)`; the keystream is counter-based,
//! so the same pair always yields the same draws regardless of which thread
//! consumes it. Replicas derive their own streams with [`RngStream::substream`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Child stream `index` of this stream. Children of distinct parents or
    /// distinct indices land on distinct stream ids with overwhelming
    /// probability.
    pub fn substream(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(0x9e37_79b9))),
        }
    }
}

/// Runs `f` once per replica on its own substream, in parallel. The output
/// order is the replica order, so results do not depend on thread count.
pub fn replicate<T, F>(stream: RngStream, n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut Rng) -> T + Sync,
{
    use rayon::prelude::*;
    (0..n)
        .into_par_iter()
        .map(|k| f(k, &mut stream.substream(k).rng()))
        .collect()
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
