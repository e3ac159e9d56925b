//! Counter-based random streams.
//!
//! A stream is addressed by `(seed, stream_id, counter)`. The key is derived
//! from `seed`, `stream_id` selects the ChaCha nonce and `counter` counts
//! 64-bit draws, so any position of any stream can be reached directly and
//! output is identical on every platform.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    counter: u64,
    core: ChaCha8Rng,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key_from_seed(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self::at(seed, stream_id, 0)
    }

    /// Stream positioned after `counter` draws.
    pub fn at(seed: u64, stream_id: u64, counter: u64) -> Self {
        let mut core = ChaCha8Rng::from_seed(key_from_seed(seed));
        core.set_stream(stream_id);
        core.set_word_pos(2 * u128::from(counter));
        Self { seed, stream_id, counter, core }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Independent stream with the same seed.
    pub fn substream(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        self.core.next_u64()
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// +1 with probability `p`, decided by one uniform draw `r < p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform point on S² (Marsaglia's two-uniform method).
    pub fn unit_sphere(&mut self) -> [f64; 3] {
        loop {
            let x1 = 2.0 * self.next_f64() - 1.0;
            let x2 = 2.0 * self.next_f64() - 1.0;
            let s = x1 * x1 + x2 * x2;
            if s < 1.0 && s > 0.0 {
                let r = (1.0 - s).sqrt();
                return [2.0 * x1 * r, 2.0 * x2 * r, 1.0 - 2.0 * s];
            }
        }
    }
}
