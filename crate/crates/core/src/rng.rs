//! Deterministic, counter-based random streams.
//!
//! A stream is addressed by `(seed, stream_id)`; the position inside it is a
//! word counter. Any stream can be re-created from its address alone, which is
//! what lets the pre-pass store seeds instead of vertex lists.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    #[inline]
    pub fn next_2d(&mut self) -> (f64, f64) {
        (self.next_f64(), self.next_f64())
    }

    /// Uniform index in `[0, n)`.
    #[inline]
    pub fn next_index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Derives an independent child stream; used to hand out per-chain streams.
    pub fn fork(&mut self) -> RandomStream {
        let id = self.rng.next_u64();
        RandomStream::new(self.seed ^ 0x9E37_79B9_7F4A_7C15, id)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
