use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed-deterministic random number generator.
///
/// Wraps a ChaCha8 stream cipher generator: the same 64-bit seed produces
/// the same sample stream on every platform. Splitting draws a fresh seed
/// from the parent stream, so a tree of generators is reproducible from a
/// single root seed.
#[derive(Debug, Clone)]
pub struct Rng(ChaCha8Rng);

impl Rng {
    /// Generator deterministically initialized from `seed`.
    pub fn seeded(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Derive an independent child generator from this one.
    pub fn split(&mut self) -> Self {
        let child_seed = self.0.next_u64();
        Rng::seeded(child_seed)
    }

    /// Uniform draw on the half-open-from-below interval (0, 1].
    ///
    /// Never returns 0, so the result is always a valid quantile argument.
    pub fn uniform_open_closed(&mut self) -> f64 {
        // 53 random bits, shifted into (0, 1] by adding one before scaling.
        let bits = self.0.next_u64() >> 11;
        (bits + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw on [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        let bits = self.0.next_u64() >> 11;
        let u = bits as f64 * (1.0 / (1u64 << 53) as f64);
        lo + (hi - lo) * u
    }

    /// Standard normal draw (Box-Muller).
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform_open_closed();
        let u2 = self.uniform_open_closed();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in [0, n).
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0);
        // Rejection sampling over the smallest covering power of two keeps
        // the draw exactly uniform.
        let mask = n.next_power_of_two() - 1;
        loop {
            let candidate = (self.0.next_u64() as usize) & mask;
            if candidate < n {
                return candidate;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}
