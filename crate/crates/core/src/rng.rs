//! Seedable counter-based random generator.
//!
//! All randomized procedures in this crate (the walk verifier, Monte Carlo
//! trials, fuzz corpora) draw from this generator so that a (seed, counter)
//! pair fully determines every sample, independent of platform or thread
//! schedule. The algorithm is the SplitMix64 output function applied to a
//! Weyl sequence:
//!
//! ```text
//! out(seed, i) = mix64(seed + (i + 1) * 0x9E3779B97F4A7C15)
//! mix64(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!           z ^= z >> 27; z *= 0x94D049BB133111EB;
//!           z ^= z >> 31
//! ```

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// The counter-based generator. `Clone` yields an independent replay.
#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    /// Derives the seed for an independent stream (e.g. one Monte Carlo
    /// trial) from a base seed and a stream index.
    pub fn derive(seed: u64, stream: u64) -> u64 {
        mix64(seed ^ mix64(stream.wrapping_add(GOLDEN)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix64(self.seed.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform draw from `[0, bound)`, bias-free via rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        // Reject draws from the tail shorter than a full multiple of bound.
        let zone = u64::MAX - (u64::MAX % bound + 1) % bound;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % bound;
            }
        }
    }

    /// Uniform f64 in [0, 1) with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}
