use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Independent ±1 signs `ε₁, ε₂, …` that are a pure function of `(seed, i)`.
///
/// Sign `i` is bit `(i - 1) % 64` of the `(i - 1) / 64`-th 64-bit word of the
/// ChaCha8 keystream for `seed`. The keystream is seekable, so a query never
/// depends on which indices were asked for before.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RademacherSequence {
    pub seed: u64,
    #[serde(default)]
    pub negated: bool,
}

impl RademacherSequence {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            negated: false,
        }
    }

    /// The same sequence with every sign flipped.
    pub fn negated(self) -> Self {
        Self {
            negated: !self.negated,
            ..self
        }
    }

    fn stream_at(&self, word: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_word_pos(2 * word as u128);
        rng
    }

    #[inline]
    fn sign_of(&self, bit: bool) -> f64 {
        if bit ^ self.negated {
            -1.0
        } else {
            1.0
        }
    }

    /// `εᵢ` for `i ≥ 1`.
    pub fn sign(&self, i: u64) -> f64 {
        assert!(i >= 1, "Rademacher indices start at 1");
        let word = self.stream_at((i - 1) / 64).next_u64();
        self.sign_of((word >> ((i - 1) % 64)) & 1 == 1)
    }

    /// `εᵢ` for `lo ≤ i ≤ hi`, reading the keystream once.
    pub fn signs(&self, lo: u64, hi: u64) -> Vec<f64> {
        assert!(lo >= 1, "Rademacher indices start at 1");
        if hi < lo {
            return Vec::new();
        }
        let mut out = Vec::with_capacity((hi - lo + 1) as usize);
        let mut rng = self.stream_at((lo - 1) / 64);
        let mut word = rng.next_u64();
        let mut bit = (lo - 1) % 64;
        for _ in lo..=hi {
            out.push(self.sign_of((word >> bit) & 1 == 1));
            bit += 1;
            if bit == 64 {
                word = rng.next_u64();
                bit = 0;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bulk_matches_pointwise_in_any_order() {
        let r = RademacherSequence::new(42);
        let bulk = r.signs(60, 200);
        for i in (60..=200u64).rev() {
            assert_eq!(bulk[(i - 60) as usize], r.sign(i));
        }
    }

    #[test]
    fn roughly_balanced_and_seed_dependent() {
        let a = RademacherSequence::new(1).signs(1, 10_000);
        let b = RademacherSequence::new(2).signs(1, 10_000);
        let mean: f64 = a.iter().sum::<f64>() / 10_000.0;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert_ne!(a, b);
        assert!(a.iter().all(|&s| s == 1.0 || s == -1.0));
    }

    #[test]
    fn negation_flips_every_sign() {
        let r = RademacherSequence::new(7);
        let a = r.signs(1, 300);
        let b = r.negated().signs(1, 300);
        assert!(a.iter().zip(&b).all(|(x, y)| *x == -*y));
    }
}
