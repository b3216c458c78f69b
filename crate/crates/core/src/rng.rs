//! Injected randomness sources.
//!
//! Every stochastic operation in the crate draws from a [`RandSource`] passed
//! in by the caller; nothing reads ambient randomness. [`SeededRand`] gives
//! reproducible streams for normal runs, [`ScriptedRand`] forces exact draw
//! sequences so tests can enumerate branches exhaustively.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::algebra::Angle8;

/// Minimum probability a scripted branch must carry. Forcing a branch below
/// this is treated as a test bug rather than a legal enumeration.
const MIN_FORCED_PROB: f64 = 1e-9;

/// A deterministic source of the few random shapes the protocols need.
pub trait RandSource {
    /// Uniform angle out of the eight multiples of pi/4.
    fn angle(&mut self) -> Angle8;

    /// Uniform bit.
    fn bit(&mut self) -> u8;

    /// Returns 0 with probability `p_zero`, else 1. Used for measurement
    /// branches, where `p_zero` is the Born probability of outcome 0.
    fn branch(&mut self, p_zero: f64) -> u8;

    /// Uniform index in 0..n.
    fn index(&mut self, n: usize) -> usize;

    /// Uniform float in [0, 1).
    fn fraction(&mut self) -> f64;
}

/// Counter-based PRNG stream, fully determined by a 64-bit seed.
pub struct SeededRand {
    rng: ChaCha12Rng,
}

impl SeededRand {
    pub fn new(seed: u64) -> SeededRand {
        SeededRand {
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }
}

impl RandSource for SeededRand {
    fn angle(&mut self) -> Angle8 {
        Angle8::new((self.rng.next_u32() & 7) as i64)
    }

    fn bit(&mut self) -> u8 {
        (self.rng.next_u32() & 1) as u8
    }

    fn branch(&mut self, p_zero: f64) -> u8 {
        if self.fraction() < p_zero {
            0
        } else {
            1
        }
    }

    fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index over an empty range");
        ((self.rng.next_u64() as u128 * n as u128) >> 64) as usize
    }

    fn fraction(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Scripted source that replays queued draws, for exhaustive enumeration in
/// tests.
///
/// Angle, bit, and branch queues are strict: running dry panics, as does
/// forcing a branch whose probability is essentially zero. Index and fraction
/// draws fall back to 0 when their queue is empty, which selects the first
/// alternative deterministically.
#[derive(Default)]
pub struct ScriptedRand {
    angles: std::collections::VecDeque<u8>,
    bits: std::collections::VecDeque<u8>,
    branches: std::collections::VecDeque<u8>,
    indices: std::collections::VecDeque<usize>,
    fractions: std::collections::VecDeque<f64>,
}

impl ScriptedRand {
    pub fn new() -> ScriptedRand {
        ScriptedRand::default()
    }

    pub fn with_angles(mut self, ks: &[u8]) -> ScriptedRand {
        self.angles.extend(ks.iter().copied());
        self
    }

    pub fn with_bits(mut self, bits: &[u8]) -> ScriptedRand {
        self.bits.extend(bits.iter().copied());
        self
    }

    pub fn with_branches(mut self, branches: &[u8]) -> ScriptedRand {
        self.branches.extend(branches.iter().copied());
        self
    }

    pub fn with_indices(mut self, indices: &[usize]) -> ScriptedRand {
        self.indices.extend(indices.iter().copied());
        self
    }

    pub fn with_fractions(mut self, fractions: &[f64]) -> ScriptedRand {
        self.fractions.extend(fractions.iter().copied());
        self
    }

    /// True when every strict queue has been consumed.
    pub fn exhausted(&self) -> bool {
        self.angles.is_empty() && self.bits.is_empty() && self.branches.is_empty()
    }
}

impl RandSource for ScriptedRand {
    fn angle(&mut self) -> Angle8 {
        let k = self.angles.pop_front().expect("angle script exhausted");
        Angle8::new(k as i64)
    }

    fn bit(&mut self) -> u8 {
        self.bits.pop_front().expect("bit script exhausted") & 1
    }

    fn branch(&mut self, p_zero: f64) -> u8 {
        let b = self.branches.pop_front().expect("branch script exhausted") & 1;
        let p = if b == 0 { p_zero } else { 1.0 - p_zero };
        assert!(
            p > MIN_FORCED_PROB,
            "scripted branch {b} has probability {p:e}"
        );
        b
    }

    fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index over an empty range");
        let i = self.indices.pop_front().unwrap_or(0);
        assert!(i < n, "scripted index {i} out of range 0..{n}");
        i
    }

    fn fraction(&mut self) -> f64 {
        self.fractions.pop_front().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_streams_replay() {
        let mut a = SeededRand::new(42);
        let mut b = SeededRand::new(42);
        for _ in 0..100 {
            assert_eq!(a.angle(), b.angle());
            assert_eq!(a.bit(), b.bit());
            assert_eq!(a.index(6), b.index(6));
            assert_eq!(a.fraction().to_bits(), b.fraction().to_bits());
        }
    }

    #[test]
    fn seeded_streams_differ_across_seeds() {
        let mut a = SeededRand::new(1);
        let mut b = SeededRand::new(2);
        let draws_a: Vec<u8> = (0..32).map(|_| a.angle().k()).collect();
        let draws_b: Vec<u8> = (0..32).map(|_| b.angle().k()).collect();
        assert_ne!(draws_a, draws_b);
    }

    #[test]
    fn seeded_marginals_look_uniform() {
        let mut r = SeededRand::new(7);
        let mut angle_counts = [0u32; 8];
        for _ in 0..8000 {
            angle_counts[r.angle().k() as usize] += 1;
        }
        for c in angle_counts {
            assert!((700..1300).contains(&c), "angle count {c} out of range");
        }
        let frac_mean: f64 = (0..10000).map(|_| r.fraction()).sum::<f64>() / 10000.0;
        assert!((frac_mean - 0.5).abs() < 0.02);
    }

    #[test]
    fn scripted_replays_in_order() {
        let mut r = ScriptedRand::new()
            .with_angles(&[3, 7])
            .with_bits(&[1, 0])
            .with_branches(&[1]);
        assert_eq!(r.angle().k(), 3);
        assert_eq!(r.angle().k(), 7);
        assert_eq!(r.bit(), 1);
        assert_eq!(r.bit(), 0);
        assert_eq!(r.branch(0.5), 1);
        assert!(r.exhausted());
    }

    #[test]
    #[should_panic(expected = "probability")]
    fn scripted_rejects_impossible_branch() {
        let mut r = ScriptedRand::new().with_branches(&[1]);
        r.branch(1.0);
    }

    #[test]
    #[should_panic(expected = "exhausted")]
    fn scripted_rejects_overrun() {
        let mut r = ScriptedRand::new();
        r.bit();
    }
}
