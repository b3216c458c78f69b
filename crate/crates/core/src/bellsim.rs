//! Bit-level simulation of a string of Bell-diagonal pairs.
//!
//! Each shared pair is summarized by its hidden label (z, x); bilateral
//! operations act as GF(2) rules on those labels. The rules are not trusted
//! on their own: every generator is declared together with the bilateral
//! unitary that realizes it, and the test suite conjugates statevector Bell
//! states by those unitaries to confirm the label action up to global phase.
//!
//! Generator dictionary (one gate per server, per listed half):
//!
//! - SWAP_ZX: Hadamard on both halves, label (z, x) -> (x, z).
//! - SHEAR: phase gate S on the first half, S-dagger on the second half,
//!   label (z, x) -> (z xor x, x).
//! - BXOR: controlled-NOT from the src half to the tgt half on both sides,
//!   x_tgt accumulates x_src while z_src accumulates z_tgt.

use crate::algebra::{BellLabel, BellString};
use crate::error::{Error, Result};
use crate::rng::RandSource;

const DIST_TOL: f64 = 1e-12;

/// Probability of each Bell label, indexed by 2z + x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairDist {
    p: [f64; 4],
}

impl PairDist {
    pub fn new(p: [f64; 4]) -> Result<PairDist> {
        let sum: f64 = p.iter().sum();
        if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (sum - 1.0).abs() > DIST_TOL {
            return Err(Error::InvalidDistribution { sum });
        }
        Ok(PairDist { p })
    }

    pub fn probability(&self, label: BellLabel) -> f64 {
        self.p[label.index() as usize]
    }

    pub fn probabilities(&self) -> [f64; 4] {
        self.p
    }
}

/// Werner-form noise: weight F on the (1,1) label, the rest split evenly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WernerParams {
    fidelity: f64,
}

impl WernerParams {
    pub fn new(fidelity: f64) -> Result<WernerParams> {
        if !(0.0..=1.0).contains(&fidelity) {
            return Err(Error::FidelityOutOfRange { value: fidelity });
        }
        Ok(WernerParams { fidelity })
    }

    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }
}

/// The distribution with p11 = F and p00 = p01 = p10 = (1-F)/3.
pub fn werner_dist(w: WernerParams) -> PairDist {
    let f = w.fidelity();
    let rest = (1.0 - f) / 3.0;
    PairDist {
        p: [rest, rest, rest, f],
    }
}

/// A string of live pairs with their ground-truth labels.
///
/// The labels are world-side information: protocol parties never read them,
/// only measurement bits derived from them. Tests compare against them
/// freely.
#[derive(Clone, Debug, PartialEq)]
pub struct PairRegister {
    string: BellString,
}

/// The six relabelings that permute {(0,0), (0,1), (1,0)} and fix (1,1),
/// as permutations of the label index 2z + x. Identifier 0 is the identity.
pub const TWIRL_PERMS: [[u8; 4]; 6] = [
    [0, 1, 2, 3],
    [0, 2, 1, 3],
    [1, 0, 2, 3],
    [1, 2, 0, 3],
    [2, 0, 1, 3],
    [2, 1, 0, 3],
];

impl PairRegister {
    pub fn new(string: BellString) -> PairRegister {
        PairRegister { string }
    }

    pub fn live_count(&self) -> usize {
        self.string.len()
    }

    pub fn string(&self) -> &BellString {
        &self.string
    }

    pub fn label(&self, j: usize) -> Result<BellLabel> {
        self.string.get(j)
    }

    fn check_pair(&self, j: usize) -> Result<()> {
        if j >= self.string.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                size: self.string.len(),
            });
        }
        Ok(())
    }
}

/// Draws n labels i.i.d. from the distribution.
pub fn sample_register(dist: &PairDist, n: usize, rand: &mut dyn RandSource) -> Result<PairRegister> {
    if n == 0 {
        return Err(Error::InsufficientPairs {
            available: 0,
            needed: 1,
        });
    }
    let labels = (0..n)
        .map(|_| {
            let f = rand.fraction();
            let mut cumulative = 0.0;
            for label in BellLabel::all() {
                cumulative += dist.probability(label);
                if f < cumulative {
                    return label;
                }
            }
            BellLabel::new(1, 1)
        })
        .collect();
    Ok(PairRegister::new(BellString::new(labels)))
}

/// Applies an independent uniform twirl permutation to every pair, returning
/// the new register and the chosen permutation identifiers. The identifiers
/// are public randomness and are meant to be broadcast in the transcript.
pub fn twirl_to_werner(reg: &PairRegister, rand: &mut dyn RandSource) -> (PairRegister, Vec<u8>) {
    let mut string = reg.string.clone();
    let mut perm_ids = Vec::with_capacity(string.len());
    for label in string.labels_mut() {
        let id = rand.index(TWIRL_PERMS.len()) as u8;
        perm_ids.push(id);
        *label = BellLabel::from_index(TWIRL_PERMS[id as usize][label.index() as usize]);
    }
    (PairRegister::new(string), perm_ids)
}

/// Bilateral Hadamard on pair j: label (z, x) -> (x, z).
pub fn apply_swap_zx(reg: &PairRegister, j: usize) -> Result<PairRegister> {
    reg.check_pair(j)?;
    let mut string = reg.string.clone();
    let l = string.labels()[j];
    string.labels_mut()[j] = BellLabel::new(l.x, l.z);
    Ok(PairRegister::new(string))
}

/// Bilateral conjugate phase rotation on pair j: label (z, x) -> (z xor x, x).
pub fn apply_shear(reg: &PairRegister, j: usize) -> Result<PairRegister> {
    reg.check_pair(j)?;
    let mut string = reg.string.clone();
    let l = string.labels()[j];
    string.labels_mut()[j] = BellLabel::new(l.z ^ l.x, l.x);
    Ok(PairRegister::new(string))
}

/// Bilateral controlled-NOT from pair src to pair tgt:
/// x_tgt <- x_tgt xor x_src, z_src <- z_src xor z_tgt.
pub fn apply_bxor(reg: &PairRegister, src: usize, tgt: usize) -> Result<PairRegister> {
    reg.check_pair(src)?;
    reg.check_pair(tgt)?;
    if src == tgt {
        return Err(Error::EqualIndices { index: src });
    }
    let mut string = reg.string.clone();
    let s = string.labels()[src];
    let t = string.labels()[tgt];
    string.labels_mut()[tgt] = BellLabel::new(t.z, t.x ^ s.x);
    string.labels_mut()[src] = BellLabel::new(s.z ^ t.z, s.x);
    Ok(PairRegister::new(string))
}

/// Computational-basis measurement of both halves of pair j. The first bit
/// is uniformly random, the second satisfies b1 xor b2 = x_j; the pair is
/// consumed.
pub fn measure_pair(
    reg: &PairRegister,
    j: usize,
    rand: &mut dyn RandSource,
) -> Result<(u8, u8, PairRegister)> {
    reg.check_pair(j)?;
    let mut string = reg.string.clone();
    let label = string.remove(j)?;
    let b1 = rand.bit();
    let b2 = b1 ^ label.x;
    Ok((b1, b2, PairRegister::new(string)))
}
