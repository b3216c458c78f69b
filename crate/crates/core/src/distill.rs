//! One-way hashing distillation mediated by a classical client.
//!
//! Each round the client draws a uniform nonzero parity query over the live
//! pair labels, compiles it into bilateral operations both servers apply
//! identically, and learns one parity bit of the hidden label string from
//! the servers' measurement reports. After enough rounds the string is
//! pinned down by maximum-likelihood decoding and the surviving pairs'
//! labels are known exactly.
//!
//! The client never touches ground truth: her knowledge flows through
//! [`LinearModel`], which tracks how every collected parity and every
//! surviving label reads as a GF(2) functional of the original string.

use serde::Serialize;

use crate::algebra::{BellLabel, BellString, Gf2Vec};
use crate::bellsim::{
    apply_bxor, apply_shear, apply_swap_zx, measure_pair, sample_register, werner_dist, PairDist,
    PairRegister, WernerParams,
};
use crate::error::{Error, Result};
use crate::rng::RandSource;

/// Most original pairs the GF(2) bookkeeping supports: label rows are
/// stored as single 64-bit words of 2n bits.
pub const MODEL_PAIR_CAP: usize = 32;

/// Hard ceiling on exact maximum-likelihood decoding, which enumerates all
/// 4^n label strings.
pub const DECODE_CAP: usize = 10;

/// Von Neumann entropy in bits per pair of the Bell-diagonal state with
/// the given fidelity: -F lg F - (1-F) lg((1-F)/3), with 0 lg 0 = 0.
pub fn entropy(w: WernerParams) -> f64 {
    let f = w.fidelity();
    let mut s = 0.0;
    if f > 0.0 {
        s -= f * f.log2();
    }
    if f < 1.0 {
        s -= (1.0 - f) * ((1.0 - f) / 3.0).log2();
    }
    s
}

/// The fidelity at which the entropy reaches exactly one bit per pair,
/// below which hashing yields nothing. Found by bisection.
pub fn hashing_threshold() -> f64 {
    let mut lo = 0.25;
    let mut hi = 1.0;
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        let s = entropy(WernerParams::new(mid).expect("bisection stays inside [0, 1]"));
        // Entropy decreases strictly in fidelity on this interval.
        if s > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Asymptotic number of pairs surviving from n: n (1 - S).
pub fn expected_yield(w: WernerParams, n: usize) -> Result<f64> {
    let s = entropy(w);
    if s >= 1.0 {
        return Err(Error::BelowThreshold {
            fidelity: w.fidelity(),
            entropy: s,
        });
    }
    Ok(n as f64 * (1.0 - s))
}

/// Parameters of one hashing run.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HashingConfig {
    /// Initial pair count n.
    pub pairs: usize,
    /// Extra rounds margin: R = ceil(n (S + margin)).
    pub margin: f64,
    /// Largest n accepted for exact decoding.
    pub decode_cap: usize,
}

impl HashingConfig {
    pub const DEFAULT_MARGIN: f64 = 0.125;

    pub fn new(pairs: usize, margin: f64) -> Result<HashingConfig> {
        if pairs < 2 {
            return Err(Error::InsufficientPairs {
                available: pairs,
                needed: 2,
            });
        }
        if !margin.is_finite() || margin < 0.0 {
            return Err(Error::InvalidMargin { value: margin });
        }
        Ok(HashingConfig {
            pairs,
            margin,
            decode_cap: DECODE_CAP,
        })
    }

    /// Rounds needed at the given entropy: ceil(pairs * (entropy + margin)).
    pub fn rounds(&self, entropy_bits: f64) -> usize {
        (self.pairs as f64 * (entropy_bits + self.margin)).ceil() as usize
    }
}

/// What a single selected pair does before the joint parity is collected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairPrefix {
    /// The x bit is wanted as-is.
    None,
    /// The z bit is rotated into the x slot.
    SwapZx,
    /// The combination z xor x is rotated into the x slot.
    ShearThenSwapZx,
}

/// A compiled parity query: which prefix each live pair applies, which
/// pairs feed the target, and which pair is measured.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityProgram {
    pub query: Gf2Vec,
    /// One prefix per live pair; unselected pairs get [`PairPrefix::None`].
    pub prefixes: Vec<PairPrefix>,
    /// Selected pairs other than the target, ascending.
    pub sources: Vec<usize>,
    /// The measured pair: the highest-index selected pair.
    pub target: usize,
}

/// Compiles a nonzero query over 2*live bits (bit 2j selects z_j, bit
/// 2j+1 selects x_j) into the program whose measured parity equals
/// dot(query, v) for the pre-round string v.
pub fn compile_parity_program(query: &Gf2Vec, live: usize) -> Result<ParityProgram> {
    if query.len() != 2 * live {
        return Err(Error::LengthMismatch {
            left: query.len(),
            right: 2 * live,
        });
    }
    if query.is_zero() {
        return Err(Error::ZeroQuery);
    }
    let mut prefixes = vec![PairPrefix::None; live];
    let mut selected = Vec::new();
    for (j, prefix) in prefixes.iter_mut().enumerate() {
        let z_sel = query.get(2 * j);
        let x_sel = query.get(2 * j + 1);
        if z_sel == 0 && x_sel == 0 {
            continue;
        }
        *prefix = match (z_sel, x_sel) {
            (0, 1) => PairPrefix::None,
            (1, 0) => PairPrefix::SwapZx,
            _ => PairPrefix::ShearThenSwapZx,
        };
        selected.push(j);
    }
    let target = *selected.last().expect("nonzero query selects a pair");
    selected.pop();
    Ok(ParityProgram {
        query: query.clone(),
        prefixes,
        sources: selected,
        target,
    })
}

impl ParityProgram {
    /// Runs the program on a register: prefixes, feeding, measurement.
    /// Returns both servers' measurement bits and the shrunken register.
    pub fn execute(
        &self,
        reg: &PairRegister,
        rand: &mut dyn RandSource,
    ) -> Result<(u8, u8, PairRegister)> {
        let mut reg = reg.clone();
        for (j, prefix) in self.prefixes.iter().enumerate() {
            reg = match prefix {
                PairPrefix::None => reg,
                PairPrefix::SwapZx => apply_swap_zx(&reg, j)?,
                PairPrefix::ShearThenSwapZx => apply_swap_zx(&apply_shear(&reg, j)?, j)?,
            };
        }
        for &src in &self.sources {
            reg = apply_bxor(&reg, src, self.target)?;
        }
        measure_pair(&reg, self.target, rand)
    }
}

/// GF(2) bookkeeping of how the live labels and collected parities read as
/// functionals of the original 2n-bit string.
///
/// Row j of the z/x tables is a bit mask over the original string (bit 2j
/// is z_j, bit 2j+1 is x_j); the current bit equals the masked parity of
/// the original string. Rows start as the identity and are updated in
/// lockstep with every bilateral operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearModel {
    original_pairs: usize,
    z_rows: Vec<u64>,
    x_rows: Vec<u64>,
    parity_rows: Vec<u64>,
}

fn mask_parity(mask: u64, word: u64) -> u8 {
    ((mask & word).count_ones() & 1) as u8
}

impl LinearModel {
    pub fn new(pairs: usize) -> Result<LinearModel> {
        if pairs > MODEL_PAIR_CAP {
            return Err(Error::TooManyQubits {
                requested: pairs,
                cap: MODEL_PAIR_CAP,
            });
        }
        Ok(LinearModel {
            original_pairs: pairs,
            z_rows: (0..pairs).map(|j| 1u64 << (2 * j)).collect(),
            x_rows: (0..pairs).map(|j| 1u64 << (2 * j + 1)).collect(),
            parity_rows: Vec::new(),
        })
    }

    pub fn live_count(&self) -> usize {
        self.z_rows.len()
    }

    pub fn original_pairs(&self) -> usize {
        self.original_pairs
    }

    /// One mask per completed round, in round order.
    pub fn parity_rows(&self) -> &[u64] {
        &self.parity_rows
    }

    /// The (z, x) row masks of live pair j.
    pub fn label_rows(&self, j: usize) -> Result<(u64, u64)> {
        self.check(j)?;
        Ok((self.z_rows[j], self.x_rows[j]))
    }

    fn check(&self, j: usize) -> Result<()> {
        if j >= self.z_rows.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                size: self.z_rows.len(),
            });
        }
        Ok(())
    }

    pub fn swap_zx(&mut self, j: usize) -> Result<()> {
        self.check(j)?;
        std::mem::swap(&mut self.z_rows[j], &mut self.x_rows[j]);
        Ok(())
    }

    pub fn shear(&mut self, j: usize) -> Result<()> {
        self.check(j)?;
        self.z_rows[j] ^= self.x_rows[j];
        Ok(())
    }

    pub fn bxor(&mut self, src: usize, tgt: usize) -> Result<()> {
        self.check(src)?;
        self.check(tgt)?;
        if src == tgt {
            return Err(Error::EqualIndices { index: src });
        }
        self.x_rows[tgt] ^= self.x_rows[src];
        self.z_rows[src] ^= self.z_rows[tgt];
        Ok(())
    }

    /// Consumes pair j, recording its current x row as the parity
    /// functional collected this round. Returns the recorded mask.
    pub fn measure(&mut self, j: usize) -> Result<u64> {
        self.check(j)?;
        let row = self.x_rows.remove(j);
        self.z_rows.remove(j);
        self.parity_rows.push(row);
        Ok(row)
    }

    /// A query over the current live bits expressed as a mask over the
    /// original string.
    pub fn query_row(&self, query: &Gf2Vec) -> Result<u64> {
        if query.len() != 2 * self.live_count() {
            return Err(Error::LengthMismatch {
                left: query.len(),
                right: 2 * self.live_count(),
            });
        }
        let mut row = 0u64;
        for j in 0..self.live_count() {
            if query.get(2 * j) == 1 {
                row ^= self.z_rows[j];
            }
            if query.get(2 * j + 1) == 1 {
                row ^= self.x_rows[j];
            }
        }
        Ok(row)
    }

    /// Applies a compiled program to the model, mirroring its effect on a
    /// register, and returns the recorded parity mask.
    pub fn apply_program(&mut self, program: &ParityProgram) -> Result<u64> {
        for (j, prefix) in program.prefixes.iter().enumerate() {
            match prefix {
                PairPrefix::None => {}
                PairPrefix::SwapZx => self.swap_zx(j)?,
                PairPrefix::ShearThenSwapZx => {
                    self.shear(j)?;
                    self.swap_zx(j)?;
                }
            }
        }
        for &src in &program.sources {
            self.bxor(src, program.target)?;
        }
        self.measure(program.target)
    }

    /// The live labels implied by a hypothesis for the original string.
    pub fn infer_labels(&self, original_word: u64) -> BellString {
        let labels = (0..self.live_count())
            .map(|j| {
                BellLabel::new(
                    mask_parity(self.z_rows[j], original_word),
                    mask_parity(self.x_rows[j], original_word),
                )
            })
            .collect();
        BellString::new(labels)
    }

    /// The parity bits implied by a hypothesis for the original string.
    pub fn implied_parities(&self, original_word: u64) -> Vec<u8> {
        self.parity_rows
            .iter()
            .map(|&row| mask_parity(row, original_word))
            .collect()
    }
}

/// One round: compile the query, run it on the register, mirror it in the
/// model. Returns the client's learned parity bit, the shrunken register,
/// and the extended model.
pub fn hashing_round(
    reg: &PairRegister,
    query: &Gf2Vec,
    model: &LinearModel,
    rand: &mut dyn RandSource,
) -> Result<(u8, PairRegister, LinearModel)> {
    let program = compile_parity_program(query, reg.live_count())?;
    let (b1, b2, next_reg) = program.execute(reg, rand)?;
    let mut next_model = model.clone();
    next_model.apply_program(&program)?;
    Ok((b1 ^ b2, next_reg, next_model))
}

/// Result of exact maximum-likelihood decoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeOutcome {
    /// A single most likely original string.
    Unique(BellString),
    /// No consistent string, or several tied at the maximum.
    Ambiguous,
}

/// Exhaustive maximum-likelihood decode: over all 4^n original strings
/// consistent with every recorded parity, the one with the highest prior
/// probability under the i.i.d. pair distribution. Ties are ambiguity,
/// not an error.
pub fn decode_ml(
    parities: &[u8],
    model: &LinearModel,
    prior: &PairDist,
    pairs: usize,
) -> Result<DecodeOutcome> {
    if pairs > DECODE_CAP {
        return Err(Error::TooManyQubits {
            requested: pairs,
            cap: DECODE_CAP,
        });
    }
    if parities.len() != model.parity_rows().len() {
        return Err(Error::LengthMismatch {
            left: parities.len(),
            right: model.parity_rows().len(),
        });
    }
    let log_prior: [f64; 4] = {
        let p = prior.probabilities();
        [p[0].ln(), p[1].ln(), p[2].ln(), p[3].ln()]
    };
    let mut best_word = 0u64;
    let mut best_lp = f64::NEG_INFINITY;
    let mut tied = 0usize;
    'words: for word in 0..(1u64 << (2 * pairs)) {
        for (row, &p) in model.parity_rows().iter().zip(parities) {
            if mask_parity(*row, word) != p {
                continue 'words;
            }
        }
        let mut lp = 0.0;
        for j in 0..pairs {
            let idx = ((word >> (2 * j)) & 1) << 1 | ((word >> (2 * j + 1)) & 1);
            lp += log_prior[idx as usize];
        }
        if lp > best_lp + 1e-9 {
            best_lp = lp;
            best_word = word;
            tied = 1;
        } else if lp >= best_lp - 1e-9 {
            tied += 1;
        }
    }
    if tied == 1 && best_lp > f64::NEG_INFINITY {
        Ok(DecodeOutcome::Unique(BellString::from_word(best_word, pairs)))
    } else {
        Ok(DecodeOutcome::Ambiguous)
    }
}

/// Summary numbers of one hashing run.
#[derive(Clone, Debug, Serialize)]
pub struct DistillStats {
    pub fidelity: f64,
    pub entropy_bits: f64,
    pub pairs: usize,
    pub margin: f64,
    pub rounds: usize,
    pub yield_pairs: usize,
    pub decode_success: bool,
}

/// A finished hashing run: stats, the labels the client inferred (absent
/// when decoding was ambiguous), and the surviving register.
#[derive(Clone, Debug)]
pub struct DistillRun {
    pub stats: DistillStats,
    /// The original string the client's decoder settled on; None when
    /// ambiguous.
    pub decoded: Option<BellString>,
    /// The client's view of the surviving labels; None when ambiguous.
    pub inferred: Option<BellString>,
    /// Ground-truth original string, for tests and world-side checks only.
    pub original: BellString,
    /// Ground-truth surviving register, for tests and world-side checks
    /// only.
    pub register: PairRegister,
    /// The model after all rounds, mapping the original string to the
    /// surviving labels.
    pub model: LinearModel,
    /// The collected parity bits, in round order.
    pub parities: Vec<u8>,
}

/// Draws a uniform nonzero query over 2*live bits, resampling zero draws.
pub fn draw_nonzero_query(live: usize, rand: &mut dyn RandSource) -> Gf2Vec {
    loop {
        let bits: Vec<u8> = (0..2 * live).map(|_| rand.bit()).collect();
        let q = Gf2Vec::from_bits(bits);
        if !q.is_zero() {
            return q;
        }
    }
}

/// The full protocol: sample a register at the given fidelity, run
/// R = ceil(n (S + margin)) rounds with fresh uniform nonzero queries,
/// decode, and report the surviving labels.
pub fn run_hashing(
    cfg: &HashingConfig,
    w: WernerParams,
    rand: &mut dyn RandSource,
) -> Result<DistillRun> {
    let s = entropy(w);
    if s >= 1.0 {
        return Err(Error::BelowThreshold {
            fidelity: w.fidelity(),
            entropy: s,
        });
    }
    if cfg.pairs < 2 {
        return Err(Error::InsufficientPairs {
            available: cfg.pairs,
            needed: 2,
        });
    }
    if !cfg.margin.is_finite() || cfg.margin < 0.0 {
        return Err(Error::InvalidMargin { value: cfg.margin });
    }
    if cfg.pairs > cfg.decode_cap.min(MODEL_PAIR_CAP) {
        return Err(Error::TooManyQubits {
            requested: cfg.pairs,
            cap: cfg.decode_cap.min(MODEL_PAIR_CAP),
        });
    }
    let rounds = cfg.rounds(s);
    if rounds + 1 > cfg.pairs {
        return Err(Error::InsufficientPairs {
            available: cfg.pairs,
            needed: rounds + 1,
        });
    }

    let dist = werner_dist(w);
    let mut reg = sample_register(&dist, cfg.pairs, rand)?;
    let original = reg.string().clone();
    let mut model = LinearModel::new(cfg.pairs)?;
    let mut parities = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let query = draw_nonzero_query(reg.live_count(), rand);
        let (parity, next_reg, next_model) = hashing_round(&reg, &query, &model, rand)?;
        parities.push(parity);
        reg = next_reg;
        model = next_model;
    }

    let decode = decode_ml(&parities, &model, &dist, cfg.pairs)?;
    let decoded = match decode {
        DecodeOutcome::Unique(v) => Some(v),
        DecodeOutcome::Ambiguous => None,
    };
    let inferred = decoded
        .as_ref()
        .map(|v| model.infer_labels(v.as_word()));
    let stats = DistillStats {
        fidelity: w.fidelity(),
        entropy_bits: s,
        pairs: cfg.pairs,
        margin: cfg.margin,
        rounds,
        yield_pairs: cfg.pairs - rounds,
        decode_success: inferred.is_some(),
    };
    Ok(DistillRun {
        stats,
        decoded,
        inferred,
        original,
        register: reg,
        model,
        parities,
    })
}
