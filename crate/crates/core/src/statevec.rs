//! Dense complex-amplitude simulator for small qubit registers.
//!
//! This is the exact physical oracle behind every bit-level rule in the
//! crate: Bell-label updates, remote state preparation, and full protocol
//! runs are all checked against it. Qubit 0 owns the most significant bit of
//! an amplitude index, so basis kets read left to right.

use num_complex::Complex64 as C64;

use crate::algebra::{Angle8, BellLabel};
use crate::error::{Error, Result};
use crate::rng::RandSource;

/// Hard cap on the register size; 2^12 amplitudes keep every exhaustive test
/// cheap.
pub const QUBIT_CAP: usize = 12;

const NORM_TOL: f64 = 1e-9;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A pure state on `qubit_count` qubits, stored as 2^qubit_count amplitudes.
///
/// A zero-qubit state is a single complex scalar; measurements shrink the
/// register by removing the measured qubit.
#[derive(Clone, Debug)]
pub struct StateVector {
    qubit_count: usize,
    amps: Vec<C64>,
}

/// Result of a projective measurement: the observed bit, its Born
/// probability, and the renormalized post-measurement state with the
/// measured qubit removed.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub bit: u8,
    pub probability: f64,
    pub post_state: StateVector,
}

/// The single-qubit state (|0> + e^{i theta}|1>)/sqrt(2).
pub fn prepare_plus_theta(theta: Angle8) -> StateVector {
    let phase = C64::from_polar(1.0, theta.to_radians());
    StateVector {
        qubit_count: 1,
        amps: vec![
            C64::new(FRAC_1_SQRT_2, 0.0),
            phase * FRAC_1_SQRT_2,
        ],
    }
}

/// The two-qubit Bell state with X^x Z^z applied to the second qubit of the
/// maximally correlated pair.
pub fn prepare_bell(label: BellLabel) -> StateVector {
    let mut state = StateVector {
        qubit_count: 2,
        amps: vec![
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(FRAC_1_SQRT_2, 0.0),
        ],
    };
    if label.z == 1 {
        state = state.apply_local(1, &gate_z()).unwrap();
    }
    if label.x == 1 {
        state = state.apply_local(1, &gate_x()).unwrap();
    }
    state
}

/// Overlap magnitude squared |<a|b>|^2; 1 means equal up to global phase.
pub fn fidelity_mod_phase(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.qubit_count != b.qubit_count {
        return Err(Error::DimensionMismatch {
            left: a.qubit_count,
            right: b.qubit_count,
        });
    }
    let overlap: C64 = a
        .amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(overlap.norm_sqr())
}

impl StateVector {
    /// The computational basis state |index> on `qubit_count` qubits.
    pub fn basis(qubit_count: usize, index: usize) -> Result<StateVector> {
        if qubit_count > QUBIT_CAP {
            return Err(Error::TooManyQubits {
                requested: qubit_count,
                cap: QUBIT_CAP,
            });
        }
        let dim = 1usize << qubit_count;
        if index >= dim {
            return Err(Error::IndexOutOfRange {
                index,
                size: dim,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { qubit_count, amps })
    }

    /// The empty register, a bare scalar 1.
    pub fn scalar() -> StateVector {
        StateVector {
            qubit_count: 0,
            amps: vec![C64::new(1.0, 0.0)],
        }
    }

    /// Builds a state from raw amplitudes, normalizing them. The length must
    /// be 2^qubit_count and the vector must not be numerically zero.
    pub fn from_amplitudes(qubit_count: usize, amps: Vec<C64>) -> Result<StateVector> {
        if qubit_count > QUBIT_CAP {
            return Err(Error::TooManyQubits {
                requested: qubit_count,
                cap: QUBIT_CAP,
            });
        }
        if amps.len() != 1 << qubit_count {
            return Err(Error::DimensionMismatch {
                left: amps.len(),
                right: 1 << qubit_count,
            });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 1e-12, "amplitude vector is numerically zero");
        let scale = norm.recip();
        Ok(StateVector {
            qubit_count,
            amps: amps.into_iter().map(|a| a * scale).collect(),
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Tensor product, self's qubits first.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let qubit_count = self.qubit_count + other.qubit_count;
        if qubit_count > QUBIT_CAP {
            return Err(Error::TooManyQubits {
                requested: qubit_count,
                cap: QUBIT_CAP,
            });
        }
        let mut amps = Vec::with_capacity(1 << qubit_count);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { qubit_count, amps })
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.qubit_count {
            return Err(Error::IndexOutOfRange {
                index: q,
                size: self.qubit_count,
            });
        }
        Ok(())
    }

    /// Bit position of qubit q inside an amplitude index.
    fn shift(&self, q: usize) -> usize {
        self.qubit_count - 1 - q
    }

    /// Controlled-Z between two distinct qubits.
    pub fn apply_cz(&self, i: usize, j: usize) -> Result<StateVector> {
        self.check_qubit(i)?;
        self.check_qubit(j)?;
        if i == j {
            return Err(Error::EqualIndices { index: i });
        }
        let mask = (1usize << self.shift(i)) | (1usize << self.shift(j));
        let mut amps = self.amps.clone();
        for (idx, amp) in amps.iter_mut().enumerate() {
            if idx & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(StateVector {
            qubit_count: self.qubit_count,
            amps,
        })
    }

    /// Applies a 2x2 unitary to qubit q. Rows index the output bit, columns
    /// the input bit.
    pub fn apply_local(&self, q: usize, gate: &[[C64; 2]; 2]) -> Result<StateVector> {
        self.check_qubit(q)?;
        check_unitary(gate)?;
        let shift = self.shift(q);
        let bit = 1usize << shift;
        let mut amps = self.amps.clone();
        for idx in 0..self.amps.len() {
            if idx & bit != 0 {
                continue;
            }
            let a0 = self.amps[idx];
            let a1 = self.amps[idx | bit];
            amps[idx] = gate[0][0] * a0 + gate[0][1] * a1;
            amps[idx | bit] = gate[1][0] * a0 + gate[1][1] * a1;
        }
        Ok(StateVector {
            qubit_count: self.qubit_count,
            amps,
        })
    }

    /// Measures qubit q in the basis {|0> + e^{i delta}|1>, |0> - e^{i delta}|1>}
    /// (both vectors normalized). Outcome b projects onto the b-th vector;
    /// the measured qubit is removed from the register.
    pub fn measure_xy(&self, q: usize, delta: Angle8, rand: &mut dyn RandSource) -> Result<Outcome> {
        self.check_qubit(q)?;
        let phase_conj = C64::from_polar(1.0, -delta.to_radians());
        self.project_out(q, rand, |a0, a1, b| {
            let sign = if b == 0 { 1.0 } else { -1.0 };
            (a0 + sign * phase_conj * a1) * FRAC_1_SQRT_2
        })
    }

    /// Computational-basis measurement of qubit q; the qubit is removed.
    pub fn measure_z(&self, q: usize, rand: &mut dyn RandSource) -> Result<Outcome> {
        self.check_qubit(q)?;
        self.project_out(q, rand, |a0, a1, b| if b == 0 { a0 } else { a1 })
    }

    /// Shared projection kernel: `component` maps the (bit=0, bit=1)
    /// amplitude pair to the unnormalized post-measurement amplitude for
    /// outcome b.
    fn project_out(
        &self,
        q: usize,
        rand: &mut dyn RandSource,
        component: impl Fn(C64, C64, u8) -> C64,
    ) -> Result<Outcome> {
        let shift = self.shift(q);
        let half = self.amps.len() / 2;
        let expand = |j: usize, b: usize| -> usize {
            let low = j & ((1usize << shift) - 1);
            let high = (j >> shift) << (shift + 1);
            high | (b << shift) | low
        };
        let branch = |b: u8| -> Vec<C64> {
            (0..half)
                .map(|j| component(self.amps[expand(j, 0)], self.amps[expand(j, 1)], b))
                .collect()
        };
        let zero = branch(0);
        let p_zero: f64 = zero.iter().map(|a| a.norm_sqr()).sum();
        let bit = rand.branch(p_zero);
        let (amps, probability) = if bit == 0 {
            (zero, p_zero)
        } else {
            let one = branch(1);
            let p_one: f64 = one.iter().map(|a| a.norm_sqr()).sum();
            (one, p_one)
        };
        assert!(
            probability > 1e-15,
            "measurement selected a zero-probability branch"
        );
        let scale = probability.sqrt().recip();
        let amps = amps.into_iter().map(|a| a * scale).collect();
        let post_state = StateVector {
            qubit_count: self.qubit_count - 1,
            amps,
        };
        debug_assert!((post_state.norm_sqr() - 1.0).abs() < NORM_TOL);
        Ok(Outcome {
            bit,
            probability,
            post_state,
        })
    }
}

fn check_unitary(gate: &[[C64; 2]; 2]) -> Result<()> {
    let col0 = gate[0][0].norm_sqr() + gate[1][0].norm_sqr();
    let col1 = gate[0][1].norm_sqr() + gate[1][1].norm_sqr();
    let cross = gate[0][0].conj() * gate[0][1] + gate[1][0].conj() * gate[1][1];
    if (col0 - 1.0).abs() > NORM_TOL || (col1 - 1.0).abs() > NORM_TOL || cross.norm() > NORM_TOL {
        return Err(Error::NotUnitary { tol: NORM_TOL });
    }
    Ok(())
}

pub fn gate_identity() -> [[C64; 2]; 2] {
    [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    ]
}

pub fn gate_x() -> [[C64; 2]; 2] {
    [
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    ]
}

pub fn gate_z() -> [[C64; 2]; 2] {
    [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
    ]
}

pub fn gate_h() -> [[C64; 2]; 2] {
    [
        [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)],
        [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)],
    ]
}

/// The phase gate diag(1, i).
pub fn gate_s() -> [[C64; 2]; 2] {
    [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(0.0, 1.0)],
    ]
}

/// The conjugate phase gate diag(1, -i).
pub fn gate_s_dagger() -> [[C64; 2]; 2] {
    [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
    ]
}

/// The phase gate diag(1, e^{i theta}).
pub fn gate_phase(theta: Angle8) -> [[C64; 2]; 2] {
    [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::from_polar(1.0, theta.to_radians())],
    ]
}
