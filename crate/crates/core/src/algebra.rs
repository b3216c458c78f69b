//! Exact arithmetic for the discrete angles, Bell-pair labels, and GF(2)
//! vectors used throughout the crate.
//!
//! Angles are multiples of pi/4 and live on the cyclic group Z8; they are
//! never stored as floating point. Conversion to radians happens only at the
//! statevector boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An angle k*pi/4 with k in {0, ..., 7}.
///
/// Serializes as the bare integer k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Angle8 {
    k: u8,
}

impl Default for Angle8 {
    fn default() -> Angle8 {
        Angle8::ZERO
    }
}

impl Angle8 {
    pub const ZERO: Angle8 = Angle8 { k: 0 };
    /// The angle pi, used for conditional pi shifts.
    pub const PI: Angle8 = Angle8 { k: 4 };

    /// Builds an angle from any integer, reduced mod 8.
    pub fn new(k: i64) -> Angle8 {
        Angle8 {
            k: k.rem_euclid(8) as u8,
        }
    }

    pub fn k(self) -> u8 {
        self.k
    }

    /// The angle in radians, for use at the statevector boundary.
    pub fn to_radians(self) -> f64 {
        self.k as f64 * std::f64::consts::FRAC_PI_4
    }

    /// All eight angles in ascending k order.
    pub fn all() -> impl Iterator<Item = Angle8> {
        (0..8).map(|k| Angle8 { k })
    }
}

impl std::ops::Add for Angle8 {
    type Output = Angle8;

    fn add(self, rhs: Angle8) -> Angle8 {
        Angle8::new(self.k as i64 + rhs.k as i64)
    }
}

impl std::ops::Neg for Angle8 {
    type Output = Angle8;

    /// The additive inverse, i.e. the angle -k*pi/4.
    fn neg(self) -> Angle8 {
        Angle8::new(-(self.k as i64))
    }
}

impl TryFrom<u8> for Angle8 {
    type Error = String;

    fn try_from(k: u8) -> std::result::Result<Angle8, String> {
        if k < 8 {
            Ok(Angle8 { k })
        } else {
            Err(format!("angle index {k} out of range, expected 0..=7"))
        }
    }
}

impl From<Angle8> for u8 {
    fn from(a: Angle8) -> u8 {
        a.k
    }
}

/// The label (z, x) of the Bell state obtained by applying X^x Z^z to the
/// second half of the maximally correlated pair.
///
/// Serializes as the two-bit integer 2z + x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct BellLabel {
    pub z: u8,
    pub x: u8,
}

impl BellLabel {
    pub fn new(z: u8, x: u8) -> BellLabel {
        debug_assert!(z <= 1 && x <= 1);
        BellLabel { z: z & 1, x: x & 1 }
    }

    /// The two-bit index 2z + x.
    pub fn index(self) -> u8 {
        2 * self.z + self.x
    }

    pub fn from_index(i: u8) -> BellLabel {
        BellLabel {
            z: (i >> 1) & 1,
            x: i & 1,
        }
    }

    /// All four labels in index order.
    pub fn all() -> impl Iterator<Item = BellLabel> {
        (0..4).map(BellLabel::from_index)
    }
}

impl TryFrom<u8> for BellLabel {
    type Error = String;

    fn try_from(i: u8) -> std::result::Result<BellLabel, String> {
        if i < 4 {
            Ok(BellLabel::from_index(i))
        } else {
            Err(format!("label index {i} out of range, expected 0..=3"))
        }
    }
}

impl From<BellLabel> for u8 {
    fn from(l: BellLabel) -> u8 {
        l.index()
    }
}

/// An ordered sequence of Bell labels, one per live pair.
///
/// The flattened bit order is z before x within a pair, pair index ascending:
/// bit 2j is z of pair j and bit 2j+1 is x of pair j.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BellString {
    labels: Vec<BellLabel>,
}

impl BellString {
    pub fn new(labels: Vec<BellLabel>) -> BellString {
        BellString { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, j: usize) -> Result<BellLabel> {
        self.labels.get(j).copied().ok_or(Error::IndexOutOfRange {
            index: j,
            size: self.labels.len(),
        })
    }

    pub fn labels(&self) -> &[BellLabel] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [BellLabel] {
        &mut self.labels
    }

    /// Removes and returns the label at pair index j, shifting later pairs
    /// down by one.
    pub fn remove(&mut self, j: usize) -> Result<BellLabel> {
        if j >= self.labels.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                size: self.labels.len(),
            });
        }
        Ok(self.labels.remove(j))
    }

    /// Packs the string into a word, bit 2j = z_j, bit 2j+1 = x_j.
    pub fn as_word(&self) -> u64 {
        assert!(self.labels.len() <= 32, "string too long for a 64-bit word");
        let mut w = 0u64;
        for (j, l) in self.labels.iter().enumerate() {
            w |= (l.z as u64) << (2 * j);
            w |= (l.x as u64) << (2 * j + 1);
        }
        w
    }

    /// Inverse of [`BellString::as_word`] for a string of n pairs.
    pub fn from_word(w: u64, n: usize) -> BellString {
        let labels = (0..n)
            .map(|j| BellLabel::new(((w >> (2 * j)) & 1) as u8, ((w >> (2 * j + 1)) & 1) as u8))
            .collect();
        BellString { labels }
    }
}

/// A GF(2) vector over the flattened label bits of the live pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf2Vec {
    bits: Vec<u8>,
}

impl Gf2Vec {
    pub fn zero(len: usize) -> Gf2Vec {
        Gf2Vec { bits: vec![0; len] }
    }

    pub fn from_bits(bits: Vec<u8>) -> Gf2Vec {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Gf2Vec {
            bits: bits.iter().map(|b| b & 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, b: u8) {
        self.bits[i] = b & 1;
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Packs the vector into a word, bit i of the word = bit i of the vector.
    pub fn as_mask(&self) -> u64 {
        assert!(self.bits.len() <= 64, "vector too long for a 64-bit mask");
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &b)| m | ((b as u64) << i))
    }

    pub fn from_mask(mask: u64, len: usize) -> Gf2Vec {
        Gf2Vec {
            bits: (0..len).map(|i| ((mask >> i) & 1) as u8).collect(),
        }
    }

    /// Hex encoding: four bits per digit, lowest bit first within a digit,
    /// digits in ascending bit-group order. The final digit is zero-padded.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.bits.len().div_ceil(4));
        for chunk in self.bits.chunks(4) {
            let mut nibble = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                nibble |= b << i;
            }
            s.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        s
    }

    /// Inverse of [`Gf2Vec::to_hex`] for a vector of known bit length.
    pub fn from_hex(s: &str, len: usize) -> Result<Gf2Vec> {
        let expected_digits = len.div_ceil(4);
        if s.chars().count() != expected_digits {
            return Err(Error::LengthMismatch {
                left: s.chars().count(),
                right: expected_digits,
            });
        }
        let mut bits = Vec::with_capacity(len);
        for ch in s.chars() {
            let nibble = ch
                .to_digit(16)
                .ok_or(Error::BadHexDigit { digit: ch })? as u8;
            for i in 0..4 {
                bits.push((nibble >> i) & 1);
            }
        }
        for &b in &bits[len..] {
            if b != 0 {
                return Err(Error::LengthMismatch {
                    left: bits.len(),
                    right: len,
                });
            }
        }
        bits.truncate(len);
        Ok(Gf2Vec { bits })
    }
}

/// Angle sum on Z8.
pub fn add(a: Angle8, b: Angle8) -> Angle8 {
    a + b
}

/// The compensated measurement angle for a pair with label (z, x):
/// theta' = (-1)^x * theta + z*pi.
pub fn reflect(theta: Angle8, label: BellLabel) -> Angle8 {
    let signed = if label.x == 1 {
        -(theta.k() as i64)
    } else {
        theta.k() as i64
    };
    Angle8::new(signed + 4 * label.z as i64)
}

/// The blinded measurement angle delta = theta + b*pi + phi' + r*pi.
pub fn compose_delta(theta: Angle8, b: u8, phi_adapted: Angle8, r: u8) -> Angle8 {
    Angle8::new(theta.k() as i64 + 4 * (b & 1) as i64 + phi_adapted.k() as i64 + 4 * (r & 1) as i64)
}

/// GF(2) inner product of a query with the flattened label bits.
pub fn dot(s: &Gf2Vec, v: &BellString) -> Result<u8> {
    if s.len() != 2 * v.len() {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: 2 * v.len(),
        });
    }
    let mut acc = 0u8;
    for (j, l) in v.labels().iter().enumerate() {
        acc ^= s.get(2 * j) & l.z;
        acc ^= s.get(2 * j + 1) & l.x;
    }
    Ok(acc)
}
