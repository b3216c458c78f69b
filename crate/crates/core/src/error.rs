//! Shared error type for every module in the crate.

use thiserror::Error;

/// Crate-wide error enumeration.
///
/// Variants are shared across modules so that protocol runs can propagate
/// failures from any layer without wrapping.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two sequences that must agree in length do not.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A qubit, pair, or vertex index is outside the live range.
    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    /// A two-index operation was given the same index twice.
    #[error("source and target are both index {index}")]
    EqualIndices { index: usize },

    /// A 2x2 gate failed the unitarity check.
    #[error("gate is not unitary within {tol:e}")]
    NotUnitary { tol: f64 },

    /// Two states of different qubit counts were compared or combined.
    #[error("dimension mismatch: {left}-qubit vs {right}-qubit state")]
    DimensionMismatch { left: usize, right: usize },

    /// A fidelity parameter left the interval [0, 1].
    #[error("fidelity {value} outside [0, 1]")]
    FidelityOutOfRange { value: f64 },

    /// A state construction would exceed the dense-simulation cap.
    #[error("{requested} qubits exceeds the {cap}-qubit cap")]
    TooManyQubits { requested: usize, cap: usize },

    /// An angle adaptation referenced an outcome that is not recorded yet.
    #[error("vertex {vertex} depends on vertex {dependency}, which has no recorded outcome")]
    MissingDependency { vertex: usize, dependency: usize },

    /// A dependency set references a vertex not measured strictly earlier.
    #[error("vertex {vertex} depends on vertex {dependency}, which is not measured earlier")]
    CausalityViolation { vertex: usize, dependency: usize },

    /// The measurement order does not cover exactly the non-output vertices.
    #[error("measurement order covers {order_len} vertices, expected the {expected} non-output vertices")]
    CoverageError { order_len: usize, expected: usize },

    /// An all-zero parity query was submitted.
    #[error("all-zero parity query carries no information")]
    ZeroQuery,

    /// The pair fidelity is at or below the hashing threshold.
    #[error("fidelity {fidelity} gives entropy {entropy} >= 1 bit per pair")]
    BelowThreshold { fidelity: f64, entropy: f64 },

    /// A round margin is negative or not a finite number.
    #[error("margin {value} must be finite and non-negative")]
    InvalidMargin { value: f64 },

    /// Maximum-likelihood decoding found no unique best string.
    #[error("maximum-likelihood decode is ambiguous")]
    DecodeAmbiguous,

    /// Fewer pairs are available than the requested operation needs.
    #[error("{available} pairs available, {needed} needed")]
    InsufficientPairs { available: usize, needed: usize },

    /// A message was routed along a forbidden channel.
    #[error("no channel from {from} to {to}")]
    TopologyViolation { from: String, to: String },

    /// A hash query appears after a same-round result in the transcript.
    #[error("hash query for round {round} recorded after a result of the same round")]
    OrderingViolation { round: u64 },

    /// A probability table does not sum to one.
    #[error("probabilities sum to {sum}, expected 1")]
    InvalidDistribution { sum: f64 },

    /// A hex string failed to parse as a bit vector.
    #[error("invalid hex digit {digit:?}")]
    BadHexDigit { digit: char },

    /// A pattern file or pattern structure was rejected.
    #[error("invalid pattern: {message}")]
    InvalidPattern { message: String },

    /// A serialized transcript line failed to parse.
    #[error("malformed transcript record: {message}")]
    MalformedRecord { message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
