//! Deterministic simulator and library for double-server blind quantum
//! computation with one-way hashing entanglement distillation.
//!
//! A client (Alice) with no quantum hardware delegates a measurement-based
//! computation to two entangled servers that cannot talk to each other. The
//! crate models the whole stack:
//!
//! - [`algebra`]: exact mod-8 angle arithmetic, Bell labels, GF(2) vectors.
//! - [`statevec`]: a dense small-register simulator, the physical oracle.
//! - [`bellsim`]: scalable bit-level simulation of Bell-diagonal pair
//!   strings under bilateral operations.
//! - [`mbqc`]: graph states, measurement patterns, and a non-blind
//!   reference runner.
//! - [`distill`]: Alice-mediated hashing distillation with exact
//!   maximum-likelihood decoding.
//! - [`protocol`]: the party state machines, message router, transcripts,
//!   and the full single-server, double-server, and distilled runs.
//! - [`security`]: exact enumeration checks of the no-signaling and
//!   blindness claims.
//!
//! All randomness is injected through [`rng::RandSource`]; runs with the
//! same seed are bit-for-bit reproducible.

pub mod algebra;
pub mod bellsim;
pub mod distill;
pub mod error;
pub mod mbqc;
pub mod protocol;
pub mod rng;
pub mod security;
pub mod statevec;

pub use algebra::{Angle8, BellLabel, BellString, Gf2Vec};
pub use error::{Error, Result};
pub use mbqc::{GraphSpec, Pattern};
pub use protocol::{PartyRole, Payload, Record, RunOutput, Transcript};
pub use rng::{RandSource, ScriptedRand, SeededRand};
pub use statevec::{Outcome, StateVector};
