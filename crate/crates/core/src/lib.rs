//! Simulator and analytics for trap-bit quantum privacy delegation.
//!
//! A user stores an `m`-bit message on an untrusted server by encoding the
//! message in the rectilinear basis and sprinkling `n` secret trap bits in
//! the diagonal basis at secret positions. Two protocol variants are
//! modelled:
//!
//! * **storage**: the server later returns the quantum state; the user
//!   checks the traps in the diagonal basis and reads the message off the
//!   remaining positions.
//! * **erasure**: the server measures everything in the diagonal basis and
//!   announces the outcomes; the user checks the announced trap values.
//!
//! An eavesdropper who measures qubits in the rectilinear basis disturbs any
//! trap it touches, so the privacy certificate is rejected with a
//! probability governed by a hypergeometric law ([`bounds`]).
//!
//! The numerical core is generic over the scalar type through [`Real`]
//! (`f32` / `f64`); the aliases at the crate root fix it to `f64`, which is
//! what the experiment harness uses.

pub mod auth;
pub mod bounds;
pub mod checks;
pub mod encoding;
mod error;
pub mod experiments;
pub mod parties;
pub mod qubit;
pub mod rng;
pub mod scalar;

pub use crate::encoding::{generate_key, key_length_bits, KeyLength, Message, SecretKey};
pub use crate::error::{Error, Result};
pub use crate::experiments::{ExperimentConfig, ExperimentReport};
pub use crate::parties::{AdversaryStrategy, EavesdropRecord, ProverStrategy, Task};
pub use crate::qubit::Basis;
pub use crate::rng::RandomSource;
pub use crate::scalar::Real;

/// Single-qubit state in double precision.
pub type Qubit = qubit::Qubit<f64>;
/// Single-qubit state in single precision.
pub type Qubit32 = qubit::Qubit<f32>;
/// Transmitted encoding in double precision.
pub type EncodedState = encoding::EncodedState<f64>;
/// Privacy certificate in double precision.
pub type Certificate = parties::Certificate<f64>;
