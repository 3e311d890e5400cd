//! Simulation of the probabilistic encoding of two qubits into one qutrit.
//!
//! The crate covers the abstract protocol (encoding, perfect single-qubit
//! decoding and the optimal joint decoder), its generalization to ladder
//! codes over many qubits or qudits, a Fock-space model of the linear-optical
//! realization with post-selection, and a numerical search over decoding
//! operations.
//!
//! ```
//! use qutrit_codec::codec::{decode_single, encode, QubitIndex};
//! use qutrit_codec::statekit::BlochAngles;
//!
//! let q1 = BlochAngles::from_degrees(90.0, 30.0).unwrap().state();
//! let q2 = BlochAngles::from_degrees(60.0, 0.0).unwrap().state();
//! let encoded = encode(&q1, &q2).unwrap();
//! let decoded = decode_single(&encoded.qutrit, QubitIndex::First).unwrap();
//! assert!((decoded.qubit.unwrap().overlap(&q1).unwrap() - 1.0).abs() < 1e-12);
//! ```

// `!(x >= lo)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod codec;
pub mod config;
pub mod error;
pub mod ladder;
pub mod optics;
pub mod optimizer;
pub mod quadrature;
pub mod statekit;
pub mod stats;

pub use error::{Error, Result};
