//! Simulator of a quantum-computer-media (QCM) storage, in which every storage
//! cell is a large ensemble of identically prepared qubits, together with a
//! nondigital real-number arithmetic built on top of it.
//!
//! Numbers live in the diagonal of single-qubit density matrices:
//!
//! - a [`Real1`](arith::Real1) is the probability `S₁₁ ∈ [0, 1]` of one ensemble,
//! - a [`Real2`](arith::Real2) is the difference of two such probabilities,
//! - a [`Real4`](arith::Real4) is the ratio of two `Real2` numbers and can hold any
//!   real value.
//!
//! Arithmetic is carried out by fixed gate circuits whose structure does not
//! depend on the operand values. Reading a number back out is a statistical
//! estimation problem, handled by [`estimate`].
//!
//! ```
//! use qcm_core::{arith, qcm::EnsembleStore};
//!
//! let mut store = EnsembleStore::<f64>::new();
//! let x = arith::encode_real4(&mut store, 2.0).unwrap();
//! let y = arith::encode_real4(&mut store, 3.0).unwrap();
//! let sum = arith::add_r4(&mut store, x, y).unwrap();
//! assert!((arith::r4(&store, sum).unwrap() - 5.0).abs() < 1e-9);
//! ```

pub mod arith;
pub mod densop;
pub mod error;
pub mod estimate;
pub mod expr;
pub mod qcm;
pub mod scalar;
pub mod selftest;

pub use error::{Error, Result};
pub use scalar::{Scalar, Wide};
