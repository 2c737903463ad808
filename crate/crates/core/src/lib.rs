//! Instantaneous noise-level estimation from syndrome weights, for CSS codes
//! built from dual-containing LDPC codes.
//!
//! The crate is organised bottom-up:
//!
//! * [`gf2`]: bit-packed vectors and matrices over GF(2).
//! * [`channel`]: seeded binary symmetric and Pauli error sampling.
//! * [`estimator`]: the closed-form maximum-likelihood estimate of the flip
//!   probability from a syndrome weight, plus its analytic mean and MSE.
//! * [`codegen`]: dual-containing circulant LDPC construction, diagnostics
//!   and alist I/O.
//! * [`decoder`]: syndrome-based sum-product decoding.
//! * [`harness`]: Monte Carlo experiments and CSV reports.

pub mod channel;
pub mod codegen;
pub mod decoder;
pub mod error;
pub mod estimator;
pub mod gf2;
pub mod harness;

pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVector};
