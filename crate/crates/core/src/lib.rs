//! Exact and Monte Carlo simulation of a two-photon parity check with
//! feed-forward correction.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod elements;
pub mod error;
pub mod feedforward;
pub mod fockstate;
pub mod harness;
pub mod imperfections;

/// Matrix and complex types used by `SlotMap`, re-exported so callers match
/// the library's versions.
pub use nalgebra;
pub use num_complex;
