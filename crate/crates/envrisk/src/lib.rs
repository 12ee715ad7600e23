//! Moreau-envelope loss calculus, synthetic high-dimensional data models,
//! regularization-path solvers, norm-based generalization bounds, and
//! population-risk oracles for linear models.
//!
//! Everything in this crate is a pure function of its inputs and seeds, so
//! concurrent use needs no synchronization; IO, caching, and experiment
//! orchestration live in the companion harness crate.

// validations use `!(x > 0.0)` so NaN inputs are rejected along with
// out-of-range ones
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod envelope;
pub mod error;
pub mod fitters;
pub mod oracles;
pub mod synthdata;

pub use error::{Error, Result};
