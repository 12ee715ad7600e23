//! Experiment harness for the envrisk library: presets, sweeps over
//! regularization paths with oracle test losses and bound columns, bootstrap
//! aggregation, and flat-file emission. The `envrisk` binary in this crate
//! exposes the same machinery as a CLI.

// validations use `!(x > 0.0)` so NaN inputs are rejected along with
// out-of-range ones
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod csvio;
pub mod error;
pub mod moments_cache;
pub mod sweep;

pub use config::{preset, ExperimentConfig, PRESET_NAMES};
pub use error::{HarnessError, Result};
pub use sweep::{bootstrap_ci, run_sharpness_l1, run_sweep, SweepResult};
