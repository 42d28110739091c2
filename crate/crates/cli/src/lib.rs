//! Parameter sweeps, figure presets and point reports on top of the
//! `lambda_relax` simulator. The `lambda-relax` binary is a thin clap layer
//! over this crate.

pub mod error;
pub mod point;
pub mod preset;
pub mod spec;
pub mod sweep;

pub use error::{CliError, Result};
pub use preset::figure_preset;
pub use spec::{Format, Grid, Quantity, SpecFile, SweepSpec};
pub use sweep::{execute, run_sweep, run_sweep_with_threads, SweepOutput, SweepRow};
