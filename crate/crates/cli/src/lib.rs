//! Experiment runner around the `nessim` propagator: declarative configs,
//! run manifests, the on-disk formats and parameter sweeps.

pub mod error;
pub mod experiment;
pub mod files;
pub mod io;
pub mod manifest;
pub mod solve;
pub mod sweep;

pub use error::{CliError, Result};
pub use experiment::{execute, run_experiment, verify, Outcome};
pub use files::{config_hash, load_config, Expect, Overrides};
pub use manifest::RunManifest;
pub use solve::solve;
pub use sweep::{expand_sweep, run_sweep, SweepIndex, SweepPoint};
