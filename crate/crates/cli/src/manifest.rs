use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use nessim::config::RunConfig;
use nessim::evolve::AbortReason;
use nessim::observables::{DecayFit, PeakRelaxationFit};
use nessim::Fate;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_relaxation: Option<PeakRelaxationFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_relaxation_error: Option<String>,
}

/// Scalar summaries of the trajectory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub final_time: f64,
    pub final_norm: f64,
    pub final_peak_density: f64,
    /// Mean peak amplitude over the trailing fate window.
    pub late_mean_peak_amplitude: f64,
    /// Largest relative norm-balance error over the sampled intervals.
    pub max_balance_error: f64,
}

/// One expectation and whether it held.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub started: String,
    pub finished: String,
    pub fate: Fate,
    /// Late-window slope of the smoothed peak amplitude; absent when not measured.
    pub fate_slope: Option<f64>,
    pub fits: Fits,
    pub abort: Option<AbortReason>,
    pub summary: Summary,
    pub outputs: Vec<PathBuf>,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectations: Option<Vec<Check>>,
}

impl RunManifest {
    pub fn expectations_met(&self) -> bool {
        self.expectations.as_ref().is_none_or(|c| c.iter().all(|c| c.pass))
    }
}

pub fn code_version() -> String {
    format!("nessim-cli {}", env!("CARGO_PKG_VERSION"))
}
