//! Config files: a TOML document with the sections `grid`, `potential`,
//! `initial`, `evolve`, `nm`, `analysis` and an optional `expect` block.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nessim::config::{AnalysisSpec, EvolveSpec, GridSpec, InitialSpec, NmSpec, PotentialSpec, RunConfig};
use nessim::Fate;

use crate::error::{CliError, Result};

/// Acceptance bands checked after a run. Intervals are closed `[lo, hi]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Expect {
    pub fate: Option<Fate>,
    /// `"collapse"`, `"edge-leak"` or `"none"`.
    pub abort: Option<String>,
    pub xi_c: Option<[f64; 2]>,
    #[serde(rename = "A0")]
    pub a0: Option<[f64; 2]>,
    pub beta: Option<[f64; 2]>,
    pub gamma_fit: Option<[f64; 2]>,
    pub final_peak_density: Option<[f64; 2]>,
    pub late_mean_peak_amplitude: Option<[f64; 2]>,
    /// Largest allowed relative norm-balance error on any sampled interval.
    pub norm_balance: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    grid: GridSpec,
    potential: PotentialSpec,
    initial: InitialSpec,
    evolve: EvolveSpec,
    nm: Option<NmSpec>,
    analysis: AnalysisSpec,
    expect: Option<Expect>,
}

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub n_points: Option<usize>,
}

impl Overrides {
    /// Changing `dt` rescales `sample_every` so samples stay at the same
    /// times whenever the ratio of steps is an integer.
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(dt) = self.dt {
            let ratio = cfg.evolve.dt / dt;
            let every = cfg.evolve.sample_every as f64 * ratio;
            if (every - every.round()).abs() < 1e-9 && every >= 1.0 {
                cfg.evolve.sample_every = every.round() as u64;
            }
            cfg.evolve.dt = dt;
        }
        if let Some(n) = self.n_points {
            cfg.grid.n_points = n;
        }
    }
}

/// Parse a config document. Field errors carry TOML line/column positions.
pub fn parse_config(text: &str, origin: &Path) -> Result<(RunConfig, Option<Expect>)> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::config(origin, e))?;
    let cfg = RunConfig {
        grid: file.grid,
        potential: file.potential,
        initial: file.initial,
        evolve: file.evolve,
        nm: file.nm,
        analysis: file.analysis,
    };
    Ok((cfg, file.expect))
}

/// Read, parse, override and validate.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<(RunConfig, Option<Expect>)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let (mut cfg, expect) = parse_config(&text, path)?;
    overrides.apply(&mut cfg);
    cfg.validate().map_err(|e| CliError::config(path, e))?;
    Ok((cfg, expect))
}

/// SHA-256 of the canonical JSON form of the resolved config.
pub fn config_hash(cfg: &RunConfig) -> String {
    let json = serde_json::to_vec(cfg).expect("config serialises");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

/// File stem used to name a run's outputs.
pub fn stem_of(path: &Path) -> String {
    path.file_stem().map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned())
}
