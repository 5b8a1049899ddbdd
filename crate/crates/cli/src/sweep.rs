//! Parameter sweeps over a base config.
//!
//! ```toml
//! base = "fig4_attractive.cfg"   # relative to the sweep file
//!
//! [parameters]
//! "nm.gamma" = [0.0, 0.5, 1.0, 1.5, 2.0]
//! ```
//!
//! Every combination of the listed values is run in its own directory
//! `run_NNN`; `index.json` collects parameters, fate and fits per run. Runs
//! that fail are recorded in the index and do not stop the sweep.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nessim::config::RunConfig;
use nessim::evolve::AbortReason;
use nessim::Fate;

use crate::error::{CliError, Result};
use crate::experiment::execute;
use crate::files::{parse_config, Overrides};
use crate::manifest::{Fits, Summary};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    base: PathBuf,
    #[serde(default)]
    parameters: BTreeMap<String, Vec<toml::Value>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub index: usize,
    pub parameters: BTreeMap<String, toml::Value>,
    pub out_dir: PathBuf,
    pub config_hash: Option<String>,
    pub fate: Option<Fate>,
    pub fate_slope: Option<f64>,
    pub fits: Option<Fits>,
    pub summary: Option<Summary>,
    pub abort: Option<AbortReason>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepIndex {
    pub sweep: PathBuf,
    pub base: PathBuf,
    pub runs: Vec<IndexEntry>,
}

/// Cartesian product of the parameter lists; empty if any list is empty
/// or there are no parameters.
fn grid_points(params: &BTreeMap<String, Vec<toml::Value>>) -> Vec<BTreeMap<String, toml::Value>> {
    if params.is_empty() || params.values().any(|v| v.is_empty()) {
        return Vec::new();
    }
    let mut points = vec![BTreeMap::new()];
    for (key, values) in params {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(key.clone(), v.clone());
                    q
                })
            })
            .collect();
    }
    points
}

/// Set `a.b.c = value` in a TOML table, creating intermediate tables.
fn set_path(root: &mut toml::Table, dotted: &str, value: toml::Value) -> std::result::Result<(), String> {
    let mut parts: Vec<&str> = dotted.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| format!("empty key {dotted:?}"))?;
    let mut table = root;
    for p in parts {
        let entry = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| format!("{p} in {dotted:?} is not a table"))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

fn point_config(
    base_text: &str,
    base_path: &Path,
    point: &BTreeMap<String, toml::Value>,
    overrides: &Overrides,
) -> Result<RunConfig> {
    let mut doc: toml::Table = toml::from_str(base_text).map_err(|e| CliError::config(base_path, e))?;
    doc.remove("expect");
    for (k, v) in point {
        set_path(&mut doc, k, v.clone()).map_err(|m| CliError::config(base_path, m))?;
    }
    let text = toml::to_string(&doc).expect("table serialises");
    let (mut cfg, _) = parse_config(&text, base_path)?;
    overrides.apply(&mut cfg);
    cfg.validate().map_err(|e| CliError::config(base_path, e))?;
    Ok(cfg)
}

/// One grid point with its resolved config, or the reason it could not be
/// built.
pub struct SweepPoint {
    pub parameters: BTreeMap<String, toml::Value>,
    pub config: Result<RunConfig>,
}

/// Resolve every grid point of a sweep file without running anything.
/// Also returns the base config path.
pub fn expand_sweep(sweep_path: &Path, overrides: &Overrides) -> Result<(PathBuf, Vec<SweepPoint>)> {
    let text = std::fs::read_to_string(sweep_path).map_err(|e| CliError::io(sweep_path, e))?;
    let sweep: SweepFile = toml::from_str(&text).map_err(|e| CliError::config(sweep_path, e))?;
    let base = sweep_path.parent().unwrap_or(Path::new(".")).join(&sweep.base);
    let base_text = std::fs::read_to_string(&base).map_err(|e| CliError::io(&base, e))?;
    let points = grid_points(&sweep.parameters)
        .into_iter()
        .map(|p| SweepPoint { config: point_config(&base_text, &base, &p, overrides), parameters: p })
        .collect();
    Ok((base, points))
}

/// Run every grid point on a pool of `parallelism` workers and write
/// `index.json` into `out_dir`.
pub fn run_sweep(sweep_path: &Path, out_dir: &Path, parallelism: usize, overrides: &Overrides) -> Result<SweepIndex> {
    let (base, points) = expand_sweep(sweep_path, overrides)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let runs: Vec<IndexEntry> = pool.install(|| {
        points
            .into_par_iter()
            .enumerate()
            .map(|(index, point)| {
                let dir = out_dir.join(format!("run_{index:03}"));
                let mut entry = IndexEntry {
                    index,
                    parameters: point.parameters,
                    out_dir: dir.clone(),
                    config_hash: None,
                    fate: None,
                    fate_slope: None,
                    fits: None,
                    summary: None,
                    abort: None,
                    error: None,
                };
                match point.config.and_then(|cfg| execute(&cfg, None, "run", Some(&dir))) {
                    Ok(o) => {
                        let m = o.manifest;
                        entry.config_hash = Some(m.config_hash);
                        entry.fate = Some(m.fate);
                        entry.fate_slope = m.fate_slope;
                        entry.fits = Some(m.fits);
                        entry.summary = Some(m.summary);
                        entry.abort = m.abort;
                    }
                    Err(e) => {
                        log::warn!("sweep point {index}: {e}");
                        entry.error = Some(e.to_string());
                    }
                }
                entry
            })
            .collect()
    });

    let index = SweepIndex { sweep: sweep_path.to_path_buf(), base, runs };
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let path = out_dir.join("index.json");
    let json = serde_json::to_string_pretty(&index).expect("index serialises");
    std::fs::write(&path, json).map_err(|e| CliError::io(&path, e))?;
    Ok(index)
}
