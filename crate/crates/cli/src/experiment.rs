//! Single runs: config in, time series, snapshots and manifest out.

use std::path::{Path, PathBuf};

use chrono::Utc;

use nessim::config::RunConfig;
use nessim::runner::Analysis;
use nessim::{analyze, run, RunOutput};

use crate::error::{CliError, Result};
use crate::files::{config_hash, load_config, stem_of, Expect, Overrides};
use crate::io::{write_series_csv, write_snapshot};
use crate::manifest::{code_version, Check, Fits, RunManifest, Summary};

/// A finished run with its analysis.
pub struct Outcome {
    pub manifest: RunManifest,
    pub output: RunOutput,
}

fn summarize(cfg: &RunConfig, out: &RunOutput) -> Summary {
    let s = &out.series;
    let n = s.len() - 1;
    let th = cfg.fate_thresholds();
    let t_start = s.t[n] - th.window_fraction * s.duration();
    let late = s.window(t_start, s.t[n]);
    let late_mean = s.peak_amplitude[late.clone()].iter().sum::<f64>() / late.len().max(1) as f64;
    Summary {
        final_time: s.t[n],
        final_norm: s.norm[n],
        final_peak_density: s.peak_density[n],
        late_mean_peak_amplitude: late_mean,
        max_balance_error: s.balance_errors().into_iter().fold(0.0, f64::max),
    }
}

fn fits_of(a: &Analysis) -> Fits {
    let (decay, decay_error) = match &a.decay {
        Some(Ok(f)) => (Some(*f), None),
        Some(Err(e)) => (None, Some(e.clone())),
        None => (None, None),
    };
    let (peak_relaxation, peak_relaxation_error) = match &a.relaxation {
        Some(Ok(f)) => (Some(*f), None),
        Some(Err(e)) => (None, Some(e.clone())),
        None => (None, None),
    };
    Fits { decay, decay_error, peak_relaxation, peak_relaxation_error }
}

fn band(name: &str, band: Option<[f64; 2]>, observed: Option<f64>, checks: &mut Vec<Check>) {
    let Some([lo, hi]) = band else { return };
    let pass = observed.is_some_and(|v| v >= lo && v <= hi);
    checks.push(Check {
        name: name.into(),
        expected: format!("[{lo}, {hi}]"),
        observed: observed.map_or_else(|| "unavailable".into(), |v| format!("{v:.6}")),
        pass,
    });
}

/// Compare a finished run against its `expect` block.
pub fn check_expectations(expect: &Expect, m: &RunManifest) -> Vec<Check> {
    let mut checks = Vec::new();
    if let Some(fate) = expect.fate {
        checks.push(Check {
            name: "fate".into(),
            expected: fate.to_string(),
            observed: m.fate.to_string(),
            pass: fate == m.fate,
        });
    }
    if let Some(kind) = &expect.abort {
        let observed = match &m.abort {
            None => "none".to_string(),
            Some(a) if a.is_collapse() => "collapse".to_string(),
            Some(_) => "edge-leak".to_string(),
        };
        checks.push(Check { name: "abort".into(), expected: kind.clone(), pass: *kind == observed, observed });
    }
    let relax = m.fits.peak_relaxation.filter(|f| !f.degenerate);
    band("xi_c", expect.xi_c, m.fits.decay.map(|f| f.rate), &mut checks);
    band("A0", expect.a0, relax.map(|f| f.a0), &mut checks);
    band("beta", expect.beta, relax.map(|f| f.beta), &mut checks);
    band("gamma_fit", expect.gamma_fit, relax.map(|f| f.gamma_fit), &mut checks);
    band("final_peak_density", expect.final_peak_density, Some(m.summary.final_peak_density), &mut checks);
    band(
        "late_mean_peak_amplitude",
        expect.late_mean_peak_amplitude,
        Some(m.summary.late_mean_peak_amplitude),
        &mut checks,
    );
    if let Some(limit) = expect.norm_balance {
        let worst = m.summary.max_balance_error;
        checks.push(Check {
            name: "norm_balance".into(),
            expected: format!("< {limit:e}"),
            observed: format!("{worst:.3e}"),
            pass: worst < limit,
        });
    }
    checks
}

/// Run a resolved config. With `out_dir` the series, snapshots and manifest
/// are written there, named after `stem`.
pub fn execute(cfg: &RunConfig, expect: Option<&Expect>, stem: &str, out_dir: Option<&Path>) -> Result<Outcome> {
    let hash = config_hash(cfg);
    let started = Utc::now().to_rfc3339();
    let output = run(cfg)?;
    let analysis = analyze(cfg, &output.series);
    let finished = Utc::now().to_rfc3339();

    let mut manifest = RunManifest {
        config_hash: hash.clone(),
        code_version: code_version(),
        started,
        finished,
        fate: analysis.fate.fate,
        fate_slope: analysis.fate.slope.is_finite().then_some(analysis.fate.slope),
        fits: fits_of(&analysis),
        abort: output.abort,
        summary: summarize(cfg, &output),
        outputs: Vec::new(),
        config: cfg.clone(),
        expectations: None,
    };
    if let Some(e) = expect {
        manifest.expectations = Some(check_expectations(e, &manifest));
    }

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let csv = dir.join(format!("{stem}.csv"));
        write_series_csv(&csv, &output.series, &hash)?;
        manifest.outputs.push(csv);
        for (t, field) in &output.snapshots {
            let p = dir.join(format!("{stem}_t{t:09.3}.ness"));
            write_snapshot(&p, *t, field)?;
            manifest.outputs.push(p);
        }
        let mpath = dir.join(format!("{stem}.manifest.json"));
        manifest.outputs.push(mpath.clone());
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        std::fs::write(&mpath, json).map_err(|e| CliError::io(&mpath, e))?;
    }
    Ok(Outcome { manifest, output })
}

/// `run <config>`: validate first (nothing is written for a bad config),
/// then run and write outputs.
pub fn run_experiment(config_path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<Outcome> {
    let (cfg, expect) = load_config(config_path, overrides)?;
    execute(&cfg, expect.as_ref(), &stem_of(config_path), Some(out_dir))
}

/// `verify <config>`: run without writing anything and check `expect`.
pub fn verify(config_path: &Path, overrides: &Overrides) -> Result<Outcome> {
    let (cfg, expect) = load_config(config_path, overrides)?;
    if expect.is_none() {
        return Err(CliError::config(config_path, "no [expect] block to verify"));
    }
    execute(&cfg, expect.as_ref(), &stem_of(config_path), None)
}

/// Directory holding the bundled figure configs.
pub fn bundled_config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}
