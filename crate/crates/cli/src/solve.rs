//! `solve <eigen-config>`: self-consistent stationary state in a harmonic
//! trap, plus the `(W, theta)` its phase functional maps to.
//!
//! ```toml
//! [grid]
//! n_points = 1024
//!
//! [problem]
//! omega0 = 1.0
//! sigma = 0.5
//! functional = { variant = "polynomial", coefficients = [0.1, 0.2] }
//! ```

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nessim::config::GridSpec;
use nessim::potentials::{map_from_functional, FunctionalSpec};
use nessim::stationary::{solve_self_consistent, EigenProblem, DEFAULT_MIXING};

use crate::error::{CliError, Result};
use crate::files::{stem_of, Overrides};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSpec {
    pub omega0: f64,
    pub sigma: f64,
    pub norm: f64,
    pub functional: FunctionalSpec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub mixing: f64,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            sigma: 0.0,
            norm: 1.0,
            functional: FunctionalSpec::polynomial(vec![0.0]),
            tol: 1e-10,
            max_iter: 500,
            mixing: DEFAULT_MIXING,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenConfig {
    pub grid: GridSpec,
    pub problem: ProblemSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub omega: f64,
    pub omega_unshifted: Option<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub outputs: Vec<PathBuf>,
}

pub fn solve(path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<EigenSummary> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg: EigenConfig = toml::from_str(&text).map_err(|e| CliError::config(path, e))?;
    if let Some(n) = overrides.n_points {
        cfg.grid.n_points = n;
    }
    if !matches!(cfg.problem.functional, FunctionalSpec::Polynomial { .. }) {
        return Err(CliError::config(path, "the stationary solver needs a polynomial functional"));
    }
    let grid = cfg.grid.build().map_err(|e| CliError::config(path, e))?;
    let p = &cfg.problem;
    let problem = EigenProblem::harmonic(&grid, p.omega0, p.sigma, p.functional.clone())
        .with_target_norm(p.norm)
        .with_reference();
    let res = solve_self_consistent(&problem, p.tol, p.max_iter, p.mixing)?;
    let mapped = map_from_functional(&res.amplitude, &p.functional)?;

    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let stem = stem_of(path);
    let csv = out_dir.join(format!("{stem}.eigen.csv"));
    let io = |e| CliError::io(&csv, e);
    let mut w = std::io::BufWriter::new(std::fs::File::create(&csv).map_err(io)?);
    writeln!(w, "x,amplitude,v,w,theta").map_err(io)?;
    let a = res.amplitude.real_part();
    for j in 0..grid.len() {
        writeln!(w, "{},{},{},{},{}", grid.x()[j], a[j], problem.v[j], mapped.w[j], mapped.theta[j]).map_err(io)?;
    }
    w.flush().map_err(io)?;

    let json_path = out_dir.join(format!("{stem}.eigen.json"));
    let summary = EigenSummary {
        omega: res.omega,
        omega_unshifted: res.omega_unshifted,
        residual: res.residual,
        iterations: res.iterations,
        outputs: vec![csv, json_path.clone()],
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serialises");
    std::fs::write(&json_path, json).map_err(|e| CliError::io(&json_path, e))?;
    Ok(summary)
}
