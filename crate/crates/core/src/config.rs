//! Declarative description of one propagation run.
//!
//! Every field has a serde default, so a config file only needs the values
//! that differ from the desk-scale defaults (box `(-20, 20)`, 1024 points,
//! `dt = 1e-3`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::NmSchedule;
use crate::grid::Grid;
use crate::observables::FateThresholds;
use crate::potentials::{DampedTrapParams, FunctionalSpec, TrapFamily};

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { x_min: -20.0, x_max: 20.0, n_points: 1024 }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid<f64>> {
        Grid::new(self.x_min, self.x_max, self.n_points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    HermitianHo {
        #[serde(default = "one")]
        omega0: f64,
    },
    PtHo {
        #[serde(default = "one")]
        omega0: f64,
        c0: f64,
    },
    DampedHo {
        #[serde(default = "one")]
        omega0: f64,
        a1: f64,
        a2: f64,
    },
    /// Harmonic `V` with `W` and `theta` engineered from a phase functional
    /// around the self-consistent stationary amplitude.
    MappedFunctional {
        #[serde(default = "one")]
        omega0: f64,
        functional: FunctionalSpec<f64>,
    },
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self::HermitianHo { omega0: 1.0 }
    }
}

impl PotentialSpec {
    pub fn omega0(&self) -> f64 {
        match *self {
            Self::HermitianHo { omega0 }
            | Self::PtHo { omega0, .. }
            | Self::DampedHo { omega0, .. }
            | Self::MappedFunctional { omega0, .. } => omega0,
        }
    }

    /// The closed-form family, if this is one.
    pub fn family(&self) -> Option<TrapFamily<f64>> {
        match *self {
            Self::HermitianHo { omega0 } => Some(TrapFamily::Hermitian { omega0 }),
            Self::PtHo { omega0, c0 } => Some(TrapFamily::PtSymmetric { omega0, c0 }),
            Self::DampedHo { omega0, a1, a2 } => Some(TrapFamily::Damped(DampedTrapParams { omega0, a1, a2 })),
            Self::MappedFunctional { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::MappedFunctional { omega0, functional } => {
                TrapFamily::Hermitian { omega0: *omega0 }.validate()?;
                if !matches!(functional, FunctionalSpec::Polynomial { .. }) {
                    return Err(Error::Config(
                        "mapped-functional runs need a polynomial functional (the stationary solver has no derivative variant)".into(),
                    ));
                }
                functional.validate()
            }
            other => other.family().expect("closed-form family").validate(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSpec {
    /// Displacement of the stationary state.
    pub x0: f64,
    /// Carry the family phase `theta(x - x0)` along with the modulus.
    pub include_phase: bool,
    /// Norm the initial field is scaled to.
    pub norm: f64,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self { x0: 0.0, include_phase: yes(), norm: one() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSpec {
    pub dt: f64,
    pub t_final: f64,
    /// Output stride in steps.
    pub sample_every: u64,
    pub sigma0: f64,
    /// Peak density that aborts the run as a collapse. Defaults to 100 times
    /// the peak density `(omega0/pi)^{1/2}` of the linear ground state.
    pub collapse_threshold: Option<f64>,
    /// Density at either box edge that aborts the run as a leak.
    pub edge_threshold: f64,
    pub snapshot_times: Vec<f64>,
}

impl Default for EvolveSpec {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 100.0,
            sample_every: 100,
            sigma0: 0.0,
            collapse_threshold: None,
            edge_threshold: 1e-8,
            snapshot_times: Vec::new(),
        }
    }
}

/// Modulation of the nonlinearity switched on at `t0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NmSpec {
    pub t0: f64,
    pub omega: f64,
    pub gamma: f64,
}

/// Windows and thresholds for the post-run fits.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSpec {
    pub envelope_window: Option<[f64; 2]>,
    pub relaxation_window: Option<[f64; 2]>,
    /// Moving-average width; defaults to the modulation period for managed
    /// runs and to `2 pi / omega0` otherwise.
    pub smoothing_period: Option<f64>,
    pub slope_tol: Option<f64>,
    pub window_fraction: Option<f64>,
    pub transient: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub potential: PotentialSpec,
    pub initial: InitialSpec,
    pub evolve: EvolveSpec,
    pub nm: Option<NmSpec>,
    pub analysis: AnalysisSpec,
}

impl RunConfig {
    pub fn schedule(&self) -> Result<NmSchedule<f64>> {
        match &self.nm {
            None => Ok(NmSchedule::constant(self.evolve.sigma0)),
            Some(nm) => NmSchedule::new(self.evolve.sigma0, nm.t0, nm.omega, nm.gamma),
        }
    }

    pub fn collapse_threshold(&self) -> f64 {
        self.evolve
            .collapse_threshold
            .unwrap_or_else(|| 100.0 * (self.potential.omega0() / std::f64::consts::PI).sqrt())
    }

    pub fn total_steps(&self) -> u64 {
        (self.evolve.t_final / self.evolve.dt).round() as u64
    }

    pub fn fate_thresholds(&self) -> FateThresholds {
        let d = FateThresholds::default();
        let a = &self.analysis;
        let natural = self
            .schedule()
            .ok()
            .and_then(|s| s.period())
            .unwrap_or(std::f64::consts::TAU / self.potential.omega0());
        FateThresholds {
            slope_tol: a.slope_tol.unwrap_or(d.slope_tol),
            window_fraction: a.window_fraction.unwrap_or(d.window_fraction),
            smoothing_period: a.smoothing_period.unwrap_or(natural),
            transient: a.transient.unwrap_or(d.transient),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.evolve;
        let bad = |m: String| Err(Error::Config(m));
        self.grid.build()?;
        self.potential.validate()?;
        self.schedule()?;
        if !(e.dt > 0.0) || !e.dt.is_finite() {
            return bad(format!("evolve.dt = {} must be positive", e.dt));
        }
        if !(e.t_final > 0.0) || !e.t_final.is_finite() {
            return bad(format!("evolve.t_final = {} must be positive", e.t_final));
        }
        if e.sample_every == 0 {
            return bad("evolve.sample_every must be at least 1".into());
        }
        if !(self.collapse_threshold() > 0.0) {
            return bad(format!("evolve.collapse_threshold = {} must be positive", self.collapse_threshold()));
        }
        if !(e.edge_threshold > 0.0) {
            return bad(format!("evolve.edge_threshold = {} must be positive", e.edge_threshold));
        }
        if !e.sigma0.is_finite() {
            return bad("evolve.sigma0 must be finite".into());
        }
        if let Some(t) = e.snapshot_times.iter().find(|t| !(**t >= 0.0 && **t <= e.t_final)) {
            return bad(format!("snapshot time {t} outside [0, {}]", e.t_final));
        }
        if !(self.initial.norm > 0.0) || !self.initial.norm.is_finite() {
            return bad(format!("initial.norm = {} must be positive", self.initial.norm));
        }
        if !self.initial.x0.is_finite() {
            return bad("initial.x0 must be finite".into());
        }
        for (name, w) in [("envelope_window", self.analysis.envelope_window), ("relaxation_window", self.analysis.relaxation_window)] {
            if let Some([lo, hi]) = w {
                if !(hi > lo) {
                    return bad(format!("analysis.{name} = [{lo}, {hi}] is empty"));
                }
            }
        }
        Ok(())
    }
}
