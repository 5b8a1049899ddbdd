//! Full trajectories from a [`RunConfig`]: initial state, sampling, abort
//! detection and the post-run fits.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::config::{PotentialSpec, RunConfig};
use crate::error::Result;
use crate::evolve::{AbortReason, Propagator, PropagatorState};
use crate::field::WaveField;
use crate::grid::Spectral;
use crate::observables::{
    center_of_mass, classify_fate, fit_envelope_decay, fit_peak_relaxation, DecayFit, FateReport,
    PeakRelaxationFit, Sample, TimeSeries,
};
use crate::potential::ComplexPotential;
use crate::potentials::map_from_functional;
use crate::stationary::{solve_self_consistent, EigenProblem, DEFAULT_MIXING};

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub series: TimeSeries,
    /// `(t, field)` pairs for the requested snapshot times that were reached.
    pub snapshots: Vec<(f64, WaveField<f64>)>,
    pub abort: Option<AbortReason>,
    pub steps: u64,
    pub potential: ComplexPotential<f64>,
}

/// Translate a field by `x0` with a spectral phase ramp.
fn shift(field: &WaveField<f64>, x0: f64) -> WaveField<f64> {
    let mut out = field.clone();
    let mut spectral = Spectral::new(field.grid());
    spectral.apply_symbol(out.values_mut(), |k| Complex::from_polar(1.0, -k * x0));
    out
}

/// Potential and initial field described by the config.
pub fn prepare(cfg: &RunConfig) -> Result<(ComplexPotential<f64>, WaveField<f64>)> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let init = &cfg.initial;
    let (potential, mut field) = match &cfg.potential {
        PotentialSpec::MappedFunctional { omega0, functional } => {
            let problem = EigenProblem::harmonic(&grid, *omega0, cfg.evolve.sigma0, functional.clone())
                .with_target_norm(init.norm);
            let sol = solve_self_consistent(&problem, 1e-10, 1000, DEFAULT_MIXING)?;
            let mapped = map_from_functional(&sol.amplitude, functional)?;
            let potential = ComplexPotential::new(grid.clone(), problem.v, mapped.w, Some(mapped.theta.clone()))?;
            let a = sol.amplitude.real_part();
            let phase = if init.include_phase { mapped.theta } else { vec![0.0; a.len()] };
            let centred = WaveField::from_polar(&grid, &a, &phase)?;
            (potential, shift(&centred, init.x0))
        }
        spec => {
            let family = spec.family().expect("closed-form family");
            (family.potential(&grid)?, family.displaced_state(&grid, init.x0, init.include_phase)?)
        }
    };
    field.normalize_to(init.norm)?;
    Ok((potential, field))
}

fn sample_of(field: &WaveField<f64>, t: f64, sigma: f64, gain: f64, integrals: (f64, f64)) -> Result<Sample> {
    let peak = field.peak_density();
    Ok(Sample {
        t,
        norm: field.norm(),
        x_c: center_of_mass(field)?,
        peak_density: peak,
        peak_amplitude: peak.sqrt(),
        sigma_t: sigma,
        gain,
        gain_integral: integrals.0,
        gain_trapezoid: integrals.1,
    })
}

/// Propagate the configured state to `t_final`, or until the peak density
/// passes the collapse threshold or density reaches the box edges.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let (potential, field) = prepare(cfg)?;
    let schedule = cfg.schedule()?;
    let dt = cfg.evolve.dt;
    let mut prop = Propagator::new(potential.clone(), schedule, dt)?;
    let total = cfg.total_steps();
    let every = cfg.evolve.sample_every;
    let collapse = cfg.collapse_threshold();
    let edge_limit = cfg.evolve.edge_threshold;

    let mut snap_times: Vec<f64> = cfg.evolve.snapshot_times.clone();
    snap_times.sort_by(f64::total_cmp);
    let mut next_snap = 0;
    let mut snapshots = Vec::new();

    let mut state = PropagatorState::new(field);
    let mut gain = 2.0 * state.field.weighted_density_integral(potential.w());
    let mut gain_integral = 0.0;
    let mut gain_trapezoid = 0.0;
    let mut series = TimeSeries::new();
    series.push(sample_of(&state.field, 0.0, schedule.sigma_at(0.0), gain, (0.0, 0.0))?);
    let mut take_snapshots = |state: &PropagatorState<f64>, snapshots: &mut Vec<(f64, WaveField<f64>)>| {
        while next_snap < snap_times.len() && snap_times[next_snap] <= state.t + 0.5 * dt {
            snapshots.push((state.t, state.field.clone()));
            next_snap += 1;
        }
    };
    take_snapshots(&state, &mut snapshots);

    while state.step_count < total {
        prop.advance(&mut state)?;
        let stats = prop.last_stats();
        gain_integral += stats.gain_step;
        gain_trapezoid += 0.5 * dt * (stats.gain_start + stats.gain_end);
        gain = stats.gain_end;
        let abort = if stats.peak_density_end > collapse {
            Some(AbortReason::Collapse { t: state.t, peak_density: stats.peak_density_end, threshold: collapse })
        } else if stats.edge_density_end > edge_limit {
            Some(AbortReason::EdgeLeak { t: state.t, edge_density: stats.edge_density_end, threshold: edge_limit })
        } else {
            None
        };
        if state.step_count % every == 0 || state.step_count == total || abort.is_some() {
            series.push(sample_of(&state.field, state.t, schedule.sigma_at(state.t), gain, (gain_integral, gain_trapezoid))?);
        }
        take_snapshots(&state, &mut snapshots);
        if let Some(reason) = abort {
            log::info!("{reason}");
            state.aborted = Some(reason);
            break;
        }
    }
    series.aborted = state.aborted;
    Ok(RunOutput { series, snapshots, abort: state.aborted, steps: state.step_count, potential })
}

/// Fate label and whichever fits the config asks for. Fit failures are kept
/// as messages rather than aborting the analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub fate: FateReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<std::result::Result<DecayFit, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relaxation: Option<std::result::Result<PeakRelaxationFit, String>>,
}

pub fn analyze(cfg: &RunConfig, series: &TimeSeries) -> Analysis {
    let th = cfg.fate_thresholds();
    let decay = cfg
        .analysis
        .envelope_window
        .map(|[lo, hi]| fit_envelope_decay(series, lo, hi).map_err(|e| e.to_string()));
    let period = std::f64::consts::TAU / cfg.potential.omega0();
    let relaxation = cfg
        .analysis
        .relaxation_window
        .map(|[lo, hi]| fit_peak_relaxation(series, lo, hi, period).map_err(|e| e.to_string()));
    Analysis { fate: classify_fate(series, &th), decay, relaxation }
}
