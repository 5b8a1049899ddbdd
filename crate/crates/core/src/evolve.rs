//! Strang-split spectral propagation of
//! `i psi_t = -psi_xx/2 + (V + iW) psi + sigma(t) |psi|^2 psi`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::grid::Spectral;
use crate::potential::ComplexPotential;
use crate::scalar::Real;

/// Time-dependent nonlinearity: `sigma0` up to `t0`, then
/// `sigma0 (1 - gamma + gamma/2 [1 + cos(omega_mod (t - t0))])`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmSchedule<T> {
    pub sigma0: T,
    pub t0: T,
    pub omega_mod: T,
    pub gamma: T,
}

impl<T: Real> NmSchedule<T> {
    /// Unmanaged nonlinearity `sigma(t) = sigma0`.
    pub fn constant(sigma0: T) -> Self {
        Self { sigma0, t0: T::zero(), omega_mod: T::zero(), gamma: T::zero() }
    }

    pub fn new(sigma0: T, t0: T, omega_mod: T, gamma: T) -> Result<Self> {
        let s = Self { sigma0, t0, omega_mod, gamma };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.sigma0, self.t0, self.omega_mod, self.gamma].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Parameter("schedule parameters must be finite".into()));
        }
        if self.t0 < T::zero() {
            return Err(Error::Parameter(format!("activation time t0 = {} must be >= 0", self.t0)));
        }
        if !self.gamma.is_zero() && !(self.omega_mod > T::zero()) {
            return Err(Error::Parameter(format!(
                "modulation frequency {} must be positive when gamma != 0",
                self.omega_mod
            )));
        }
        Ok(())
    }

    pub fn is_managed(&self) -> bool {
        !self.gamma.is_zero()
    }

    pub fn sigma_at(&self, t: T) -> T {
        sigma_of_t(self, t)
    }

    /// Modulation period `2 pi / omega_mod`, if modulated.
    pub fn period(&self) -> Option<T> {
        (self.is_managed() && self.omega_mod > T::zero()).then(|| T::TAU() / self.omega_mod)
    }
}

pub fn sigma_of_t<T: Real>(schedule: &NmSchedule<T>, t: T) -> T {
    if t <= schedule.t0 {
        return schedule.sigma0;
    }
    let half = T::lit(0.5);
    let g = schedule.gamma;
    let phase = schedule.omega_mod * (t - schedule.t0);
    schedule.sigma0 * (T::one() - g + g * half * (T::one() + phase.cos()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AbortReason {
    /// Peak density exceeded the collapse threshold.
    Collapse { t: f64, peak_density: f64, threshold: f64 },
    /// Density at the box edge exceeded the leak threshold.
    EdgeLeak { t: f64, edge_density: f64, threshold: f64 },
}

impl AbortReason {
    pub fn time(&self) -> f64 {
        match *self {
            Self::Collapse { t, .. } | Self::EdgeLeak { t, .. } => t,
        }
    }

    pub fn is_collapse(&self) -> bool {
        matches!(self, Self::Collapse { .. })
    }
}

impl std::fmt::Display for AbortReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Collapse { t, peak_density, threshold } => {
                write!(f, "collapse at t = {t:.3}: peak density {peak_density:.4e} > {threshold:.4e}")
            }
            Self::EdgeLeak { t, edge_density, threshold } => {
                write!(f, "edge leak at t = {t:.3}: edge density {edge_density:.4e} > {threshold:.1e}")
            }
        }
    }
}

/// Field plus clock. `t == step_count * dt` always holds.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorState<T: Real> {
    pub field: WaveField<T>,
    pub t: T,
    pub step_count: u64,
    pub aborted: Option<AbortReason>,
}

impl<T: Real> PropagatorState<T> {
    pub fn new(field: WaveField<T>) -> Self {
        Self { field, t: T::zero(), step_count: 0, aborted: None }
    }
}

/// Quantities gathered for free while applying the local sub-steps.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats<T> {
    /// `2 integral W |psi|^2 dx` before the step.
    pub gain_start: T,
    /// `2 integral W |psi|^2 dx` after the step.
    pub gain_end: T,
    /// Time integral of `2 integral W |psi|^2 dx` over the step, exact along
    /// the split trajectory: W only acts in the local sub-steps, where
    /// `|psi_j|^2` grows as `exp(2 W_j s)`.
    pub gain_step: T,
    pub norm_end: T,
    pub peak_density_end: T,
    pub edge_density_end: T,
}

/// Second-order split-step propagator for a fixed potential, schedule and `dt`.
///
/// One step is a local half-step, a full kinetic step in Fourier space and a
/// second local half-step. The local flow `i psi_t = (V + iW + sigma |psi|^2) psi`
/// is integrated exactly at fixed `sigma`: `|psi|^2` grows as `exp(2 W s)` and
/// the nonlinear phase picks up `sigma |psi_0|^2 (exp(2 W tau) - 1) / (2 W)`.
/// `sigma` is sampled at the step midpoint.
pub struct Propagator<T: Real> {
    potential: ComplexPotential<T>,
    schedule: NmSchedule<T>,
    dt: T,
    spectral: Spectral<T>,
    kinetic: Vec<Complex<T>>,
    linear_half: Vec<Complex<T>>,
    nonlinear_time: Vec<T>,
    gain_factor: Vec<T>,
    last: StepStats<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new(potential: ComplexPotential<T>, schedule: NmSchedule<T>, dt: T) -> Result<Self> {
        if !dt.is_finite() || dt.is_zero() {
            return Err(Error::Parameter(format!("time step dt = {dt} must be finite and nonzero")));
        }
        schedule.validate()?;
        let grid = potential.grid().clone();
        let half = T::lit(0.5);
        let tau = half * dt;
        let kinetic = grid
            .k()
            .iter()
            .map(|&k| Complex::from_polar(T::one(), -(dt * half * k * k)))
            .collect();
        let linear_half = potential
            .v()
            .iter()
            .zip(potential.w())
            .map(|(&v, &w)| Complex::from_polar((w * tau).exp(), -(v * tau)))
            .collect();
        let nonlinear_time = potential
            .w()
            .iter()
            .map(|&w| {
                let x = T::lit(2.0) * w * tau;
                if x.abs() < T::lit(1e-8) {
                    tau * (T::one() + half * x)
                } else {
                    x.exp_m1() / (T::lit(2.0) * w)
                }
            })
            .collect();
        let gain_factor = potential.w().iter().map(|&w| (T::lit(2.0) * w * tau).exp_m1()).collect();
        let vmax = potential.v().iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if (dt.abs() * vmax).as_f64() > 0.5 {
            log::warn!("dt * max|V| = {:.3} exceeds 0.5; phase resolution is poor", (dt * vmax).as_f64());
        }
        Ok(Self {
            spectral: Spectral::new(&grid),
            potential,
            schedule,
            dt,
            kinetic,
            linear_half,
            nonlinear_time,
            gain_factor,
            last: StepStats::default(),
        })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn potential(&self) -> &ComplexPotential<T> {
        &self.potential
    }

    pub fn schedule(&self) -> &NmSchedule<T> {
        &self.schedule
    }

    /// Diagnostics of the most recent step.
    pub fn last_stats(&self) -> StepStats<T> {
        self.last
    }

    /// Advance `state` by one step in place. On a non-finite result the field
    /// is left in its non-finite state and [`Error::BlowUp`] is returned; use
    /// [`Propagator::step`] to keep the last finite state.
    pub fn advance(&mut self, state: &mut PropagatorState<T>) -> Result<()> {
        let t_mid = state.t + T::lit(0.5) * self.dt;
        let sigma = self.schedule.sigma_at(t_mid);
        let dx = state.field.grid().dx();
        let two = T::lit(2.0);
        let w = self.potential.w();
        let psi = state.field.values_mut();

        let mut gain_start = T::zero();
        let mut gain_step = T::zero();
        let nonlinear = !sigma.is_zero();
        for j in 0..psi.len() {
            let rho = psi[j].norm_sqr();
            gain_start += w[j] * rho;
            gain_step += self.gain_factor[j] * rho;
            psi[j] = self.local(psi[j], j, sigma, rho, nonlinear);
        }

        self.spectral.forward(psi);
        for (z, &kin) in psi.iter_mut().zip(&self.kinetic) {
            *z = *z * kin;
        }
        self.spectral.inverse(psi);

        let mut gain_end = T::zero();
        let mut norm_end = T::zero();
        let mut peak = T::zero();
        for j in 0..psi.len() {
            let rho = psi[j].norm_sqr();
            gain_step += self.gain_factor[j] * rho;
            let z = self.local(psi[j], j, sigma, rho, nonlinear);
            let r = z.norm_sqr();
            psi[j] = z;
            gain_end += w[j] * r;
            norm_end += r;
            peak = peak.max(r);
        }
        let n = psi.len();
        let edge = psi[0].norm_sqr().max(psi[n - 1].norm_sqr());

        state.step_count += 1;
        state.t = T::of_usize(state.step_count as usize) * self.dt;
        self.last = StepStats {
            gain_start: two * gain_start * dx,
            gain_end: two * gain_end * dx,
            gain_step: gain_step * dx,
            norm_end: norm_end * dx,
            peak_density_end: peak,
            edge_density_end: edge,
        };
        if !norm_end.is_finite() {
            return Err(Error::BlowUp { t: state.t.as_f64(), step: state.step_count });
        }
        Ok(())
    }

    #[inline]
    fn local(&self, z: Complex<T>, j: usize, sigma: T, rho: T, nonlinear: bool) -> Complex<T> {
        let z = z * self.linear_half[j];
        if nonlinear {
            z * Complex::from_polar(T::one(), -(sigma * rho * self.nonlinear_time[j]))
        } else {
            z
        }
    }

    /// One step returning a new state; the input is untouched, so on blow-up
    /// the caller still holds the last finite state.
    pub fn step(&mut self, state: &PropagatorState<T>) -> Result<PropagatorState<T>> {
        let mut next = state.clone();
        self.advance(&mut next)?;
        Ok(next)
    }

    /// Advance `n` steps.
    pub fn advance_n(&mut self, state: &mut PropagatorState<T>, n: u64) -> Result<()> {
        for _ in 0..n {
            self.advance(state)?;
        }
        Ok(())
    }
}
