//! Closed-form harmonic-trap families whose Gaussian ground state is an exact
//! stationary state of the complex equation.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::grid::{Grid, Spectral};
use crate::potential::ComplexPotential;
use crate::scalar::Real;

/// Edge level below which a Gaussian tail is considered resolved by the box.
pub const TAIL_LIMIT: f64 = 1e-8;

/// Parameters of the damped (non-PT) trap.
///
/// Invariants: `omega0 > 0` and `4 a2^2 < 1`, so the shifted trap frequency
/// `Omega0^2 = omega0^2 (1 - 4 a2^2)` stays positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampedTrapParams<T> {
    pub omega0: T,
    pub a1: T,
    pub a2: T,
}

impl<T: Real> DampedTrapParams<T> {
    pub fn new(omega0: T, a1: T, a2: T) -> Result<Self> {
        let p = Self { omega0, a1, a2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > T::zero()) || !self.omega0.is_finite() {
            return Err(Error::Parameter(format!("omega0 = {} must be positive", self.omega0)));
        }
        if !self.a1.is_finite() || !self.a2.is_finite() {
            return Err(Error::Parameter("a1, a2 must be finite".into()));
        }
        if T::lit(4.0) * self.a2 * self.a2 >= T::one() {
            return Err(Error::Parameter(format!(
                "4 a2^2 = {} must be below 1",
                T::lit(4.0) * self.a2 * self.a2
            )));
        }
        Ok(())
    }

    /// `Omega0^2 = omega0^2 (1 - 4 a2^2)`.
    pub fn shifted_frequency_sq(&self) -> T {
        self.omega0 * self.omega0 * (T::one() - T::lit(4.0) * self.a2 * self.a2)
    }

    /// Coefficient of the linear term of `V`, `4 a1 a2 omega0`.
    pub fn linear_coefficient(&self) -> T {
        T::lit(4.0) * self.a1 * self.a2 * self.omega0
    }

    /// Real eigenvalue `(omega0 + 4 a1^2) / 2`.
    pub fn eigenvalue(&self) -> T {
        T::lit(0.5) * (self.omega0 + T::lit(4.0) * self.a1 * self.a1)
    }

    pub fn v(&self, x: T) -> T {
        T::lit(0.5) * self.shifted_frequency_sq() * x * x + self.linear_coefficient() * x
    }

    pub fn w(&self, x: T) -> T {
        let two = T::lit(2.0);
        let w0 = self.omega0;
        two * self.a2 * w0 * w0 * x * x - two * self.a1 * w0 * x - self.a2 * w0
    }

    /// `theta(x) = 2 a1 x - a2 omega0 x^2`, the integral of `theta_x = 2F/A^2`.
    pub fn theta(&self, x: T) -> T {
        T::lit(2.0) * self.a1 * x - self.a2 * self.omega0 * x * x
    }
}

/// A closed-form trap family together with its exact stationary state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrapFamily<T> {
    /// Real harmonic oscillator `V = omega0^2 x^2 / 2`, `W = 0`.
    Hermitian { omega0: T },
    /// Balanced gain/loss `W = -C0 omega0 x` with phase `theta = C0 x`.
    PtSymmetric { omega0: T, c0: T },
    /// Shifted oscillator with the quadratic loss term that breaks PT symmetry.
    Damped(DampedTrapParams<T>),
}

impl<T: Real> TrapFamily<T> {
    pub fn omega0(&self) -> T {
        match *self {
            Self::Hermitian { omega0 } | Self::PtSymmetric { omega0, .. } => omega0,
            Self::Damped(p) => p.omega0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Hermitian { omega0 } | Self::PtSymmetric { omega0, .. } => {
                if omega0 > T::zero() && omega0.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!("omega0 = {omega0} must be positive")))
                }
            }
            Self::Damped(p) => p.validate(),
        }
    }

    /// Eigenvalue of the exact stationary state.
    pub fn eigenvalue(&self) -> T {
        let half = T::lit(0.5);
        match *self {
            Self::Hermitian { omega0 } => half * omega0,
            Self::PtSymmetric { omega0, c0 } => half * omega0 + half * c0 * c0,
            Self::Damped(p) => p.eigenvalue(),
        }
    }

    pub fn phase(&self, x: T) -> T {
        match *self {
            Self::Hermitian { .. } => T::zero(),
            Self::PtSymmetric { c0, .. } => c0 * x,
            Self::Damped(p) => p.theta(x),
        }
    }

    pub fn potential(&self, grid: &Grid<T>) -> Result<ComplexPotential<T>> {
        self.validate()?;
        match *self {
            Self::Hermitian { omega0 } => ComplexPotential::from_fns(
                grid,
                |x| T::lit(0.5) * omega0 * omega0 * x * x,
                |_| T::zero(),
                Some(&|_| T::zero()),
            ),
            Self::PtSymmetric { omega0, c0 } => Ok(pt_symmetric_trap(omega0, c0, grid)),
            Self::Damped(p) => damped_trap(&p, grid).map(|(pot, _)| pot),
        }
    }

    /// `A(x - x0) exp(i theta(x - x0))`, or the bare displaced modulus when
    /// `include_phase` is false.
    pub fn displaced_state(&self, grid: &Grid<T>, x0: T, include_phase: bool) -> Result<WaveField<T>> {
        self.validate()?;
        let amp = gaussian_ground_state(self.omega0(), grid, x0)?;
        if !include_phase {
            return Ok(amp);
        }
        let phase: Vec<T> = grid.x().iter().map(|&x| self.phase(x - x0)).collect();
        WaveField::from_polar(grid, &amp.real_part(), &phase)
    }
}

/// `A(x) = (omega0/pi)^{1/4} exp(-omega0 (x-x0)^2 / 2)` on the grid.
///
/// Fails with [`Error::DomainTooSmall`] when the amplitude at either end of
/// the box exceeds [`TAIL_LIMIT`].
pub fn gaussian_ground_state<T: Real>(omega0: T, grid: &Grid<T>, x0: T) -> Result<WaveField<T>> {
    if !(omega0 > T::zero()) || !omega0.is_finite() {
        return Err(Error::Parameter(format!("omega0 = {omega0} must be positive")));
    }
    let peak = (omega0 / T::PI()).powf(T::lit(0.25));
    let half = T::lit(0.5);
    let profile = |x: T| peak * (-(omega0 * (x - x0) * (x - x0)) * half).exp();
    let edge = profile(grid.x_min()).max(profile(grid.x_max()));
    if edge.as_f64() > TAIL_LIMIT {
        return Err(Error::DomainTooSmall { edge: edge.as_f64(), limit: TAIL_LIMIT });
    }
    let values: Vec<T> = grid.x().iter().map(|&x| profile(x)).collect();
    WaveField::from_real(grid, &values)
}

/// PT-symmetric trap: `V = omega0^2 x^2/2`, `W = -C0 omega0 x`, `theta = C0 x`.
pub fn pt_symmetric_trap<T: Real>(omega0: T, c0: T, grid: &Grid<T>) -> ComplexPotential<T> {
    let w0 = c0 * omega0;
    ComplexPotential::from_fns(
        grid,
        |x| T::lit(0.5) * omega0 * omega0 * x * x,
        |x| -(w0 * x),
        Some(&|x| c0 * x),
    )
    .expect("closed-form samples match the grid")
}

/// Damped non-PT trap and the real eigenvalue of its Gaussian stationary state.
pub fn damped_trap<T: Real>(params: &DampedTrapParams<T>, grid: &Grid<T>) -> Result<(ComplexPotential<T>, T)> {
    params.validate()?;
    let pot = ComplexPotential::from_fns(grid, |x| params.v(x), |x| params.w(x), Some(&|x| params.theta(x)))?;
    Ok((pot, params.eigenvalue()))
}

/// Exact stationary state `A(x) exp(i theta(x))` of the family, centred at 0.
pub fn stationary_state<T: Real>(family: &TrapFamily<T>, grid: &Grid<T>) -> Result<WaveField<T>> {
    family.displaced_state(grid, T::zero(), true)
}

/// `V = V~ - (C_n^2 / 2) A^{2n}`: folds the functional's effective
/// nonlinearity into a redefined real potential.
pub fn absorb_into_real_potential<T: Real>(
    v_tilde: &[T],
    amplitude: &WaveField<T>,
    c_n: T,
    n: u32,
) -> Result<Vec<T>> {
    if n < 1 {
        return Err(Error::Parameter("absorption requires n >= 1".into()));
    }
    if v_tilde.len() != amplitude.values().len() {
        return Err(Error::Config("potential and amplitude lengths differ".into()));
    }
    let half_c2 = T::lit(0.5) * c_n * c_n;
    let exp = i32::try_from(2 * n).map_err(|_| Error::Parameter(format!("n = {n} too large")))?;
    Ok(v_tilde
        .iter()
        .zip(amplitude.values())
        .map(|(&v, z)| v - half_c2 * z.norm().powi(exp))
        .collect())
}

/// L-infinity residual of the stationary equation
/// `-psi''/2 + (V + iW) psi + sigma |psi|^2 psi - omega psi = 0`.
pub fn stationary_residual<T: Real>(
    field: &WaveField<T>,
    potential: &ComplexPotential<T>,
    omega: T,
    sigma: T,
) -> T {
    let mut lap = field.values().to_vec();
    Spectral::new(field.grid()).second_derivative_complex(&mut lap);
    let half = T::lit(0.5);
    field
        .values()
        .iter()
        .zip(&lap)
        .zip(potential.v().iter().zip(potential.w()))
        .map(|((&psi, &d2), (&v, &w))| {
            let local = Complex::new(v + sigma * psi.norm_sqr() - omega, w);
            (-d2.scale(half) + local * psi).norm()
        })
        .fold(T::zero(), T::max)
}
