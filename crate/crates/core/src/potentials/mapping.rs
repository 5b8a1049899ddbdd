//! Mapping from a gain-loss functional `F[A]` to the imaginary potential and
//! phase that make `A e^{i theta}` stationary:
//! `theta_x = 2F / A^2`, `W = F_x / A^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::grid::Spectral;
use crate::scalar::Real;

/// Relative density below which `1/A^2` is not trusted.
pub const TAIL_TRUST: f64 = 1e-12;

/// Gain-loss functional `F` as a function of the amplitude profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum FunctionalSpec<T> {
    /// `F = 1/2 sum_n C_n A^{n+2}`, `coefficients[n] = C_n`.
    Polynomial { coefficients: Vec<T> },
    /// `F = a1 A^2 + (a2/2) d(A^2)/dx`.
    Derivative { a1: T, a2: T },
}

impl<T: Real> FunctionalSpec<T> {
    pub fn polynomial(coefficients: Vec<T>) -> Self {
        Self::Polynomial { coefficients }
    }

    /// Finite coefficients with at least one nonzero entry.
    pub fn validate(&self) -> Result<()> {
        let coeffs: Vec<T> = match self {
            Self::Polynomial { coefficients } => coefficients.clone(),
            Self::Derivative { a1, a2 } => vec![*a1, *a2],
        };
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parameter("functional coefficients must be finite and non-empty".into()));
        }
        if coeffs.iter().all(|c| c.is_zero()) {
            return Err(Error::Parameter("functional needs at least one nonzero coefficient".into()));
        }
        Ok(())
    }

    /// Coefficients `C_n` of the polynomial variant (empty for `Derivative`).
    pub fn polynomial_coefficients(&self) -> &[T] {
        match self {
            Self::Polynomial { coefficients } => coefficients,
            Self::Derivative { .. } => &[],
        }
    }

    /// `F(x_j)` for a real amplitude profile.
    pub fn evaluate(&self, amplitude: &[T], spectral: &mut Spectral<T>) -> Vec<T> {
        let half = T::lit(0.5);
        match self {
            Self::Polynomial { coefficients } => amplitude
                .iter()
                .map(|&a| {
                    let mut acc = T::zero();
                    let mut pow = a * a;
                    for &c in coefficients {
                        acc += c * pow;
                        pow *= a;
                    }
                    half * acc
                })
                .collect(),
            Self::Derivative { a1, a2 } => {
                let dens: Vec<T> = amplitude.iter().map(|&a| a * a).collect();
                let ddens = spectral.derivative(&dens);
                dens.iter().zip(&ddens).map(|(&d, &dd)| *a1 * d + half * *a2 * dd).collect()
            }
        }
    }

    /// `(1/2) (sum_n C_n A^n)^2`, the term `2 (F/A^2)^2` of the real
    /// eigenvalue problem for the polynomial variant.
    pub fn effective_potential_term(&self, a: T) -> T {
        let s = self.polynomial_sum(a);
        T::lit(0.5) * s * s
    }

    fn polynomial_sum(&self, a: T) -> T {
        let mut acc = T::zero();
        let mut pow = T::one();
        for &c in self.polynomial_coefficients() {
            acc += c * pow;
            pow *= a;
        }
        acc
    }
}

fn clamp_tails<T: Real>(values: &mut [T], first: usize, last: usize) {
    let (lo, hi) = (values[first], values[last]);
    values[..first].iter_mut().for_each(|v| *v = lo);
    values[last + 1..].iter_mut().for_each(|v| *v = hi);
}

/// Imaginary potential and phase produced by the mapping.
#[derive(Clone, Debug, PartialEq)]
pub struct MappedPotential<T> {
    pub w: Vec<T>,
    pub theta: Vec<T>,
}

/// `W = F_x / A^2` and `theta = integral 2F/A^2` for a real positive amplitude.
///
/// Derivatives are spectral. Where `A^2 < 1e-12 max(A^2)` the quotients by
/// `A` are not trusted and `W` (and, for the derivative functional,
/// `theta_x`) is held at its value at the nearest trusted point. For the
/// polynomial functional `theta_x = sum C_n A^n` needs no division and is
/// integrated spectrally.
/// The phase is gauged to `theta = 0` at the grid point closest to `x = 0`
/// (or at `x_min` when the box excludes the origin).
pub fn map_from_functional<T: Real>(
    amplitude: &WaveField<T>,
    spec: &FunctionalSpec<T>,
) -> Result<MappedPotential<T>> {
    let grid = amplitude.grid();
    let n = grid.len();
    let a: Vec<T> = amplitude.real_part();
    let dens: Vec<T> = a.iter().map(|&v| v * v).collect();
    let max_dens = dens.iter().copied().fold(T::zero(), T::max);
    if !(max_dens > T::zero()) {
        return Err(Error::Degenerate("amplitude is identically zero".into()));
    }
    let floor = max_dens * T::lit(TAIL_TRUST);
    let trusted: Vec<bool> = dens.iter().map(|&d| d >= floor).collect();
    let first = trusted.iter().position(|&t| t).unwrap_or(0);
    let last = trusted.iter().rposition(|&t| t).unwrap_or(n - 1);
    let sign = a[first].signum();
    for j in first..=last {
        if !trusted[j] || a[j].signum() != sign {
            return Err(Error::SingularMapping { index: j, x: grid.x()[j].as_f64() });
        }
    }

    let mut spectral = Spectral::new(grid);
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let mut w = vec![T::zero(); n];
    let mut theta_x = vec![T::zero(); n];
    let polynomial = match spec {
        FunctionalSpec::Polynomial { coefficients } => Some(coefficients),
        FunctionalSpec::Derivative { .. } => None,
    };
    if let Some(coefficients) = polynomial {
        // theta_x = sum C_n A^n and W = A_x (C_0/A + 1/2 sum_{n>=1} (n+2) C_n A^{n-1})
        // need no division except A_x/A, which is far better conditioned than F_x/A^2
        let da = spectral.derivative(&a);
        for j in 0..n {
            let mut sum = T::zero();
            let mut tail = T::zero();
            let mut pow = T::one();
            for (m, &c) in coefficients.iter().enumerate() {
                sum += c * pow;
                if m >= 1 {
                    tail += half * T::of_usize(m + 2) * c * pow / a[j];
                }
                pow *= a[j];
            }
            theta_x[j] = sum;
            let c0 = coefficients.first().copied().unwrap_or_else(T::zero);
            let inner = if trusted[j] { c0 / a[j] + tail } else { T::zero() };
            w[j] = da[j] * inner;
        }
        clamp_tails(&mut w, first, last);
    } else {
        let f = spec.evaluate(&a, &mut spectral);
        let df = spectral.derivative(&f);
        for j in first..=last {
            w[j] = df[j] / dens[j];
            theta_x[j] = two * f[j] / dens[j];
        }
        clamp_tails(&mut w, first, last);
        clamp_tails(&mut theta_x, first, last);
    }

    let dx = grid.dx();
    let mut theta = if polynomial.is_some() {
        // smooth and bounded everywhere: spectral antiderivative
        spectral.antiderivative(&theta_x, dx)
    } else {
        // linear growth of theta_x, clamped in the tails: cumulative trapezoid
        let mut th = vec![T::zero(); n];
        for j in 1..n {
            th[j] = th[j - 1] + half * dx * (theta_x[j - 1] + theta_x[j]);
        }
        th
    };
    let gauge = if grid.x_min() <= T::zero() && grid.x_max() > T::zero() {
        grid.nearest_index(T::zero())
    } else {
        0
    };
    let offset = theta[gauge];
    theta.iter_mut().for_each(|t| *t -= offset);

    Ok(MappedPotential { w, theta })
}
