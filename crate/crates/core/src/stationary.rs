//! Self-consistent solver for the real nonlinear eigenvalue problem
//!
//! ```text
//! { -1/2 d^2/dx^2 + V + sigma A^2 + 1/2 (sum_n C_n A^n)^2 } A = omega A
//! ```
//!
//! whose nodeless solutions, fed through the gain-loss mapping, are exact
//! stationary states of the complex equation.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::grid::{Grid, Spectral};
use crate::potentials::FunctionalSpec;
use crate::scalar::Real;

/// Default density-mixing weight.
pub const DEFAULT_MIXING: f64 = 0.3;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenProblem<T: Real> {
    pub grid: Grid<T>,
    pub v: Vec<T>,
    pub sigma: T,
    /// Must be the `Polynomial` variant.
    pub functional: FunctionalSpec<T>,
    pub target_norm: T,
    /// Also solve the `sigma = 0`, `C = 0` problem and report its eigenvalue.
    pub with_reference: bool,
}

impl<T: Real> EigenProblem<T> {
    pub fn new(grid: Grid<T>, v: Vec<T>, sigma: T, functional: FunctionalSpec<T>) -> Self {
        Self { grid, v, sigma, functional, target_norm: T::one(), with_reference: false }
    }

    /// Harmonic trap `V = omega0^2 x^2 / 2`.
    pub fn harmonic(grid: &Grid<T>, omega0: T, sigma: T, functional: FunctionalSpec<T>) -> Self {
        let v = grid.x().iter().map(|&x| T::lit(0.5) * omega0 * omega0 * x * x).collect();
        Self::new(grid.clone(), v, sigma, functional)
    }

    pub fn with_target_norm(mut self, norm: T) -> Self {
        self.target_norm = norm;
        self
    }

    pub fn with_reference(mut self) -> Self {
        self.with_reference = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.v.len() != self.grid.len() {
            return Err(Error::Config("potential length does not match the grid".into()));
        }
        if !(self.target_norm > T::zero()) {
            return Err(Error::Parameter(format!("target norm {} must be positive", self.target_norm)));
        }
        if !matches!(self.functional, FunctionalSpec::Polynomial { .. }) {
            return Err(Error::Parameter("the real eigenvalue problem needs a polynomial functional".into()));
        }
        if self.v.iter().any(|v| !v.is_finite()) || !self.sigma.is_finite() {
            return Err(Error::Numerical("potential or sigma not finite".into()));
        }
        Ok(())
    }

    /// `V + sigma A^2 + 1/2 (sum C_n A^n)^2`.
    pub fn effective_potential(&self, amplitude: &[T]) -> Vec<T> {
        self.v
            .iter()
            .zip(amplitude)
            .map(|(&v, &a)| v + self.sigma * a * a + self.functional.effective_potential_term(a))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult<T: Real> {
    /// Real, positive amplitude normalised to the target norm.
    pub amplitude: WaveField<T>,
    pub omega: T,
    /// L-infinity residual of the nonlinear eigenvalue equation.
    pub residual: T,
    pub iterations: usize,
    /// Eigenvalue of the `sigma = 0`, `C = 0` reference problem, if requested.
    pub omega_unshifted: Option<T>,
    /// Residual after every outer iteration.
    pub history: Vec<T>,
}

/// Density-mixed self-consistent iteration.
///
/// Each outer step builds the effective potential from the current amplitude,
/// finds the lowest eigenpair of `-1/2 d^2/dx^2 + V_eff` (see
/// [`lowest_eigenpair`]) and mixes densities
/// `A^2 <- (1 - mixing) A^2 + mixing phi^2`. Exit requires the eigenvalue
/// change below `tol` and the nonlinear residual below `10 tol`.
pub fn solve_self_consistent<T: Real>(
    problem: &EigenProblem<T>,
    tol: T,
    max_iter: usize,
    mixing: T,
) -> Result<EigenResult<T>> {
    problem.validate()?;
    if !(tol > T::zero()) {
        return Err(Error::Parameter(format!("tolerance {tol} must be positive")));
    }
    if !(mixing > T::zero() && mixing <= T::one()) {
        return Err(Error::Parameter(format!("mixing {mixing} must lie in (0, 1]")));
    }
    let grid = &problem.grid;
    let mut ops = Operators::new(grid);
    let inner_tol = (tol * T::lit(1e-2)).max(T::lit(1e-13));

    let (omega_ref, mut amp) = ops.lowest_eigenpair(&problem.v, inner_tol)?;
    normalize(grid, &mut amp, problem.target_norm);

    let ten = T::lit(10.0);
    let mut omega_prev = T::infinity();
    let mut history = Vec::new();
    for iteration in 1..=max_iter {
        let v_eff = problem.effective_potential(&amp);
        let (_, mut phi) = ops.lowest_eigenpair(&v_eff, inner_tol)?;
        normalize(grid, &mut phi, problem.target_norm);
        for (a, p) in amp.iter_mut().zip(&phi) {
            *a = ((T::one() - mixing) * *a * *a + mixing * *p * *p).sqrt();
        }
        normalize(grid, &mut amp, problem.target_norm);

        let (omega, residual) = ops.nonlinear_residual(problem, &amp);
        history.push(residual);
        if !omega.is_finite() || !residual.is_finite() {
            return Err(Error::Numerical(format!("non-finite iterate at outer step {iteration}")));
        }
        if (omega - omega_prev).abs() < tol && residual < ten * tol {
            return Ok(EigenResult {
                amplitude: WaveField::from_real(grid, &amp)?,
                omega,
                residual,
                iterations: iteration,
                omega_unshifted: problem.with_reference.then_some(omega_ref),
                history,
            });
        }
        omega_prev = omega;
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual: history.last().map_or(f64::NAN, |r| r.as_f64()),
    })
}

/// Lowest eigenpair of `-1/2 d^2/dx^2 + v` on the periodic grid, accurate to
/// the spectral discretisation. The eigenvector is positive with unit
/// discrete L2 norm.
pub fn lowest_eigenpair<T: Real>(grid: &Grid<T>, v: &[T], tol: T) -> Result<(T, Vec<T>)> {
    Operators::new(grid).lowest_eigenpair(v, tol)
}

fn normalize<T: Real>(grid: &Grid<T>, a: &mut [T], target: T) {
    let n = a.iter().map(|&x| x * x).sum::<T>() * grid.dx();
    let s = (target / n).sqrt();
    a.iter_mut().for_each(|x| *x *= s);
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

struct Operators<T: Real> {
    spectral: Spectral<T>,
    dx: T,
    buf: Vec<Complex<T>>,
}

impl<T: Real> Operators<T> {
    fn new(grid: &Grid<T>) -> Self {
        Self {
            spectral: Spectral::new(grid),
            dx: grid.dx(),
            buf: vec![Complex::new(T::zero(), T::zero()); grid.len()],
        }
    }

    /// `out = (-1/2 d^2/dx^2 + v - shift) f`, spectral Laplacian.
    fn apply(&mut self, v: &[T], shift: T, f: &[T], out: &mut [T]) {
        for (b, &x) in self.buf.iter_mut().zip(f) {
            *b = Complex::new(x, T::zero());
        }
        self.spectral.second_derivative_complex(&mut self.buf);
        let half = T::lit(0.5);
        for j in 0..f.len() {
            out[j] = -half * self.buf[j].re + (v[j] - shift) * f[j];
        }
    }

    /// Solve the tridiagonal second-order finite-difference system
    /// `(-1/2 D2 + v - shift) x = b` with Dirichlet closure (Thomas algorithm).
    fn fd_solve(&self, v: &[T], shift: T, b: &[T], x: &mut [T], work: &mut [T]) {
        let n = b.len();
        let inv_dx2 = T::one() / (self.dx * self.dx);
        let off = -T::lit(0.5) * inv_dx2;
        let diag = |j: usize| inv_dx2 + v[j] - shift;
        // forward sweep
        let mut denom = diag(0);
        work[0] = off / denom;
        x[0] = b[0] / denom;
        for j in 1..n {
            denom = diag(j) - off * work[j - 1];
            work[j] = off / denom;
            x[j] = (b[j] - off * x[j - 1]) / denom;
        }
        for j in (0..n - 1).rev() {
            x[j] = x[j] - work[j] * x[j + 1];
        }
    }

    /// Preconditioned conjugate gradients for `(H - shift) x = b`, with the
    /// finite-difference operator as preconditioner.
    fn pcg(&mut self, v: &[T], shift: T, b: &[T], x: &mut [T]) -> Result<()> {
        let n = b.len();
        let mut work = vec![T::zero(); n];
        let mut r = b.to_vec();
        let mut z = vec![T::zero(); n];
        let mut ap = vec![T::zero(); n];
        x.iter_mut().for_each(|v| *v = T::zero());
        let b_norm = dot(b, b).sqrt();
        if b_norm.is_zero() {
            return Ok(());
        }
        let target = b_norm * T::lit(1e-14);
        self.fd_solve(v, shift, &r, &mut z, &mut work);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for _ in 0..500 {
            self.apply(v, shift, &p, &mut ap);
            let curvature = dot(&p, &ap);
            if !(curvature > T::zero()) {
                return Err(Error::Numerical(
                    "shifted operator is not positive definite (indefinite discretisation)".into(),
                ));
            }
            let alpha = rz / curvature;
            for j in 0..n {
                x[j] += alpha * p[j];
                r[j] -= alpha * ap[j];
            }
            if dot(&r, &r).sqrt() < target {
                return Ok(());
            }
            self.fd_solve(v, shift, &r, &mut z, &mut work);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for j in 0..n {
                p[j] = z[j] + beta * p[j];
            }
        }
        // stagnation at roundoff level is acceptable; the caller checks the
        // eigen-residual
        Ok(())
    }

    /// Shifted inverse iteration with the shift below `min(v)`, which bounds
    /// the lowest eigenvalue from below and keeps `H - shift` positive definite.
    fn lowest_eigenpair(&mut self, v: &[T], tol: T) -> Result<(T, Vec<T>)> {
        let n = v.len();
        let vmin = v.iter().copied().fold(T::infinity(), T::min);
        let shift = vmin - T::lit(0.1);
        let mut x: Vec<T> = v.iter().map(|&vj| (-(vj - vmin)).exp()).collect();
        let mut y = vec![T::zero(); n];
        let mut hx = vec![T::zero(); n];
        let mut lambda = T::zero();
        for _ in 0..2000 {
            let nx = dot(&x, &x).sqrt();
            x.iter_mut().for_each(|e| *e /= nx);
            self.apply(v, T::zero(), &x, &mut hx);
            lambda = dot(&x, &hx);
            let res = x
                .iter()
                .zip(&hx)
                .map(|(&xj, &hj)| (hj - lambda * xj).abs())
                .fold(T::zero(), T::max);
            if res < tol {
                break;
            }
            self.pcg(v, shift, &x, &mut y)?;
            std::mem::swap(&mut x, &mut y);
        }
        if !lambda.is_finite() {
            return Err(Error::Numerical("inverse iteration produced a non-finite eigenvalue".into()));
        }
        // fix the sign; the ground state is nodeless
        if x.iter().copied().sum::<T>() < T::zero() {
            x.iter_mut().for_each(|e| *e = -*e);
        }
        let nx = (dot(&x, &x) * self.dx).sqrt();
        x.iter_mut().for_each(|e| *e /= nx);
        Ok((lambda, x))
    }

    /// Rayleigh quotient and L-infinity residual of the full nonlinear operator.
    fn nonlinear_residual(&mut self, problem: &EigenProblem<T>, a: &[T]) -> (T, T) {
        let v_eff = problem.effective_potential(a);
        let mut ha = vec![T::zero(); a.len()];
        self.apply(&v_eff, T::zero(), a, &mut ha);
        let omega = dot(a, &ha) / dot(a, a);
        let residual = a
            .iter()
            .zip(&ha)
            .map(|(&aj, &hj)| (hj - omega * aj).abs())
            .fold(T::zero(), T::max);
        (omega, residual)
    }
}
