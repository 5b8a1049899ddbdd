//! Uniform periodic 1D mesh and the spectral machinery built on it.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform periodic mesh on `[x_min, x_max)` with its FFT wavenumbers.
///
/// Points are `x_j = x_min + j dx` for `j = 0..n_points`; `x_max` itself is the
/// periodic image of `x_min` and is not sampled.
#[derive(Clone, PartialEq)]
pub struct Grid<T> {
    x_min: T,
    x_max: T,
    n_points: usize,
    dx: T,
    x: Arc<[T]>,
    k: Arc<[T]>,
}

impl<T: Real> Grid<T> {
    pub const MIN_POINTS: usize = 16;

    pub fn new(x_min: T, x_max: T, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::Config(format!(
                "degenerate interval [{x_min}, {x_max}]: x_max must exceed x_min"
            )));
        }
        if n_points < Self::MIN_POINTS || !n_points.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_points = {n_points} must be a power of two and at least {}",
                Self::MIN_POINTS
            )));
        }
        let length = x_max - x_min;
        let dx = length / T::of_usize(n_points);
        let x: Arc<[T]> = (0..n_points).map(|j| x_min + T::of_usize(j) * dx).collect();
        let dk = T::TAU() / length;
        let half = n_points / 2;
        let k: Arc<[T]> = (0..n_points)
            .map(|j| {
                if j < half {
                    T::of_usize(j) * dk
                } else {
                    -(T::of_usize(n_points - j) * dk)
                }
            })
            .collect();
        Ok(Self { x_min, x_max, n_points, dx, x, k })
    }

    #[inline]
    pub fn x_min(&self) -> T {
        self.x_min
    }

    #[inline]
    pub fn x_max(&self) -> T {
        self.x_max
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn length(&self) -> T {
        self.x_max - self.x_min
    }

    /// Sample positions.
    #[inline]
    pub fn x(&self) -> &[T] {
        &self.x
    }

    /// Angular wavenumbers in standard FFT ordering (`0, dk, .., -dk`).
    #[inline]
    pub fn k(&self) -> &[T] {
        &self.k
    }

    /// Index of the Nyquist mode, which has no `+k` partner.
    pub fn nyquist_index(&self) -> usize {
        self.n_points / 2
    }

    /// Index of the grid point closest to `x0`, clamped into the mesh.
    pub fn nearest_index(&self, x0: T) -> usize {
        let j = ((x0 - self.x_min) / self.dx).round();
        if j <= T::zero() {
            0
        } else {
            let j = j.to_usize().unwrap_or(usize::MAX);
            j.min(self.n_points - 1)
        }
    }

    /// Index `j'` such that `x_{j'} = -x_j`, if the mesh contains the mirror point.
    pub fn mirror_index(&self, j: usize) -> Option<usize> {
        let target = -self.x[j];
        let m = self.nearest_index(target);
        let tol = self.dx * T::lit(1e-6);
        ((self.x[m] - target).abs() <= tol).then_some(m)
    }

    /// Rectangle-rule quadrature `sum_j f_j dx`.
    pub fn integrate(&self, values: &[T]) -> T {
        debug_assert_eq!(values.len(), self.n_points);
        values.iter().copied().sum::<T>() * self.dx
    }

    /// Rectangle-rule quadrature of a function evaluated at the sample points.
    pub fn integrate_fn(&self, f: impl Fn(T) -> T) -> T {
        self.x.iter().map(|&x| f(x)).sum::<T>() * self.dx
    }

    /// Rebuild the same interval at a different resolution.
    pub fn with_points(&self, n_points: usize) -> Result<Self> {
        Self::new(self.x_min, self.x_max, n_points)
    }
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("x_min", &self.x_min)
            .field("x_max", &self.x_max)
            .field("n_points", &self.n_points)
            .field("dx", &self.dx)
            .finish()
    }
}

/// Forward/inverse FFT pair bound to a grid, with normalisation folded into
/// the inverse so that `inverse(forward(f)) == f`.
pub struct Spectral<T: Real> {
    k: Arc<[T]>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
    scale: T,
}

impl<T: Real> Spectral<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        let n = grid.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            k: grid.k.clone(),
            forward,
            inverse,
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
            scale: T::one() / T::of_usize(n),
        }
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn wavenumbers(&self) -> &[T] {
        &self.k
    }

    pub fn forward(&mut self, data: &mut [Complex<T>]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    /// Inverse transform including the `1/n` factor.
    pub fn inverse(&mut self, data: &mut [Complex<T>]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
        let s = self.scale;
        data.iter_mut().for_each(|z| *z = z.scale(s));
    }

    /// Multiply by `multiplier(k)` in Fourier space.
    pub fn apply_symbol(&mut self, data: &mut [Complex<T>], multiplier: impl Fn(T) -> Complex<T>) {
        self.forward(data);
        for (z, &k) in data.iter_mut().zip(self.k.iter()) {
            *z = *z * multiplier(k);
        }
        self.inverse(data);
    }

    /// Spectral first derivative of complex samples. The Nyquist mode is
    /// dropped so real input stays real.
    pub fn derivative_complex(&mut self, data: &mut [Complex<T>]) {
        let nyq = self.k.len() / 2;
        self.forward(data);
        for (j, (z, &k)) in data.iter_mut().zip(self.k.iter()).enumerate() {
            *z = if j == nyq {
                Complex::new(T::zero(), T::zero())
            } else {
                Complex::new(-z.im * k, z.re * k)
            };
        }
        self.inverse(data);
    }

    /// Spectral second derivative of complex samples.
    pub fn second_derivative_complex(&mut self, data: &mut [Complex<T>]) {
        self.apply_symbol(data, |k| Complex::new(-(k * k), T::zero()));
    }

    pub fn derivative(&mut self, f: &[T]) -> Vec<T> {
        let mut buf = to_complex(f);
        self.derivative_complex(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    pub fn second_derivative(&mut self, f: &[T]) -> Vec<T> {
        let mut buf = to_complex(f);
        self.second_derivative_complex(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }
    /// Antiderivative `G(x) = integral_{x_min}^{x} f` with spectral accuracy for
    /// smooth `f` whose periodic part is resolved; the mean of `f` is integrated
    /// exactly as a linear ramp.
    pub fn antiderivative(&mut self, f: &[T], dx: T) -> Vec<T> {
        let n = f.len();
        let mean = f.iter().copied().sum::<T>() / T::of_usize(n);
        let mut buf: Vec<Complex<T>> = f.iter().map(|&v| Complex::new(v - mean, T::zero())).collect();
        let nyq = n / 2;
        self.forward(&mut buf);
        for (j, (z, &k)) in buf.iter_mut().zip(self.k.iter()).enumerate() {
            *z = if j == 0 || j == nyq {
                Complex::new(T::zero(), T::zero())
            } else {
                // divide by i k
                Complex::new(z.im / k, -z.re / k)
            };
        }
        self.inverse(&mut buf);
        let g0 = buf[0].re;
        buf.iter()
            .enumerate()
            .map(|(j, z)| z.re - g0 + mean * dx * T::of_usize(j))
            .collect()
    }
}

pub(crate) fn to_complex<T: Real>(f: &[T]) -> Vec<Complex<T>> {
    f.iter().map(|&v| Complex::new(v, T::zero())).collect()
}
