use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Real;

/// Complex wavefunction sampled on a [`Grid`] at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveField<T: Real> {
    grid: Grid<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> WaveField<T> {
    pub fn new(grid: Grid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "field has {} samples but the grid has {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &Grid<T>) -> Self {
        Self {
            values: vec![Complex::new(T::zero(), T::zero()); grid.len()],
            grid: grid.clone(),
        }
    }

    pub fn from_real(grid: &Grid<T>, values: &[T]) -> Result<Self> {
        Self::new(grid.clone(), values.iter().map(|&v| Complex::new(v, T::zero())).collect())
    }

    /// `A(x) exp(i theta(x))` from modulus and phase samples.
    pub fn from_polar(grid: &Grid<T>, modulus: &[T], phase: &[T]) -> Result<Self> {
        if modulus.len() != phase.len() {
            return Err(Error::Config("modulus and phase lengths differ".into()));
        }
        Self::new(
            grid.clone(),
            modulus.iter().zip(phase).map(|(&a, &th)| Complex::from_polar(a, th)).collect(),
        )
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    /// `|psi_j|^2`.
    pub fn density(&self) -> Vec<T> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn modulus(&self) -> Vec<T> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    /// Real parts; meaningful for fields known to be real.
    pub fn real_part(&self) -> Vec<T> {
        self.values.iter().map(|z| z.re).collect()
    }

    /// Phase unwrapped along the grid, starting from `arg(psi_0)`.
    pub fn unwrapped_phase(&self) -> Vec<T> {
        let pi = T::PI();
        let tau = T::TAU();
        let mut out = Vec::with_capacity(self.values.len());
        let mut offset = T::zero();
        let mut prev: Option<T> = None;
        for z in &self.values {
            let raw = z.arg();
            if let Some(p) = prev {
                let mut d = raw + offset - p;
                while d > pi {
                    offset -= tau;
                    d -= tau;
                }
                while d < -pi {
                    offset += tau;
                    d += tau;
                }
            }
            let v = raw + offset;
            out.push(v);
            prev = Some(v);
        }
        out
    }

    /// Rectangle-rule norm `N = sum_j |psi_j|^2 dx`.
    pub fn norm(&self) -> T {
        self.values.iter().map(|z| z.norm_sqr()).sum::<T>() * self.grid.dx()
    }

    pub fn peak_density(&self) -> T {
        self.values.iter().map(|z| z.norm_sqr()).fold(T::zero(), T::max)
    }

    pub fn peak_amplitude(&self) -> T {
        self.peak_density().sqrt()
    }

    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        let mut best_val = T::neg_infinity();
        for (j, z) in self.values.iter().enumerate() {
            let d = z.norm_sqr();
            if d > best_val {
                best_val = d;
                best = j;
            }
        }
        best
    }

    /// Largest density at the two outermost samples of the periodic box.
    pub fn edge_density(&self) -> T {
        let n = self.values.len();
        self.values[0].norm_sqr().max(self.values[n - 1].norm_sqr())
    }

    /// Expectation value of `f(x)` against `|psi|^2`, unnormalised.
    pub fn moment(&self, f: impl Fn(T) -> T) -> T {
        self.grid
            .x()
            .iter()
            .zip(&self.values)
            .map(|(&x, z)| f(x) * z.norm_sqr())
            .sum::<T>()
            * self.grid.dx()
    }

    /// `integral weight(x_j) |psi_j|^2 dx` for a sampled weight.
    pub fn weighted_density_integral(&self, weight: &[T]) -> T {
        weight
            .iter()
            .zip(&self.values)
            .map(|(&w, z)| w * z.norm_sqr())
            .sum::<T>()
            * self.grid.dx()
    }

    pub fn scale(&mut self, factor: T) {
        self.values.iter_mut().for_each(|z| *z = z.scale(factor));
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&z| z * factor).collect(),
        }
    }

    /// Rescale so that `norm() == target`.
    pub fn normalize_to(&mut self, target: T) -> Result<()> {
        let n = self.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Degenerate(format!("cannot normalise a field of norm {n}")));
        }
        self.scale((target / n).sqrt());
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max_j |psi_j - phi_j|`.
    pub fn linf_distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Discrete L2 distance `sqrt(sum |psi - phi|^2 dx)`.
    pub fn l2_distance(&self, other: &Self) -> T {
        (self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<T>()
            * self.grid.dx())
        .sqrt()
    }
}
