use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Real;

/// Sampled complex potential `V(x) + i W(x)`, optionally carrying the phase
/// `theta(x)` of the stationary state it was engineered for.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPotential<T: Real> {
    grid: Grid<T>,
    v: Vec<T>,
    w: Vec<T>,
    theta: Option<Vec<T>>,
}

impl<T: Real> ComplexPotential<T> {
    pub fn new(grid: Grid<T>, v: Vec<T>, w: Vec<T>, theta: Option<Vec<T>>) -> Result<Self> {
        let n = grid.len();
        let bad = v.len() != n || w.len() != n || theta.as_ref().is_some_and(|t| t.len() != n);
        if bad {
            return Err(Error::Config(format!("potential arrays must have {n} samples")));
        }
        let finite = v.iter().chain(&w).chain(theta.iter().flatten()).all(|x| x.is_finite());
        if !finite {
            return Err(Error::Numerical("potential contains non-finite samples".into()));
        }
        Ok(Self { grid, v, w, theta })
    }

    /// Build from closures evaluated at the grid points.
    pub fn from_fns(
        grid: &Grid<T>,
        v: impl Fn(T) -> T,
        w: impl Fn(T) -> T,
        theta: Option<&dyn Fn(T) -> T>,
    ) -> Result<Self> {
        let x = grid.x();
        Self::new(
            grid.clone(),
            x.iter().map(|&x| v(x)).collect(),
            x.iter().map(|&x| w(x)).collect(),
            theta.map(|th| x.iter().map(|&x| th(x)).collect()),
        )
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn v(&self) -> &[T] {
        &self.v
    }

    pub fn w(&self) -> &[T] {
        &self.w
    }

    pub fn theta(&self) -> Option<&[T]> {
        self.theta.as_deref()
    }

    /// `max_j |W(x_j) + W(-x_j)|` over mirror pairs present on the grid.
    pub fn odd_defect_w(&self) -> T {
        self.mirror_pairs()
            .map(|(j, m)| (self.w[j] + self.w[m]).abs())
            .fold(T::zero(), T::max)
    }

    /// `max_j |V(x_j) - V(-x_j)|` over mirror pairs present on the grid.
    pub fn even_defect_v(&self) -> T {
        self.mirror_pairs()
            .map(|(j, m)| (self.v[j] - self.v[m]).abs())
            .fold(T::zero(), T::max)
    }

    fn mirror_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.grid.len()).filter_map(|j| self.grid.mirror_index(j).map(|m| (j, m)))
    }
}
