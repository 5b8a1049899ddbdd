//! Linear and nonlinear Schrödinger dynamics in complex non-Hermitian
//! harmonic traps.
//!
//! The numerical core is generic over the floating-point scalar ([`Real`]);
//! the aliases at the crate root fix it to `f64`, which is what the runner and
//! the command-line tools use.

pub mod config;
pub mod error;
pub mod field;
pub mod evolve;
pub mod grid;
pub mod observables;
pub mod potential;
pub mod potentials;
pub mod runner;
pub mod scalar;
pub mod stationary;

pub use error::{Error, Result};
pub use config::RunConfig;
pub use observables::{Fate, TimeSeries};
pub use runner::{analyze, run, RunOutput};
pub use scalar::Real;

pub type Grid = grid::Grid<f64>;
pub type WaveField = field::WaveField<f64>;
pub type ComplexPotential = potential::ComplexPotential<f64>;
pub type Spectral = grid::Spectral<f64>;
pub type Complex = num_complex::Complex<f64>;
