//! Complex-potential engineering: closed-form trap families and the numeric
//! mapping from gain-loss functionals to `(W, theta)`.

mod families;
mod mapping;

pub use families::{
    absorb_into_real_potential, damped_trap, gaussian_ground_state, pt_symmetric_trap,
    stationary_residual, stationary_state, DampedTrapParams, TrapFamily, TAIL_LIMIT,
};
pub use mapping::{map_from_functional, FunctionalSpec, MappedPotential, TAIL_TRUST};
