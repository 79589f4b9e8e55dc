//! Sobolev norms, inverse-symbol preconditioning, conjugate-gradient inversion
//! of the normal equations, stability constants and perturbation sweeps.

mod cg;
mod precond;
mod sobolev;
mod spectral;
mod stability;
mod sweep;

pub use cg::{cg_normal_solve, CgOptions, CgResult, CgStep};
pub use precond::{inverse_symbol, precondition, Preconditioner};
pub use sobolev::{roll_off, sobolev_norm, sobolev_norm_periodic, SobolevOrder, SobolevWeighting};
pub use stability::{estimate_stability_constant, StabilityReport, NONINJECTIVE_SIGMA};
pub use sweep::{
    perturbation_sweep, PerturbationFamily, PerturbationSweep, SweepOptions, SweepRow, MAX_DISTANCE_ORDER,
};
