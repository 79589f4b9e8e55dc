//! Discretization of R_w over level sets H_{s,θ} = {x ∈ M₁ : φ(x, θ) = s} and
//! of its backprojection.

mod grid;
pub mod io;
mod radon;
mod sinogram;

pub use grid::{Grid, ScalarField};
pub use radon::{jacobian, RadonTransform, CLIP_TOL, LEAKAGE_TOL};
pub use sinogram::{DeltaProfile, Sinogram, SinogramLayout};
