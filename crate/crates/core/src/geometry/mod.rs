//! Defining functions, weights, and sampled checks of the Beylkin and global
//! Bolker conditions.
//!
//! The metric is the flat one on the box `M = [-L, L]ⁿ`, embedded in the padded
//! box `M₁ = [-L-pad, L+pad]ⁿ`.

mod bolker;
mod defining;
mod direction;
mod weight;

pub use bolker::{
    check_bolker, check_defining, BolkerReport, CollisionWitness, DefiningReport, InjectivityReport,
    SurjectivityReport, Witness, INJECTIVITY_THRESHOLD,
};
pub(crate) use defining::{det, grad_x_norm, norm};
pub use defining::{
    make_euclidean, make_perturbed, Bump, DefiningFunction, DefiningKind, Euclidean, Perturbed, PolarFold,
};
pub use direction::{angular_spacing, quadrature_weight, sample_directions, sphere_area, Direction, MAX_DIM};
pub(crate) use direction::{check_dim, tangent_basis};
pub use weight::{
    check_weight, weight_lower_bound, ConstantWeight, GaussianModulatedWeight, PerturbedWeight, ScaledWeight, Weight,
    WeightBound,
};

use crate::error::{Error, Result};

/// Default padding of M₁ relative to the half-width of M.
pub const DEFAULT_PAD_FACTOR: f64 = 0.25;

/// The reconstruction box M = [-L, L]ⁿ and its padded extension M₁.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    dim: usize,
    half_width: f64,
    pad: f64,
}

impl Domain {
    pub fn new(dim: usize, half_width: f64) -> Result<Self> {
        Self::with_pad_factor(dim, half_width, DEFAULT_PAD_FACTOR)
    }

    pub fn with_pad_factor(dim: usize, half_width: f64, pad_factor: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::param("L", "half-width must be positive"));
        }
        if !(pad_factor > 0.0) || !pad_factor.is_finite() {
            return Err(Error::param("pad", "pad factor must be positive"));
        }
        Ok(Self {
            dim,
            half_width,
            pad: pad_factor * half_width,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// L.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn pad(&self) -> f64 {
        self.pad
    }

    /// L + pad.
    pub fn outer_half_width(&self) -> f64 {
        self.half_width + self.pad
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|c| c.abs() <= self.half_width)
    }

    pub fn contains_outer(&self, x: &[f64]) -> bool {
        x.iter().all(|c| c.abs() <= self.outer_half_width())
    }

    /// Vertex-centered sample grid of M₁ with `per_axis` points per axis
    /// (boundary included).
    pub fn outer_sample_points(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let per_axis = per_axis.max(2);
        let a = self.outer_half_width();
        let step = 2.0 * a / (per_axis - 1) as f64;
        let total = per_axis.pow(self.dim as u32);
        (0..total)
            .map(|idx| {
                let mut rem = idx;
                let mut x = vec![0.0; self.dim];
                for c in x.iter_mut().rev() {
                    *c = -a + step * (rem % per_axis) as f64;
                    rem /= per_axis;
                }
                x
            })
            .collect()
    }
}
