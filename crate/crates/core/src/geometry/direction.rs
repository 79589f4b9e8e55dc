use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 3;

/// A unit vector θ ∈ S^{n-1}, n ∈ {2, 3}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    dim: usize,
    coords: [f64; MAX_DIM],
}

impl Direction {
    /// Normalizes `v` onto the sphere.
    pub fn new(v: &[f64]) -> Result<Self> {
        check_dim(v.len())?;
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::param("direction", "zero or non-finite vector"));
        }
        let mut coords = [0.0; MAX_DIM];
        for (c, vi) in coords.iter_mut().zip(v) {
            *c = vi / norm;
        }
        Ok(Self { dim: v.len(), coords })
    }

    /// Accepts an already normalized vector as-is (|v| = 1 within 1e-12).
    pub fn from_unit(v: &[f64]) -> Result<Self> {
        check_dim(v.len())?;
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(Error::param("direction", "not a unit vector"));
        }
        let mut coords = [0.0; MAX_DIM];
        coords[..v.len()].copy_from_slice(v);
        Ok(Self { dim: v.len(), coords })
    }

    pub fn from_angle(alpha: f64) -> Self {
        Self {
            dim: 2,
            coords: [alpha.cos(), alpha.sin(), 0.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    /// Polar angle in [0, 2π) for planar directions.
    pub fn angle(&self) -> Option<f64> {
        (self.dim == 2).then(|| self.coords[1].atan2(self.coords[0]).rem_euclid(2.0 * PI))
    }

    pub fn negated(&self) -> Self {
        let mut coords = self.coords;
        coords.iter_mut().for_each(|c| *c = -*c);
        Self { dim: self.dim, coords }
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.as_slice().iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Angle between two directions.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        self.dot(other.as_slice()).clamp(-1.0, 1.0).acos()
    }
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// Surface measure of S^{n-1}.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => f64::NAN,
    }
}

/// Deterministic direction sampling: uniform angles on S¹, Fibonacci lattice on S².
pub fn sample_directions(dim: usize, count: usize) -> Result<Vec<Direction>> {
    check_dim(dim)?;
    if count == 0 {
        return Err(Error::param("n_theta", "must be positive"));
    }
    Ok(match dim {
        2 => (0..count)
            .map(|j| Direction::from_angle(2.0 * PI * j as f64 / count as f64))
            .collect(),
        _ => fibonacci_sphere(count),
    })
}

fn fibonacci_sphere(count: usize) -> Vec<Direction> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|j| {
            let z = 1.0 - (2 * j + 1) as f64 / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let a = golden * j as f64;
            Direction {
                dim: 3,
                coords: [r * a.cos(), r * a.sin(), z],
            }
        })
        .collect()
}

/// Equal-area quadrature weight attached to each of `count` sampled directions.
pub fn quadrature_weight(dim: usize, count: usize) -> f64 {
    sphere_area(dim) / count as f64
}

/// Typical angular spacing of `count` samples: 2π/count on S¹, √(4π/count) on S².
pub fn angular_spacing(dim: usize, count: usize) -> f64 {
    match dim {
        2 => 2.0 * PI / count as f64,
        _ => (4.0 * PI / count as f64).sqrt(),
    }
}

/// Orthonormal basis of the tangent space T_θ S^{n-1}, written into `out` as
/// `n - 1` row vectors of length `n`.
pub(crate) fn tangent_basis(theta: &[f64], out: &mut [[f64; MAX_DIM]; MAX_DIM - 1]) {
    match theta.len() {
        2 => {
            out[0] = [-theta[1], theta[0], 0.0];
        }
        _ => {
            // pick the coordinate axis least aligned with θ
            let mut axis = [0.0; 3];
            let k = (0..3)
                .min_by(|&a, &b| theta[a].abs().total_cmp(&theta[b].abs()))
                .unwrap_or(0);
            axis[k] = 1.0;
            let d: f64 = (0..3).map(|i| axis[i] * theta[i]).sum();
            let mut e1 = [0.0; 3];
            for i in 0..3 {
                e1[i] = axis[i] - d * theta[i];
            }
            let n1 = (e1.iter().map(|c| c * c).sum::<f64>()).sqrt();
            e1.iter_mut().for_each(|c| *c /= n1);
            let e2 = [
                theta[1] * e1[2] - theta[2] * e1[1],
                theta[2] * e1[0] - theta[0] * e1[2],
                theta[0] * e1[1] - theta[1] * e1[0],
            ];
            out[0] = e1;
            out[1] = e2;
        }
    }
}
