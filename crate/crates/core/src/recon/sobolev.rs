use num_complex::Complex64;

use super::spectral::Spectral;
use crate::error::{Error, Result};
use crate::transform::{Grid, ScalarField};
use crate::window::smooth_step;

/// Order m ≥ 0 of the H^m norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevOrder(f64);

impl SobolevOrder {
    pub fn new(m: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::param("sobolev order", format!("{m} is not a finite value >= 0")));
        }
        Ok(Self(m))
    }

    /// m = n − 1.
    pub fn for_dim(dim: usize) -> Self {
        Self(dim.saturating_sub(1) as f64)
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Smooth cutoff equal to 1 away from ∂M₁ and vanishing on it, with a
/// transition layer of width pad/2.
pub fn roll_off(grid: &Grid) -> Vec<f64> {
    let n = grid.dim();
    let a = grid.domain().outer_half_width();
    let width = 0.5 * grid.domain().pad();
    (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            x[..n].iter().map(|c| smooth_step((a - c.abs()) / width)).product()
        })
        .collect()
}

/// Sobolev weighting S with ⟨u, S u⟩ = ‖u‖²_{H^m}, precomputed for a grid.
pub struct SobolevWeighting {
    grid: Grid,
    spectral: Spectral,
    rho: Option<Vec<f64>>,
    weights: Vec<f64>,
}

impl SobolevWeighting {
    /// Uses the roll-off of [`roll_off`].
    pub fn new(grid: &Grid, order: SobolevOrder) -> Self {
        Self::build(grid, order, Some(roll_off(grid)))
    }

    /// Plain periodic norm on the torus M₁, without roll-off.
    pub fn periodic(grid: &Grid, order: SobolevOrder) -> Self {
        Self::build(grid, order, None)
    }

    fn build(grid: &Grid, order: SobolevOrder, rho: Option<Vec<f64>>) -> Self {
        let spectral = Spectral::new(grid);
        let n = grid.dim();
        let weights = (0..spectral.len())
            .map(|i| {
                let k = spectral.wavenumber(i);
                let k2: f64 = k[..n].iter().map(|v| v * v).sum();
                (1.0 + k2).powf(order.value())
            })
            .collect();
        Self {
            grid: *grid,
            spectral,
            rho,
            weights,
        }
    }

    fn spectrum(&self, f: &ScalarField) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = match &self.rho {
            Some(rho) => f
                .values()
                .iter()
                .zip(rho)
                .map(|(v, r)| Complex64::new(v * r, 0.0))
                .collect(),
            None => f.values().iter().map(|v| Complex64::new(*v, 0.0)).collect(),
        };
        self.spectral.forward(&mut data);
        data
    }

    pub fn norm(&self, f: &ScalarField) -> Result<f64> {
        f.check_grid(&self.grid)?;
        let spec = self.spectrum(f);
        let total: f64 = spec.iter().zip(&self.weights).map(|(c, w)| w * c.norm_sqr()).sum();
        Ok((total * self.grid.cell_volume() / spec.len() as f64).sqrt())
    }

    /// S f, self-adjoint in the hⁿ-weighted inner product.
    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField> {
        f.check_grid(&self.grid)?;
        let mut spec = self.spectrum(f);
        spec.iter_mut().zip(&self.weights).for_each(|(c, w)| *c *= *w);
        self.spectral.inverse(&mut spec);
        let values = match &self.rho {
            Some(rho) => spec.iter().zip(rho).map(|(c, r)| c.re * r).collect(),
            None => spec.iter().map(|c| c.re).collect(),
        };
        ScalarField::from_values(self.grid, values)
    }
}

/// ‖f‖_{H^m(M₁)} from the DFT of the rolled-off field on the periodic box.
pub fn sobolev_norm(f: &ScalarField, order: SobolevOrder) -> f64 {
    SobolevWeighting::new(f.grid(), order).norm(f).expect("field grid")
}

/// ‖f‖_{H^m} on the torus M₁, without roll-off.
pub fn sobolev_norm_periodic(f: &ScalarField, order: SobolevOrder) -> f64 {
    SobolevWeighting::periodic(f.grid(), order).norm(f).expect("field grid")
}
