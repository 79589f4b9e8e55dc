use crate::error::{Error, Result};
use crate::geometry::{quadrature_weight, sample_directions, DefiningFunction, Direction};
use crate::transform::grid::Grid;

/// Triangular smoothed delta ψ_η(t) = max(0, 1 − |t|/η)/η.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaProfile {
    eta: f64,
}

impl DeltaProfile {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::param("eta", "half-width must be positive"));
        }
        Ok(Self { eta })
    }

    /// η = factor · h.
    pub fn for_grid(grid: &Grid, factor: f64) -> Result<Self> {
        Self::new(factor * grid.spacing())
    }

    pub fn half_width(&self) -> f64 {
        self.eta
    }

    pub fn eval(&self, t: f64) -> f64 {
        let u = 1.0 - t.abs() / self.eta;
        if u > 0.0 {
            u / self.eta
        } else {
            0.0
        }
    }

    /// Fourier transform ψ̂_η(σ) = sinc²(ση/2), the attenuation applied to an
    /// s-frequency σ by the smoothing.
    pub fn transfer(&self, sigma: f64) -> f64 {
        let u = 0.5 * sigma * self.eta;
        if u.abs() < 1e-8 {
            1.0
        } else {
            let s = u.sin() / u;
            s * s
        }
    }
}

/// Sampling of Σ = ℝ × S^{n−1}: a uniform s axis and a direction table.
#[derive(Clone, Debug, PartialEq)]
pub struct SinogramLayout {
    s0: f64,
    ds: f64,
    n_s: usize,
    directions: Vec<Direction>,
    delta: DeltaProfile,
}

impl SinogramLayout {
    pub fn new(s0: f64, ds: f64, n_s: usize, directions: Vec<Direction>, delta: DeltaProfile) -> Result<Self> {
        if !(ds > 0.0) || !s0.is_finite() || n_s < 2 {
            return Err(Error::param("layout", "need ds > 0, finite s0 and n_s >= 2"));
        }
        let Some(first) = directions.first() else {
            return Err(Error::param("layout", "empty direction table"));
        };
        let dim = first.dim();
        if directions.iter().any(|d| d.dim() != dim) {
            return Err(Error::param("layout", "mixed direction dimensions"));
        }
        Ok(Self {
            s0,
            ds,
            n_s,
            directions,
            delta,
        })
    }

    /// Layout with Δs = h, η = `eta_factor`·h and an s range covering every level
    /// set that meets the grid, plus a margin of η + 2Δs.
    pub fn covering(df: &dyn DefiningFunction, grid: &Grid, n_theta: usize, eta_factor: f64) -> Result<Self> {
        if df.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: df.dim(),
            });
        }
        let directions = sample_directions(grid.dim(), n_theta)?;
        let delta = DeltaProfile::for_grid(grid, eta_factor)?;
        let ds = grid.spacing();
        let n = grid.dim();
        // φ over cell centers and the corners of M₁
        let mut points: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)[..n].to_vec()).collect();
        points.extend(grid.domain().outer_sample_points(2));
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for d in &directions {
            for x in &points {
                let v = df.eval(x, d.as_slice());
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::param("layout", "defining function is not finite on the grid"));
        }
        let margin = delta.half_width() + 2.0 * ds;
        let s0 = lo - margin;
        let n_s = ((hi + margin - s0) / ds).ceil() as usize + 1;
        Self::new(s0, ds, n_s, directions, delta)
    }

    pub fn dim(&self) -> usize {
        self.directions[0].dim()
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn ds(&self) -> f64 {
        self.ds
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_theta(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn delta(&self) -> &DeltaProfile {
        &self.delta
    }

    pub fn s(&self, k: usize) -> f64 {
        self.s0 + self.ds * k as f64
    }

    pub fn len(&self) -> usize {
        self.n_s * self.n_theta()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sphere quadrature weight ω attached to each direction.
    pub fn theta_weight(&self) -> f64 {
        quadrature_weight(self.dim(), self.n_theta())
    }

    pub fn with_delta(&self, delta: DeltaProfile) -> Self {
        Self { delta, ..self.clone() }
    }
}

/// Samples of R_w f on a [`SinogramLayout`], s-major: `values[k * n_θ + j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sinogram {
    layout: SinogramLayout,
    values: Vec<f64>,
    defining: String,
    weight: String,
}

impl Sinogram {
    pub fn zeros(layout: SinogramLayout) -> Self {
        Self {
            values: vec![0.0; layout.len()],
            layout,
            defining: String::new(),
            weight: String::new(),
        }
    }

    pub fn from_values(layout: SinogramLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::LayoutMismatch(format!(
                "sinogram has {} values, layout has {}",
                values.len(),
                layout.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("sinogram", "values must be finite"));
        }
        Ok(Self {
            layout,
            values,
            defining: String::new(),
            weight: String::new(),
        })
    }

    pub fn with_metadata(mut self, defining: impl Into<String>, weight: impl Into<String>) -> Self {
        self.defining = defining.into();
        self.weight = weight.into();
        self
    }

    pub fn layout(&self) -> &SinogramLayout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.layout.n_theta() + j]
    }

    /// Defining-function identifier.
    pub fn defining(&self) -> &str {
        &self.defining
    }

    pub fn weight(&self) -> &str {
        &self.weight
    }

    /// Column θ_j as a function of s.
    pub fn column(&self, j: usize) -> Vec<f64> {
        let nt = self.layout.n_theta();
        (0..self.layout.n_s()).map(|k| self.values[k * nt + j]).collect()
    }

    /// ⟨g₁, g₂⟩ = Σ Δs ω g₁ g₂.
    pub fn dot(&self, other: &Sinogram) -> f64 {
        self.layout.ds()
            * self.layout.theta_weight()
            * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn check_layout(&self, layout: &SinogramLayout) -> Result<()> {
        if &self.layout != layout {
            return Err(Error::LayoutMismatch(
                "sinogram layout differs from operator layout".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_has_unit_mass() {
        let d = DeltaProfile::new(0.3).unwrap();
        let n = 60_000;
        let step = 0.6 / n as f64;
        let mass: f64 = (0..n).map(|i| d.eval(-0.3 + (i as f64 + 0.5) * step) * step).sum();
        assert!((mass - 1.0).abs() < 1e-9);
        assert_eq!(d.eval(0.3), 0.0);
        assert_eq!(d.transfer(0.0), 1.0);
    }

    #[test]
    fn integer_ratio_partition_of_unity() {
        // Σ_k Δs ψ_η(s_k − t) = 1 when η/Δs is an integer
        let d = DeltaProfile::new(0.2).unwrap();
        for t in [0.0, 0.013, 0.05, 0.0999] {
            let sum: f64 = (-10..=10).map(|k| 0.1 * d.eval(0.1 * k as f64 - t)).sum();
            assert!((sum - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn transfer_matches_numerical_transform() {
        let d = DeltaProfile::new(0.25).unwrap();
        let sigma = 7.0;
        let n = 20_000;
        let step = 0.5 / n as f64;
        let ft: f64 = (0..n)
            .map(|i| {
                let t = -0.25 + (i as f64 + 0.5) * step;
                d.eval(t) * (sigma * t).cos() * step
            })
            .sum();
        assert!((ft - d.transfer(sigma)).abs() < 1e-7);
    }
}
