//! Test objects sampled on a [`Grid`].
//!
//! The modified Shepp-Logan head uses the usual ten-ellipse table on
//! `[-1, 1]²` (scaled by the half-width L):
//!
//! | intensity | a      | b      | x₀    | y₀     | angle |
//! |-----------|--------|--------|-------|--------|-------|
//! |  1.0      | 0.69   | 0.92   | 0     | 0      | 0     |
//! | −0.8      | 0.6624 | 0.874  | 0     | −0.0184| 0     |
//! | −0.2      | 0.11   | 0.31   | 0.22  | 0      | −18°  |
//! | −0.2      | 0.16   | 0.41   | −0.22 | 0      | 18°   |
//! |  0.1      | 0.21   | 0.25   | 0     | 0.35   | 0     |
//! |  0.1      | 0.046  | 0.046  | 0     | 0.1    | 0     |
//! |  0.1      | 0.046  | 0.046  | 0     | −0.1   | 0     |
//! |  0.1      | 0.046  | 0.023  | −0.08 | −0.605 | 0     |
//! |  0.1      | 0.023  | 0.023  | 0     | −0.606 | 0     |
//! |  0.1      | 0.023  | 0.046  | 0.06  | −0.605 | 0     |

use crate::error::{Error, Result};
use crate::geometry::MAX_DIM;
use crate::transform::{Grid, ScalarField};

/// (intensity, a, b, x₀, y₀, angle in degrees).
pub const SHEPP_LOGAN: [[f64; 6]; 10] = [
    [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
    [-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0],
    [-0.2, 0.11, 0.31, 0.22, 0.0, -18.0],
    [-0.2, 0.16, 0.41, -0.22, 0.0, 18.0],
    [0.1, 0.21, 0.25, 0.0, 0.35, 0.0],
    [0.1, 0.046, 0.046, 0.0, 0.1, 0.0],
    [0.1, 0.046, 0.046, 0.0, -0.1, 0.0],
    [0.1, 0.046, 0.023, -0.08, -0.605, 0.0],
    [0.1, 0.023, 0.023, 0.0, -0.606, 0.0],
    [0.1, 0.023, 0.046, 0.06, -0.605, 0.0],
];

#[derive(Clone, Debug, PartialEq)]
pub enum Phantom {
    /// Indicator of a disk (n = 2) or ball (n = 3).
    Ball { center: Vec<f64>, radius: f64 },
    /// amplitude · exp(−|x − c|²/(2σ²)), truncated to M.
    Gaussian {
        center: Vec<f64>,
        sigma: f64,
        amplitude: f64,
    },
    /// Modified Shepp-Logan head, scaled to the half-width `scale`.
    SheppLogan { scale: f64 },
}

impl Phantom {
    pub fn disk(radius: f64) -> Self {
        Phantom::Ball {
            center: vec![0.0, 0.0],
            radius,
        }
    }

    pub fn ball(radius: f64) -> Self {
        Phantom::Ball {
            center: vec![0.0; 3],
            radius,
        }
    }

    pub fn gaussian(dim: usize, sigma: f64) -> Self {
        Phantom::Gaussian {
            center: vec![0.0; dim],
            sigma,
            amplitude: 1.0,
        }
    }

    /// Builds a named phantom: `disk`, `gaussian`, `shepp-logan` (n = 2) or `ball` (n = 3).
    pub fn by_name(name: &str, dim: usize, half_width: f64, size: f64) -> Result<Self> {
        match (name, dim) {
            ("disk", 2) => Ok(Phantom::disk(size)),
            ("ball", 3) => Ok(Phantom::ball(size)),
            ("gaussian", 2 | 3) => Ok(Phantom::gaussian(dim, size)),
            ("shepp-logan", 2) => Ok(Phantom::SheppLogan { scale: half_width }),
            _ => Err(Error::param(
                "phantom",
                format!("unknown phantom `{name}` for dimension {dim}"),
            )),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Phantom::Ball { center, .. } | Phantom::Gaussian { center, .. } => center.len(),
            Phantom::SheppLogan { .. } => 2,
        }
    }

    /// Pointwise value.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Phantom::Ball { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                if r2 <= radius * radius {
                    1.0
                } else {
                    0.0
                }
            }
            Phantom::Gaussian {
                center,
                sigma,
                amplitude,
            } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                amplitude * (-r2 / (2.0 * sigma * sigma)).exp()
            }
            Phantom::SheppLogan { scale } => {
                let (px, py) = (x[0] / scale, x[1] / scale);
                SHEPP_LOGAN
                    .iter()
                    .filter(|e| {
                        let (s, c) = e[5].to_radians().sin_cos();
                        let (dx, dy) = (px - e[3], py - e[4]);
                        let u = (dx * c + dy * s) / e[1];
                        let v = (-dx * s + dy * c) / e[2];
                        u * u + v * v <= 1.0
                    })
                    .map(|e| e[0])
                    .sum()
            }
        }
    }

    /// Cell averages over `supersample`ⁿ sub-cells, set to zero outside M.
    pub fn render(&self, grid: &Grid, supersample: usize) -> Result<ScalarField> {
        if self.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: self.dim(),
            });
        }
        let q = supersample.max(1);
        let n = grid.dim();
        let h = grid.spacing();
        let subs = q.pow(n as u32);
        let mut f = ScalarField::from_fn(*grid, |x| {
            let mut acc = 0.0;
            let mut y = [0.0; MAX_DIM];
            for k in 0..subs {
                let mut rem = k;
                for d in 0..n {
                    let i = rem % q;
                    rem /= q;
                    y[d] = x[d] + h * ((i as f64 + 0.5) / q as f64 - 0.5);
                }
                acc += self.value(&y[..n]);
            }
            acc / subs as f64
        });
        f.restrict_to_m();
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;

    #[test]
    fn disk_mass_is_area() {
        let g = Grid::new(Domain::new(2, 1.0).unwrap(), 128).unwrap();
        let f = Phantom::disk(1.0).render(&g, 4).unwrap();
        let mass: f64 = f.values().iter().sum::<f64>() * g.cell_volume();
        assert!((mass - std::f64::consts::PI).abs() < 2e-3);
    }

    #[test]
    fn gaussian_peak_and_shepp_logan_range() {
        let g = Grid::new(Domain::new(2, 1.0).unwrap(), 65).unwrap();
        let f = Phantom::gaussian(2, 0.3).render(&g, 1).unwrap();
        let max = f.values().iter().cloned().fold(0.0, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
        let sl = Phantom::SheppLogan { scale: 1.0 }.render(&g, 3).unwrap();
        assert!(sl.values().iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
        assert!(Phantom::by_name("shepp-logan", 3, 1.0, 0.0).is_err());
    }
}
