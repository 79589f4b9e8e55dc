use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::spectral::Spectral;
use crate::error::{Error, Result};
use crate::normal::PrincipalSymbol;
use crate::transform::{DeltaProfile, Grid, ScalarField};

/// Frozen-coefficient inverse-symbol filter at the domain center x_c = 0.
///
/// The DFT multiplier is 1/((2π)^{2(n−1)} p(x_c, k)), which inverts the
/// amplitude of N on plane waves; k = 0 is replaced by the fundamental
/// frequency of the box.
pub struct Preconditioner {
    grid: Grid,
    spectral: Spectral,
    center: Vec<f64>,
    multiplier: Vec<f64>,
}

impl Preconditioner {
    pub fn new(symbol: &PrincipalSymbol, grid: &Grid) -> Result<Self> {
        Self::build(symbol, grid, None)
    }

    /// Also divides by the attenuation of the smoothed delta, T = ψ̂_η(|k|/c)²,
    /// floored at `floor`, so that the filter inverts the discrete operator's
    /// amplitude rather than the continuous one.
    pub fn with_transfer(symbol: &PrincipalSymbol, grid: &Grid, delta: &DeltaProfile, floor: f64) -> Result<Self> {
        if !(floor > 0.0 && floor <= 1.0) {
            return Err(Error::param("transfer floor", "must lie in (0, 1]"));
        }
        Self::build(symbol, grid, Some((*delta, floor)))
    }

    fn build(symbol: &PrincipalSymbol, grid: &Grid, transfer: Option<(DeltaProfile, f64)>) -> Result<Self> {
        let n = grid.dim();
        if symbol.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: symbol.dim(),
            });
        }
        let spectral = Spectral::new(grid);
        let center = vec![0.0; n];
        let k_min = spectral.fundamental();
        let scale = (2.0 * PI).powi(2 * (n as i32 - 1));
        let order = n as i32 - 1;
        let values: Vec<(f64, f64)> = (0..spectral.len())
            .into_par_iter()
            .map(|i| {
                let mut k = spectral.wavenumber(i);
                if k[..n].iter().all(|v| *v == 0.0) {
                    k[0] = k_min;
                }
                let v = symbol.evaluate(&center, &k[..n])?;
                let t = match transfer {
                    Some((delta, floor)) => {
                        let mag = k[..n].iter().map(|c| c * c).sum::<f64>().sqrt();
                        let ap = v.c_plus.powi(order) / v.h_plus * v.w_plus;
                        let am = v.c_minus.powi(order) / v.h_minus * v.w_minus;
                        let tp = delta.transfer(mag / v.c_plus).powi(2);
                        let tm = delta.transfer(mag / v.c_minus).powi(2);
                        ((ap * tp + am * tm) / (ap + am)).max(floor)
                    }
                    None => 1.0,
                };
                Ok((v.principal, t))
            })
            .collect::<Result<_>>()?;
        let min = values.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::NotElliptic { min });
        }
        let multiplier = values.iter().map(|(p, t)| 1.0 / (scale * p * t)).collect();
        Ok(Self {
            grid: *grid,
            spectral,
            center,
            multiplier,
        })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// DFT multiplier per flat frequency index.
    pub fn multiplier(&self) -> &[f64] {
        &self.multiplier
    }

    pub fn apply(&self, g: &ScalarField) -> Result<ScalarField> {
        g.check_grid(&self.grid)?;
        let mut data: Vec<Complex64> = g.values().iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.spectral.forward(&mut data);
        data.iter_mut().zip(&self.multiplier).for_each(|(c, m)| *c *= *m);
        self.spectral.inverse(&mut data);
        ScalarField::from_values(self.grid, data.iter().map(|c| c.re).collect())
    }
}

/// 1/p(x, ξ), the reciprocal of the principal symbol.
pub fn inverse_symbol(symbol: &PrincipalSymbol, x: &[f64], xi: &[f64]) -> Result<f64> {
    let p = symbol.eval(x, xi)?;
    if !(p > 0.0) {
        return Err(Error::NotElliptic { min: p });
    }
    Ok(1.0 / p)
}

/// Applies the inverse-symbol filter of `symbol` to `g`.
pub fn precondition(g: &ScalarField, symbol: &PrincipalSymbol) -> Result<ScalarField> {
    Preconditioner::new(symbol, g.grid())?.apply(g)
}
