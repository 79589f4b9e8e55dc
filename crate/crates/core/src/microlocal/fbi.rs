use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{linear_fit, LineFit};
use crate::geometry::Direction;
use crate::recon::roll_off;
use crate::transform::io::fmt_f64;
use crate::transform::ScalarField;

/// Magnitudes below this fraction of ‖χf‖₁ are treated as round-off.
pub const MAGNITUDE_FLOOR: f64 = 1e-12;
/// e-folds of exponential decay beyond the best power law, across the used
/// ladder, at which the exponential model wins.
pub const EXCESS_EFOLDS: f64 = 1.0;

/// Power laws steeper than λ^{−(n+1)} are not told apart from exponential decay.
pub fn steepest_power(dim: usize) -> f64 {
    (dim + 1) as f64
}

/// Below this every magnitude counts as zero and no fit is attempted.
pub const DEGENERATE_FLOOR: f64 = 1e-300;

/// Largest resolvable λ, with λh ≤ π/2.
pub fn fbi_limit(f: &ScalarField) -> f64 {
    0.5 * PI / f.grid().spacing()
}

/// λ_k = 8·2^{k/2} up to the resolvable limit.
pub fn default_ladder(f: &ScalarField) -> Vec<f64> {
    let limit = fbi_limit(f);
    (0..)
        .map(|k| 8.0 * 2f64.powf(0.5 * k as f64))
        .take_while(|l| *l <= limit)
        .collect()
}

fn check_point(f: &ScalarField, x0: &[f64]) -> Result<()> {
    let n = f.grid().dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    let a = f.grid().domain().outer_half_width();
    if x0.iter().any(|c| !(c.abs() < a)) {
        return Err(Error::param("x0", "must lie in the interior of M1"));
    }
    Ok(())
}

fn check_lambda(f: &ScalarField, lambda: f64) -> Result<()> {
    let limit = fbi_limit(f);
    if !(lambda > 0.0) {
        return Err(Error::param("lambda", "must be positive"));
    }
    if lambda > limit {
        return Err(Error::Nyquist { lambda, limit });
    }
    Ok(())
}

fn fbi_unchecked(f: &ScalarField, chi: &[f64], x0: &[f64], xi: &[f64], lambda: f64) -> Complex64 {
    let grid = f.grid();
    let n = grid.dim();
    let mut acc = Complex64::default();
    for (i, (v, c)) in f.values().iter().zip(chi).enumerate() {
        if *v == 0.0 || *c == 0.0 {
            continue;
        }
        let y = grid.point(i);
        let (mut phase, mut r2) = (0.0, 0.0);
        for d in 0..n {
            let dx = x0[d] - y[d];
            phase += dx * xi[d];
            r2 += dx * dx;
        }
        acc += Complex64::from_polar((-0.5 * lambda * r2).exp() * c * v, lambda * phase);
    }
    acc * grid.cell_volume()
}

/// F(λ) = Σ e^{iλ(x₀−y)·ξ̂} e^{−λ|x₀−y|²/2} χ(y) f(y) hⁿ.
///
/// χ is the fixed cutoff of [`roll_off`]: 1 on M and beyond, vanishing on ∂M₁.
pub fn fbi(f: &ScalarField, x0: &[f64], xi: &[f64], lambda: f64) -> Result<Complex64> {
    check_point(f, x0)?;
    check_lambda(f, lambda)?;
    let dir = Direction::new(xi)?;
    Ok(fbi_unchecked(f, &roll_off(f.grid()), x0, dir.as_slice(), lambda))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Exponential decay wins.
    AnalyticRegular,
    /// A power law explains the decay.
    WavefrontSuspect,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::AnalyticRegular => "analytic-regular",
            Verdict::WavefrontSuspect => "wavefront-suspect",
        }
    }
}

/// Both decay models fitted for one direction.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionFit {
    pub direction: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// Ladder points above the round-off floor.
    pub used: usize,
    /// c in |F| ≈ A e^{−cλ}.
    pub exp_rate: f64,
    pub exp_sse: f64,
    /// q in |F| ≈ B λ^{−q}.
    pub poly_exponent: f64,
    pub poly_sse: f64,
    /// b in |F| ≈ C λ^{−q} e^{−bλ}.
    pub excess_rate: f64,
    /// excess_rate times the span of the used ladder.
    pub excess_efolds: f64,
    pub verdict: Verdict,
}

impl DirectionFit {
    /// excess_rate times the span of the used ladder; at least
    /// [`EXCESS_EFOLDS`] favours exponential decay.
    pub fn score(&self) -> f64 {
        self.excess_efolds
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FbiScan {
    pub x0: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub fits: Vec<DirectionFit>,
}

impl FbiScan {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("direction,lambda,magnitude,exp_rate,poly_exponent,excess_rate,verdict\n");
        for (d, fit) in self.fits.iter().enumerate() {
            for (l, m) in self.lambdas.iter().zip(&fit.magnitudes) {
                s.push_str(&format!(
                    "{d},{},{},{},{},{},{}\n",
                    fmt_f64(*l),
                    fmt_f64(*m),
                    fmt_f64(fit.exp_rate),
                    fmt_f64(fit.poly_exponent),
                    fmt_f64(fit.excess_rate),
                    fit.verdict.as_str()
                ));
            }
        }
        s
    }
}

/// b in ln|F| ≈ a − q ln λ − bλ, fitted by least squares.
fn combined_rate(ls: &[f64], logs: &[f64]) -> f64 {
    if ls.len() < 3 {
        return f64::NAN;
    }
    let design = DMatrix::from_fn(ls.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => -ls[i].ln(),
        _ => -ls[i],
    });
    let rhs = DVector::from_column_slice(logs);
    design.svd(true, true).solve(&rhs, 1e-12).map_or(f64::NAN, |c| c[2])
}

fn classify(direction: Vec<f64>, lambdas: &[f64], magnitudes: Vec<f64>, floor: f64) -> DirectionFit {
    let dim = direction.len();
    let (ls, logs): (Vec<f64>, Vec<f64>) = lambdas
        .iter()
        .zip(&magnitudes)
        .filter(|(_, m)| **m > floor)
        .map(|(l, m)| (*l, m.ln()))
        .unzip();
    let used = ls.len();
    let lnl: Vec<f64> = ls.iter().map(|l| l.ln()).collect();
    let nan = LineFit {
        slope: f64::NAN,
        intercept: f64::NAN,
        r2: f64::NAN,
        sse: f64::NAN,
    };
    let exp = linear_fit(&ls, &logs).unwrap_or(nan);
    let poly = linear_fit(&lnl, &logs).unwrap_or(nan);
    let excess_rate = combined_rate(&ls, &logs);
    let span = if used > 1 { ls[used - 1] - ls[0] } else { 0.0 };
    let exponential = used < 3 || excess_rate * span >= EXCESS_EFOLDS || -poly.slope > steepest_power(dim);
    DirectionFit {
        direction,
        magnitudes,
        used,
        exp_rate: -exp.slope,
        exp_sse: exp.sse,
        poly_exponent: -poly.slope,
        poly_sse: poly.sse,
        excess_rate,
        excess_efolds: excess_rate * span,
        verdict: if exponential {
            Verdict::AnalyticRegular
        } else {
            Verdict::WavefrontSuspect
        },
    }
}

/// |F(λ; ξ̂)| over a ladder for each direction, with exponential and
/// polynomial decay fits on log axes and a model-selection verdict.
pub fn decay_scan(f: &ScalarField, x0: &[f64], directions: &[Vec<f64>], lambdas: &[f64]) -> Result<FbiScan> {
    check_point(f, x0)?;
    if lambdas.len() < 4 || lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("lambda", "need at least 4 strictly increasing values"));
    }
    for &l in lambdas {
        check_lambda(f, l)?;
    }
    let dirs = directions
        .iter()
        .map(|d| Direction::new(d))
        .collect::<Result<Vec<_>>>()?;
    if dirs.is_empty() {
        return Err(Error::param("directions", "empty direction set"));
    }
    let chi = roll_off(f.grid());
    let mass: f64 = f.values().iter().zip(&chi).map(|(v, c)| (v * c).abs()).sum::<f64>() * f.grid().cell_volume();
    let floor = (MAGNITUDE_FLOOR * mass).max(DEGENERATE_FLOOR);

    let pairs: Vec<(usize, usize)> = (0..dirs.len())
        .flat_map(|d| (0..lambdas.len()).map(move |l| (d, l)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(d, l)| fbi_unchecked(f, &chi, x0, dirs[d].as_slice(), lambdas[l]).norm())
        .collect();
    if values.iter().all(|v| *v < DEGENERATE_FLOOR) {
        return Err(Error::DegenerateFit {
            floor: DEGENERATE_FLOOR,
        });
    }
    let fits = dirs
        .iter()
        .enumerate()
        .map(|(d, dir)| {
            let mags = values[d * lambdas.len()..(d + 1) * lambdas.len()].to_vec();
            classify(dir.as_slice().to_vec(), lambdas, mags, floor)
        })
        .collect();
    Ok(FbiScan {
        x0: x0.to_vec(),
        lambdas: lambdas.to_vec(),
        fits,
    })
}
