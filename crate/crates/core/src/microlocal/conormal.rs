use super::fbi::{decay_scan, DirectionFit, Verdict};
use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::geometry::{norm, tangent_basis, Direction, MAX_DIM};
use crate::transform::io::fmt_f64;
use crate::transform::{RadonTransform, ScalarField};

/// Tangential offsets (in units of L) of the sampled points on the level set.
pub const SAMPLE_OFFSETS: [f64; 8] = [0.0, 0.2, -0.2, 0.4, -0.4, 0.6, -0.6, 0.8];
/// Sinograms whose local second-difference exponent falls below this are
/// reported as non-smooth.
pub const SMOOTHNESS_EXPONENT: f64 = 1.5;

#[derive(Clone, Debug, PartialEq)]
pub struct ConormalPoint {
    pub x: Vec<f64>,
    /// d_xφ(x, θ₀)/|d_xφ(x, θ₀)|.
    pub xi: Vec<f64>,
    pub fit: DirectionFit,
    /// Contrapositive holds here: a suspect conormal comes with a non-smooth
    /// sinogram.
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConormalReport {
    pub s0: f64,
    pub theta0: Vec<f64>,
    /// Scales ε of the second differences of s ↦ R_w f(s, θ₀) at s₀.
    pub scales: Vec<f64>,
    pub second_differences: Vec<f64>,
    /// α in |Δ²_ε| ~ ε^α; +∞ when the differences vanish to round-off.
    pub sinogram_exponent: f64,
    pub sinogram_smooth: bool,
    pub points: Vec<ConormalPoint>,
}

impl ConormalReport {
    pub fn agreements(&self) -> usize {
        self.points.iter().filter(|p| p.agrees).count()
    }

    pub fn consistent(&self) -> bool {
        self.agreements() == self.points.len()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("point,x,xi,verdict,exp_rate,poly_exponent,sinogram_exponent,agrees\n");
        for (i, p) in self.points.iter().enumerate() {
            let join = |v: &[f64]| v.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(" ");
            s.push_str(&format!(
                "{i},{},{},{},{},{},{},{}\n",
                join(&p.x),
                join(&p.xi),
                p.fit.verdict.as_str(),
                fmt_f64(p.fit.exp_rate),
                fmt_f64(p.fit.poly_exponent),
                fmt_f64(self.sinogram_exponent),
                p.agrees
            ));
        }
        s
    }
}

/// Newton projection onto {φ(·, θ) = s} along d_xφ.
fn project(op: &RadonTransform, start: &[f64], s: f64, theta: &[f64]) -> Option<Vec<f64>> {
    let df = op.defining();
    let n = start.len();
    let mut x = start.to_vec();
    let mut g = [0.0; MAX_DIM];
    for _ in 0..50 {
        let r = df.eval(&x, theta) - s;
        if r.abs() < 1e-13 {
            return Some(x);
        }
        df.grad_x(&x, theta, &mut g[..n]);
        let g2: f64 = g[..n].iter().map(|c| c * c).sum();
        if !(g2 > 0.0) {
            return None;
        }
        for d in 0..n {
            x[d] -= r * g[d] / g2;
        }
    }
    None
}

/// Samples H_{s₀,θ₀} ∩ M, classifies the conormal FBI decay at each point and
/// compares with the local regularity of s ↦ R_w f(s, θ₀) at s₀.
///
/// The Bolker checks are expected to pass for the operator's φ.
pub fn conormal_probe(
    op: &RadonTransform,
    f: &ScalarField,
    s0: f64,
    theta0: &[f64],
    lambdas: &[f64],
) -> Result<ConormalReport> {
    let grid = *op.grid();
    let n = grid.dim();
    f.check_grid(&grid)?;
    let theta = Direction::new(theta0)?;
    if theta.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: theta.dim(),
        });
    }
    let t = theta.as_slice();
    let domain = grid.domain();
    let l = domain.half_width();
    let mut basis = [[0.0; MAX_DIM]; MAX_DIM - 1];
    tangent_basis(t, &mut basis);
    let foot: Vec<f64> = t.iter().map(|c| c * s0).collect();
    let anchor = project(op, &foot, s0, t).ok_or(Error::LevelSetSampling { s: s0 })?;

    let mut points = Vec::new();
    for off in SAMPLE_OFFSETS {
        let start: Vec<f64> = (0..n).map(|d| anchor[d] + off * l * basis[0][d]).collect();
        let Some(x) = project(op, &start, s0, t) else {
            continue;
        };
        if !domain.contains(&x) {
            continue;
        }
        let mut g = [0.0; MAX_DIM];
        op.defining().grad_x(&x, t, &mut g[..n]);
        let gn = norm(&g[..n]);
        let xi: Vec<f64> = g[..n].iter().map(|c| c / gn).collect();
        points.push((x, xi));
    }
    if points.is_empty() {
        return Err(Error::LevelSetSampling { s: s0 });
    }

    // local regularity of the sinogram at s₀
    let h = grid.spacing();
    let scales: Vec<f64> = [3.0, 4.5, 6.0, 9.0, 12.0].iter().map(|k| k * h).collect();
    let center = op.forward_at(f, s0, t)?;
    let mut second = Vec::with_capacity(scales.len());
    let mut size = center.abs();
    for &e in &scales {
        let a = op.forward_at(f, s0 + e, t)?;
        let b = op.forward_at(f, s0 - e, t)?;
        size = size.max(a.abs()).max(b.abs());
        second.push((a - 2.0 * center + b).abs());
    }
    let floor = 1e-10 * size.max(f.l1_norm());
    let sinogram_exponent = if second.iter().all(|d| *d <= floor) {
        f64::INFINITY
    } else {
        let (xs, ys): (Vec<f64>, Vec<f64>) = scales
            .iter()
            .zip(&second)
            .filter(|(_, d)| **d > floor)
            .map(|(e, d)| (*e, *d))
            .unzip();
        loglog_fit(&xs, &ys).map_or(0.0, |fit| fit.slope)
    };
    let sinogram_smooth = sinogram_exponent >= SMOOTHNESS_EXPONENT;

    let points = points
        .into_iter()
        .map(|(x, xi)| {
            let scan = decay_scan(f, &x, std::slice::from_ref(&xi), lambdas);
            let fit = match scan {
                Ok(mut s) => s.fits.remove(0),
                Err(Error::DegenerateFit { .. }) => DirectionFit {
                    direction: xi.clone(),
                    magnitudes: vec![0.0; lambdas.len()],
                    used: 0,
                    exp_rate: f64::INFINITY,
                    exp_sse: 0.0,
                    poly_exponent: f64::INFINITY,
                    poly_sse: 0.0,
                    excess_rate: f64::INFINITY,
                    excess_efolds: f64::INFINITY,
                    verdict: Verdict::AnalyticRegular,
                },
                Err(e) => return Err(e),
            };
            let agrees = fit.verdict == Verdict::AnalyticRegular || !sinogram_smooth;
            Ok(ConormalPoint { x, xi, fit, agrees })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConormalReport {
        s0,
        theta0: t.to_vec(),
        scales,
        second_differences: second,
        sinogram_exponent,
        sinogram_smooth,
        points,
    })
}
