use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use super::sobolev::{SobolevOrder, SobolevWeighting};
use crate::error::{Error, Result};
use crate::normal::assemble_dense;
use crate::transform::{RadonTransform, ScalarField};

/// Threshold below which σ_min counts as numerically noninjective.
pub const NONINJECTIVE_SIGMA: f64 = 1e-12;

const MAX_INVERSE_ITER: usize = 500;

/// Lower stability bound ‖f‖ ≤ C_est ‖Nf‖_{H^{n−1}} for fields supported in M.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    /// 1/σ_min.
    pub c_est: f64,
    /// min ‖Nf‖_{H^{n−1}}/‖f‖ from inverse power iteration.
    pub sigma_min: f64,
    /// The same quantity from a full symmetric eigensolve.
    pub sigma_min_eig: f64,
    pub sigma_max: f64,
    pub inverse_iterations: usize,
    pub order: SobolevOrder,
    /// Number of M-supported unknowns.
    pub unknowns: usize,
    pub fingerprint: String,
}

/// Gram matrix B = Aᵀ S A with A = N P, so that ‖Nf‖²_H / ‖f‖² = fᵀBf / fᵀf.
fn sobolev_gram(op: &RadonTransform, order: SobolevOrder) -> Result<DMatrix<f64>> {
    let grid = *op.grid();
    let dense = assemble_dense(op.defining().as_ref(), op.weight().as_ref(), &grid, op.layout())?;
    let idx = dense.m_indices();
    let weighting = SobolevWeighting::new(&grid, order);
    let cells = grid.len();
    let columns: Vec<(Vec<f64>, Vec<f64>)> = idx
        .par_iter()
        .map(|&c| {
            let col: Vec<f64> = (0..cells).map(|i| dense.entry(i, c)).collect();
            let field = ScalarField::from_values(grid, col.clone())?;
            Ok((col, weighting.apply(&field)?.into_values()))
        })
        .collect::<Result<_>>()?;
    let m = idx.len();
    let a = DMatrix::from_fn(cells, m, |i, c| columns[c].0[i]);
    let sa = DMatrix::from_fn(cells, m, |i, c| columns[c].1[i]);
    let b = a.transpose() * sa;
    Ok((&b + b.transpose()) * 0.5)
}

/// Estimates σ_min of N: L²(M) → H^{n−1}(M₁) on a small grid by inverse power
/// iteration on the dense Gram matrix, cross-checked by a full eigensolve.
pub fn estimate_stability_constant(op: &RadonTransform) -> Result<StabilityReport> {
    let grid = op.grid();
    let order = SobolevOrder::for_dim(grid.dim());
    let b = sobolev_gram(op, order)?;
    let m = b.nrows();
    let eig = SymmetricEigen::new(b.clone()).eigenvalues;
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sigma_min_eig = lo.max(0.0).sqrt();

    let (lambda, iterations) = match Cholesky::new(b.clone()) {
        Some(chol) => {
            let mut v = DVector::from_fn(m, |i, _| 1.0 + 0.5 * ((i * 7919) % 13) as f64 / 13.0);
            v /= v.norm();
            let mut lambda = f64::INFINITY;
            let mut used = MAX_INVERSE_ITER;
            for it in 1..=MAX_INVERSE_ITER {
                let mut u = chol.solve(&v);
                u /= u.norm();
                let next = u.dot(&(&b * &u));
                v = u;
                let done = (lambda - next).abs() <= 1e-13 * next;
                lambda = next;
                if done {
                    used = it;
                    break;
                }
            }
            (lambda, used)
        }
        None => (lo.max(0.0), 0),
    };
    let sigma_min = lambda.max(0.0).sqrt();
    if !(sigma_min >= NONINJECTIVE_SIGMA) {
        return Err(Error::NonInjective { sigma_min });
    }
    let df = op.defining();
    Ok(StabilityReport {
        c_est: 1.0 / sigma_min,
        sigma_min,
        sigma_min_eig,
        sigma_max: hi.max(0.0).sqrt(),
        inverse_iterations: iterations,
        order,
        unknowns: m,
        fingerprint: format!(
            "n={} cells={} L={} pad={} n_theta={} n_s={} phi={} w={}",
            grid.dim(),
            grid.cells(),
            grid.domain().half_width(),
            grid.domain().pad(),
            op.layout().n_theta(),
            op.layout().n_s(),
            df.name(),
            op.weight().name()
        ),
    })
}
