use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{grad_x_norm, norm, DefiningFunction, Weight, MAX_DIM};
use crate::transform::grid::{Grid, ScalarField};
use crate::transform::sinogram::{Sinogram, SinogramLayout};

/// Largest number of (θ, cell) pairs for which φ and w·J are tabulated.
const CACHE_LIMIT: usize = 6_000_000;

/// Relative mass allowed to fall off the ends of the s axis.
pub const LEAKAGE_TOL: f64 = 1e-6;
/// Fraction of backprojection samples allowed outside the s axis.
pub const CLIP_TOL: f64 = 1e-6;

const ADJOINT_BLOCK: usize = 512;

/// J(x, θ) = |d_xφ(x, θ)|, the coarea density of the level-set measure.
pub fn jacobian(df: &dyn DefiningFunction, x: &[f64], theta: &[f64]) -> Result<f64> {
    let j = grad_x_norm(df, x, theta);
    if !(j >= 1e-12) {
        return Err(Error::DegenerateGradient { norm: j, x: x.to_vec() });
    }
    Ok(j)
}

/// The discretized transform R_w for one (φ, w, grid, layout) combination.
///
/// `forward` is the smoothed-delta coarea quadrature, `adjoint_transpose` its
/// exact matrix transpose in the weighted inner products, and `adjoint` the
/// interpolating backprojection.
#[derive(Clone, Debug)]
pub struct RadonTransform {
    df: Arc<dyn DefiningFunction>,
    w: Arc<dyn Weight>,
    grid: Grid,
    layout: SinogramLayout,
    /// θ-major tables of φ and w·J, when small enough.
    cache: Option<(Vec<f64>, Vec<f64>)>,
}

impl RadonTransform {
    /// Operator on `grid` with the covering layout for `n_theta` directions,
    /// Δs = h and η = 2h.
    pub fn new(df: Arc<dyn DefiningFunction>, w: Arc<dyn Weight>, grid: Grid, n_theta: usize) -> Result<Self> {
        let layout = SinogramLayout::covering(df.as_ref(), &grid, n_theta, 2.0)?;
        Self::with_layout(df, w, grid, layout)
    }

    pub fn with_layout(
        df: Arc<dyn DefiningFunction>,
        w: Arc<dyn Weight>,
        grid: Grid,
        layout: SinogramLayout,
    ) -> Result<Self> {
        for got in [df.dim(), w.dim(), layout.dim()] {
            if got != grid.dim() {
                return Err(Error::DimensionMismatch {
                    expected: grid.dim(),
                    got,
                });
            }
        }
        let mut op = Self {
            df,
            w,
            grid,
            layout,
            cache: None,
        };
        let cells = grid.len();
        let nt = op.layout.n_theta();
        let tables: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..nt)
            .into_par_iter()
            .map(|j| {
                let mut phi = Vec::with_capacity(cells);
                let mut wj = Vec::with_capacity(cells);
                for i in 0..cells {
                    let (p, a) = op.eval_geometry(j, i)?;
                    phi.push(p);
                    wj.push(a);
                }
                Ok((phi, wj))
            })
            .collect();
        let mut phi = Vec::new();
        let mut wj = Vec::new();
        let keep = cells * nt <= CACHE_LIMIT;
        for t in tables {
            let (p, a) = t?;
            if keep {
                phi.extend(p);
                wj.extend(a);
            }
        }
        if keep {
            op.cache = Some((phi, wj));
        }
        Ok(op)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn layout(&self) -> &SinogramLayout {
        &self.layout
    }

    pub fn defining(&self) -> &Arc<dyn DefiningFunction> {
        &self.df
    }

    pub fn weight(&self) -> &Arc<dyn Weight> {
        &self.w
    }

    fn eval_geometry(&self, j: usize, i: usize) -> Result<(f64, f64)> {
        let n = self.grid.dim();
        let x = self.grid.point(i);
        let theta = self.layout.directions()[j].as_slice();
        let phi = self.df.eval(&x[..n], theta);
        let jac = jacobian(self.df.as_ref(), &x[..n], theta)?;
        Ok((phi, self.w.eval(&x[..n], theta) * jac))
    }

    /// φ(x_i, θ_j) and w·J at (x_i, θ_j).
    #[inline]
    fn geometry(&self, j: usize, i: usize) -> (f64, f64) {
        match &self.cache {
            Some((phi, wj)) => {
                let k = j * self.grid.len() + i;
                (phi[k], wj[k])
            }
            // validated at construction
            None => self.eval_geometry(j, i).unwrap_or((f64::NAN, 0.0)),
        }
    }

    /// Smoothed-delta quadrature R_w f(s_k, θ_j) ≈ Σ ψ_η(s_k − φ) w f J hⁿ.
    pub fn forward(&self, f: &ScalarField) -> Result<Sinogram> {
        f.check_grid(&self.grid)?;
        let nonzero = f.padding_nonzeros();
        if nonzero > 0 {
            return Err(Error::SupportOutsideDomain { nonzero });
        }
        self.forward_on_m1(f)
    }

    /// The same quadrature for fields that may be nonzero on the padding.
    pub(crate) fn forward_on_m1(&self, f: &ScalarField) -> Result<Sinogram> {
        f.check_grid(&self.grid)?;
        let (n_s, nt) = (self.layout.n_s(), self.layout.n_theta());
        let (s0, ds) = (self.layout.s0(), self.layout.ds());
        let eta = self.layout.delta().half_width();
        // ψ_η(s_k − φ) = max(0, 1 − |k − t|/reach)/η with t = (φ − s₀)/Δs
        let reach = eta / ds;
        let hn = self.grid.cell_volume();
        let support: Vec<(usize, f64)> = f
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();

        let columns: Vec<(Vec<f64>, f64, f64)> = (0..nt)
            .into_par_iter()
            .map(|j| {
                let mut col = vec![0.0; n_s];
                let (mut leaked, mut total) = (0.0, 0.0);
                for &(i, fi) in &support {
                    let (phi, wj) = self.geometry(j, i);
                    let a = fi * wj * hn;
                    total += a.abs();
                    let t = (phi - s0) / ds;
                    let lo = (t - reach).floor() as i64 + 1;
                    let hi = (t + reach).ceil() as i64;
                    for k in lo..hi {
                        let u = 1.0 - (k as f64 - t).abs() / reach;
                        if u <= 0.0 {
                            continue;
                        }
                        let psi = u / eta;
                        if k >= 0 && (k as usize) < n_s {
                            col[k as usize] += a * psi;
                        } else {
                            leaked += a.abs() * psi * ds;
                        }
                    }
                }
                (col, leaked, total)
            })
            .collect();

        let mut values = vec![0.0; n_s * nt];
        let (mut leaked, mut total) = (0.0, 0.0);
        for (j, (col, l, t)) in columns.into_iter().enumerate() {
            leaked += l;
            total += t;
            for (k, v) in col.into_iter().enumerate() {
                values[k * nt + j] = v;
            }
        }
        let limit = LEAKAGE_TOL * total;
        if leaked > limit {
            return Err(Error::MassLeakage { leaked, limit });
        }
        Ok(Sinogram::from_values(self.layout.clone(), values)?.with_metadata(self.df.name(), self.w.name()))
    }

    /// R_w f at a single parameter pair (s, θ) with θ not necessarily unit.
    ///
    /// The delta half-width is scaled by |θ|, so that (s, θ) and (λs, λθ)
    /// describe the same smoothed level set.
    pub fn forward_at(&self, f: &ScalarField, s: f64, theta: &[f64]) -> Result<f64> {
        f.check_grid(&self.grid)?;
        let n = self.grid.dim();
        if theta.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: theta.len(),
            });
        }
        let tn = norm(theta);
        if !(tn > 0.0) {
            return Err(Error::param("theta", "must be nonzero"));
        }
        let mut unit = [0.0; MAX_DIM];
        for (u, t) in unit.iter_mut().zip(theta) {
            *u = t / tn;
        }
        let eta = self.layout.delta().half_width() * tn;
        let hn = self.grid.cell_volume();
        let mut sum = 0.0;
        for (i, &fi) in f.values().iter().enumerate() {
            if fi == 0.0 {
                continue;
            }
            let x = self.grid.point(i);
            let t = (s - self.df.eval(&x[..n], theta)).abs();
            if t >= eta {
                continue;
            }
            let psi = (1.0 - t / eta) / eta;
            let jac = jacobian(self.df.as_ref(), &x[..n], theta)?;
            sum += psi * self.w.eval(&x[..n], &unit[..n]) * jac * fi * hn;
        }
        Ok(sum)
    }

    /// Exact transpose of [`forward`](Self::forward):
    /// Rᵀg(x) = Σ_j ω Σ_k Δs ψ_η(s_k − φ(x, θ_j)) w J g(s_k, θ_j).
    pub fn adjoint_transpose(&self, g: &Sinogram) -> Result<ScalarField> {
        g.check_layout(&self.layout)?;
        let (n_s, nt) = (self.layout.n_s(), self.layout.n_theta());
        let (s0, ds) = (self.layout.s0(), self.layout.ds());
        let eta = self.layout.delta().half_width();
        let omega = self.layout.theta_weight();
        // θ-major copy for contiguous access
        let mut gt = vec![0.0; n_s * nt];
        for (idx, v) in g.values().iter().enumerate() {
            gt[(idx % nt) * n_s + idx / nt] = *v;
        }
        let cells = self.grid.len();
        let reach = eta / ds;
        let blocks: Vec<Vec<f64>> = (0..cells.div_ceil(ADJOINT_BLOCK))
            .into_par_iter()
            .map(|b| {
                let start = b * ADJOINT_BLOCK;
                let end = (start + ADJOINT_BLOCK).min(cells);
                let mut acc = vec![0.0; end - start];
                for j in 0..nt {
                    let col = &gt[j * n_s..(j + 1) * n_s];
                    for (i, a) in (start..end).zip(acc.iter_mut()) {
                        let (phi, wj) = self.geometry(j, i);
                        let t = (phi - s0) / ds;
                        let lo = ((t - reach).floor() + 1.0).max(0.0) as usize;
                        let hi = ((t + reach).ceil() as usize).min(n_s);
                        let mut inner = 0.0;
                        for (k, gk) in col.iter().enumerate().take(hi).skip(lo) {
                            let u = 1.0 - (k as f64 - t).abs() / reach;
                            if u > 0.0 {
                                inner += u * gk;
                            }
                        }
                        *a += wj * inner;
                    }
                }
                acc.iter().map(|a| a * omega * ds / eta).collect()
            })
            .collect();
        ScalarField::from_values(self.grid, blocks.concat())
    }

    /// Interpolating backprojection R*_w g(x) = Σ_j ω w J g̃(φ(x, θ_j), θ_j),
    /// with g̃ linear in s and zero off the s axis.
    pub fn adjoint(&self, g: &Sinogram) -> Result<ScalarField> {
        g.check_layout(&self.layout)?;
        let (n_s, nt) = (self.layout.n_s(), self.layout.n_theta());
        let (s0, ds) = (self.layout.s0(), self.layout.ds());
        let omega = self.layout.theta_weight();
        let gv = g.values();
        let per_cell: Vec<(f64, usize)> = (0..self.grid.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                let mut clips = 0;
                for j in 0..nt {
                    let (phi, wj) = self.geometry(j, i);
                    let t = (phi - s0) / ds;
                    let k = t.floor();
                    if k < 0.0 || k as usize + 1 >= n_s {
                        if t == (n_s - 1) as f64 {
                            acc += wj * gv[(n_s - 1) * nt + j];
                        } else {
                            clips += 1;
                        }
                        continue;
                    }
                    let ku = k as usize;
                    let a = t - k;
                    acc += wj * ((1.0 - a) * gv[ku * nt + j] + a * gv[(ku + 1) * nt + j]);
                }
                (acc * omega, clips)
            })
            .collect();
        let clips: usize = per_cell.iter().map(|p| p.1).sum();
        let fraction = clips as f64 / (self.grid.len() * nt) as f64;
        if fraction > CLIP_TOL {
            return Err(Error::Clipping { fraction });
        }
        ScalarField::from_values(self.grid, per_cell.into_iter().map(|p| p.0).collect())
    }
}
