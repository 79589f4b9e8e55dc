use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{DefiningFunction, Weight, MAX_DIM};
use crate::transform::io::fmt_f64;
use crate::transform::{jacobian, Grid, ScalarField, SinogramLayout};

/// Size cap (cells per axis) for dense assembly.
pub const DENSE_CAP_PER_AXIS: usize = 24;

/// Explicit matrix of N = RᵀΩR on a small grid, in the hⁿ-weighted field
/// inner product: (Nf)ᵢ = Σₗ Nᵢₗ fₗ.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseNormal {
    grid: Grid,
    data: Vec<f64>,
}

/// Assembles the matrix entry by entry from φ, w and the layout, without going
/// through the matrix-free operator.
pub fn assemble_dense(
    df: &dyn DefiningFunction,
    w: &dyn Weight,
    grid: &Grid,
    layout: &SinogramLayout,
) -> Result<DenseNormal> {
    let n = grid.dim();
    let cap = DENSE_CAP_PER_AXIS.pow(n as u32);
    if grid.len() > cap {
        return Err(Error::SizeCap { cells: grid.len(), cap });
    }
    if df.dim() != n || w.dim() != n || layout.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: layout.dim(),
        });
    }
    let cells = grid.len();
    let (n_s, nt) = (layout.n_s(), layout.n_theta());
    let (s0, ds) = (layout.s0(), layout.ds());
    let delta = *layout.delta();
    let eta = delta.half_width();
    let hn = grid.cell_volume();
    let omega = ds * layout.theta_weight();

    // rows[(k, j)] = list of (cell, R entry)
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_s * nt];
    // per cell: list of row ids it touches
    let mut touches: Vec<Vec<usize>> = vec![Vec::new(); cells];
    for (j, d) in layout.directions().iter().enumerate() {
        let theta = d.as_slice();
        for (i, touched) in touches.iter_mut().enumerate() {
            let x: [f64; MAX_DIM] = grid.point(i);
            let phi = df.eval(&x[..n], theta);
            let wj = w.eval(&x[..n], theta) * jacobian(df, &x[..n], theta)?;
            let lo = ((phi - eta - s0) / ds).floor().max(0.0) as usize;
            let hi = (((phi + eta - s0) / ds).ceil() as i64).min(n_s as i64 - 1);
            let mut k = lo as i64;
            while k <= hi {
                let psi = delta.eval(s0 + ds * k as f64 - phi);
                if psi != 0.0 {
                    let r = k as usize * nt + j;
                    rows[r].push((i, psi * wj * hn));
                    touched.push(r);
                }
                k += 1;
            }
        }
    }

    let columns: Vec<Vec<f64>> = (0..cells)
        .into_par_iter()
        .map(|i| {
            let mut col = vec![0.0; cells];
            for &r in &touches[i] {
                let ri = rows[r].iter().find(|e| e.0 == i).map_or(0.0, |e| e.1);
                for &(l, rl) in &rows[r] {
                    col[l] += omega * ri * rl;
                }
            }
            col
        })
        .collect();
    let mut data = vec![0.0; cells * cells];
    for (l, col) in columns.into_iter().enumerate() {
        for (i, v) in col.into_iter().enumerate() {
            data[i * cells + l] = v / hn;
        }
    }
    Ok(DenseNormal { grid: *grid, data })
}

impl DenseNormal {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.grid.len()
    }

    pub fn entry(&self, i: usize, l: usize) -> f64 {
        self.data[i * self.size() + l]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField> {
        f.check_grid(&self.grid)?;
        let m = self.size();
        let v = f.values();
        let out = (0..m)
            .map(|i| self.data[i * m..(i + 1) * m].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect();
        ScalarField::from_values(self.grid, out)
    }

    /// max |Nᵢₗ − Nₗᵢ| / max |Nᵢₗ|.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.size();
        let scale = self.data.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut worst = 0.0f64;
        for i in 0..m {
            for l in i + 1..m {
                worst = worst.max((self.data[i * m + l] - self.data[l * m + i]).abs());
            }
        }
        worst / scale
    }

    /// Flat indices of cells centered in M.
    pub fn m_indices(&self) -> Vec<usize> {
        (0..self.size()).filter(|&i| self.grid.in_m(i)).collect()
    }

    /// P N P on M-supported fields.
    pub fn restricted(&self) -> DMatrix<f64> {
        let idx = self.m_indices();
        let m = self.size();
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.data[idx[a] * m + idx[b]])
    }

    /// Ascending eigenvalues of P N P.
    pub fn restricted_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.restricted())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Rows `i,l,value` of the full matrix.
    pub fn to_csv(&self) -> String {
        let m = self.size();
        let mut s = String::from("i,l,value\n");
        for i in 0..m {
            for l in 0..m {
                s.push_str(&format!("{i},{l},{}\n", fmt_f64(self.data[i * m + l])));
            }
        }
        s
    }
}
