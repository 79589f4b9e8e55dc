use crate::error::{Error, Result};
use crate::geometry::{Domain, MAX_DIM};

/// Isotropic cell-centered grid covering the padded box M₁ with `cells` cells
/// per axis. Values are stored row-major with axis 0 slowest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    domain: Domain,
    cells: usize,
    spacing: f64,
    origin: f64,
}

impl Grid {
    pub fn new(domain: Domain, cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::param("grid", "need at least 2 cells per axis"));
        }
        let a = domain.outer_half_width();
        let spacing = 2.0 * a / cells as f64;
        Ok(Self {
            domain,
            cells,
            spacing,
            origin: -a + 0.5 * spacing,
        })
    }

    /// Grid with explicitly given spacing and origin, as read from a file.
    pub(crate) fn from_stored(domain: Domain, cells: usize, spacing: f64, origin: f64) -> Result<Self> {
        let reference = Self::new(domain, cells)?;
        if (reference.spacing - spacing).abs() > 1e-9 * spacing || (reference.origin - origin).abs() > 1e-9 * spacing {
            return Err(Error::LayoutMismatch("stored grid geometry is inconsistent".into()));
        }
        Ok(Self {
            domain,
            cells,
            spacing,
            origin,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Cells per axis.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.cells; self.dim()]
    }

    pub fn len(&self) -> usize {
        self.cells.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// h.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Coordinate of the first cell center along every axis.
    pub fn origin(&self) -> f64 {
        self.origin
    }

    /// hⁿ.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    pub fn axis_coord(&self, i: usize) -> f64 {
        self.origin + self.spacing * i as f64
    }

    /// Multi-index of a flat index.
    pub fn index(&self, flat: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        let mut rem = flat;
        for k in (0..self.dim()).rev() {
            out[k] = rem % self.cells;
            rem /= self.cells;
        }
        out
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.cells + i)
    }

    /// Cell center of a flat index; only the first `dim()` entries are meaningful.
    pub fn point(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.index(flat);
        let mut x = [0.0; MAX_DIM];
        for k in 0..self.dim() {
            x[k] = self.axis_coord(idx[k]);
        }
        x
    }

    /// Whether cell `flat` has its center in M.
    pub fn in_m(&self, flat: usize) -> bool {
        let x = self.point(flat);
        self.domain.contains(&x[..self.dim()])
    }

    /// 1 on cells centered in M, 0 on the padding.
    pub fn m_mask(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.in_m(i)).collect()
    }
}

/// Samples of a real function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LayoutMismatch(format!(
                "field has {} values, grid has {} cells",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("field", "values must be finite"));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at cell centers.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let n = grid.dim();
        let values = (0..grid.len()).map(|i| f(&grid.point(i)[..n])).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// ⟨f, g⟩ = hⁿ Σ f g.
    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.grid.cell_volume() * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// hⁿ Σ |f|.
    pub fn l1_norm(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }

    /// self += a · other.
    pub fn axpy(&mut self, a: f64, other: &ScalarField) {
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += a * o;
        }
    }

    /// Zeroes every cell outside M.
    pub fn restrict_to_m(&mut self) {
        for (i, v) in self.values.iter_mut().enumerate() {
            if !self.grid.in_m(i) {
                *v = 0.0;
            }
        }
    }

    /// Number of nonzero samples on the padding region.
    pub fn padding_nonzeros(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, v)| **v != 0.0 && !self.grid.in_m(*i))
            .count()
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if &self.grid != grid {
            return Err(Error::LayoutMismatch(format!(
                "field grid ({} cells/axis, h={:e}) differs from operator grid ({} cells/axis, h={:e})",
                self.grid.cells, self.grid.spacing, grid.cells, grid.spacing
            )));
        }
        Ok(())
    }

    /// Relative L² distance ‖self − reference‖ / ‖reference‖.
    pub fn relative_error(&self, reference: &ScalarField) -> f64 {
        let num: f64 = self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let den: f64 = reference.values.iter().map(|b| b * b).sum();
        (num / den).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_padded_box() {
        let d = Domain::new(2, 1.0).unwrap();
        let g = Grid::new(d, 10).unwrap();
        assert!((g.spacing() - 0.25).abs() < 1e-15);
        assert!((g.axis_coord(0) + 1.125).abs() < 1e-15);
        assert!((g.axis_coord(9) - 1.125).abs() < 1e-15);
        let p = g.point(g.flat(&[3, 7]));
        assert_eq!((p[0], p[1]), (g.axis_coord(3), g.axis_coord(7)));
        assert_eq!(g.index(g.flat(&[3, 7]))[..2], [3, 7]);
        assert_eq!(g.m_mask().iter().filter(|m| **m).count(), 64);
    }

    #[test]
    fn padding_detection() {
        let g = Grid::new(Domain::new(2, 1.0).unwrap(), 10).unwrap();
        let mut f = ScalarField::from_fn(g, |_| 1.0);
        assert_eq!(f.padding_nonzeros(), 36);
        f.restrict_to_m();
        assert_eq!(f.padding_nonzeros(), 0);
    }
}
