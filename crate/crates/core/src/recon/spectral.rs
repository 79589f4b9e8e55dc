use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::geometry::MAX_DIM;
use crate::transform::Grid;

/// Unnormalized n-D DFT on the periodic box M₁ covered by a grid.
pub(crate) struct Spectral {
    cells: usize,
    dim: usize,
    period: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Spectral {
    pub(crate) fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let cells = grid.cells();
        Self {
            cells,
            dim: grid.dim(),
            period: cells as f64 * grid.spacing(),
            forward: planner.plan_fft_forward(cells),
            inverse: planner.plan_fft_inverse(cells),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Inverse transform including the 1/N normalization.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
        let s = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    fn run(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let c = self.cells;
        let mut line = vec![Complex64::default(); c];
        for axis in 0..self.dim {
            let stride = c.pow((self.dim - 1 - axis) as u32);
            let outer = c.pow(axis as u32);
            for o in 0..outer {
                for inner in 0..stride {
                    let start = o * c * stride + inner;
                    for (t, v) in line.iter_mut().enumerate() {
                        *v = data[start + t * stride];
                    }
                    fft.process(&mut line);
                    for (t, v) in line.iter().enumerate() {
                        data[start + t * stride] = *v;
                    }
                }
            }
        }
    }

    /// Angular wavenumber of a flat frequency index.
    pub(crate) fn wavenumber(&self, flat: usize) -> [f64; MAX_DIM] {
        let mut k = [0.0; MAX_DIM];
        let mut rem = flat;
        for d in (0..self.dim).rev() {
            let j = rem % self.cells;
            rem /= self.cells;
            let signed = if j <= self.cells / 2 {
                j as f64
            } else {
                j as f64 - self.cells as f64
            };
            k[d] = 2.0 * std::f64::consts::PI * signed / self.period;
        }
        k
    }

    /// Smallest nonzero |k|.
    pub(crate) fn fundamental(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.period
    }
}
