//! Sinogram of the unit disk against the chord length 2√(1 − s²).
use std::sync::Arc;

use gradon::geometry::{make_euclidean, ConstantWeight, Domain};
use gradon::phantom::Phantom;
use gradon::transform::{Grid, RadonTransform};

fn main() -> gradon::Result<()> {
    let grid = Grid::new(Domain::new(2, 1.0)?, 128)?;
    let op = RadonTransform::new(
        Arc::new(make_euclidean(2)?),
        Arc::new(ConstantWeight::unit(2)?),
        grid,
        90,
    )?;
    let f = Phantom::disk(1.0).render(&grid, 4)?;
    let g = op.forward(&f)?;

    let l = g.layout();
    println!("{:>8} {:>10} {:>10}", "s", "R f", "chord");
    for k in (0..l.n_s()).step_by(12) {
        let s = l.s0() + k as f64 * l.ds();
        let chord = 2.0 * (1.0 - s * s).max(0.0).sqrt();
        println!("{s:>8.3} {:>10.5} {chord:>10.5}", g.get(k, 0));
    }
    Ok(())
}
