//! FBI decay on the boundary of a disk of radius 1/2 and the conormal
//! correlation with kinks of its sinogram.
use std::sync::Arc;

use gradon::geometry::{make_euclidean, ConstantWeight, Domain};
use gradon::microlocal::{conormal_probe, decay_scan, default_ladder};
use gradon::phantom::Phantom;
use gradon::transform::{Grid, RadonTransform};

fn main() -> gradon::Result<()> {
    let grid = Grid::new(Domain::new(2, 1.0)?, 128)?;
    let disk = Phantom::disk(0.5).render(&grid, 16)?;
    let ladder = default_ladder(&disk);
    let directions = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];

    let scan = decay_scan(&disk, &[0.5, 0.0], &directions, &ladder)?;
    for fit in &scan.fits {
        println!(
            "xi = {:?}: q = {:.2}, excess e-folds = {:.2}, {}",
            fit.direction,
            fit.poly_exponent,
            fit.score(),
            fit.verdict.as_str()
        );
    }

    let op = RadonTransform::new(
        Arc::new(make_euclidean(2)?),
        Arc::new(ConstantWeight::unit(2)?),
        grid,
        64,
    )?;
    let report = conormal_probe(&op, &disk, 0.5, &[1.0, 0.0], &ladder)?;
    println!("sinogram smooth at s0: {}", report.sinogram_smooth);
    println!("agreements: {}/{}", report.agreements(), report.points.len());
    Ok(())
}
