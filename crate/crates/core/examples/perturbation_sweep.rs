//! ‖N − N_δ‖ over a δ ladder, with the log-log slope and absorption check.
use std::sync::Arc;

use gradon::geometry::{make_euclidean, ConstantWeight, Domain, Weight};
use gradon::phantom::Phantom;
use gradon::recon::{estimate_stability_constant, perturbation_sweep, PerturbationFamily, SweepOptions};
use gradon::transform::{Grid, RadonTransform};

fn main() -> gradon::Result<()> {
    let grid = Grid::new(Domain::new(2, 1.0)?, 16)?;
    let w: Arc<dyn Weight> = Arc::new(ConstantWeight::unit(2)?);
    let family = PerturbationFamily::standard(grid.domain())?;

    let base = RadonTransform::new(Arc::new(make_euclidean(2)?), w.clone(), grid, 32)?;
    let stability = estimate_stability_constant(&base)?;
    println!(
        "C_est = {:.4e}, sigma_min = {:.4e}",
        stability.c_est, stability.sigma_min
    );

    let truth = Phantom::gaussian(2, 0.3).render(&grid, 1)?;
    let ladder = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
    let sweep = perturbation_sweep(&grid, w, &family, &ladder, &truth, &SweepOptions::default())?;
    print!("{}", sweep.to_csv());
    Ok(())
}
