//! Both adjoints on a perturbed geometry: the exact transpose passes the dot
//! test to round-off, the interpolating backprojection to discretization error.
use std::sync::Arc;

use gradon::geometry::{make_perturbed, Bump, Domain, GaussianModulatedWeight};
use gradon::phantom::Phantom;
use gradon::transform::{Grid, RadonTransform};

fn main() -> gradon::Result<()> {
    let domain = Domain::new(2, 1.0)?;
    let grid = Grid::new(domain, 96)?;
    let df = make_perturbed(Bump::new(&[0.1, -0.1], 0.6, 1.0)?, 0.05, &domain, 33)?;
    let w = GaussianModulatedWeight::new(1.0, 0.3, &[0.1, 0.0], 0.6, 0.1)?;
    let op = RadonTransform::new(Arc::new(df), Arc::new(w), grid, 120)?;

    let f = Phantom::gaussian(2, 0.3).render(&grid, 1)?;
    let g = op.forward(&Phantom::disk(0.5).render(&grid, 4)?)?;
    let rf_g = op.forward(&f)?.dot(&g);
    let transpose = f.dot(&op.adjoint_transpose(&g)?);
    let continuous = f.dot(&op.adjoint(&g)?);
    println!("<Rf, g>          = {rf_g:.12e}");
    println!(
        "<f, R^T g>       = {transpose:.12e}  rel {:.2e}",
        (transpose - rf_g).abs() / rf_g.abs()
    );
    println!(
        "<f, R* g>        = {continuous:.12e}  rel {:.2e}",
        (continuous - rf_g).abs() / rf_g.abs()
    );
    Ok(())
}
