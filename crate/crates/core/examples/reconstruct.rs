//! Preconditioned CG on the normal equations for the Shepp-Logan head.
use std::sync::Arc;

use gradon::geometry::{make_euclidean, ConstantWeight, DefiningFunction, Domain, Weight};
use gradon::normal::PrincipalSymbol;
use gradon::phantom::Phantom;
use gradon::recon::{cg_normal_solve, CgOptions, Preconditioner};
use gradon::transform::{Grid, RadonTransform, SinogramLayout};

fn main() -> gradon::Result<()> {
    let grid = Grid::new(Domain::new(2, 1.0)?, 64)?;
    let df: Arc<dyn DefiningFunction> = Arc::new(make_euclidean(2)?);
    let w: Arc<dyn Weight> = Arc::new(ConstantWeight::unit(2)?);
    let layout = SinogramLayout::covering(df.as_ref(), &grid, 90, 1.0)?;
    let op = RadonTransform::with_layout(df.clone(), w.clone(), grid, layout)?;

    let truth = Phantom::by_name("shepp-logan", 2, 1.0, 0.0)?.render(&grid, 4)?;
    let data = op.forward(&truth)?;
    let pre = Preconditioner::new(&PrincipalSymbol::new(df, w)?, &grid)?;
    let options = CgOptions {
        tol: 1e-10,
        max_iter: 100,
        stagnation_window: 100,
    };
    for (label, p) in [("plain", None), ("preconditioned", Some(&pre))] {
        let r = cg_normal_solve(&op, &data, p, &options)?;
        println!(
            "{label:>15}: {} iterations, residual {:.2e}, error {:.4}",
            r.iterations,
            r.relative_residual,
            r.field.relative_error(&truth)
        );
    }
    Ok(())
}
