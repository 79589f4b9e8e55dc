//! Oscillatory probe of N = R*R against its principal symbol.
use std::sync::Arc;

use gradon::geometry::{make_euclidean, ConstantWeight, DefiningFunction, Domain, Weight};
use gradon::normal::{probe_symbol, PrincipalSymbol};
use gradon::transform::{Grid, RadonTransform};

fn main() -> gradon::Result<()> {
    let grid = Grid::new(Domain::new(2, 1.0)?, 128)?;
    let df: Arc<dyn DefiningFunction> = Arc::new(make_euclidean(2)?);
    let w: Arc<dyn Weight> = Arc::new(ConstantWeight::unit(2)?);
    let op = RadonTransform::new(df.clone(), w.clone(), grid, 128)?;
    let symbol = PrincipalSymbol::new(df, w)?;

    let result = probe_symbol(&op, &symbol, &[0.0, 0.0], &[1.0, 0.0], &[8.0, 16.0, 32.0, 64.0], 0.5)?;
    print!("{}", result.to_csv());
    println!("fitted exponent {:.4} (expected -1)", result.exponent);
    Ok(())
}
