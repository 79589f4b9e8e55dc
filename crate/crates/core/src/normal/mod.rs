//! The normal operator N_w = R*_w R_w, its principal symbol, and two
//! independent checks of both: oscillatory probing and dense assembly.

mod dense;
mod probe;
mod symbol;

pub use dense::{assemble_dense, DenseNormal, DENSE_CAP_PER_AXIS};
pub use probe::{nyquist_limit, probe_symbol, ProbeResult, ProbeRow};
pub use symbol::{solve_theta, PrincipalSymbol, SymbolValue};

use crate::error::Result;
use crate::transform::{RadonTransform, ScalarField};

/// N f = Rᵀ R f with the exact discrete transpose.
pub fn apply_normal(op: &RadonTransform, f: &ScalarField) -> Result<ScalarField> {
    op.adjoint_transpose(&op.forward(f)?)
}
