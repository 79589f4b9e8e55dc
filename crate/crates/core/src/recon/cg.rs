use super::precond::Preconditioner;
use crate::error::{Error, Result};
use crate::normal::apply_normal;
use crate::transform::io::fmt_f64;
use crate::transform::{RadonTransform, ScalarField, Sinogram};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    /// Target relative residual ‖b − PNPf‖/‖b‖.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterations without a 0.1% improvement of the best residual before
    /// stagnation is declared.
    pub stagnation_window: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 200,
            stagnation_window: 50,
        }
    }
}

/// One CG step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgStep {
    pub iteration: usize,
    pub relative_residual: f64,
    /// ½⟨f, Nf⟩ − ⟨f, b⟩; the N-norm of the error up to a constant.
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct CgResult {
    pub field: ScalarField,
    pub iterations: usize,
    pub converged: bool,
    pub relative_residual: f64,
    pub log: Vec<CgStep>,
}

impl CgResult {
    pub fn log_csv(&self) -> String {
        let mut s = String::from("iteration,relative_residual,energy\n");
        for step in &self.log {
            s.push_str(&format!(
                "{},{},{}\n",
                step.iteration,
                fmt_f64(step.relative_residual),
                fmt_f64(step.energy)
            ));
        }
        s
    }
}

/// Preconditioned conjugate gradients on P N P f = P Rᵀ g, P the projector
/// onto fields supported in M.
///
/// Returns the last iterate with `converged = false` when `max_iter` is
/// reached; a residual that stops improving is an error.
pub fn cg_normal_solve(
    op: &RadonTransform,
    g: &Sinogram,
    preconditioner: Option<&Preconditioner>,
    options: &CgOptions,
) -> Result<CgResult> {
    if !(options.tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let mut b = op.adjoint_transpose(g)?;
    b.restrict_to_m();
    let grid = *op.grid();
    let b_norm = b.norm();
    let mut x = ScalarField::zeros(grid);
    if b_norm == 0.0 {
        return Ok(CgResult {
            field: x,
            iterations: 0,
            converged: true,
            relative_residual: 0.0,
            log: Vec::new(),
        });
    }
    let precond = |r: &ScalarField| -> Result<ScalarField> {
        let mut z = match preconditioner {
            Some(p) => p.apply(r)?,
            None => r.clone(),
        };
        z.restrict_to_m();
        Ok(z)
    };

    let mut r = b.clone();
    let mut z = precond(&r)?;
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut log = Vec::new();
    let mut best = 1.0;
    let mut best_at = 0;
    let mut rel = 1.0;
    for it in 1..=options.max_iter {
        let mut q = apply_normal(op, &p)?;
        q.restrict_to_m();
        let pq = p.dot(&q);
        if !(pq > 0.0) {
            return Err(Error::Stagnation {
                iteration: it,
                reason: format!("nonpositive curvature <p, Np> = {pq:.3e}"),
            });
        }
        let alpha = rz / pq;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &q);
        rel = r.norm() / b_norm;
        // N x = b − r
        let energy = -0.5 * (x.dot(&b) + x.dot(&r));
        log.push(CgStep {
            iteration: it,
            relative_residual: rel,
            energy,
        });
        if rel <= options.tol {
            return Ok(CgResult {
                field: x,
                iterations: it,
                converged: true,
                relative_residual: rel,
                log,
            });
        }
        if rel < best * 0.999 {
            best = rel;
            best_at = it;
        } else if it - best_at >= options.stagnation_window {
            return Err(Error::Stagnation {
                iteration: it,
                reason: format!(
                    "relative residual {rel:.3e} has not improved on {best:.3e} for {} iterations",
                    options.stagnation_window
                ),
            });
        }
        z = precond(&r)?;
        let rz_next = r.dot(&z);
        let beta = rz_next / rz;
        rz = rz_next;
        let mut next = z.clone();
        next.axpy(beta, &p);
        p = next;
    }
    Ok(CgResult {
        field: x,
        iterations: options.max_iter,
        converged: false,
        relative_residual: rel,
        log,
    })
}
