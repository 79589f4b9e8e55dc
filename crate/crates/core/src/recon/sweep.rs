use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::cg::{cg_normal_solve, CgOptions};
use super::precond::Preconditioner;
use super::sobolev::{SobolevOrder, SobolevWeighting};
use super::stability::estimate_stability_constant;
use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LineFit};
use crate::geometry::{
    check_weight, make_euclidean, make_perturbed, Bump, DefiningFunction, Domain, PerturbedWeight, Weight, MAX_DIM,
};
use crate::normal::PrincipalSymbol;
use crate::transform::io::fmt_f64;
use crate::transform::{Grid, RadonTransform, ScalarField, SinogramLayout};

/// Highest derivative order of the sampled C^K distances.
pub const MAX_DISTANCE_ORDER: usize = 4;

/// (φ_δ, w_δ) = (x·θ + δ a(x)|θ|, w·(1 + δ b(x))) around the Euclidean φ.
#[derive(Clone, Debug)]
pub struct PerturbationFamily {
    phase_bump: Bump,
    weight_bump: Bump,
}

impl PerturbationFamily {
    pub fn new(phase_bump: Bump, weight_bump: Bump) -> Result<Self> {
        if phase_bump.dim() != weight_bump.dim() {
            return Err(Error::DimensionMismatch {
                expected: phase_bump.dim(),
                got: weight_bump.dim(),
            });
        }
        Ok(Self {
            phase_bump,
            weight_bump,
        })
    }

    /// Off-center bumps of radius 0.6 L and 0.5 L.
    pub fn standard(domain: &Domain) -> Result<Self> {
        let l = domain.half_width();
        let (a, b): (Vec<f64>, Vec<f64>) = match domain.dim() {
            2 => (vec![0.1 * l, -0.1 * l], vec![-0.2 * l, 0.15 * l]),
            3 => (vec![0.1 * l, -0.1 * l, 0.05 * l], vec![-0.2 * l, 0.15 * l, 0.0]),
            d => return Err(Error::UnsupportedDimension(d)),
        };
        Self::new(Bump::new(&a, 0.6 * l, 1.0)?, Bump::new(&b, 0.5 * l, 1.0)?)
    }

    pub fn dim(&self) -> usize {
        self.phase_bump.dim()
    }

    /// The member at δ, checked for the defining-function conditions and a
    /// nonvanishing weight.
    pub fn member(
        &self,
        delta: f64,
        base_weight: &Arc<dyn Weight>,
        domain: &Domain,
    ) -> Result<(Arc<dyn DefiningFunction>, Arc<dyn Weight>)> {
        let df = make_perturbed(self.phase_bump.clone(), delta, domain, 33)?;
        let w: Arc<dyn Weight> = Arc::new(PerturbedWeight::new(
            base_weight.clone(),
            self.weight_bump.clone(),
            delta,
        ));
        check_weight(w.as_ref(), domain, 17, 16)?;
        Ok((Arc::new(df), w))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    pub n_theta: usize,
    /// Delta half-width in units of h.
    pub eta_factor: f64,
    pub power_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub cg: CgOptions,
    /// Step of the nested central differences in the C^K distances.
    pub fd_step: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            n_theta: 32,
            eta_factor: 2.0,
            power_iterations: 30,
            restarts: 3,
            seed: 20240229,
            cg: CgOptions {
                tol: 1e-8,
                max_iter: 500,
                stagnation_window: 100,
            },
            fd_step: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    /// Sampled C^k distance of (φ_δ, w_δ) from (φ, w), k = 2, 3, 4.
    pub dist_c2: f64,
    pub dist_c3: f64,
    pub dist_c4: f64,
    /// Lower estimate of ‖N − N_δ‖ from L²(M) to H^{n−1}(M₁).
    pub opnorm: f64,
    /// σ_min(N_δ) from L²(M) to H^{n−1}(M₁).
    pub sigma_min: f64,
    /// Relative L² error of inverting base-operator data with N_δ.
    pub recon_err: f64,
    pub iters: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationSweep {
    pub rows: Vec<SweepRow>,
    /// σ_min of the unperturbed operator.
    pub base_sigma_min: f64,
    /// Log-log fit of opnorm against δ over δ > 0.
    pub fit: Option<LineFit>,
    /// δ at which the fitted ‖N − N_δ‖ reaches σ_min/2.
    pub threshold: f64,
    /// σ_min(N_δ) ≥ σ_min(N) − ‖N − N_δ‖ on every row.
    pub absorption_ok: bool,
    /// σ_min(N_δ) > 0 for every δ below the threshold.
    pub margin_ok: bool,
}

impl PerturbationSweep {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("delta,dist_C2,dist_C3,dist_C4,opnorm,sigma_min,recon_err,iters\n");
        for r in &self.rows {
            let cols = [
                r.delta,
                r.dist_c2,
                r.dist_c3,
                r.dist_c4,
                r.opnorm,
                r.sigma_min,
                r.recon_err,
            ];
            let body: Vec<String> = cols.iter().map(|v| fmt_f64(*v)).collect();
            s.push_str(&format!("{},{}\n", body.join(","), r.iters));
        }
        let (slope, intercept, r2) = self
            .fit
            .map_or((f64::NAN, f64::NAN, f64::NAN), |f| (f.slope, f.intercept, f.r2));
        s.push_str(&format!(
            "# fit slope={} intercept={} r2={} base_sigma_min={} threshold={} absorption_ok={} margin_ok={}\n",
            fmt_f64(slope),
            fmt_f64(intercept),
            fmt_f64(r2),
            fmt_f64(self.base_sigma_min),
            fmt_f64(self.threshold),
            self.absorption_ok,
            self.margin_ok
        ));
        s
    }
}

/// Runs the family over the δ ladder on `grid`: distances, ‖N − N_δ‖ by power
/// iteration, σ_min(N_δ), and reconstruction of base-operator data of `truth`
/// with the perturbed operator.
pub fn perturbation_sweep(
    grid: &Grid,
    base_weight: Arc<dyn Weight>,
    family: &PerturbationFamily,
    deltas: &[f64],
    truth: &ScalarField,
    options: &SweepOptions,
) -> Result<PerturbationSweep> {
    let n = grid.dim();
    if family.dim() != n || base_weight.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: family.dim(),
        });
    }
    if deltas.is_empty() || deltas[0] < 0.0 || deltas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param(
            "delta",
            "ladder must be nonnegative and strictly increasing",
        ));
    }
    truth.check_grid(grid)?;
    let domain = *grid.domain();
    let base_df: Arc<dyn DefiningFunction> = Arc::new(make_euclidean(n)?);
    let layout = SinogramLayout::covering(base_df.as_ref(), grid, options.n_theta, options.eta_factor)?;
    let base = RadonTransform::with_layout(base_df.clone(), base_weight.clone(), *grid, layout)?;
    let layout = base.layout().clone();
    let base_sigma = estimate_stability_constant(&base)?.sigma_min;
    let data = base.forward(truth)?;
    let weighting = SobolevWeighting::new(grid, SobolevOrder::for_dim(n));

    let members = deltas
        .iter()
        .map(|&d| {
            family
                .member(d, &base_weight, &domain)
                .map_err(|e| Error::BolkerFailure(format!("family leaves the admissible class at delta = {d}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = members
        .par_iter()
        .zip(deltas.par_iter())
        .enumerate()
        .map(|(idx, ((df, w), &delta))| {
            let op = RadonTransform::with_layout(df.clone(), w.clone(), *grid, layout.clone())?;
            let dist = cdistance(
                base_df.as_ref(),
                base_weight.as_ref(),
                df.as_ref(),
                w.as_ref(),
                &domain,
                options.fd_step,
            );
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed.wrapping_add(idx as u64));
            let opnorm = difference_norm(&base, &op, &weighting, options, &mut rng)?;
            let sigma_min = match estimate_stability_constant(&op) {
                Ok(r) => r.sigma_min,
                Err(Error::NonInjective { sigma_min }) => sigma_min,
                Err(e) => return Err(e),
            };
            let symbol = PrincipalSymbol::new(df.clone(), w.clone())?;
            let pre = Preconditioner::new(&symbol, grid)?;
            let sol = cg_normal_solve(&op, &data, Some(&pre), &options.cg)?;
            Ok(SweepRow {
                delta,
                dist_c2: dist[2],
                dist_c3: dist[3],
                dist_c4: dist[4],
                opnorm,
                sigma_min,
                recon_err: sol.field.relative_error(truth),
                iters: sol.iterations,
            })
        })
        .collect::<Result<Vec<SweepRow>>>()?;

    let positive: Vec<&SweepRow> = rows.iter().filter(|r| r.delta > 0.0 && r.opnorm > 0.0).collect();
    let xs: Vec<f64> = positive.iter().map(|r| r.delta).collect();
    let ys: Vec<f64> = positive.iter().map(|r| r.opnorm).collect();
    let fit = loglog_fit(&xs, &ys);
    let threshold = fit
        .map_or(f64::NAN, |f| ((0.5 * base_sigma).ln() - f.intercept) / f.slope)
        .exp();
    let slack = 1e-9 * base_sigma;
    let absorption_ok = rows.iter().all(|r| r.sigma_min + slack >= base_sigma - r.opnorm);
    let margin_ok = rows.iter().filter(|r| r.delta < threshold).all(|r| r.sigma_min > 0.0);
    Ok(PerturbationSweep {
        rows,
        base_sigma_min: base_sigma,
        fit,
        threshold,
        absorption_ok,
        margin_ok,
    })
}

/// max_{restarts} ‖(N − N_δ) f‖_H / ‖f‖ over power iterates of P D S D P.
fn difference_norm(
    base: &RadonTransform,
    op: &RadonTransform,
    weighting: &SobolevWeighting,
    options: &SweepOptions,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let grid = *base.grid();
    let diff = |f: &ScalarField| -> Result<ScalarField> {
        let mut a = op.adjoint_transpose(&op.forward_on_m1(f)?)?;
        a.axpy(-1.0, &base.adjoint_transpose(&base.forward_on_m1(f)?)?);
        Ok(a)
    };
    let mut best = 0.0f64;
    for _ in 0..options.restarts.max(1) {
        let mut f = ScalarField::from_fn(grid, |_| rng.gen_range(-1.0..1.0));
        f.restrict_to_m();
        let norm = f.norm();
        f.scale(1.0 / norm);
        for _ in 0..options.power_iterations.max(1) {
            let df = diff(&f)?;
            let sdf = weighting.apply(&df)?;
            best = best.max(df.dot(&sdf).max(0.0).sqrt());
            let mut next = diff(&sdf)?;
            next.restrict_to_m();
            let nn = next.norm();
            if !(nn > 0.0) {
                break;
            }
            next.scale(1.0 / nn);
            f = next;
        }
    }
    Ok(best)
}

/// Point on M₁ × S^{n−1} from x and the angles of θ.
fn unpack(z: &[f64], n: usize) -> ([f64; MAX_DIM], [f64; MAX_DIM]) {
    let mut x = [0.0; MAX_DIM];
    x[..n].copy_from_slice(&z[..n]);
    let mut t = [0.0; MAX_DIM];
    if n == 2 {
        t[0] = z[2].cos();
        t[1] = z[2].sin();
    } else {
        let (sp, cp) = z[3].sin_cos();
        let (sq, cq) = z[4].sin_cos();
        t[0] = sp * cq;
        t[1] = sp * sq;
        t[2] = cp;
    }
    (x, t)
}

fn multi_indices(vars: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..vars {
        out = out
            .into_iter()
            .flat_map(|a: Vec<usize>| {
                let used: usize = a.iter().sum();
                (0..=max - used).map(move |k| {
                    let mut b = a.clone();
                    b.push(k);
                    b
                })
            })
            .collect();
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Nested central difference ∂^α g(z) with step h.
fn derivative(g: &dyn Fn(&[f64]) -> f64, z: &[f64], alpha: &[usize], h: f64) -> f64 {
    let terms: usize = alpha.iter().map(|a| a + 1).product();
    let mut total = 0.0;
    let mut y = [0.0; 2 * MAX_DIM];
    for t in 0..terms {
        let mut rem = t;
        let mut coeff = 1.0;
        for (v, &q) in alpha.iter().enumerate() {
            let j = rem % (q + 1);
            rem /= q + 1;
            coeff *= if j % 2 == 0 { 1.0 } else { -1.0 } * binomial(q, j);
            y[v] = z[v] + (0.5 * q as f64 - j as f64) * h;
        }
        total += coeff * g(&y[..alpha.len()]);
    }
    let order: usize = alpha.iter().sum();
    total / h.powi(order as i32)
}

/// Sampled C^k distances, k = 0..=4, of (φ₁, w₁) from (φ₀, w₀) over a vertex
/// grid of M₁ and a direction sample.
fn cdistance(
    phi0: &dyn DefiningFunction,
    w0: &dyn Weight,
    phi1: &dyn DefiningFunction,
    w1: &dyn Weight,
    domain: &Domain,
    step: f64,
) -> [f64; MAX_DISTANCE_ORDER + 1] {
    let n = domain.dim();
    let vars = 2 * n - 1;
    let dphi = |z: &[f64]| {
        let (x, t) = unpack(z, n);
        phi1.eval(&x[..n], &t[..n]) - phi0.eval(&x[..n], &t[..n])
    };
    let dw = |z: &[f64]| {
        let (x, t) = unpack(z, n);
        w1.eval(&x[..n], &t[..n]) - w0.eval(&x[..n], &t[..n])
    };
    let angles: Vec<Vec<f64>> = if n == 2 {
        (0..8)
            .map(|j| vec![2.0 * std::f64::consts::PI * j as f64 / 8.0])
            .collect()
    } else {
        let mut a = Vec::new();
        for p in [0.25, 0.5, 0.75] {
            for q in 0..6 {
                a.push(vec![std::f64::consts::PI * p, std::f64::consts::PI * q as f64 / 3.0]);
            }
        }
        a
    };
    let per_axis = if n == 2 { 9 } else { 5 };
    let alphas = multi_indices(vars, MAX_DISTANCE_ORDER);
    let mut out = [0.0; MAX_DISTANCE_ORDER + 1];
    for x in domain.outer_sample_points(per_axis) {
        for a in &angles {
            let z: Vec<f64> = x.iter().chain(a).copied().collect();
            for alpha in &alphas {
                let order: usize = alpha.iter().sum();
                let v = derivative(&dphi, &z, alpha, step)
                    .abs()
                    .max(derivative(&dw, &z, alpha, step).abs());
                for slot in out.iter_mut().skip(order) {
                    *slot = f64::max(*slot, v);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_differences_are_exact_on_polynomials() {
        let g = |z: &[f64]| z[0].powi(3) * z[1] + z[1].powi(4);
        let z = [0.3, -0.7];
        assert!((derivative(&g, &z, &[2, 1], 0.05) - 6.0 * 0.3).abs() < 1e-8);
        assert!((derivative(&g, &z, &[0, 4], 0.05) - 24.0).abs() < 1e-6);
        assert!((derivative(&g, &z, &[0, 0], 0.05) - g(&z)).abs() < 1e-15);
        assert_eq!(multi_indices(3, 4).len(), 35);
    }
}
