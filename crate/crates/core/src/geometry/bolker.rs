use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::defining::{det, norm, DefiningFunction};
use crate::geometry::direction::{angular_spacing, sample_directions, Direction, MAX_DIM};
use crate::geometry::Domain;

/// Lower bound required of the separation ratio |d_θφ(x₁,θ) − d_θφ(x₂,θ)| / |x₁ − x₂|.
pub const INJECTIVITY_THRESHOLD: f64 = 1e-6;

const HOMOGENEITY_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-6;

/// A sampled value together with the point where it was attained.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub value: f64,
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
}

impl Witness {
    fn empty(value: f64) -> Self {
        Self {
            value,
            x: vec![],
            theta: vec![],
        }
    }
}

/// Local (Beylkin) conditions on φ, evaluated over a product grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DefiningReport {
    pub homogeneity_ok: bool,
    /// Worst relative error of φ(x, λθ) = λφ(x, θ), λ ∈ {0.5, 2}.
    pub homogeneity: Witness,
    pub gradient_ok: bool,
    /// Smallest |d_xφ|.
    pub min_grad_x: Witness,
    pub hessian_ok: bool,
    /// Smallest det(∂²φ/∂x∂θ).
    pub min_det: Witness,
    /// Derivative consistency against central differences; informational.
    pub derivatives_consistent: bool,
    pub max_fd_error: Witness,
    pub n_x: usize,
    pub n_theta: usize,
    pub grid_spacing: f64,
}

impl DefiningReport {
    pub fn ok(&self) -> bool {
        self.homogeneity_ok && self.gradient_ok && self.hessian_ok
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollisionWitness {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub theta: Vec<f64>,
    /// |d_θφ(x₁, θ) − d_θφ(x₂, θ)|.
    pub separation: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InjectivityReport {
    pub ok: bool,
    /// Smallest separation ratio over examined pairs and refined collisions.
    pub min_ratio: f64,
    pub witness: Option<CollisionWitness>,
    /// Ratio bound b/diam(M₁) guaranteed for pairs in non-neighboring buckets.
    pub far_pair_bound: f64,
    pub examined_pairs: usize,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurjectivityReport {
    pub ok: bool,
    /// Largest covering gap (radians) over sample points in M.
    pub max_gap: f64,
    pub worst_x: Vec<f64>,
    pub padding_ok: bool,
    /// Largest covering gap over sample points in M₁ ∖ M.
    pub max_gap_padding: f64,
    pub worst_x_padding: Vec<f64>,
    pub threshold: f64,
}

/// Verdict on the local conditions and the global Bolker condition.
#[derive(Clone, Debug, PartialEq)]
pub struct BolkerReport {
    pub defining: DefiningReport,
    pub injectivity: InjectivityReport,
    pub surjectivity: SurjectivityReport,
    pub n_x: usize,
    pub n_theta: usize,
    pub grid_spacing: f64,
    pub angular_spacing: f64,
}

impl BolkerReport {
    pub fn ok(&self) -> bool {
        self.defining.ok() && self.injectivity.ok && self.surjectivity.ok
    }

    /// One `key=value` line per condition.
    pub fn summary(&self) -> String {
        let d = &self.defining;
        let mut s = String::new();
        s.push_str(&format!(
            "homogeneity ok={} max_rel_err={:.3e}\n",
            d.homogeneity_ok, d.homogeneity.value
        ));
        s.push_str(&format!(
            "gradient ok={} min_norm={:.6e} at x={:?} theta={:?}\n",
            d.gradient_ok, d.min_grad_x.value, d.min_grad_x.x, d.min_grad_x.theta
        ));
        s.push_str(&format!(
            "mixed_hessian ok={} min_det={:.6e} at x={:?} theta={:?}\n",
            d.hessian_ok, d.min_det.value, d.min_det.x, d.min_det.theta
        ));
        s.push_str(&format!(
            "derivatives consistent={} max_fd_err={:.3e}\n",
            d.derivatives_consistent, d.max_fd_error.value
        ));
        let inj = &self.injectivity;
        s.push_str(&format!(
            "injectivity ok={} min_ratio={:.6e} far_bound={:.3e} pairs={}",
            inj.ok, inj.min_ratio, inj.far_pair_bound, inj.examined_pairs
        ));
        if let Some(w) = &inj.witness {
            s.push_str(&format!(
                " x1={:?} x2={:?} theta={:?} separation={:.3e}",
                w.x1, w.x2, w.theta, w.separation
            ));
        }
        s.push('\n');
        let sj = &self.surjectivity;
        s.push_str(&format!(
            "surjectivity ok={} max_gap={:.6e} threshold={:.6e} padding_ok={} padding_gap={:.6e}\n",
            sj.ok, sj.max_gap, sj.threshold, sj.padding_ok, sj.max_gap_padding
        ));
        s.push_str(&format!(
            "samples n_x={} n_theta={} h={:.6e} dtheta={:.6e}",
            self.n_x, self.n_theta, self.grid_spacing, self.angular_spacing
        ));
        s
    }
}

fn check_counts(df: &dyn DefiningFunction, domain: &Domain, n_x: usize, n_theta: usize) -> Result<()> {
    if df.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: df.dim(),
        });
    }
    if n_x < 2 || n_theta < 3 {
        return Err(Error::param("samples", "need n_x >= 2 and n_theta >= 3"));
    }
    Ok(())
}

fn grid_spacing(domain: &Domain, n_x: usize) -> f64 {
    2.0 * domain.outer_half_width() / (n_x - 1) as f64
}

struct PointStats {
    homogeneity: Witness,
    min_grad: Witness,
    min_det: Witness,
    fd: Witness,
}

fn fd_error(df: &dyn DefiningFunction, x: &[f64], theta: &[f64]) -> f64 {
    let n = x.len();
    let mut gx = [0.0; MAX_DIM];
    let mut gt = [0.0; MAX_DIM];
    let mut hm = [0.0; MAX_DIM * MAX_DIM];
    df.grad_x(x, theta, &mut gx[..n]);
    df.grad_theta(x, theta, &mut gt[..n]);
    df.mixed_hessian(x, theta, &mut hm[..n * n]);
    let mut worst = 0.0f64;
    let mut xp = [0.0; MAX_DIM];
    let mut xm = [0.0; MAX_DIM];
    let mut gp = [0.0; MAX_DIM];
    let mut gm = [0.0; MAX_DIM];
    for k in 0..n {
        xp[..n].copy_from_slice(x);
        xm[..n].copy_from_slice(x);
        xp[k] += FD_STEP;
        xm[k] -= FD_STEP;
        let d = (df.eval(&xp[..n], theta) - df.eval(&xm[..n], theta)) / (2.0 * FD_STEP);
        worst = worst.max((d - gx[k]).abs() / (1.0 + gx[k].abs()));

        let mut tp = [0.0; MAX_DIM];
        let mut tm = [0.0; MAX_DIM];
        tp[..n].copy_from_slice(theta);
        tm[..n].copy_from_slice(theta);
        tp[k] += FD_STEP;
        tm[k] -= FD_STEP;
        let d = (df.eval(x, &tp[..n]) - df.eval(x, &tm[..n])) / (2.0 * FD_STEP);
        worst = worst.max((d - gt[k]).abs() / (1.0 + gt[k].abs()));

        df.grad_x(x, &tp[..n], &mut gp[..n]);
        df.grad_x(x, &tm[..n], &mut gm[..n]);
        for i in 0..n {
            let d = (gp[i] - gm[i]) / (2.0 * FD_STEP);
            let h = hm[i * n + k];
            worst = worst.max((d - h).abs() / (1.0 + h.abs()));
        }
    }
    worst
}

fn point_stats(df: &dyn DefiningFunction, x: &[f64], dirs: &[Direction]) -> PointStats {
    let n = x.len();
    let mut stats = PointStats {
        homogeneity: Witness::empty(0.0),
        min_grad: Witness::empty(f64::INFINITY),
        min_det: Witness::empty(f64::INFINITY),
        fd: Witness::empty(0.0),
    };
    let mut g = [0.0; MAX_DIM];
    let mut h = [0.0; MAX_DIM * MAX_DIM];
    let mut scaled = [0.0; MAX_DIM];
    for d in dirs {
        let t = d.as_slice();
        let phi = df.eval(x, t);
        for lambda in [0.5, 2.0] {
            for (s, c) in scaled.iter_mut().zip(t) {
                *s = lambda * c;
            }
            let err = (df.eval(x, &scaled[..n]) - lambda * phi).abs() / (lambda * phi.abs()).max(lambda);
            if !(err <= stats.homogeneity.value) {
                stats.homogeneity = Witness {
                    value: if err.is_nan() { f64::INFINITY } else { err },
                    x: x.to_vec(),
                    theta: t.to_vec(),
                };
            }
        }
        df.grad_x(x, t, &mut g[..n]);
        let gn = norm(&g[..n]);
        if !(gn >= stats.min_grad.value) {
            stats.min_grad = Witness {
                value: if gn.is_nan() { 0.0 } else { gn },
                x: x.to_vec(),
                theta: t.to_vec(),
            };
        }
        df.mixed_hessian(x, t, &mut h[..n * n]);
        let dt = det(&h[..n * n], n);
        if !(dt >= stats.min_det.value) {
            stats.min_det = Witness {
                value: if dt.is_nan() { f64::NEG_INFINITY } else { dt },
                x: x.to_vec(),
                theta: t.to_vec(),
            };
        }
        let fd = fd_error(df, x, t);
        if fd > stats.fd.value {
            stats.fd = Witness {
                value: fd,
                x: x.to_vec(),
                theta: t.to_vec(),
            };
        }
    }
    stats
}

/// Samples homogeneity, |d_xφ| and det(∂²φ/∂x∂θ) over an `n_x`-per-axis grid of
/// M₁ times `n_theta` directions.
pub fn check_defining(
    df: &dyn DefiningFunction,
    domain: &Domain,
    n_x: usize,
    n_theta: usize,
) -> Result<DefiningReport> {
    check_counts(df, domain, n_x, n_theta)?;
    let dirs = sample_directions(domain.dim(), n_theta)?;
    let points = domain.outer_sample_points(n_x);
    let per_point: Vec<PointStats> = points.par_iter().map(|x| point_stats(df, x, &dirs)).collect();

    let mut acc = PointStats {
        homogeneity: Witness::empty(0.0),
        min_grad: Witness::empty(f64::INFINITY),
        min_det: Witness::empty(f64::INFINITY),
        fd: Witness::empty(0.0),
    };
    for p in per_point {
        if p.homogeneity.value > acc.homogeneity.value {
            acc.homogeneity = p.homogeneity;
        }
        if p.min_grad.value < acc.min_grad.value {
            acc.min_grad = p.min_grad;
        }
        if p.min_det.value < acc.min_det.value {
            acc.min_det = p.min_det;
        }
        if p.fd.value > acc.fd.value {
            acc.fd = p.fd;
        }
    }
    Ok(DefiningReport {
        homogeneity_ok: acc.homogeneity.value <= HOMOGENEITY_TOL,
        homogeneity: acc.homogeneity,
        gradient_ok: acc.min_grad.value > 1e-12,
        min_grad_x: acc.min_grad,
        hessian_ok: acc.min_det.value > 0.0,
        min_det: acc.min_det,
        derivatives_consistent: acc.fd.value <= FD_TOL,
        max_fd_error: acc.fd,
        n_x,
        n_theta,
        grid_spacing: grid_spacing(domain, n_x),
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

fn image(df: &dyn DefiningFunction, x: &[f64], theta: &[f64]) -> [f64; MAX_DIM] {
    let mut out = [0.0; MAX_DIM];
    df.grad_theta(x, theta, &mut out[..x.len()]);
    out
}

fn solve(a: &[f64], b: &[f64], n: usize) -> Option<[f64; MAX_DIM]> {
    let d = det(a, n);
    if !(d.abs() > 1e-300) {
        return None;
    }
    let mut out = [0.0; MAX_DIM];
    for k in 0..n {
        let mut m = [0.0; MAX_DIM * MAX_DIM];
        m[..n * n].copy_from_slice(&a[..n * n]);
        for i in 0..n {
            m[i * n + k] = b[i];
        }
        out[k] = det(&m[..n * n], n) / d;
    }
    Some(out)
}

/// Newton solve of d_θφ(y, θ) = target starting from `start`.
fn refine_collision(
    df: &dyn DefiningFunction,
    domain: &Domain,
    target: &[f64],
    start: &[f64],
    theta: &[f64],
) -> Option<Vec<f64>> {
    let n = start.len();
    let mut y = start.to_vec();
    let mut h = [0.0; MAX_DIM * MAX_DIM];
    let mut jac = [0.0; MAX_DIM * MAX_DIM];
    for _ in 0..50 {
        let f = image(df, &y, theta);
        let mut r = [0.0; MAX_DIM];
        for i in 0..n {
            r[i] = f[i] - target[i];
        }
        if norm(&r[..n]) < 1e-14 * (1.0 + norm(target)) {
            return domain.contains_outer(&y).then_some(y);
        }
        df.mixed_hessian(&y, theta, &mut h[..n * n]);
        // ∂(d_θⱼφ)/∂xⁱ = H[i][j], so the Jacobian of the image map is Hᵀ
        for i in 0..n {
            for j in 0..n {
                jac[j * n + i] = h[i * n + j];
            }
        }
        let step = solve(&jac[..n * n], &r[..n], n)?;
        for i in 0..n {
            y[i] -= step[i];
        }
        if !y.iter().all(|c| c.is_finite()) {
            return None;
        }
    }
    None
}

struct ThetaResult {
    min_ratio: f64,
    witness: Option<CollisionWitness>,
    far_bound: f64,
    pairs: usize,
}

fn injectivity_for_theta(
    df: &dyn DefiningFunction,
    domain: &Domain,
    points: &[Vec<f64>],
    theta: &[f64],
    per_axis: usize,
    spacing: f64,
) -> ThetaResult {
    let n = domain.dim();
    let imgs: Vec<[f64; MAX_DIM]> = points.iter().map(|x| image(df, x, theta)).collect();

    // bucket size: twice the largest image distance between grid neighbors
    let mut max_step = 0.0f64;
    let strides: Vec<usize> = (0..n).map(|k| per_axis.pow((n - 1 - k) as u32)).collect();
    for (idx, img) in imgs.iter().enumerate() {
        for &st in &strides {
            if (idx / st) % per_axis + 1 < per_axis {
                max_step = max_step.max(dist(&img[..n], &imgs[idx + st][..n]));
            }
        }
    }
    let bucket = (2.0 * max_step).max(1e-300);
    let diam = 2.0 * domain.outer_half_width() * (n as f64).sqrt();

    let key = |img: &[f64; MAX_DIM]| -> [i64; MAX_DIM] {
        let mut k = [0i64; MAX_DIM];
        for i in 0..n {
            k[i] = (img[i] / bucket).floor() as i64;
        }
        k
    };
    let mut buckets: HashMap<[i64; MAX_DIM], Vec<usize>> = HashMap::new();
    for (i, img) in imgs.iter().enumerate() {
        buckets.entry(key(img)).or_default().push(i);
    }

    let offsets: Vec<[i64; MAX_DIM]> = (0..3usize.pow(n as u32))
        .map(|c| {
            let mut o = [0i64; MAX_DIM];
            let mut rem = c;
            for v in o.iter_mut().take(n) {
                *v = (rem % 3) as i64 - 1;
                rem /= 3;
            }
            o
        })
        .collect();

    let mut min_ratio = f64::INFINITY;
    let mut best: Option<(usize, usize)> = None;
    // far pairs ranked by ratio, for Newton refinement
    let mut far: Vec<(f64, usize, usize)> = Vec::new();
    let mut pairs = 0usize;
    for (i, img) in imgs.iter().enumerate() {
        let k = key(img);
        for o in &offsets {
            let mut nk = k;
            for d in 0..n {
                nk[d] += o[d];
            }
            let Some(list) = buckets.get(&nk) else { continue };
            for &j in list {
                if j <= i {
                    continue;
                }
                pairs += 1;
                let dx = dist(&points[i], &points[j]);
                let r = dist(&img[..n], &imgs[j][..n]) / dx;
                if r < min_ratio {
                    min_ratio = r;
                    best = Some((i, j));
                }
                if dx > 2.0 * spacing {
                    far.push((r, i, j));
                }
            }
        }
    }
    let total_pairs = points.len() * (points.len() - 1) / 2;
    let far_bound = if pairs < total_pairs {
        bucket / diam
    } else {
        f64::INFINITY
    };

    let mut witness = best.map(|(i, j)| CollisionWitness {
        x1: points[i].clone(),
        x2: points[j].clone(),
        theta: theta.to_vec(),
        separation: dist(&imgs[i][..n], &imgs[j][..n]),
        ratio: min_ratio,
    });

    far.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for &(_, i, j) in far.iter().take(4) {
        if let Some(y) = refine_collision(df, domain, &imgs[i][..n], &points[j], theta) {
            let dx = dist(&points[i], &y);
            if dx > spacing {
                let sep = dist(&imgs[i][..n], &image(df, &y, theta)[..n]);
                let r = sep / dx;
                if r < min_ratio {
                    min_ratio = r;
                    witness = Some(CollisionWitness {
                        x1: points[i].clone(),
                        x2: y,
                        theta: theta.to_vec(),
                        separation: sep,
                        ratio: r,
                    });
                }
            }
        }
    }
    ThetaResult {
        min_ratio,
        witness,
        far_bound,
        pairs,
    }
}

fn max_gap_2d(covectors: &[[f64; MAX_DIM]]) -> f64 {
    let mut angles: Vec<f64> = covectors
        .iter()
        .map(|c| c[1].atan2(c[0]).rem_euclid(2.0 * PI))
        .collect();
    angles.sort_by(f64::total_cmp);
    let mut gap = angles[0] + 2.0 * PI - angles[angles.len() - 1];
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap
}

/// Covering radius of the covector set, probed at a denser Fibonacci set.
fn covering_radius_3d(covectors: &[[f64; MAX_DIM]], probes: &[Direction]) -> f64 {
    let mut worst = 0.0f64;
    for p in probes {
        let best = covectors
            .iter()
            .map(|c| p.dot(&c[..3]))
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(best.clamp(-1.0, 1.0).acos());
    }
    worst
}

fn surjectivity_gap(df: &dyn DefiningFunction, x: &[f64], dirs: &[Direction], probes: &[Direction]) -> f64 {
    let n = x.len();
    let mut covectors = Vec::with_capacity(dirs.len());
    for d in dirs {
        let mut g = [0.0; MAX_DIM];
        df.grad_x(x, d.as_slice(), &mut g[..n]);
        let gn = norm(&g[..n]);
        if gn > 0.0 && gn.is_finite() {
            g.iter_mut().for_each(|c| *c /= gn);
            covectors.push(g);
        }
    }
    if covectors.is_empty() {
        return PI;
    }
    match n {
        2 => max_gap_2d(&covectors),
        _ => covering_radius_3d(&covectors, probes),
    }
}

/// Samples the local conditions and the global Bolker condition: injectivity of
/// x ↦ d_θφ(x, θ) for each sampled θ and surjectivity of θ ↦ d_xφ/|d_xφ| for each
/// sampled x.
pub fn check_bolker(df: &dyn DefiningFunction, domain: &Domain, n_x: usize, n_theta: usize) -> Result<BolkerReport> {
    let defining = check_defining(df, domain, n_x, n_theta)?;
    let n = domain.dim();
    let dirs = sample_directions(n, n_theta)?;
    let points = domain.outer_sample_points(n_x);
    let spacing = grid_spacing(domain, n_x);

    let per_theta: Vec<ThetaResult> = dirs
        .par_iter()
        .map(|d| injectivity_for_theta(df, domain, &points, d.as_slice(), n_x, spacing))
        .collect();
    let mut min_ratio = f64::INFINITY;
    let mut witness = None;
    let mut far_pair_bound = f64::INFINITY;
    let mut examined_pairs = 0;
    for r in per_theta {
        examined_pairs += r.pairs;
        far_pair_bound = far_pair_bound.min(r.far_bound);
        if r.min_ratio < min_ratio {
            min_ratio = r.min_ratio;
            witness = r.witness;
        }
    }
    let injectivity = InjectivityReport {
        ok: min_ratio.min(far_pair_bound) > INJECTIVITY_THRESHOLD,
        min_ratio,
        witness,
        far_pair_bound,
        examined_pairs,
        threshold: INJECTIVITY_THRESHOLD,
    };

    let dtheta = angular_spacing(n, n_theta);
    let probes = if n == 3 {
        sample_directions(3, 4 * n_theta)?
    } else {
        Vec::new()
    };
    let gaps: Vec<f64> = points
        .par_iter()
        .map(|x| surjectivity_gap(df, x, &dirs, &probes))
        .collect();
    let (mut gap_m, mut x_m) = (0.0f64, Vec::new());
    let (mut gap_p, mut x_p) = (0.0f64, Vec::new());
    for (x, g) in points.iter().zip(gaps) {
        if domain.contains(x) {
            if g > gap_m || x_m.is_empty() {
                gap_m = g;
                x_m = x.clone();
            }
        } else if g > gap_p || x_p.is_empty() {
            gap_p = g;
            x_p = x.clone();
        }
    }
    let threshold = 2.0 * dtheta;
    let surjectivity = SurjectivityReport {
        ok: gap_m < threshold,
        max_gap: gap_m,
        worst_x: x_m,
        padding_ok: gap_p < threshold,
        max_gap_padding: gap_p,
        worst_x_padding: x_p,
        threshold,
    };

    Ok(BolkerReport {
        defining,
        injectivity,
        surjectivity,
        n_x,
        n_theta,
        grid_spacing: spacing,
        angular_spacing: dtheta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_euclidean, make_perturbed, Bump, Perturbed, PolarFold};

    #[test]
    fn euclidean_passes_everything() {
        for dim in [2, 3] {
            let domain = Domain::new(dim, 1.0).unwrap();
            let df = make_euclidean(dim).unwrap();
            let (nx, nt) = if dim == 2 { (17, 32) } else { (8, 40) };
            let r = check_bolker(&df, &domain, nx, nt).unwrap();
            assert!(r.ok(), "{}", r.summary());
            assert_eq!(r.defining.min_det.value, 1.0);
            assert!((r.injectivity.min_ratio - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn breakdown_is_reported_with_witness() {
        let domain = Domain::new(2, 1.0).unwrap();
        let bump = Bump::new(&[0.0, 0.0], 0.5, 1.0).unwrap();
        let g = bump.max_grad_sampled(401);
        let df = Perturbed::new_unchecked(bump, 1.2 / g);
        let r = check_defining(&df, &domain, 41, 64).unwrap();
        assert!(!r.hessian_ok);
        assert!(r.min_det.value <= 0.0);
        assert_eq!(r.min_det.x.len(), 2);
    }

    #[test]
    fn small_perturbation_passes() {
        let domain = Domain::new(2, 1.0).unwrap();
        let bump = Bump::new(&[0.1, -0.2], 0.6, 1.0).unwrap();
        let df = make_perturbed(bump, 0.05, &domain, 33).unwrap();
        let r = check_bolker(&df, &domain, 33, 64).unwrap();
        assert!(r.ok(), "{}", r.summary());
        assert!(r.injectivity.min_ratio > 0.5);
    }

    #[test]
    fn fold_fails_injectivity_only() {
        let domain = Domain::new(2, 1.0).unwrap();
        let df = PolarFold::new(2.0, 1.2).unwrap();
        let r = check_bolker(&df, &domain, 33, 64).unwrap();
        assert!(r.defining.ok(), "{}", r.summary());
        assert!(!r.injectivity.ok, "{}", r.summary());
        let w = r.injectivity.witness.unwrap();
        assert!(w.separation < 1e-10);
        let k = dist(&w.x1, &w.x2) / 1.2;
        assert!(k >= 0.5 && (k - k.round()).abs() < 1e-6, "{w:?}");
    }

    #[test]
    fn report_is_deterministic() {
        let domain = Domain::new(2, 1.0).unwrap();
        let df = PolarFold::new(2.0, 1.2).unwrap();
        let a = check_bolker(&df, &domain, 21, 24).unwrap();
        let b = check_bolker(&df, &domain, 21, 24).unwrap();
        assert_eq!(a, b);
    }
}
