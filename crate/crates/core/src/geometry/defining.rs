use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::direction::{check_dim, MAX_DIM};
use crate::geometry::Domain;

/// Provenance of a defining function, carried into sinogram metadata.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefiningKind {
    Euclidean,
    Perturbed,
    UserSupplied,
}

/// A Beylkin-type defining function φ(x, θ) on M₁ × (ℝⁿ∖0).
///
/// Implementations must be positive homogeneous of degree one in θ and supply
/// exact first derivatives plus the mixed Hessian. All output buffers have
/// length `dim()` (or `dim()²` for the Hessian, row-major with
/// `out[i * n + j] = ∂²φ/∂xⁱ∂θʲ`). This trait is the plugin point for
/// user-supplied families.
pub trait DefiningFunction: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn kind(&self) -> DefiningKind;
    /// Identifier written into sinogram metadata.
    fn name(&self) -> String;
    fn eval(&self, x: &[f64], theta: &[f64]) -> f64;
    fn grad_x(&self, x: &[f64], theta: &[f64], out: &mut [f64]);
    fn grad_theta(&self, x: &[f64], theta: &[f64], out: &mut [f64]);
    fn mixed_hessian(&self, x: &[f64], theta: &[f64], out: &mut [f64]);
}

/// |d_xφ(x, θ)|.
pub(crate) fn grad_x_norm(df: &dyn DefiningFunction, x: &[f64], theta: &[f64]) -> f64 {
    let mut g = [0.0; MAX_DIM];
    df.grad_x(x, theta, &mut g[..df.dim()]);
    norm(&g[..df.dim()])
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub(crate) fn det(m: &[f64], n: usize) -> f64 {
    match n {
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => f64::NAN,
    }
}

/// φ(x, θ) = x·θ, the hyperplane family.
#[derive(Clone, Debug)]
pub struct Euclidean {
    dim: usize,
}

pub fn make_euclidean(dim: usize) -> Result<Euclidean> {
    check_dim(dim)?;
    Ok(Euclidean { dim })
}

impl DefiningFunction for Euclidean {
    fn dim(&self) -> usize {
        self.dim
    }
    fn kind(&self) -> DefiningKind {
        DefiningKind::Euclidean
    }
    fn name(&self) -> String {
        "euclidean".into()
    }
    fn eval(&self, x: &[f64], theta: &[f64]) -> f64 {
        x.iter().zip(theta).map(|(a, b)| a * b).sum()
    }
    fn grad_x(&self, _x: &[f64], theta: &[f64], out: &mut [f64]) {
        out.copy_from_slice(theta);
    }
    fn grad_theta(&self, x: &[f64], _theta: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }
    fn mixed_hessian(&self, _x: &[f64], _theta: &[f64], out: &mut [f64]) {
        let n = self.dim;
        out.fill(0.0);
        for i in 0..n {
            out[i * n + i] = 1.0;
        }
    }
}

/// Compactly supported C^∞ bump `a(x) = amplitude · exp(1 − 1/(1 − |x − c|²/r²))`,
/// equal to `amplitude` at the center and vanishing with all derivatives at radius `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    dim: usize,
    center: [f64; MAX_DIM],
    radius: f64,
    amplitude: f64,
}

impl Bump {
    pub fn new(center: &[f64], radius: f64, amplitude: f64) -> Result<Self> {
        check_dim(center.len())?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::param("bump radius", "must be positive"));
        }
        if !amplitude.is_finite() {
            return Err(Error::param("bump amplitude", "must be finite"));
        }
        let mut c = [0.0; MAX_DIM];
        c[..center.len()].copy_from_slice(center);
        Ok(Self {
            dim: center.len(),
            center: c,
            radius,
            amplitude,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self) -> &[f64] {
        &self.center[..self.dim]
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn u(&self, x: &[f64]) -> f64 {
        let r2 = self.radius * self.radius;
        x.iter().zip(self.center()).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() / r2
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let u = self.u(x);
        if u >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - u)).exp()
        }
    }

    /// Value and gradient in one pass.
    pub fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let u = self.u(x);
        if u >= 1.0 {
            grad.fill(0.0);
            return 0.0;
        }
        let v = self.amplitude * (1.0 - 1.0 / (1.0 - u)).exp();
        let s = -v / ((1.0 - u) * (1.0 - u)) * 2.0 / (self.radius * self.radius);
        for (g, (a, c)) in grad.iter_mut().zip(x.iter().zip(self.center())) {
            *g = s * (a - c);
        }
        v
    }

    /// Whether the support ball lies inside the closed box M.
    pub fn supported_in(&self, domain: &Domain) -> bool {
        self.center()
            .iter()
            .all(|c| c.abs() + self.radius <= domain.half_width() + 1e-12)
    }

    /// Sampled max |∇a| over a dense grid of the support ball.
    pub fn max_grad_sampled(&self, per_axis: usize) -> f64 {
        let mut best = 0.0f64;
        let mut g = [0.0; MAX_DIM];
        let mut x = [0.0; MAX_DIM];
        let total = per_axis.pow(self.dim as u32);
        for idx in 0..total {
            let mut rem = idx;
            for d in 0..self.dim {
                let i = rem % per_axis;
                rem /= per_axis;
                x[d] = self.center[d] - self.radius + 2.0 * self.radius * (i as f64 + 0.5) / per_axis as f64;
            }
            self.value_grad(&x[..self.dim], &mut g[..self.dim]);
            best = best.max(norm(&g[..self.dim]));
        }
        best
    }
}

/// φ_ε(x, θ) = x·θ + ε a(x) |θ|.
#[derive(Clone, Debug)]
pub struct Perturbed {
    bump: Bump,
    epsilon: f64,
}

/// Builds the perturbed family and verifies that the mixed Hessian
/// `I + ε ∇a θᵀ/|θ|` stays positive on an `samples`-per-axis grid of M₁.
///
/// The determinant `1 + ε ∇a·θ̂` is minimized over θ in closed form
/// (θ̂ = −∇a/|∇a|), so the check is uniform in direction.
pub fn make_perturbed(bump: Bump, epsilon: f64, domain: &Domain, samples: usize) -> Result<Perturbed> {
    if bump.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: bump.dim(),
        });
    }
    if !epsilon.is_finite() {
        return Err(Error::param("epsilon", "must be finite"));
    }
    if !bump.supported_in(domain) {
        return Err(Error::param("bump", "support must lie inside M"));
    }
    let n = domain.dim();
    let mut g = [0.0; MAX_DIM];
    let mut worst: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for x in domain.outer_sample_points(samples.max(2)) {
        bump.value_grad(&x, &mut g[..n]);
        let gn = norm(&g[..n]);
        let d = 1.0 - epsilon.abs() * gn;
        if worst.as_ref().is_none_or(|w| d < w.0) {
            let theta: Vec<f64> = if gn > 0.0 {
                g[..n].iter().map(|c| -epsilon.signum() * c / gn).collect()
            } else {
                let mut t = vec![0.0; n];
                t[0] = 1.0;
                t
            };
            worst = Some((d, x.clone(), theta));
        }
    }
    if let Some((d, x, theta)) = worst {
        if d <= 0.0 {
            return Err(Error::NotDefining { det: d, x, theta });
        }
    }
    Ok(Perturbed { bump, epsilon })
}

impl Perturbed {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn bump(&self) -> &Bump {
        &self.bump
    }

    /// Unchecked constructor used for breakdown scans and tests.
    pub fn new_unchecked(bump: Bump, epsilon: f64) -> Self {
        Self { bump, epsilon }
    }
}

impl DefiningFunction for Perturbed {
    fn dim(&self) -> usize {
        self.bump.dim()
    }
    fn kind(&self) -> DefiningKind {
        DefiningKind::Perturbed
    }
    fn name(&self) -> String {
        format!(
            "perturbed(eps={:e},center={:?},radius={:e})",
            self.epsilon,
            self.bump.center(),
            self.bump.radius()
        )
    }
    fn eval(&self, x: &[f64], theta: &[f64]) -> f64 {
        let dot: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
        dot + self.epsilon * self.bump.value(x) * norm(theta)
    }
    fn grad_x(&self, x: &[f64], theta: &[f64], out: &mut [f64]) {
        let mut g = [0.0; MAX_DIM];
        let n = theta.len();
        self.bump.value_grad(x, &mut g[..n]);
        let tn = norm(theta);
        for i in 0..n {
            out[i] = theta[i] + self.epsilon * g[i] * tn;
        }
    }
    fn grad_theta(&self, x: &[f64], theta: &[f64], out: &mut [f64]) {
        let a = self.bump.value(x);
        let tn = norm(theta);
        for i in 0..theta.len() {
            out[i] = x[i] + self.epsilon * a * theta[i] / tn;
        }
    }
    fn mixed_hessian(&self, x: &[f64], theta: &[f64], out: &mut [f64]) {
        let n = theta.len();
        let mut g = [0.0; MAX_DIM];
        self.bump.value_grad(x, &mut g[..n]);
        let tn = norm(theta);
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                out[i * n + j] = id + self.epsilon * g[i] * theta[j] / tn;
            }
        }
    }
}

/// A planar family that satisfies every local condition but folds globally:
/// φ(x, θ) = θ·G(x) with G(x) = α (r₀ + x₁)(cos κx₂, sin κx₂).
///
/// `d_θφ = G` is a local diffeomorphism (det DG = α²κ(r₀ + x₁) > 0) that wraps
/// around with period `2π/κ` in x₂, so x and x + (0, 2π/κ) collide for every θ.
#[derive(Clone, Debug)]
pub struct PolarFold {
    scale: f64,
    offset: f64,
    wavenumber: f64,
}

impl PolarFold {
    /// `period` is the x₂-distance between colliding points; α is chosen so that
    /// det DG ≈ 1 at x₁ = 0.
    pub fn new(offset: f64, period: f64) -> Result<Self> {
        if !(period > 0.0) || !(offset > 0.0) {
            return Err(Error::param("fold", "offset and period must be positive"));
        }
        let wavenumber = 2.0 * std::f64::consts::PI / period;
        Ok(Self {
            scale: 1.0 / (offset * wavenumber).sqrt(),
            offset,
            wavenumber,
        })
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavenumber
    }

    /// The fold map G = d_θφ.
    pub fn fold_map(&self, x: &[f64]) -> [f64; 2] {
        let r = self.scale * (self.offset + x[0]);
        let a = self.wavenumber * x[1];
        [r * a.cos(), r * a.sin()]
    }

    /// DG with rows = components of G, columns = x coordinates.
    fn jacobian(&self, x: &[f64]) -> [[f64; 2]; 2] {
        let a = self.wavenumber * x[1];
        let (s, c) = a.sin_cos();
        let r = self.offset + x[0];
        [
            [self.scale * c, -self.scale * r * self.wavenumber * s],
            [self.scale * s, self.scale * r * self.wavenumber * c],
        ]
    }
}

impl DefiningFunction for PolarFold {
    fn dim(&self) -> usize {
        2
    }
    fn kind(&self) -> DefiningKind {
        DefiningKind::UserSupplied
    }
    fn name(&self) -> String {
        format!("polar-fold(offset={:e},period={:e})", self.offset, self.period())
    }
    fn eval(&self, x: &[f64], theta: &[f64]) -> f64 {
        let g = self.fold_map(x);
        g[0] * theta[0] + g[1] * theta[1]
    }
    fn grad_x(&self, x: &[f64], theta: &[f64], out: &mut [f64]) {
        let j = self.jacobian(x);
        for i in 0..2 {
            out[i] = j[0][i] * theta[0] + j[1][i] * theta[1];
        }
    }
    fn grad_theta(&self, x: &[f64], _theta: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.fold_map(x));
    }
    fn mixed_hessian(&self, x: &[f64], _theta: &[f64], out: &mut [f64]) {
        let j = self.jacobian(x);
        for i in 0..2 {
            for k in 0..2 {
                out[i * 2 + k] = j[k][i];
            }
        }
    }
}
