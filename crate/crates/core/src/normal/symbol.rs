use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{det, norm, sample_directions, tangent_basis, DefiningFunction, Direction, Weight, MAX_DIM};
use crate::transform::jacobian;

const MAX_NEWTON: usize = 50;
const SOLVE_TOL: f64 = 1e-12;

/// Solves d_xφ(x, θ)/|d_xφ(x, θ)| = ξ̂ for θ ∈ S^{n−1} by projected Newton
/// iteration started from the best of a coarse direction sample.
pub fn solve_theta(df: &dyn DefiningFunction, x: &[f64], xi: &[f64]) -> Result<Direction> {
    let n = x.len();
    let target = Direction::new(xi)?;
    let xi = target.as_slice();
    let unit = |theta: &[f64]| -> ([f64; MAX_DIM], f64) {
        let mut g = [0.0; MAX_DIM];
        df.grad_x(x, theta, &mut g[..n]);
        let gn = norm(&g[..n]);
        for c in g.iter_mut() {
            *c /= gn;
        }
        (g, gn)
    };
    let residual = |u: &[f64]| -> f64 { u.iter().zip(xi).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() };

    let start_count = if n == 2 { 64 } else { 256 };
    let mut theta = sample_directions(n, start_count)?
        .into_iter()
        .min_by(|a, b| residual(&unit(a.as_slice()).0[..n]).total_cmp(&residual(&unit(b.as_slice()).0[..n])))
        .expect("nonempty sample");

    let mut target_basis = [[0.0; MAX_DIM]; MAX_DIM - 1];
    tangent_basis(xi, &mut target_basis);
    let mut h = [0.0; MAX_DIM * MAX_DIM];
    let mut last = f64::INFINITY;
    for _ in 0..MAX_NEWTON {
        let t = theta.as_slice();
        let (u, gn) = unit(t);
        last = residual(&u[..n]);
        if last < SOLVE_TOL {
            return Ok(theta);
        }
        let mut basis = [[0.0; MAX_DIM]; MAX_DIM - 1];
        tangent_basis(t, &mut basis);
        df.mixed_hessian(x, t, &mut h[..n * n]);
        let m = n - 1;
        // J[b][a] = ⟨f_b, (I − uuᵀ) H e_a⟩ / |g|, F_b = ⟨u, f_b⟩
        let mut jac = [0.0; 4];
        let mut rhs = [0.0; 2];
        for b in 0..m {
            let fb = &target_basis[b][..n];
            rhs[b] = -u[..n].iter().zip(fb).map(|(p, q)| p * q).sum::<f64>();
            for a in 0..m {
                let ea = &basis[a][..n];
                let mut he = [0.0; MAX_DIM];
                for i in 0..n {
                    he[i] = (0..n).map(|j| h[i * n + j] * ea[j]).sum();
                }
                let uhe: f64 = (0..n).map(|i| u[i] * he[i]).sum();
                let proj: f64 = (0..n).map(|i| (he[i] - uhe * u[i]) * fb[i]).sum();
                jac[b * m + a] = proj / gn;
            }
        }
        let step = if m == 1 {
            [rhs[0] / jac[0], 0.0]
        } else {
            let d = jac[0] * jac[3] - jac[1] * jac[2];
            [
                (rhs[0] * jac[3] - jac[1] * rhs[1]) / d,
                (jac[0] * rhs[1] - jac[2] * rhs[0]) / d,
            ]
        };
        if !step.iter().all(|s| s.is_finite()) {
            break;
        }
        let mut next = [0.0; MAX_DIM];
        for i in 0..n {
            next[i] = t[i] + (0..m).map(|a| step[a] * basis[a][i]).sum::<f64>();
        }
        theta = Direction::new(&next[..n])?;
    }
    let (u, _) = unit(theta.as_slice());
    let r = residual(&u[..n]).min(last);
    if r < SOLVE_TOL * 10.0 {
        return Ok(theta);
    }
    Err(Error::SymbolSolve {
        x: x.to_vec(),
        residual: r,
    })
}

/// Symbol evaluation at one (x, ξ), with the quantities needed for both the
/// stated formula and the full diagonal amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolValue {
    /// (2π)^{1−n}(W(x,x,θ₊) + W(x,x,θ₋))/|ξ|^{n−1}.
    pub principal: f64,
    /// (2π)^{n−1} Σ± c^{n−1} h⁻¹ W(x,x,θ±)/|ξ|^{n−1}, the amplitude of N as a
    /// Fourier multiplier in the convention Nf = (2π)^{−n}∫e^{ix·ξ} a f̂ dξ.
    pub full: f64,
    pub theta_plus: Direction,
    pub theta_minus: Direction,
    /// W(x, x, θ±).
    pub w_plus: f64,
    pub w_minus: f64,
    /// c(x, x) = |d_xφ(x, θ±)|.
    pub c_plus: f64,
    pub c_minus: f64,
    /// det ∂²φ/∂x∂θ at θ±.
    pub h_plus: f64,
    pub h_minus: f64,
}

/// The principal symbol of N_w = R*_w R_w.
#[derive(Clone, Debug)]
pub struct PrincipalSymbol {
    df: Arc<dyn DefiningFunction>,
    w: Arc<dyn Weight>,
}

impl PrincipalSymbol {
    pub fn new(df: Arc<dyn DefiningFunction>, w: Arc<dyn Weight>) -> Result<Self> {
        if df.dim() != w.dim() {
            return Err(Error::DimensionMismatch {
                expected: df.dim(),
                got: w.dim(),
            });
        }
        Ok(Self { df, w })
    }

    pub fn dim(&self) -> usize {
        self.df.dim()
    }

    /// W(x, y, θ) = w̄(x,θ)J̄(x,θ)w(y,θ)J(y,θ) (weights are real).
    pub fn aux(&self, x: &[f64], y: &[f64], theta: &[f64]) -> Result<f64> {
        let a = self.w.eval(x, theta) * jacobian(self.df.as_ref(), x, theta)?;
        let b = self.w.eval(y, theta) * jacobian(self.df.as_ref(), y, theta)?;
        Ok(a * b)
    }

    /// p(x, ξ) as stated.
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        Ok(self.evaluate(x, xi)?.principal)
    }

    pub fn evaluate(&self, x: &[f64], xi: &[f64]) -> Result<SymbolValue> {
        let n = self.dim();
        if x.len() != n || xi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: xi.len().min(x.len()),
            });
        }
        let mag = norm(xi);
        if !(mag > 0.0) {
            return Err(Error::param("xi", "must be nonzero"));
        }
        let neg: Vec<f64> = xi.iter().map(|c| -c).collect();
        let tp = solve_theta(self.df.as_ref(), x, xi)?;
        let tm = solve_theta(self.df.as_ref(), x, &neg)?;
        let side = |t: &Direction| -> Result<(f64, f64, f64)> {
            let w = self.aux(x, x, t.as_slice())?;
            let c = jacobian(self.df.as_ref(), x, t.as_slice())?;
            let mut h = [0.0; MAX_DIM * MAX_DIM];
            self.df.mixed_hessian(x, t.as_slice(), &mut h[..n * n]);
            Ok((w, c, det(&h[..n * n], n)))
        };
        let (wp, cp, hp) = side(&tp)?;
        let (wm, cm, hm) = side(&tm)?;
        let order = (n - 1) as i32;
        let scale = mag.powi(order);
        let principal = (2.0 * PI).powi(-order) * (wp + wm) / scale;
        let full = (2.0 * PI).powi(order) * (cp.powi(order) / hp * wp + cm.powi(order) / hm * wm) / scale;
        Ok(SymbolValue {
            principal,
            full,
            theta_plus: tp,
            theta_minus: tm,
            w_plus: wp,
            w_minus: wm,
            c_plus: cp,
            c_minus: cm,
            h_plus: hp,
            h_minus: hm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_euclidean, make_perturbed, Bump, ConstantWeight, Domain};

    #[test]
    fn euclidean_values() {
        let p = PrincipalSymbol::new(
            Arc::new(make_euclidean(2).unwrap()),
            Arc::new(ConstantWeight::unit(2).unwrap()),
        )
        .unwrap();
        assert!((p.eval(&[0.2, 0.1], &[0.6, 0.8]).unwrap() - 1.0 / PI).abs() < 1e-12);
        assert!((p.eval(&[0.2, 0.1], &[1.2, 1.6]).unwrap() - 0.5 / PI).abs() < 1e-12);
        let v = p.evaluate(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((v.full - 4.0 * PI).abs() < 1e-12);
        let p2 = PrincipalSymbol::new(
            Arc::new(make_euclidean(2).unwrap()),
            Arc::new(ConstantWeight::new(2, 2.0).unwrap()),
        )
        .unwrap();
        assert!((p2.eval(&[0.2, 0.1], &[0.6, 0.8]).unwrap() - 4.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn direction_solve_inverts_covector_map() {
        let domain = Domain::new(3, 1.0).unwrap();
        let df = make_perturbed(Bump::new(&[0.1, 0.0, -0.1], 0.6, 1.0).unwrap(), 0.2, &domain, 9).unwrap();
        let x = [0.05, 0.1, -0.05];
        for xi in [[1.0, 0.0, 0.0], [0.3, -0.4, 0.5], [0.0, 0.0, -1.0]] {
            let t = solve_theta(&df, &x, &xi).unwrap();
            let mut g = [0.0; 3];
            df.grad_x(&x, t.as_slice(), &mut g);
            let gn = norm(&g);
            let xn = norm(&xi);
            for i in 0..3 {
                assert!((g[i] / gn - xi[i] / xn).abs() < 1e-10);
            }
        }
    }
}
