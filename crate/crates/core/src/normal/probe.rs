use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::geometry::Direction;
use crate::normal::{apply_normal, PrincipalSymbol};
use crate::transform::io::fmt_f64;
use crate::transform::{RadonTransform, ScalarField};
use crate::window::plateau;

/// One λ of an oscillatory probe.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub lambda: f64,
    /// |⟨N e_λ, e_λ⟩| / ⟨e_λ, e_λ⟩.
    pub m_raw: f64,
    /// Attenuation ψ̂_η(λ/c)² of the smoothed delta at this frequency.
    pub transfer: f64,
    /// m_raw / transfer.
    pub m_corrected: f64,
    /// m_corrected / (2π)^{2(n−1)}, on the scale of the stated symbol.
    pub m_scaled: f64,
    pub p_principal: f64,
    pub p_full: f64,
    /// m_scaled / p_principal.
    pub ratio_principal: f64,
    /// m_corrected / p_full.
    pub ratio_full: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeResult {
    pub x0: Vec<f64>,
    pub xi: Vec<f64>,
    pub window_radius: f64,
    pub rows: Vec<ProbeRow>,
    /// Fitted q in m_corrected ~ λ^q.
    pub exponent: f64,
    /// Fitted q for the uncorrected amplitudes.
    pub exponent_raw: f64,
}

impl ProbeResult {
    pub fn last(&self) -> &ProbeRow {
        self.rows.last().expect("nonempty ladder")
    }

    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("lambda,m_raw,transfer,m_corrected,m_scaled,p_principal,p_full,ratio_principal,ratio_full\n");
        for r in &self.rows {
            let cols = [
                r.lambda,
                r.m_raw,
                r.transfer,
                r.m_corrected,
                r.m_scaled,
                r.p_principal,
                r.p_full,
                r.ratio_principal,
                r.ratio_full,
            ];
            s.push_str(&cols.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }
}

/// Largest λ with λh ≤ π/2 on the operator grid.
pub fn nyquist_limit(op: &RadonTransform) -> f64 {
    0.5 * PI / op.grid().spacing()
}

/// Measures the amplitude of N on windowed plane waves
/// e_λ(x) = cos(λ(x − x₀)·ξ̂) χ(x) and compares it with the symbol.
///
/// χ is a plateau window of radius `window_radius` centered at x₀, which must
/// lie inside M.
pub fn probe_symbol(
    op: &RadonTransform,
    symbol: &PrincipalSymbol,
    x0: &[f64],
    xi: &[f64],
    lambdas: &[f64],
    window_radius: f64,
) -> Result<ProbeResult> {
    let grid = *op.grid();
    let n = grid.dim();
    if x0.len() != n || symbol.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if lambdas.len() < 2 || lambdas.windows(2).any(|w| !(w[1] > w[0])) || !(lambdas[0] > 0.0) {
        return Err(Error::param("lambda", "need at least two increasing positive values"));
    }
    let limit = nyquist_limit(op);
    if let Some(&bad) = lambdas.iter().find(|&&l| l > limit) {
        return Err(Error::Nyquist { lambda: bad, limit });
    }
    let half = grid.domain().half_width();
    if !(window_radius > 0.0) || x0.iter().any(|c| c.abs() + window_radius > half) {
        return Err(Error::param("window", "probe window must lie inside M"));
    }
    let dir = Direction::new(xi)?;
    let xi = dir.as_slice();

    let eta = op.layout().delta();
    let order = (n - 1) as i32;
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let e = ScalarField::from_fn(grid, |x| {
            let phase: f64 = x.iter().zip(x0).zip(xi).map(|((a, c), d)| (a - c) * d).sum();
            (lambda * phase).cos() * plateau(x, x0, window_radius)
        });
        let ne = apply_normal(op, &e)?;
        let m_raw = ne.dot(&e).abs() / e.dot(&e);
        let scaled_xi: Vec<f64> = xi.iter().map(|c| lambda * c).collect();
        let sv = symbol.evaluate(x0, &scaled_xi)?;
        let ap = sv.c_plus.powi(order) / sv.h_plus * sv.w_plus;
        let am = sv.c_minus.powi(order) / sv.h_minus * sv.w_minus;
        let transfer = (ap * eta.transfer(lambda / sv.c_plus).powi(2) + am * eta.transfer(lambda / sv.c_minus).powi(2))
            / (ap + am);
        let m_corrected = m_raw / transfer;
        let m_scaled = m_corrected / (2.0 * PI).powi(2 * order);
        rows.push(ProbeRow {
            lambda,
            m_raw,
            transfer,
            m_corrected,
            m_scaled,
            p_principal: sv.principal,
            p_full: sv.full,
            ratio_principal: m_scaled / sv.principal,
            ratio_full: m_corrected / sv.full,
        });
    }
    let ls: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
    let mc: Vec<f64> = rows.iter().map(|r| r.m_corrected).collect();
    let mr: Vec<f64> = rows.iter().map(|r| r.m_raw).collect();
    let exponent = loglog_fit(&ls, &mc).map_or(f64::NAN, |f| f.slope);
    let exponent_raw = loglog_fit(&ls, &mr).map_or(f64::NAN, |f| f.slope);
    Ok(ProbeResult {
        x0: x0.to_vec(),
        xi: xi.to_vec(),
        window_radius,
        rows,
        exponent,
        exponent_raw,
    })
}
