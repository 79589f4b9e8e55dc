use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::defining::Bump;
use crate::geometry::direction::{check_dim, sample_directions};
use crate::geometry::Domain;

/// A smooth weight w(x, θ) on M₁ × S^{n-1}. Weights are real-valued here, so
/// the conjugations in the backprojection are identities.
pub trait Weight: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn name(&self) -> String;
    fn eval(&self, x: &[f64], theta: &[f64]) -> f64;
}

#[derive(Clone, Debug)]
pub struct ConstantWeight {
    dim: usize,
    value: f64,
}

impl ConstantWeight {
    pub fn new(dim: usize, value: f64) -> Result<Self> {
        check_dim(dim)?;
        if !value.is_finite() {
            return Err(Error::param("weight", "must be finite"));
        }
        Ok(Self { dim, value })
    }

    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(dim, 1.0)
    }
}

impl Weight for ConstantWeight {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        format!("constant({:e})", self.value)
    }
    fn eval(&self, _x: &[f64], _theta: &[f64]) -> f64 {
        self.value
    }
}

/// w(x, θ) = base · (1 + amplitude · b(x)) · (1 + tilt · θ₁), with `b` a unit
/// smooth bump. Nonvanishing when amplitude > −1 and |tilt| < 1.
#[derive(Clone, Debug)]
pub struct GaussianModulatedWeight {
    base: f64,
    amplitude: f64,
    bump: Bump,
    tilt: f64,
}

impl GaussianModulatedWeight {
    pub fn new(base: f64, amplitude: f64, center: &[f64], radius: f64, tilt: f64) -> Result<Self> {
        if amplitude <= -1.0 || tilt.abs() >= 1.0 || base == 0.0 {
            return Err(Error::param("weight", "need base != 0, amplitude > -1 and |tilt| < 1"));
        }
        Ok(Self {
            base,
            amplitude,
            bump: Bump::new(center, radius, 1.0)?,
            tilt,
        })
    }
}

impl Weight for GaussianModulatedWeight {
    fn dim(&self) -> usize {
        self.bump.dim()
    }
    fn name(&self) -> String {
        format!(
            "modulated(base={:e},amp={:e},center={:?},radius={:e},tilt={:e})",
            self.base,
            self.amplitude,
            self.bump.center(),
            self.bump.radius(),
            self.tilt
        )
    }
    fn eval(&self, x: &[f64], theta: &[f64]) -> f64 {
        self.base * (1.0 + self.amplitude * self.bump.value(x)) * (1.0 + self.tilt * theta[0])
    }
}

/// w_δ(x, θ) = w(x, θ) · (1 + δ b(x)).
#[derive(Clone, Debug)]
pub struct PerturbedWeight {
    inner: Arc<dyn Weight>,
    bump: Bump,
    delta: f64,
}

impl PerturbedWeight {
    pub fn new(inner: Arc<dyn Weight>, bump: Bump, delta: f64) -> Self {
        Self { inner, bump, delta }
    }
}

impl Weight for PerturbedWeight {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn name(&self) -> String {
        format!("{}*(1+{:e}*bump)", self.inner.name(), self.delta)
    }
    fn eval(&self, x: &[f64], theta: &[f64]) -> f64 {
        self.inner.eval(x, theta) * (1.0 + self.delta * self.bump.value(x))
    }
}

/// Constant multiple of another weight.
#[derive(Clone, Debug)]
pub struct ScaledWeight {
    inner: Arc<dyn Weight>,
    factor: f64,
}

impl ScaledWeight {
    pub fn new(inner: Arc<dyn Weight>, factor: f64) -> Self {
        Self { inner, factor }
    }
}

impl Weight for ScaledWeight {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn name(&self) -> String {
        format!("{:e}*{}", self.factor, self.inner.name())
    }
    fn eval(&self, x: &[f64], theta: &[f64]) -> f64 {
        self.factor * self.inner.eval(x, theta)
    }
}

/// Sampled lower bound of |w| with the minimizing point.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightBound {
    pub min_abs: f64,
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
}

pub fn weight_lower_bound(w: &dyn Weight, domain: &Domain, n_x: usize, n_theta: usize) -> Result<WeightBound> {
    let dirs = sample_directions(domain.dim(), n_theta)?;
    let mut best = WeightBound {
        min_abs: f64::INFINITY,
        x: vec![],
        theta: vec![],
    };
    for x in domain.outer_sample_points(n_x.max(2)) {
        for d in &dirs {
            let v = w.eval(&x, d.as_slice()).abs();
            if v < best.min_abs || !v.is_finite() {
                best = WeightBound {
                    min_abs: if v.is_finite() { v } else { 0.0 },
                    x: x.clone(),
                    theta: d.as_slice().to_vec(),
                };
            }
        }
    }
    Ok(best)
}

/// Rejects weights that vanish (or change sign) on the sampled domain.
pub fn check_weight(w: &dyn Weight, domain: &Domain, n_x: usize, n_theta: usize) -> Result<WeightBound> {
    let b = weight_lower_bound(w, domain, n_x, n_theta)?;
    if !(b.min_abs > 0.0) {
        return Err(Error::VanishingWeight {
            min_abs: b.min_abs,
            x: b.x,
        });
    }
    Ok(b)
}
