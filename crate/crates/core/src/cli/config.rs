use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which defining function the run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefiningChoice {
    Euclidean,
    Perturbed,
    /// The folded planar fixture, which violates global injectivity.
    Fold,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightChoice {
    Constant,
    GaussianModulated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdjointChoice {
    Transpose,
    Continuous,
}

/// Flat `key = value` run configuration. Every key has a default; vector keys
/// left unset take dimension-dependent defaults at use.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dimension: usize,
    pub half_width: f64,
    pub cells: usize,
    pub pad_factor: f64,

    pub defining: DefiningChoice,
    pub bump_center: Option<Vec<f64>>,
    pub bump_width: f64,
    pub epsilon: f64,
    pub fold_offset: f64,
    pub fold_period: f64,

    pub weight: WeightChoice,
    pub weight_value: f64,
    pub weight_amplitude: f64,
    pub weight_center: Option<Vec<f64>>,
    pub weight_radius: f64,
    pub weight_tilt: f64,

    /// 0 selects the covering layout.
    pub n_s: usize,
    pub n_theta: usize,
    pub delta_factor: f64,
    pub adjoint: AdjointChoice,

    pub phantom: String,
    pub phantom_size: f64,
    pub supersample: usize,
    pub input_field: Option<PathBuf>,
    pub input_sinogram: Option<PathBuf>,

    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub cg_window: usize,
    pub precondition: bool,

    pub bolker_nx: usize,
    pub bolker_ntheta: usize,

    pub probe_x0: Option<Vec<f64>>,
    pub probe_xi: Option<Vec<f64>>,
    pub probe_window: f64,
    pub symbol_tol: f64,
    /// Empty selects the default ladder of the command.
    pub lambda_ladder: Vec<f64>,

    pub fbi_x0: Option<Vec<f64>>,
    pub fbi_directions: Option<Vec<Vec<f64>>>,
    pub conormal_s0: f64,
    pub conormal_theta: Option<Vec<f64>>,

    pub delta_ladder: Vec<f64>,
    pub sweep_n_theta: usize,
    pub sweep_power_iterations: usize,
    pub sweep_restarts: usize,
    pub seed: u64,

    pub out_dir: PathBuf,
    /// 0 lets the thread pool choose.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dimension: 2,
            half_width: 1.0,
            cells: 128,
            pad_factor: 0.25,
            defining: DefiningChoice::Euclidean,
            bump_center: None,
            bump_width: 0.6,
            epsilon: 0.01,
            fold_offset: 2.0,
            fold_period: 1.25,
            weight: WeightChoice::Constant,
            weight_value: 1.0,
            weight_amplitude: 0.3,
            weight_center: None,
            weight_radius: 0.6,
            weight_tilt: 0.1,
            n_s: 0,
            n_theta: 180,
            delta_factor: 2.0,
            adjoint: AdjointChoice::Transpose,
            phantom: "disk".into(),
            phantom_size: 0.5,
            supersample: 16,
            input_field: None,
            input_sinogram: None,
            cg_tol: 1e-6,
            cg_max_iter: 200,
            cg_window: 50,
            precondition: true,
            bolker_nx: 24,
            bolker_ntheta: 64,
            probe_x0: None,
            probe_xi: None,
            probe_window: 0.5,
            symbol_tol: 0.1,
            lambda_ladder: Vec::new(),
            fbi_x0: None,
            fbi_directions: None,
            conormal_s0: 0.5,
            conormal_theta: None,
            delta_ladder: vec![1e-3, 3e-3, 1e-2, 3e-2, 1e-1],
            sweep_n_theta: 32,
            sweep_power_iterations: 30,
            sweep_restarts: 3,
            seed: 20240229,
            out_dir: PathBuf::from("out"),
            threads: 0,
        }
    }
}

fn bad(line: usize, key: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: `{key}`: {reason}"))
}

fn scalar<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse()
        .map_err(|e| bad(line, key, format!("cannot parse `{v}`: {e}")))
}

fn list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|p| scalar(line, key, p.trim())).collect()
}

fn boolean(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(line, key, format!("expected true or false, got `{v}`"))),
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<()> {
        match key {
            "dimension" => self.dimension = scalar(line, key, v)?,
            "half_width" => self.half_width = scalar(line, key, v)?,
            "cells" => self.cells = scalar(line, key, v)?,
            "pad_factor" => self.pad_factor = scalar(line, key, v)?,
            "defining" => {
                self.defining = match v {
                    "euclidean" => DefiningChoice::Euclidean,
                    "perturbed" => DefiningChoice::Perturbed,
                    "fold" => DefiningChoice::Fold,
                    _ => return Err(bad(line, key, format!("unknown defining function `{v}`"))),
                }
            }
            "bump_center" => self.bump_center = Some(list(line, key, v)?),
            "bump_width" => self.bump_width = scalar(line, key, v)?,
            "epsilon" => self.epsilon = scalar(line, key, v)?,
            "fold_offset" => self.fold_offset = scalar(line, key, v)?,
            "fold_period" => self.fold_period = scalar(line, key, v)?,
            "weight" => {
                self.weight = match v {
                    "constant" => WeightChoice::Constant,
                    "gaussian-modulated" => WeightChoice::GaussianModulated,
                    _ => return Err(bad(line, key, format!("unknown weight `{v}`"))),
                }
            }
            "weight_value" => self.weight_value = scalar(line, key, v)?,
            "weight_amplitude" => self.weight_amplitude = scalar(line, key, v)?,
            "weight_center" => self.weight_center = Some(list(line, key, v)?),
            "weight_radius" => self.weight_radius = scalar(line, key, v)?,
            "weight_tilt" => self.weight_tilt = scalar(line, key, v)?,
            "n_s" => self.n_s = scalar(line, key, v)?,
            "n_theta" => self.n_theta = scalar(line, key, v)?,
            "delta_factor" => self.delta_factor = scalar(line, key, v)?,
            "adjoint" => {
                self.adjoint = match v {
                    "transpose" => AdjointChoice::Transpose,
                    "continuous" => AdjointChoice::Continuous,
                    _ => return Err(bad(line, key, format!("unknown adjoint mode `{v}`"))),
                }
            }
            "phantom" => self.phantom = v.to_string(),
            "phantom_size" => self.phantom_size = scalar(line, key, v)?,
            "supersample" => self.supersample = scalar(line, key, v)?,
            "input_field" => self.input_field = Some(PathBuf::from(v)),
            "input_sinogram" => self.input_sinogram = Some(PathBuf::from(v)),
            "cg_tol" => self.cg_tol = scalar(line, key, v)?,
            "cg_max_iter" => self.cg_max_iter = scalar(line, key, v)?,
            "cg_window" => self.cg_window = scalar(line, key, v)?,
            "precondition" => self.precondition = boolean(line, key, v)?,
            "bolker_nx" => self.bolker_nx = scalar(line, key, v)?,
            "bolker_ntheta" => self.bolker_ntheta = scalar(line, key, v)?,
            "probe_x0" => self.probe_x0 = Some(list(line, key, v)?),
            "probe_xi" => self.probe_xi = Some(list(line, key, v)?),
            "probe_window" => self.probe_window = scalar(line, key, v)?,
            "symbol_tol" => self.symbol_tol = scalar(line, key, v)?,
            "lambda_ladder" => self.lambda_ladder = list(line, key, v)?,
            "fbi_x0" => self.fbi_x0 = Some(list(line, key, v)?),
            "fbi_directions" => {
                self.fbi_directions = Some(
                    v.split(';')
                        .map(|d| list(line, key, d.trim()))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            "conormal_s0" => self.conormal_s0 = scalar(line, key, v)?,
            "conormal_theta" => self.conormal_theta = Some(list(line, key, v)?),
            "delta_ladder" => self.delta_ladder = list(line, key, v)?,
            "sweep_n_theta" => self.sweep_n_theta = scalar(line, key, v)?,
            "sweep_power_iterations" => self.sweep_power_iterations = scalar(line, key, v)?,
            "sweep_restarts" => self.sweep_restarts = scalar(line, key, v)?,
            "seed" => self.seed = scalar(line, key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "threads" => self.threads = scalar(line, key, v)?,
            _ => return Err(bad(line, key, "unknown key")),
        }
        Ok(())
    }

    /// Checks ranges and vector lengths against the module preconditions.
    pub fn validate(&self) -> Result<()> {
        let n = self.dimension;
        let fail = |key: &str, reason: &str| Err(Error::Config(format!("`{key}`: {reason}")));
        if !(n == 2 || n == 3) {
            return fail("dimension", "must be 2 or 3");
        }
        let positive = [
            ("half_width", self.half_width),
            ("pad_factor", self.pad_factor),
            ("bump_width", self.bump_width),
            ("fold_offset", self.fold_offset),
            ("fold_period", self.fold_period),
            ("weight_radius", self.weight_radius),
            ("delta_factor", self.delta_factor),
            ("phantom_size", self.phantom_size),
            ("cg_tol", self.cg_tol),
            ("probe_window", self.probe_window),
            ("symbol_tol", self.symbol_tol),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return fail(key, "must be positive and finite");
            }
        }
        if !self.epsilon.is_finite() || !self.conormal_s0.is_finite() || self.weight_value == 0.0 {
            return fail("epsilon/conormal_s0/weight_value", "must be finite (weight nonzero)");
        }
        if self.weight_amplitude <= -1.0 || self.weight_tilt.abs() >= 1.0 {
            return fail("weight_amplitude/weight_tilt", "need amplitude > -1 and |tilt| < 1");
        }
        for (key, v) in [
            ("cells", self.cells),
            ("n_theta", self.n_theta),
            ("supersample", self.supersample),
            ("cg_max_iter", self.cg_max_iter),
            ("cg_window", self.cg_window),
            ("bolker_nx", self.bolker_nx),
            ("bolker_ntheta", self.bolker_ntheta),
            ("sweep_n_theta", self.sweep_n_theta),
            ("sweep_power_iterations", self.sweep_power_iterations),
            ("sweep_restarts", self.sweep_restarts),
        ] {
            if v == 0 {
                return fail(key, "must be at least 1");
            }
        }
        if self.cells < 4 {
            return fail("cells", "need at least 4 cells per axis");
        }
        if self.n_s == 1 {
            return fail("n_s", "need 0 (covering) or at least 2");
        }
        if self.defining == DefiningChoice::Fold && n != 2 {
            return fail("defining", "the fold fixture is planar");
        }
        for (key, v) in [
            ("bump_center", &self.bump_center),
            ("weight_center", &self.weight_center),
            ("probe_x0", &self.probe_x0),
            ("probe_xi", &self.probe_xi),
            ("fbi_x0", &self.fbi_x0),
            ("conormal_theta", &self.conormal_theta),
        ] {
            if let Some(v) = v {
                if v.len() != n {
                    return fail(key, "length must equal the dimension");
                }
                if v.iter().any(|c| !c.is_finite()) {
                    return fail(key, "entries must be finite");
                }
            }
        }
        if let Some(dirs) = &self.fbi_directions {
            if dirs.is_empty() || dirs.iter().any(|d| d.len() != n || d.iter().all(|c| *c == 0.0)) {
                return fail("fbi_directions", "need nonzero vectors of the run dimension");
            }
        }
        if self.lambda_ladder.iter().any(|l| !(*l > 0.0)) || self.lambda_ladder.windows(2).any(|w| !(w[1] > w[0])) {
            return fail("lambda_ladder", "must be positive and strictly increasing");
        }
        if self.delta_ladder.is_empty()
            || self.delta_ladder[0] < 0.0
            || self.delta_ladder.windows(2).any(|w| !(w[1] > w[0]))
        {
            return fail("delta_ladder", "must be nonempty, nonnegative and strictly increasing");
        }
        Ok(())
    }

    /// The key value, or the first `dimension` entries of `default` scaled by L.
    pub fn vector_or(&self, v: &Option<Vec<f64>>, default: &[f64]) -> Vec<f64> {
        match v {
            Some(v) => v.clone(),
            None => default[..self.dimension].iter().map(|c| c * self.half_width).collect(),
        }
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(bad(i + 1, line, "expected `key = value`"));
            };
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(bad(i + 1, key, "duplicate key"));
            }
            cfg.set(i + 1, key, value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let cfg: RunConfig =
            "# run\ncells = 64\ndefining = perturbed # tilt\nbump_center = 0.1, -0.1\nfbi_directions = 1,0; 0,1\n"
                .parse()
                .unwrap();
        assert_eq!(cfg.cells, 64);
        assert_eq!(cfg.defining, DefiningChoice::Perturbed);
        assert_eq!(cfg.bump_center, Some(vec![0.1, -0.1]));
        assert_eq!(cfg.fbi_directions.as_ref().unwrap().len(), 2);
        assert!("celss = 64".parse::<RunConfig>().is_err());
        assert!("cells = 64\ncells = 32".parse::<RunConfig>().is_err());
        assert!("cells = -3".parse::<RunConfig>().is_err());
        assert!("dimension = 4".parse::<RunConfig>().is_err());
        assert!("probe_x0 = 0,0,0".parse::<RunConfig>().is_err());
        assert!("delta_ladder = 0.1, 0.01".parse::<RunConfig>().is_err());
        assert!("cells".parse::<RunConfig>().is_err());
    }
}
