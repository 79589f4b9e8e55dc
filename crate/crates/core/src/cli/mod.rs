//! Batch driver behind the `gradon` binary.
//!
//! Each subcommand loads a [`RunConfig`], runs one pipeline, writes binary
//! outputs and CSV summaries into the output directory and prints a single
//! result line of `key=value` pairs. Exit codes: 0 success, 1 validation
//! failure, 2 numerical failure.

mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};

pub use config::{AdjointChoice, DefiningChoice, RunConfig, WeightChoice};

use crate::error::{Error, Result};
use crate::geometry::{
    check_bolker, check_weight, make_euclidean, make_perturbed, Bump, ConstantWeight, DefiningFunction, Domain,
    GaussianModulatedWeight, PolarFold, Weight,
};
use crate::microlocal::{conormal_probe, decay_scan, default_ladder, Verdict};
use crate::normal::{nyquist_limit, probe_symbol, PrincipalSymbol};
use crate::phantom::Phantom;
use crate::recon::{cg_normal_solve, perturbation_sweep, CgOptions, PerturbationFamily, Preconditioner, SweepOptions};
use crate::transform::io::{field_csv, fmt_f64, read_field, read_sinogram, sinogram_csv, write_field, write_sinogram};
use crate::transform::{Grid, RadonTransform, ScalarField, Sinogram, SinogramLayout};

/// Environment variable overriding the `threads` key.
pub const THREADS_ENV: &str = "GRADON_THREADS";

#[derive(Debug, Parser)]
#[command(name = "gradon", version, about = "Generalized Radon transform toolkit")]
pub struct Cli {
    /// Flat `key = value` run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Render a phantom to a field file.
    Phantom {
        /// disk, gaussian, shepp-logan or ball (overrides `phantom`).
        name: Option<String>,
    },
    /// Forward transform of `input_field` or the configured phantom.
    Forward,
    /// Backprojection of `input_sinogram` or of the phantom's sinogram.
    Adjoint,
    /// Preconditioned CG reconstruction.
    Recon,
    /// Sampled Beylkin and global Bolker conditions.
    BolkerCheck,
    /// Oscillatory probe of the normal operator against its principal symbol.
    SymbolCheck,
    /// Perturbation sweep over the δ ladder.
    PerturbSweep,
    /// FBI decay scan and conormal correlation probe.
    FbiProbe,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Phantom { .. } => "phantom",
            Command::Forward => "forward",
            Command::Adjoint => "adjoint",
            Command::Recon => "recon",
            Command::BolkerCheck => "bolker-check",
            Command::SymbolCheck => "symbol-check",
            Command::PerturbSweep => "perturb-sweep",
            Command::FbiProbe => "fbi-probe",
        }
    }
}

/// Result of one command: status word, metrics and written files.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub command: &'static str,
    pub status: String,
    pub metrics: Vec<(String, String)>,
    pub outputs: Vec<PathBuf>,
    pub exit_code: i32,
    /// Violated invariant when the run failed.
    pub invariant: Option<String>,
}

impl Outcome {
    fn ok(command: &'static str) -> Self {
        Self {
            command,
            status: "ok".into(),
            metrics: Vec::new(),
            outputs: Vec::new(),
            exit_code: 0,
            invariant: None,
        }
    }

    fn metric(&mut self, key: &str, value: impl ToString) {
        self.metrics.push((key.to_string(), value.to_string()));
    }

    fn error(command: &'static str, e: &Error) -> Self {
        let mut o = Self::ok(command);
        o.status = "error".into();
        o.exit_code = if e.is_numerical() { 2 } else { 1 };
        o.invariant = Some(e.invariant().to_string());
        o.metric("message", format!("{:?}", e.to_string()));
        o
    }

    /// The single machine-readable line printed by the binary.
    pub fn line(&self) -> String {
        let mut parts = vec![format!("command={}", self.command), format!("status={}", self.status)];
        if let Some(inv) = &self.invariant {
            parts.push(format!("invariant={inv}"));
        }
        parts.extend(self.metrics.iter().map(|(k, v)| format!("{k}={v}")));
        let outs: Vec<String> = self.outputs.iter().map(|p| p.display().to_string()).collect();
        parts.push(format!("outputs={}", outs.join(",")));
        parts.join(" ")
    }
}

/// Parses arguments, runs the command, prints the result line and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let name = cli.command.name();
    let outcome = match load_config(cli.config.as_deref(), cli.out.as_deref()) {
        Ok(cfg) => run(&cli.command, &cfg),
        Err(e) => Outcome::error(name, &e),
    };
    println!("{}", outcome.line());
    outcome.exit_code
}

/// Config from file (or defaults), with `--out` and `GRADON_THREADS` applied.
pub fn load_config(path: Option<&Path>, out: Option<&Path>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = out {
        cfg.out_dir = out.to_path_buf();
    }
    if let Ok(v) = std::env::var(THREADS_ENV) {
        cfg.threads = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a nonnegative integer, got `{v}`")))?;
    }
    Ok(cfg)
}

/// Runs one command. Thread count applies to the global pool on first use.
pub fn run(command: &Command, cfg: &RunConfig) -> Outcome {
    if cfg.threads > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    let name = command.name();
    let result = std::fs::create_dir_all(&cfg.out_dir)
        .map_err(Error::from)
        .and_then(|_| match command {
            Command::Phantom { name } => cmd_phantom(name.as_deref(), cfg),
            Command::Forward => cmd_forward(cfg),
            Command::Adjoint => cmd_adjoint(cfg),
            Command::Recon => cmd_recon(cfg),
            Command::BolkerCheck => cmd_bolker(cfg),
            Command::SymbolCheck => cmd_symbol(cfg),
            Command::PerturbSweep => cmd_sweep(cfg),
            Command::FbiProbe => cmd_fbi(cfg),
        });
    result.unwrap_or_else(|e| Outcome::error(name, &e))
}

fn domain(cfg: &RunConfig) -> Result<Domain> {
    Domain::with_pad_factor(cfg.dimension, cfg.half_width, cfg.pad_factor)
}

fn grid_with(cfg: &RunConfig, cells: usize) -> Result<Grid> {
    Grid::new(domain(cfg)?, cells)
}

pub fn defining_function(cfg: &RunConfig) -> Result<Arc<dyn DefiningFunction>> {
    let n = cfg.dimension;
    Ok(match cfg.defining {
        DefiningChoice::Euclidean => Arc::new(make_euclidean(n)?),
        DefiningChoice::Perturbed => {
            let center = cfg.vector_or(&cfg.bump_center, &[0.1, -0.1, 0.05]);
            let bump = Bump::new(&center, cfg.bump_width * cfg.half_width, 1.0)?;
            Arc::new(make_perturbed(bump, cfg.epsilon, &domain(cfg)?, 9)?)
        }
        DefiningChoice::Fold => Arc::new(PolarFold::new(cfg.fold_offset, cfg.fold_period)?),
    })
}

pub fn weight(cfg: &RunConfig) -> Result<Arc<dyn Weight>> {
    let n = cfg.dimension;
    Ok(match cfg.weight {
        WeightChoice::Constant => Arc::new(ConstantWeight::new(n, cfg.weight_value)?),
        WeightChoice::GaussianModulated => {
            let center = cfg.vector_or(&cfg.weight_center, &[-0.2, 0.15, 0.0]);
            Arc::new(GaussianModulatedWeight::new(
                cfg.weight_value,
                cfg.weight_amplitude,
                &center,
                cfg.weight_radius * cfg.half_width,
                cfg.weight_tilt,
            )?)
        }
    })
}

/// Operator for the configured geometry on a `cells`-per-axis grid.
pub fn operator(cfg: &RunConfig, cells: usize, n_theta: usize) -> Result<RadonTransform> {
    let grid = grid_with(cfg, cells)?;
    let df = defining_function(cfg)?;
    let covering = SinogramLayout::covering(df.as_ref(), &grid, n_theta, cfg.delta_factor)?;
    let layout = if cfg.n_s == 0 {
        covering
    } else {
        let ds = covering.ds();
        let mid = covering.s0() + 0.5 * ds * (covering.n_s() - 1) as f64;
        let s0 = mid - 0.5 * ds * (cfg.n_s - 1) as f64;
        SinogramLayout::new(s0, ds, cfg.n_s, covering.directions().to_vec(), *covering.delta())?
    };
    RadonTransform::with_layout(df, weight(cfg)?, grid, layout)
}

fn render(cfg: &RunConfig, grid: &Grid) -> Result<ScalarField> {
    Phantom::by_name(
        &cfg.phantom,
        cfg.dimension,
        cfg.half_width,
        cfg.phantom_size * cfg.half_width,
    )?
    .render(grid, cfg.supersample)
}

/// `input_field` when set, otherwise the rendered phantom.
fn object(cfg: &RunConfig, grid: &Grid) -> Result<ScalarField> {
    match &cfg.input_field {
        Some(p) => {
            let f = read_field(p)?;
            f.check_grid(grid)?;
            Ok(f)
        }
        None => render(cfg, grid),
    }
}

fn write_text(cfg: &RunConfig, out: &mut Outcome, name: &str, text: &str) -> Result<()> {
    let path = cfg.out_dir.join(name);
    std::fs::write(&path, text)?;
    out.outputs.push(path);
    Ok(())
}

fn save_field(cfg: &RunConfig, out: &mut Outcome, stem: &str, f: &ScalarField) -> Result<()> {
    let path = cfg.out_dir.join(format!("{stem}.grtf"));
    write_field(&path, f)?;
    out.outputs.push(path);
    write_text(cfg, out, &format!("{stem}.csv"), &field_csv(f))
}

fn save_sinogram(cfg: &RunConfig, out: &mut Outcome, stem: &str, g: &Sinogram) -> Result<()> {
    let path = cfg.out_dir.join(format!("{stem}.grts"));
    write_sinogram(&path, g)?;
    out.outputs.push(path);
    write_text(cfg, out, &format!("{stem}.csv"), &sinogram_csv(g))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn cmd_phantom(name: Option<&str>, cfg: &RunConfig) -> Result<Outcome> {
    let mut cfg = cfg.clone();
    if let Some(n) = name {
        cfg.phantom = n.to_string();
    }
    let grid = grid_with(&cfg, cfg.cells)?;
    let f = render(&cfg, &grid)?;
    let mut out = Outcome::ok("phantom");
    out.metric("mass", fmt_f64(f.values().iter().sum::<f64>() * grid.cell_volume()));
    out.metric(
        "max",
        fmt_f64(f.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
    );
    save_field(&cfg, &mut out, "phantom", &f)?;
    Ok(out)
}

fn cmd_forward(cfg: &RunConfig) -> Result<Outcome> {
    let op = operator(cfg, cfg.cells, cfg.n_theta)?;
    let f = object(cfg, op.grid())?;
    let g = op.forward(&f)?;
    let mut out = Outcome::ok("forward");
    out.metric("max", fmt_f64(max_abs(g.values())));
    out.metric("n_s", op.layout().n_s());
    out.metric("n_theta", op.layout().n_theta());
    save_sinogram(cfg, &mut out, "sinogram", &g)?;
    Ok(out)
}

fn data(cfg: &RunConfig, op: &RadonTransform) -> Result<(Sinogram, Option<ScalarField>)> {
    match &cfg.input_sinogram {
        Some(p) => {
            // the file does not carry η; the sampling must match and η is the operator's
            let stored = read_sinogram(p)?;
            let layout = op.layout();
            if &stored.layout().with_delta(*layout.delta()) != layout {
                return Err(Error::LayoutMismatch(format!(
                    "{}: sampling differs from the configured operator",
                    p.display()
                )));
            }
            let g = Sinogram::from_values(layout.clone(), stored.values().to_vec())?;
            let truth = match &cfg.input_field {
                Some(_) => Some(object(cfg, op.grid())?),
                None => None,
            };
            Ok((g, truth))
        }
        None => {
            let f = object(cfg, op.grid())?;
            Ok((op.forward(&f)?, Some(f)))
        }
    }
}

fn cmd_adjoint(cfg: &RunConfig) -> Result<Outcome> {
    let op = operator(cfg, cfg.cells, cfg.n_theta)?;
    let (g, _) = data(cfg, &op)?;
    let b = match cfg.adjoint {
        AdjointChoice::Transpose => op.adjoint_transpose(&g)?,
        AdjointChoice::Continuous => op.adjoint(&g)?,
    };
    let mut out = Outcome::ok("adjoint");
    out.metric("norm", fmt_f64(b.norm()));
    out.metric("max", fmt_f64(max_abs(b.values())));
    save_field(cfg, &mut out, "backprojection", &b)?;
    Ok(out)
}

fn cmd_recon(cfg: &RunConfig) -> Result<Outcome> {
    let op = operator(cfg, cfg.cells, cfg.n_theta)?;
    let (g, truth) = data(cfg, &op)?;
    let pre = if cfg.precondition {
        let symbol = PrincipalSymbol::new(op.defining().clone(), op.weight().clone())?;
        Some(Preconditioner::new(&symbol, op.grid())?)
    } else {
        None
    };
    let options = CgOptions {
        tol: cfg.cg_tol,
        max_iter: cfg.cg_max_iter,
        stagnation_window: cfg.cg_window,
    };
    let sol = cg_normal_solve(&op, &g, pre.as_ref(), &options)?;
    let mut out = Outcome::ok("recon");
    out.metric("iterations", sol.iterations);
    out.metric("converged", sol.converged);
    out.metric("relative_residual", fmt_f64(sol.relative_residual));
    if let Some(t) = &truth {
        out.metric("relative_error", fmt_f64(sol.field.relative_error(t)));
    }
    save_field(cfg, &mut out, "recon", &sol.field)?;
    write_text(cfg, &mut out, "cg_log.csv", &sol.log_csv())?;
    Ok(out)
}

fn cmd_bolker(cfg: &RunConfig) -> Result<Outcome> {
    let df = defining_function(cfg)?;
    let dom = domain(cfg)?;
    let w = weight(cfg)?;
    let bound = check_weight(w.as_ref(), &dom, cfg.bolker_nx, cfg.bolker_ntheta)?;
    let report = check_bolker(df.as_ref(), &dom, cfg.bolker_nx, cfg.bolker_ntheta)?;
    let mut out = Outcome::ok("bolker-check");
    let pass = report.ok();
    out.status = if pass { "PASS" } else { "FAIL" }.into();
    out.metric("injectivity", report.injectivity.ok);
    out.metric("surjectivity", report.surjectivity.ok);
    out.metric("local", report.defining.ok());
    out.metric("min_ratio", fmt_f64(report.injectivity.min_ratio));
    out.metric("max_gap", fmt_f64(report.surjectivity.max_gap));
    let mut text = report.summary();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    text.push_str(&format!("weight min_abs={:.6e} at x={:?}\n", bound.min_abs, bound.x));
    write_text(cfg, &mut out, "bolker.txt", &text)?;
    if !pass {
        out.exit_code = 2;
        out.invariant = Some(
            if !report.defining.ok() {
                "beylkin-local"
            } else if !report.injectivity.ok {
                "bolker-injectivity"
            } else {
                "bolker-surjectivity"
            }
            .into(),
        );
    }
    Ok(out)
}

/// 8·2^k up to `limit`.
fn doubling_ladder(limit: f64) -> Vec<f64> {
    (0..).map(|k| 8.0 * 2f64.powi(k)).take_while(|l| *l <= limit).collect()
}

fn cmd_symbol(cfg: &RunConfig) -> Result<Outcome> {
    let op = operator(cfg, cfg.cells, cfg.n_theta)?;
    let symbol = PrincipalSymbol::new(op.defining().clone(), op.weight().clone())?;
    let x0 = cfg.vector_or(&cfg.probe_x0, &[0.0; 3]);
    let xi = cfg.vector_or(&cfg.probe_xi, &[1.0, 0.0, 0.0]);
    let ladder = if cfg.lambda_ladder.is_empty() {
        doubling_ladder(nyquist_limit(&op))
    } else {
        cfg.lambda_ladder.clone()
    };
    let result = probe_symbol(&op, &symbol, &x0, &xi, &ladder, cfg.probe_window * cfg.half_width)?;
    let last = result.last();
    let expected = -((cfg.dimension - 1) as f64);
    let exponent_ok = (result.exponent - expected).abs() <= 0.1;
    let ratio_ok = (last.ratio_principal - 1.0).abs() <= cfg.symbol_tol;
    let mut out = Outcome::ok("symbol-check");
    out.status = if exponent_ok && ratio_ok { "PASS" } else { "FAIL" }.into();
    out.metric("exponent", fmt_f64(result.exponent));
    out.metric("ratio_principal", fmt_f64(last.ratio_principal));
    out.metric("lambda_max", fmt_f64(last.lambda));
    write_text(cfg, &mut out, "symbol.csv", &result.to_csv())?;
    if !(exponent_ok && ratio_ok) {
        out.exit_code = 2;
        out.invariant = Some("symbol-agreement".into());
    }
    Ok(out)
}

fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let grid = grid_with(cfg, cfg.cells)?;
    let truth = object(cfg, &grid)?;
    let family = PerturbationFamily::standard(grid.domain())?;
    let options = SweepOptions {
        n_theta: cfg.sweep_n_theta,
        eta_factor: cfg.delta_factor,
        power_iterations: cfg.sweep_power_iterations,
        restarts: cfg.sweep_restarts,
        seed: cfg.seed,
        ..SweepOptions::default()
    };
    let sweep = perturbation_sweep(&grid, weight(cfg)?, &family, &cfg.delta_ladder, &truth, &options)?;
    let mut out = Outcome::ok("perturb-sweep");
    out.metric("slope", fmt_f64(sweep.fit.map_or(f64::NAN, |f| f.slope)));
    out.metric("threshold", fmt_f64(sweep.threshold));
    out.metric("absorption_ok", sweep.absorption_ok);
    out.metric("margin_ok", sweep.margin_ok);
    write_text(cfg, &mut out, "sweep.csv", &sweep.to_csv())?;
    Ok(out)
}

fn default_directions(n: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for k in 0..n {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[k] = s;
            dirs.push(d);
        }
    }
    if n == 2 {
        dirs.push(vec![1.0, 1.0]);
        dirs.push(vec![1.0, -1.0]);
    }
    dirs
}

fn cmd_fbi(cfg: &RunConfig) -> Result<Outcome> {
    let op = operator(cfg, cfg.cells, cfg.n_theta)?;
    let f = object(cfg, op.grid())?;
    let ladder = if cfg.lambda_ladder.is_empty() {
        default_ladder(&f)
    } else {
        cfg.lambda_ladder.clone()
    };
    let x0 = cfg.vector_or(&cfg.fbi_x0, &[0.5, 0.0, 0.0]);
    let dirs = cfg
        .fbi_directions
        .clone()
        .unwrap_or_else(|| default_directions(cfg.dimension));
    let scan = decay_scan(&f, &x0, &dirs, &ladder)?;
    let theta = cfg.vector_or(&cfg.conormal_theta, &[1.0, 0.0, 0.0]);
    let report = conormal_probe(&op, &f, cfg.conormal_s0 * cfg.half_width, &theta, &ladder)?;
    let suspect = scan
        .fits
        .iter()
        .filter(|d| d.verdict == Verdict::WavefrontSuspect)
        .count();
    let mut out = Outcome::ok("fbi-probe");
    out.metric("suspect", format!("{suspect}/{}", scan.fits.len()));
    out.metric("sinogram_smooth", report.sinogram_smooth);
    out.metric(
        "conormal_agree",
        format!("{}/{}", report.agreements(), report.points.len()),
    );
    write_text(cfg, &mut out, "fbi.csv", &scan.to_csv())?;
    write_text(cfg, &mut out, "conormal.csv", &report.to_csv())?;
    Ok(out)
}
