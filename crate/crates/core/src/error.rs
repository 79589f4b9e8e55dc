use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the transform, reconstruction and probing pipelines.
///
/// Variants are split into input/validation failures and numerical failures;
/// [`Error::is_numerical`] drives the CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("perturbation leaves the defining-function class: mixed Hessian determinant {det:.3e} at x={x:?}, theta={theta:?}")]
    NotDefining { det: f64, x: Vec<f64>, theta: Vec<f64> },

    #[error("weight vanishes on the sampled domain (min |w| = {min_abs:.3e} at x={x:?})")]
    VanishingWeight { min_abs: f64, x: Vec<f64> },

    #[error("degenerate level function: |d_x phi| = {norm:.3e} at x={x:?}")]
    DegenerateGradient { norm: f64, x: Vec<f64> },

    #[error("field is not supported in M: {nonzero} nonzero samples on the padding region")]
    SupportOutsideDomain { nonzero: usize },

    #[error("sinogram s-range too small: leaked mass {leaked:.3e} exceeds {limit:.3e}")]
    MassLeakage { leaked: f64, limit: f64 },

    #[error("backprojection clipped {fraction:.3e} of (x, theta) samples outside the s grid")]
    Clipping { fraction: f64 },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("grid too large for dense assembly: {cells} cells exceeds cap {cap}")]
    SizeCap { cells: usize, cap: usize },

    #[error("direction solve did not converge at x={x:?} (residual {residual:.3e})")]
    SymbolSolve { x: Vec<f64>, residual: f64 },

    #[error("symbol is not elliptic: min p = {min:.3e}")]
    NotElliptic { min: f64 },

    #[error("frequency {lambda} exceeds the resolvable limit {limit:.4} (lambda * h <= pi/2)")]
    Nyquist { lambda: f64, limit: f64 },

    #[error("conjugate gradient stagnated at iteration {iteration}: {reason}")]
    Stagnation { iteration: usize, reason: String },

    #[error("numerically noninjective: sigma_min = {sigma_min:.3e}")]
    NonInjective { sigma_min: f64 },

    #[error("degenerate decay fit: all magnitudes below {floor:.1e}")]
    DegenerateFit { floor: f64 },

    #[error("level set H(s={s}, theta) has no sampled crossing inside M")]
    LevelSetSampling { s: f64 },

    #[error("Bolker condition failed: {0}")]
    BolkerFailure(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics (as opposed to bad inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotDefining { .. }
                | Error::DegenerateGradient { .. }
                | Error::MassLeakage { .. }
                | Error::Clipping { .. }
                | Error::SymbolSolve { .. }
                | Error::NotElliptic { .. }
                | Error::Stagnation { .. }
                | Error::NonInjective { .. }
                | Error::DegenerateFit { .. }
                | Error::LevelSetSampling { .. }
                | Error::BolkerFailure(_)
        )
    }

    /// Short machine-readable name of the violated invariant.
    pub fn invariant(&self) -> &'static str {
        match self {
            Error::UnsupportedDimension(_) => "dimension",
            Error::DimensionMismatch { .. } => "dimension",
            Error::InvalidParameter { .. } => "parameter",
            Error::NotDefining { .. } => "mixed-hessian-positive",
            Error::VanishingWeight { .. } => "weight-nonvanishing",
            Error::DegenerateGradient { .. } => "gradient-nondegenerate",
            Error::SupportOutsideDomain { .. } => "support-in-M",
            Error::MassLeakage { .. } => "s-range-coverage",
            Error::Clipping { .. } => "s-range-coverage",
            Error::LayoutMismatch(_) => "layout",
            Error::SizeCap { .. } => "size-cap",
            Error::SymbolSolve { .. } => "bolker-surjectivity",
            Error::NotElliptic { .. } => "ellipticity",
            Error::Nyquist { .. } => "nyquist",
            Error::Stagnation { .. } => "cg-progress",
            Error::NonInjective { .. } => "injectivity",
            Error::DegenerateFit { .. } => "decay-fit",
            Error::LevelSetSampling { .. } => "level-set-sampling",
            Error::BolkerFailure(_) => "bolker",
            Error::Format(_) => "file-format",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
