use thiserror::Error;

use crate::spectral::Parity;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} = {value} is outside the admissible range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("grid of {n_grid} points cannot resolve truncation order {n_max} without aliasing (need at least {required})")]
    GridTooSmall {
        n_grid: usize,
        n_max: usize,
        required: usize,
    },

    #[error("lambda = {lambda} lies in the resonant set {{i^2 - j^2}} ({witness}); nearest admissible 4M+2 values: {suggestions:?}")]
    InadmissibleLambda {
        lambda: f64,
        witness: String,
        suggestions: Vec<f64>,
    },

    #[error("vanishing denominator p^2 + lambda - n^2 at p = {p}, n = {n}")]
    ZeroDenominator { p: usize, n: usize },

    #[error("{what} is ill-conditioned (condition estimate {cond:.3e}, threshold {threshold:.1e})")]
    IllConditioned {
        what: &'static str,
        cond: f64,
        threshold: f64,
    },

    #[error("synthesized gain K_{mode} vanishes in the {parity} parity")]
    ZeroGain { parity: Parity, mode: usize },

    #[error("family is rank deficient: vector {index} lies in the span of the preceding ones")]
    RankDeficient { index: usize },

    #[error("potential coefficient of mode {mode} ({parity} parity) vanishes; the control cannot reach this mode")]
    ControllabilityObstruction { parity: Parity, mode: usize },

    #[error("simulation became unstable at t = {time}: norm {norm:.3e} exceeds {limit:.3e}")]
    Instability { time: f64, norm: f64, limit: f64 },

    #[error("non-positive norm {norm:e} at t = {time} inside the fit window; shorten the window")]
    NormUnderflow { time: f64, norm: f64 },

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownName {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("[{module}] {source}")]
    Context {
        module: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Tag an error with the module that produced it.
    pub fn context(self, module: &'static str) -> Self {
        Error::Context {
            module,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn module(&self) -> Option<&'static str> {
        match self {
            Error::Context { module, .. } => Some(module),
            _ => None,
        }
    }

    /// Whether the failure stems from user configuration rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self.root(),
            Error::Config(_)
                | Error::InadmissibleLambda { .. }
                | Error::UnknownName { .. }
                | Error::InvalidInput(_)
                | Error::OutOfRange { .. }
                | Error::Io(_)
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::InvalidInput(_) => "invalid_input",
            Error::OutOfRange { .. } => "out_of_range",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::GridTooSmall { .. } => "grid_too_small",
            Error::InadmissibleLambda { .. } => "inadmissible_lambda",
            Error::ZeroDenominator { .. } => "zero_denominator",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::ZeroGain { .. } => "zero_gain",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::ControllabilityObstruction { .. } => "controllability_obstruction",
            Error::Instability { .. } => "instability",
            Error::NormUnderflow { .. } => "norm_underflow",
            Error::UnknownName { .. } => "unknown_name",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Context { .. } => unreachable!("root() strips context"),
        }
    }
}
