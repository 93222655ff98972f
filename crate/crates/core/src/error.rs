use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// A single violated constraint on a candidate parameter record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParamViolation {
    NonPositiveGammaMargin,
    NonPositiveK,
    NonPositiveA0,
    NegativeAlpha,
    NonFinite,
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            ParamViolation::NonPositiveGammaMargin => "gamma must exceed 1",
            ParamViolation::NonPositiveK => "K must be positive",
            ParamViolation::NonPositiveA0 => "a0 must be positive",
            ParamViolation::NegativeAlpha => "alpha must be non-negative",
            ParamViolation::NonFinite => "all parameters must be finite",
        };
        f.write_str(msg)
    }
}

fn join(v: &[ParamViolation]) -> String {
    v.iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<ParamViolation>),

    #[error("scale collapsed: a = {a} is not a valid evaluation state")]
    CollapsedState { a: f64 },

    #[error("time must be positive, got {t}")]
    NonPositiveTime { t: f64 },

    #[error("gamma = 2 closed form requires gamma == 2, got {gamma}")]
    NotGammaTwo { gamma: f64 },

    #[error("scale quadratic vanishes at t = {root} before the requested time {t}")]
    CollapsedAtOrBefore { root: f64, t: f64 },

    #[error("step failure at t = {t} (a = {a}, adot = {adot}): {reason}")]
    StepFailure {
        t: f64,
        a: f64,
        adot: f64,
        reason: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("rotation constant xi is zero; the classification assumes xi != 0")]
    ZeroRotation,

    #[error("critical scale undefined: requires gamma > 2, lambda < 0, xi != 0")]
    UndefinedCritical,

    #[error("no bracket for turning point: {0}")]
    NoBracket(String),

    #[error("degenerate orbit: a_min == a_max == {a}")]
    DegenerateOrbit { a: f64 },

    #[error("certification mismatch: classified {classified}, integration found {observed}")]
    CertificationMismatch {
        classified: String,
        observed: String,
    },

    #[error("sampling grid reaches s = {s_max} beyond the allowed {s_allowed}")]
    GridTouchesSupportBoundary { s_max: f64, s_allowed: f64 },

    #[error("trajectory covers [{t_lo}, {t_hi}] but [{need_lo}, {need_hi}] is required")]
    TrajectoryTooShort {
        t_lo: f64,
        t_hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("step ladder needs at least 3 strictly decreasing rungs, got {0}")]
    LadderTooShort(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("box corner reaches s = {s_max} beyond the allowed {s_allowed}")]
    BoxOutsideSupport { s_max: f64, s_allowed: f64 },

    #[error("non-finite state in cell ({i}, {j}) at t = {t}")]
    NonFiniteState { i: usize, j: usize, t: f64 },

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable variant name, used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::CollapsedState { .. } => "CollapsedState",
            Error::NonPositiveTime { .. } => "NonPositiveTime",
            Error::NotGammaTwo { .. } => "NotGammaTwo",
            Error::CollapsedAtOrBefore { .. } => "CollapsedAtOrBefore",
            Error::StepFailure { .. } => "StepFailure",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::ZeroRotation => "ZeroRotation",
            Error::UndefinedCritical => "UndefinedCritical",
            Error::NoBracket(_) => "NoBracket",
            Error::DegenerateOrbit { .. } => "DegenerateOrbit",
            Error::CertificationMismatch { .. } => "CertificationMismatch",
            Error::GridTouchesSupportBoundary { .. } => "GridTouchesSupportBoundary",
            Error::TrajectoryTooShort { .. } => "TrajectoryTooShort",
            Error::LadderTooShort(_) => "LadderTooShort",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::BoxOutsideSupport { .. } => "BoxOutsideSupport",
            Error::NonFiniteState { .. } => "NonFiniteState",
            Error::UnknownPreset(_) => "UnknownPreset",
            Error::Usage(_) => "Usage",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }

    /// Errors caused by the invocation or the file system rather than by the
    /// mathematics of the requested case.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::UnknownPreset(_)
                | Error::Usage(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}
