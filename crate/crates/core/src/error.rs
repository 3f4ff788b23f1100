use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("integrand returned non-finite value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("density ratio threshold must be positive, got {0}")]
    InvalidThreshold(f64),

    #[error("no interior mixture weight: {condition} = {value} does not exceed 1")]
    NoInteriorSolution {
        condition: MomentCondition,
        value: f64,
    },

    #[error("classifier is independent of the class: |tpr - fpr| = {0}")]
    DegenerateClassifier(f64),

    #[error("envelope violated at x = {x}: target {target} > M * candidate {bound}")]
    EnvelopeViolation { x: f64, target: f64, bound: f64 },

    #[error("population has no density ratio; threshold classifiers need a monotone ratio")]
    MissingDensityRatio,

    #[error("labels are hidden from this evaluator")]
    LabelsHidden,

    #[error("dataset I/O: {0}")]
    Io(String),
}

/// Which moment inequality of the mixture-existence condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentCondition {
    /// `E[R(X)] > 1`
    Ratio,
    /// `E[1/R(X)] > 1`
    InverseRatio,
}

impl std::fmt::Display for MomentCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MomentCondition::Ratio => write!(f, "E[R]"),
            MomentCondition::InverseRatio => write!(f, "E[1/R]"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
