use thiserror::Error;

/// Errors produced across the skill pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("axis is not unit-norm (norm = {0})")]
    NonUnitAxis(f64),
    #[error("quaternion is not unit-norm (norm = {0})")]
    NonUnitQuaternion(f64),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("unbounded sample domain: {0}")]
    UnboundedSampleDomain(String),
    #[error("insufficient data: {model} needs at least {needed} samples, got {got}")]
    InsufficientData {
        model: String,
        needed: usize,
        got: usize,
    },
    #[error("not a trajectory: demonstration is discrete")]
    NotATrajectory,
    #[error("empty demonstration")]
    EmptyDemonstration,
    #[error("no constraint row for {0}")]
    NoConstraintRow(String),
    #[error("unsupported nullspace combination: {0}")]
    UnsupportedCombination(String),
    #[error("missing shape: {0}")]
    MissingShape(String),
    #[error("unknown parameter: {0}")]
    UnknownParameter(String),
    #[error("unknown skill: {0}")]
    UnknownSkill(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown frame: {0}")]
    UnknownFrame(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidValue(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    /// Short machine-readable tag for CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonUnitAxis(_) => "non_unit_axis",
            Error::NonUnitQuaternion(_) => "non_unit_quaternion",
            Error::InvalidValue(_) => "invalid_value",
            Error::UnboundedSampleDomain(_) => "unbounded_sample_domain",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::NotATrajectory => "not_a_trajectory",
            Error::EmptyDemonstration => "empty_demonstration",
            Error::NoConstraintRow(_) => "no_constraint_row",
            Error::UnsupportedCombination(_) => "unsupported_combination",
            Error::MissingShape(_) => "missing_shape",
            Error::UnknownParameter(_) => "unknown_parameter",
            Error::UnknownSkill(_) => "unknown_skill",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::UnknownFrame(_) => "unknown_frame",
            Error::Parse { .. } => "parse_error",
            Error::Schema(_) => "schema_error",
            Error::Io(_) => "io_error",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
