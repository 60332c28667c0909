use std::fmt;

use serde::{Deserialize, Serialize};

/// A single field-level problem found while validating a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("density {value} outside [0, 1] ({context})")]
    DensityOutOfRange { value: f64, context: String },

    #[error("degenerate wave: left and right states are equal ({0})")]
    DegenerateWave(f64),

    #[error("invalid capacity profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("time step {dt} violates the CFL bound {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    #[error("source update left [0, 1] at x = {x} (value {value}); reduce the splitting step")]
    SourceStep { x: f64, value: f64 },

    #[error("more than {limit} interactions in one window starting at t = {t}")]
    TooManyEvents { t: f64, limit: usize },

    #[error("invalid scenario: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Scenario(Vec<Violation>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown built-in scenario `{0}`")]
    UnknownBuiltin(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn out_of_range(value: f64, context: impl Into<String>) -> Self {
        Error::DensityOutOfRange {
            value,
            context: context.into(),
        }
    }

    pub fn at(self, t: f64) -> Self {
        match self {
            e @ Error::AtTime { .. } => e,
            e => Error::AtTime { t, source: Box::new(e) },
        }
    }

    /// Configuration errors are problems with the inputs (bad scenario, a
    /// step size above the stability bound); everything else is a failure
    /// of the run itself.
    pub fn is_configuration(&self) -> bool {
        match self {
            Error::InvalidProfile(_)
            | Error::InvalidParams(_)
            | Error::Cfl { .. }
            | Error::Scenario(_)
            | Error::Parse(_)
            | Error::UnknownBuiltin(_) => true,
            Error::AtTime { source, .. } => source.is_configuration(),
            _ => false,
        }
    }

    /// Short machine-readable tag, used in the CLI error document.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DensityOutOfRange { .. } => "density_out_of_range",
            Error::DegenerateWave(_) => "degenerate_wave",
            Error::InvalidProfile(_) => "invalid_profile",
            Error::InvalidParams(_) => "invalid_params",
            Error::Cfl { .. } => "cfl_violation",
            Error::InvariantBreach(_) => "invariant_breach",
            Error::SourceStep { .. } => "source_step",
            Error::TooManyEvents { .. } => "too_many_events",
            Error::Scenario(_) => "invalid_scenario",
            Error::Parse(_) => "parse_error",
            Error::UnknownBuiltin(_) => "unknown_builtin",
            Error::Io(_) => "io",
            Error::AtTime { source, .. } => source.kind(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
