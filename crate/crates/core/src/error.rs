use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("node {node} out of range for graph with {node_count} nodes")]
    InvalidNode { node: usize, node_count: usize },

    #[error("group {group} has {size} node(s); at least {required} required")]
    GroupTooSmall {
        group: usize,
        size: usize,
        required: usize,
    },

    #[error("undefined density entry w[{row}][{col}]: {reason}")]
    UndefinedDensity {
        row: usize,
        col: usize,
        reason: &'static str,
    },

    #[error("non-finite density entry w[{row}][{col}] = {value}")]
    NonFiniteDensity { row: usize, col: usize, value: f64 },

    #[error("equilibrium fraction for group {group} undefined: denominator {denominator}")]
    DegenerateEquilibrium { group: usize, denominator: f64 },

    #[error("equilibrium fraction for group {group} = {value} outside [0, 1]")]
    BetaOutOfRange { group: usize, value: f64 },

    #[error("recurrence slope {slope} does not contract (requires |B| < 1)")]
    NonContractingRecurrence { slope: f64 },

    #[error("no critical swap probability in (0, 1) for b = {b}, c = {c}")]
    NoCriticalSwap { b: f64, c: f64 },

    #[error("parameters do not match graph: {0}")]
    Mismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Usage(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Stable short identifier used in machine-readable CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::InvalidNode { .. } => "invalid-node",
            Error::GroupTooSmall { .. } => "group-too-small",
            Error::UndefinedDensity { .. } => "undefined-density",
            Error::NonFiniteDensity { .. } => "non-finite-density",
            Error::DegenerateEquilibrium { .. } => "degenerate-equilibrium",
            Error::BetaOutOfRange { .. } => "beta-out-of-range",
            Error::NonContractingRecurrence { .. } => "non-contracting-recurrence",
            Error::NoCriticalSwap { .. } => "no-critical-swap",
            Error::Usage(_) => "usage",
            Error::Mismatch(_) => "mismatch",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }
}
