use thiserror::Error;

use crate::model::Layer;

pub type Result<T> = std::result::Result<T, EunError>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed request: unknown names, overlapping sets, off-grid values.
    Usage,
    /// The network or document itself is invalid.
    Validation,
    /// A computation could not be carried out (cap, undefined conditional).
    Numeric,
}

#[derive(Debug, Error)]
pub enum EunError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{var}` has no value `{value}`")]
    UnknownValue { var: String, value: String },
    #[error("variable `{var}` declares label `{label}` twice")]
    DuplicateLabel { var: String, label: String },
    #[error("variable `{0}` has a degenerate domain (at least two values required)")]
    DegenerateDomain(String),
    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("{layer} potential of `{var}` conditions on [{found}], graph requires [{expected}]")]
    ConditioningMismatch {
        var: String,
        layer: Layer,
        expected: String,
        found: String,
    },
    #[error(
        "{layer} potential of `{var}` is incomplete: expected {expected} entries, got {found}"
    )]
    IncompleteTable {
        var: String,
        layer: Layer,
        expected: usize,
        found: usize,
    },
    #[error("non-positive potential: {layer} table of `{var}` has entry {value} at row {row}")]
    NonPositive {
        var: String,
        layer: Layer,
        row: usize,
        value: f64,
    },
    #[error(
        "{layer} potential of `{var}` has reference-row entry {value} at row {row}; must be 1"
    )]
    NonUnitReference {
        var: String,
        layer: Layer,
        row: usize,
        value: f64,
    },
    #[error("non-positive table entry {value} at state {state}")]
    NonPositiveTable { state: usize, value: f64 },
    #[error("table has {found} entries, state space has {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("state space of {states} exceeds the enumeration cap of {cap}")]
    StateCapExceeded { states: u128, cap: usize },
    #[error("network is not Markov with respect to its declared graph ({violations} violations)")]
    NotMarkov { violations: usize },
    #[error("empty event: {0}")]
    EmptyEvent(&'static str),
    #[error("variable sets must be non-empty: {0}")]
    EmptySet(&'static str),
    #[error("variable sets overlap on `{0}`")]
    OverlappingSets(String),
    #[error("variable sets do not cover `{0}`; a partition is required")]
    NotPartition(String),
    #[error("separation precondition violated: {0}")]
    SeparationRequired(String),
    #[error("identity check failed: {what} ({lhs} vs {rhs})")]
    IdentityMismatch {
        what: &'static str,
        lhs: f64,
        rhs: f64,
    },
    #[error("directed graph has a cycle through `{0}`")]
    Cycle(String),
    #[error("CPT of `{var}`: {msg}")]
    InvalidCpt { var: String, msg: String },
    #[error("syntax error at line {line}, column {column}: {msg}")]
    Syntax {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("schema error at `{key}`: {msg}")]
    Schema { key: String, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl EunError {
    pub fn kind(&self) -> ErrorKind {
        use EunError::*;
        match self {
            UnknownVariable(_)
            | UnknownValue { .. }
            | EmptySet(_)
            | OverlappingSets(_)
            | NotPartition(_)
            | InvalidArgument(_) => ErrorKind::Usage,
            StateCapExceeded { .. }
            | EmptyEvent(_)
            | SeparationRequired(_)
            | IdentityMismatch { .. } => ErrorKind::Numeric,
            _ => ErrorKind::Validation,
        }
    }
}
