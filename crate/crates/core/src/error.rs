use thiserror::Error;

use crate::model::EventViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("event {index} is invalid: {}", join(violations))]
    InvalidEvent {
        index: usize,
        violations: Vec<EventViolation>,
    },

    #[error("event {index} does not define the shared attribute {attr:?}")]
    MissingSharedAttribute { index: usize, attr: String },

    #[error("event at position {position} carries index {index}")]
    IndexMismatch { position: usize, index: usize },

    #[error("no attribute is defined on every event")]
    NoSharedAttribute,

    #[error("header has no time column {0:?}")]
    MissingTimeColumn(String),

    #[error("row {row}: cannot parse timestamp {value:?}")]
    UnparseableTimestamp { row: usize, value: String },

    #[error("row {row}: time is undefined")]
    MissingTimestamp { row: usize },

    #[error("row {row}: no attribute other than time is defined")]
    RowWithOnlyTime { row: usize },

    #[error("csv: {0}")]
    Csv(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),

    #[error("time cannot be used as case identifier")]
    TimeAsCaseId,

    #[error("no attribute besides time and {0:?} is defined, so events carry no activity")]
    MissingActivityAttribute(String),

    #[error("event set is empty")]
    EmptyEventSet,

    #[error("invalid classifier: {0}")]
    InvalidClassifier(String),

    #[error("invalid log: {0}")]
    InvalidLog(String),

    #[error("predicate mixes or misplaces levels: expected {expected}, found {found}")]
    PredicateArity {
        expected: &'static str,
        found: &'static str,
    },

    #[error("stack schema error{}: {message}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    StackSchema {
        step: Option<usize>,
        message: String,
    },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

fn join(violations: &[EventViolation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
