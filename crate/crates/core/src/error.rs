use thiserror::Error;

use crate::value::ValueKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate head name `{0}`")]
    DuplicateHead(String),
    #[error("`{0}` is referenced before its defining rule")]
    ForwardReference(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{relation}` has no attribute `{attribute}`")]
    UnknownAttribute { relation: String, attribute: String },
    #[error("rule `{rule}` is unsafe: {} not exposed by the body", .attributes.join(", "))]
    Unsafe {
        rule: String,
        attributes: Vec<String>,
    },
    #[error("invalid program: {0}")]
    InvalidProgram(String),
    #[error("cannot compare {left} with {right}")]
    KindMismatch { left: ValueKind, right: ValueKind },
    #[error("invalid {kind} value `{raw}`")]
    InvalidValue { kind: ValueKind, raw: String },
    #[error("{func} is not defined over {kind} values")]
    BadAggregate { func: String, kind: ValueKind },
    #[error("arithmetic overflow in {0}")]
    Overflow(String),
    #[error("`{relation}` violates {constraint}: {detail}")]
    ConstraintViolation {
        relation: String,
        constraint: String,
        detail: String,
    },
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("row {row} is not in `{relation}`")]
    NotInResult { relation: String, row: String },
    #[error("unknown occurrence `{0}`")]
    UnknownOccurrence(String),
    #[error("occurrence `{0}` is ambiguous; qualify it as Head.Label")]
    AmbiguousOccurrence(String),
    #[error("materialization plan: {0}")]
    Plan(String),
    #[error("plan enumeration over {n} occurrences exceeds the limit of {limit}")]
    TooManyOccurrences { n: usize, limit: usize },
    #[error("no rows are selected; post a selection first")]
    NoSelection,
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
