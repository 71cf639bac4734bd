use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use provex::error::Error;
use serde::Serialize;
use serde_json::{json, Value};

/// Error body: `{code, message, detail}`.
#[derive(Debug, Clone, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> ApiError {
        self.detail = detail;
        self
    }

    pub fn not_found(what: &str, id: &str) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("unknown {what} `{id}`"))
            .with_detail(json!({ "kind": what, "id": id }))
    }

    pub fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> ApiError {
        let message = e.to_string();
        let (status, code, detail) = match &e {
            Error::Syntax { line, column, .. } => (
                StatusCode::BAD_REQUEST,
                "syntax_error",
                json!({ "line": line, "column": column }),
            ),
            Error::DuplicateHead(_)
            | Error::ForwardReference(_)
            | Error::UnknownRelation(_)
            | Error::UnknownAttribute { .. }
            | Error::InvalidProgram(_) => (StatusCode::BAD_REQUEST, "invalid_program", Value::Null),
            Error::Unsafe { rule, attributes } => (
                StatusCode::BAD_REQUEST,
                "invalid_program",
                json!({ "rule": rule, "attributes": attributes }),
            ),
            Error::Plan(_) | Error::TooManyOccurrences { .. } => (StatusCode::BAD_REQUEST, "invalid_plan", Value::Null),
            Error::InvalidValue { .. } | Error::Dataset(_) | Error::Csv(_) | Error::Json(_) | Error::Schema(_) => {
                (StatusCode::BAD_REQUEST, "invalid_input", Value::Null)
            }
            Error::AmbiguousOccurrence(name) => (
                StatusCode::BAD_REQUEST,
                "ambiguous_occurrence",
                json!({ "occurrence": name }),
            ),
            Error::UnknownOccurrence(name) => (
                StatusCode::NOT_FOUND,
                "unknown_occurrence",
                json!({ "occurrence": name }),
            ),
            Error::NotInResult { relation, row } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                "not_in_result",
                json!({ "relation": relation, "row": row }),
            ),
            Error::NoSelection => (StatusCode::CONFLICT, "no_selection", Value::Null),
            Error::ConstraintViolation { relation, constraint, .. } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                "constraint_violation",
                json!({ "relation": relation, "constraint": constraint }),
            ),
            Error::KindMismatch { .. } | Error::BadAggregate { .. } | Error::Overflow(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "evaluation_error", Value::Null)
            }
            Error::OracleMismatch(_) | Error::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", Value::Null),
        };
        ApiError {
            status,
            code,
            message,
            detail,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}
