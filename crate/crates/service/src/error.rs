use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown tree `{0}`")]
    UnknownTree(String),
    #[error("tree `{id}` is invalid: {}", .violations.join("; "))]
    InvalidTree { id: String, violations: Vec<String> },
    #[error("the provenance filter removes every leaf of tree `{0}`")]
    EmptyFilter(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("branch {index} does not exist; node `{node}` has {count} branches")]
    InvalidBranch {
        node: String,
        index: usize,
        count: usize,
    },
    #[error("session is at leaf `{0}`; there is no question to answer")]
    AtLeaf(String),
    #[error("session is at the root; there is nothing to step back from")]
    AtRoot,
    #[error("session is at question `{0}`; findings can only be recorded at a leaf")]
    NotAtLeaf(String),
    #[error("corrupt session log `{session}`: {message}")]
    Replay { session: String, message: String },
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("storage error: {0}")]
    Storage(std::io::Error),
}

// Not #[from]: the io error is already part of the message.
impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Storage(e)
    }
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownTree(_) => "unknown_tree",
            ServiceError::InvalidTree { .. } => "invalid_tree",
            ServiceError::EmptyFilter(_) => "empty_result",
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::InvalidBranch { .. } => "invalid_branch",
            ServiceError::AtLeaf(_) => "at_leaf",
            ServiceError::AtRoot => "at_root",
            ServiceError::NotAtLeaf(_) => "not_at_leaf",
            ServiceError::Replay { .. } => "replay",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::Storage(_) => "storage",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownTree(_) | ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::InvalidTree { .. } | ServiceError::EmptyFilter(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ServiceError::InvalidBranch { .. } | ServiceError::BadRequest(_) => {
                StatusCode::BAD_REQUEST
            }
            ServiceError::AtLeaf(_) | ServiceError::AtRoot | ServiceError::NotAtLeaf(_) => {
                StatusCode::CONFLICT
            }
            ServiceError::Replay { .. } | ServiceError::Storage(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        }
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: &'static str,
    message: String,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        if self.status().is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        let body = ErrorBody {
            error: self.code(),
            message: self.to_string(),
        };
        (self.status(), Json(body)).into_response()
    }
}
