use axum::http::StatusCode;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    UnknownConcept,
    BadRequest,
    DegenerateAxis,
    Internal,
}

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{code:?}: {message}")]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(skip)]
    pub not_found: bool,
}

impl ApiError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            not_found: false,
        }
    }

    pub fn unknown_concept(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::UnknownConcept, message)
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadRequest, message)
    }

    pub fn degenerate_axis(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::DegenerateAxis, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Internal, message)
    }

    /// A request for a route or resource that does not exist.
    pub fn no_route(message: impl Into<String>) -> Self {
        ApiError {
            not_found: true,
            ..Self::bad_request(message)
        }
    }

    pub fn status(&self) -> StatusCode {
        if self.not_found {
            return StatusCode::NOT_FOUND;
        }
        match self.code {
            ErrorCode::UnknownConcept => StatusCode::NOT_FOUND,
            ErrorCode::BadRequest | ErrorCode::DegenerateAxis => StatusCode::BAD_REQUEST,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}
