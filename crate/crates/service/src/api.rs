//! Wire types for the `/v1` contract.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use newsxplain::explain::Explanation;
use newsxplain::Label;
use serde::{Deserialize, Serialize};

/// Inclusive upper bound on request text length, in characters.
pub const MAX_TEXT_CHARS: usize = 10_000;

/// Upper bound accepted for a per-request explanation budget.
pub const MAX_BUDGET: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyRequest {
    pub text: String,
    #[serde(default = "default_explain")]
    pub explain: bool,
    #[serde(default)]
    pub budget: Option<usize>,
}

fn default_explain() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResponse {
    pub label: Label,
    pub p_fake: f64,
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<Explanation>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format_version: Option<u32>,
}

/// Machine-readable failure codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    EmptyText,
    TooLong,
    MalformedBody,
    InvalidBudget,
    ModelNotLoaded,
    ReloadFailed,
    Internal,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::EmptyText
            | ErrorCode::TooLong
            | ErrorCode::MalformedBody
            | ErrorCode::InvalidBudget => StatusCode::BAD_REQUEST,
            ErrorCode::ModelNotLoaded => StatusCode::SERVICE_UNAVAILABLE,
            ErrorCode::ReloadFailed => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}

/// Parse and bound-check a raw request body.
pub fn parse_request(body: &[u8]) -> Result<ClassifyRequest, ApiError> {
    let req: ClassifyRequest = serde_json::from_slice(body)
        .map_err(|e| ApiError::new(ErrorCode::MalformedBody, e.to_string()))?;
    let chars = req.text.chars().count();
    if chars > MAX_TEXT_CHARS {
        return Err(ApiError::new(
            ErrorCode::TooLong,
            format!("text has {chars} characters; the limit is {MAX_TEXT_CHARS}"),
        ));
    }
    if newsxplain::text::analyze(&req.text).1.is_empty() {
        return Err(ApiError::new(
            ErrorCode::EmptyText,
            "text has no tokens after normalization",
        ));
    }
    if let Some(b) = req.budget {
        if b == 0 || b > MAX_BUDGET {
            return Err(ApiError::new(
                ErrorCode::InvalidBudget,
                format!("budget must be in 1..={MAX_BUDGET}"),
            ));
        }
    }
    Ok(req)
}
