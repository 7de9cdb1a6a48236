//! Error bodies: every failure is `{code, message, detail}`.

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Request};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use loebench_core::SessionError;
use schemars::JsonSchema;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub detail: Value,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.to_owned(),
                message: message.into(),
                detail: Value::Null,
            },
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.body.detail = detail;
        self
    }

    pub fn not_found(session_id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no session `{session_id}`"))
            .with_detail(serde_json::json!({ "session_id": session_id }))
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_request", message)
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        let (status, code) = match &e {
            SessionError::Table(_) | SessionError::Templates(_) | SessionError::Rules(_) => {
                (StatusCode::BAD_REQUEST, "invalid_overrides")
            }
            SessionError::Scenario(_) => (StatusCode::BAD_REQUEST, "invalid_scenario"),
            SessionError::NotRunning(_) => (StatusCode::CONFLICT, "session_not_running"),
            SessionError::DialogOpen => (StatusCode::CONFLICT, "dialog_open"),
            SessionError::NoDialog => (StatusCode::CONFLICT, "no_open_dialog"),
            SessionError::RepairRejected(_) => (StatusCode::UNPROCESSABLE_ENTITY, "repair_rejected"),
            SessionError::Sim(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        ApiError::new(status, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

/// `Json<T>` whose rejections use the API error body.
pub struct ApiJson<T>(pub T);

impl<S, T> FromRequest<S> for ApiJson<T>
where
    T: DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(rejection) => Err(rejection_error(rejection)),
        }
    }
}

fn rejection_error(r: JsonRejection) -> ApiError {
    let message = match &r {
        JsonRejection::JsonDataError(e) => {
            // the source carries the serde message, e.g. "unknown variant `AD3`"
            std::error::Error::source(e)
                .map(ToString::to_string)
                .unwrap_or_else(|| r.body_text())
        }
        _ => r.body_text(),
    };
    ApiError::bad_request(message).with_detail(serde_json::json!({ "rejection": r.body_text() }))
}
