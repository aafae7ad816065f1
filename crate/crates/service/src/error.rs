use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use mailalias_core::postal::AddressError;
use mailalias_core::registry::RegistryError;
use mailalias_core::relay::RelayError;
use thiserror::Error;

/// Startup and operation failures. Startup variants map to distinct exit codes.
#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("config: {0}")]
    Config(String),
    #[error("fixture: {0}")]
    Fixture(String),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error("data directory: {0}")]
    Storage(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error(transparent)]
    Address(#[from] AddressError),
    #[error(transparent)]
    Registry(RegistryError),
    #[error(transparent)]
    Relay(RelayError),
}

impl From<RegistryError> for ServiceError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::NotFound(what) => ServiceError::NotFound(what),
            RegistryError::TerminalState { .. } => ServiceError::Conflict(e.to_string()),
            RegistryError::InvalidValidity | RegistryError::InvalidAddress(_) => {
                ServiceError::BadRequest(e.to_string())
            }
            other => ServiceError::Registry(other),
        }
    }
}

impl From<RelayError> for ServiceError {
    fn from(e: RelayError) -> Self {
        match e {
            RelayError::UnknownParcel(id) => ServiceError::NotFound(format!("parcel {id}")),
            RelayError::InvalidState { .. } | RelayError::NoAliasOnRecord(_) => {
                ServiceError::Conflict(e.to_string())
            }
            RelayError::Registry(r) => r.into(),
            other => ServiceError::Relay(other),
        }
    }
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::BadRequest(_) | ServiceError::Address(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Relay(RelayError::ChecksumMismatch { .. }) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> u8 {
        match self {
            ServiceError::Config(_) => 2,
            ServiceError::Fixture(_) => 3,
            ServiceError::Bind { .. } => 4,
            ServiceError::Storage(_) => 5,
            ServiceError::NotFound(_) => 6,
            ServiceError::Conflict(_) => 7,
            ServiceError::BadRequest(_) | ServiceError::Address(_) => 8,
            ServiceError::Relay(RelayError::ChecksumMismatch { .. }) => 9,
            _ => 1,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}
