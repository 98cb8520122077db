use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use decompose_core::Error;
use serde_json::json;

/// Stable, machine-readable name for an error, shared by the HTTP error
/// body and the CLI error line.
pub fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::EmptyImage => "empty_image",
        Error::DegenerateGeometry(_) => "degenerate_geometry",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::HalfspaceIntersection(_) => "halfspace_intersection",
        Error::OutsideSimplex { .. } => "outside_simplex",
        Error::IndexOutOfRange { .. } => "index_out_of_range",
        Error::BackgroundRemoval => "background_removal",
        Error::PaletteTooSmall => "palette_too_small",
        Error::DimensionMismatch(_) => "dimension_mismatch",
        Error::NonFiniteEnergy { .. } => "non_finite_energy",
        Error::Cancelled => "cancelled",
        Error::UnsupportedImage(_) | Error::Image(_) => "unsupported_image",
        Error::Format(_) => "format",
        Error::MissingFile(_) => "missing_file",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub kind: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            kind,
            message: message.into(),
        }
    }

    pub fn not_found(what: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("{what} not found"))
    }

    pub fn conflict(kind: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, kind, message)
    }

    pub fn unprocessable(kind: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, kind, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let status = match &err {
            Error::UnsupportedImage(_) | Error::Image(_) => StatusCode::UNSUPPORTED_MEDIA_TYPE,
            Error::EmptyImage
            | Error::DegenerateGeometry(_)
            | Error::InvalidParameter(_)
            | Error::HalfspaceIntersection(_)
            | Error::OutsideSimplex { .. }
            | Error::IndexOutOfRange { .. }
            | Error::BackgroundRemoval
            | Error::PaletteTooSmall
            | Error::DimensionMismatch(_)
            | Error::Format(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Error::Cancelled => StatusCode::CONFLICT,
            Error::NonFiniteEnergy { .. }
            | Error::MissingFile(_)
            | Error::Io(_)
            | Error::Json(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, error_kind(&err), err.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "kind": self.kind, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
