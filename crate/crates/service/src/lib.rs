//! HTTP service and command-line front end for the layer decomposition
//! pipeline in `decompose_core`.

pub mod api;
pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod jobs;
pub mod session;

pub use api::router;
pub use config::Config;
pub use session::AppState;

/// Builds the HTTP application for `config`.
pub fn app(config: Config) -> axum::Router {
    router(AppState::new(config))
}
