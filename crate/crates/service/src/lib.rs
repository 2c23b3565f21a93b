//! HTTP facade over a trained model and knowledge base.
//!
//! Endpoints: `GET /api/health`, `GET /api/symptoms`, `POST /api/predict`,
//! `POST /api/recommend`. Everything is loaded before the listener binds and
//! is read-only afterwards.

pub mod api;
mod config;
mod state;

use std::net::SocketAddr;
use std::path::PathBuf;

pub use api::{
    router, ErrorBody, HealthResponse, PredictRequest, PredictResponse, PredictionEntry, RecommendResponse,
    SymptomsResponse, MAX_BODY_BYTES,
};
pub use config::{ServiceConfig, ENV_PREFIX};
pub use state::AppState;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] healthrec_core::Error),
}

impl ServiceError {
    fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ServiceError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn is_io(&self) -> bool {
        match self {
            ServiceError::Io { .. } => true,
            ServiceError::Core(e) => e.is_io(),
            ServiceError::Config(_) => false,
        }
    }
}

/// Binds `addr` and serves until ctrl-c.
pub async fn serve_state(state: AppState, addr: &str) -> Result<(), ServiceError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| ServiceError::io(addr, e))?;
    serve_listener(state, listener).await
}

/// Serves on an already bound listener until ctrl-c.
pub async fn serve_listener(state: AppState, listener: tokio::net::TcpListener) -> Result<(), ServiceError> {
    let local: SocketAddr = listener.local_addr().map_err(|e| ServiceError::io("listener", e))?;
    tracing::info!("listening on http://{local}");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ServiceError::io(local.to_string(), e))
}

/// Loads everything named by `config`, then listens.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let state = AppState::load(&config)?;
    serve_state(state, &config.address()).await
}
