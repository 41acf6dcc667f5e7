//! HTTP service for walking a KB tree question by question, collecting the
//! verdicts reached, and exporting them as an observation dataset.

pub mod api;
pub mod error;
pub mod registry;
pub mod session;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

pub use api::{router, AppState};
pub use error::ServiceError;
pub use registry::{TreeRegistry, TreeSummary};
pub use session::{Session, SessionEvent, SessionView, View};
pub use store::EventStore;

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub addr: SocketAddr,
    pub kb_dir: PathBuf,
    /// Session logs are kept only in memory when absent.
    pub data_dir: Option<PathBuf>,
    pub ui_dir: Option<PathBuf>,
}

/// Runs until interrupted.
pub async fn serve(config: ServeConfig) -> Result<(), ServiceError> {
    let registry = TreeRegistry::load_dir(&config.kb_dir)?;
    let store = match &config.data_dir {
        Some(dir) => EventStore::open(dir)?,
        None => EventStore::in_memory(),
    };
    let trees = registry.len();
    let state = Arc::new(AppState::new(registry, store)?);
    let app = router(state, config.ui_dir.as_deref());
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    tracing::info!(addr = %listener.local_addr()?, trees, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
