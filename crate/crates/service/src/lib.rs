//! Carrier-side alias service: a JSON API and command-line tool over one
//! alias registry, an address validation gateway and the parcel relay.

pub mod api;
pub mod app;
pub mod clock;
pub mod config;
pub mod error;

use std::future::Future;
use std::sync::Arc;

pub use app::App;
pub use clock::{Clock, FixedClock, SystemClock};
pub use config::ServiceConfig;
pub use error::ServiceError;

/// Bind, serve until `shutdown` resolves, then flush the journal and parcel snapshot.
pub async fn serve(app: Arc<App>, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServiceError> {
    let addr = format!("{}:{}", app.config().bind, app.config().port);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|source| ServiceError::Bind { addr: addr.clone(), source })?;
    let local = listener.local_addr().map_err(|source| ServiceError::Bind { addr, source })?;
    eprintln!("listening on http://{local}");
    axum::serve(listener, api::router(app.clone()))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(|e| ServiceError::Storage(format!("server stopped: {e}")))?;
    app.flush()
}

/// Resolves on Ctrl-C or, on Unix, SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}
