pub mod collect;
pub mod node;
pub mod replay;
pub mod stats;

use chrono::{DateTime, Utc};
use tokio_util::sync::CancellationToken;
use wxline::clock::truncate_to_seconds;

use crate::CliError;

pub(crate) fn runtime() -> Result<tokio::runtime::Runtime, CliError> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::runtime("cannot start runtime", e))
}

pub(crate) fn now() -> DateTime<Utc> {
    truncate_to_seconds(Utc::now())
}

/// A token cancelled on Ctrl-C or, on Unix, SIGTERM.
pub(crate) fn shutdown_on_signal() -> Result<CancellationToken, CliError> {
    let token = CancellationToken::new();
    #[cfg(unix)]
    let mut term = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate())
        .map_err(|e| CliError::runtime("cannot install signal handler", e))?;
    let cancel = token.clone();
    tokio::spawn(async move {
        #[cfg(unix)]
        tokio::select! {
            _ = tokio::signal::ctrl_c() => {}
            _ = term.recv() => {}
        }
        #[cfg(not(unix))]
        let _ = tokio::signal::ctrl_c().await;
        tracing::info!("shutting down");
        cancel.cancel();
    });
    Ok(token)
}
