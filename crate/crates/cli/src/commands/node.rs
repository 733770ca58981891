use tokio::net::TcpListener;
use wxline::clock::SimClock;
use wxline::nodesim::{run_node, Node};

use super::{now, shutdown_on_signal};
use crate::{CliError, Settings};

/// Serves one collector connection at a time until interrupted.
pub async fn run(settings: &Settings) -> Result<(), CliError> {
    let config = settings.node_config()?;
    let origin = settings.start_time("node")?.unwrap_or_else(now);
    let listen = settings.node_listen();
    let id = config.station_id;
    let scale = config.time_scale;
    let mut node = Node::new(config)?;

    let listener = TcpListener::bind(listen)
        .await
        .map_err(|e| CliError::runtime(&format!("cannot listen on {listen}"), e))?;
    let addr = listener.local_addr().map_err(|e| CliError::runtime("listener", e))?;
    let shutdown = shutdown_on_signal()?;
    println!("station {id} listening on {addr}");

    let clock = SimClock::new(origin, scale);
    loop {
        let (stream, peer) = tokio::select! {
            _ = shutdown.cancelled() => return Ok(()),
            accepted = listener.accept() => match accepted {
                Ok(conn) => conn,
                Err(e) => {
                    tracing::warn!(error = %e, "accept failed");
                    continue;
                }
            },
        };
        tracing::info!(%peer, "collector connected");
        let _ = stream.set_nodelay(true);
        if let Err(e) = run_node(&mut node, stream, &clock, &shutdown).await {
            tracing::warn!(%peer, error = %e, "connection failed");
        }
        tracing::info!(%peer, "collector disconnected");
    }
}
