use tokio::net::TcpListener;
use tokio_util::sync::CancellationToken;
use wxline::clock::SimClock;
use wxline::nodesim::Node;
use wxline::station::{in_process_nodes, launch};
use wxline::webserver::serve;

use super::{now, shutdown_on_signal};
use crate::{CliError, Settings};

/// Polls, logs and serves until interrupted, then drains every loop.
pub async fn run(settings: &Settings) -> Result<(), CliError> {
    let config = settings.collector_config()?;
    let nodes =
        settings.in_process_nodes(&config)?.into_iter().map(Node::new).collect::<Result<Vec<_>, _>>()?;
    let origin = settings.start_time("collector")?.unwrap_or_else(now);

    let bind = config.http_bind.clone();
    let listener = TcpListener::bind(&bind)
        .await
        .map_err(|e| CliError::runtime(&format!("cannot listen on {bind}"), e))?;
    let addr = listener.local_addr().map_err(|e| CliError::runtime("listener", e))?;

    let clock = SimClock::new(origin, config.time_scale);
    let shutdown = shutdown_on_signal()?;
    let stop_nodes = CancellationToken::new();
    let (links, node_tasks) = in_process_nodes(nodes, &clock, &stop_nodes);
    let station = match launch(config, clock, links, true, shutdown.clone()) {
        Ok(station) => station,
        Err(e) => {
            stop_nodes.cancel();
            return Err(CliError::runtime("cannot start collector", e));
        }
    };
    println!("serving http://{addr}/");
    let http = tokio::spawn(serve(listener, station.router(), shutdown.clone()));

    let result = station.join().await;
    shutdown.cancel();
    stop_nodes.cancel();
    for task in node_tasks {
        let _ = task.await;
    }
    let served = http.await.map_err(|e| CliError::runtime("http task", e))?;
    result.map_err(|e| CliError::runtime("collector stopped", e))?;
    served.map_err(|e| CliError::runtime("http server", e))
}
