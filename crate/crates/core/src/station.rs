//! Assembles a running station: the poll loop, the page regeneration loop
//! and the state the HTTP routes read from.

use std::io;
use std::sync::Arc;

use axum::Router;
use tokio::task::JoinHandle;
use tokio_util::sync::CancellationToken;

use crate::clock::SimClock;
use crate::collector::{Collector, CollectorConfig, CollectorError, Link, StateStore};
use crate::nodesim::{spawn_in_process, Node};
use crate::protocol::StationId;
use crate::webserver::{regenerate_loop, router, ApiState, PageSlot, PageSource};

pub struct RunningStation {
    pub state: Arc<StateStore>,
    pub page: PageSlot,
    pub api: ApiState,
    collector: JoinHandle<Result<(), CollectorError>>,
    regen: JoinHandle<()>,
}

impl RunningStation {
    pub fn router(&self) -> Router {
        router(self.api.clone())
    }

    /// Waits for both loops to stop. They stop on shutdown, or the poll
    /// loop stops early on a fatal log error, which also cancels `shutdown`.
    pub async fn join(self) -> Result<(), CollectorError> {
        let result = self.collector.await.expect("collector task panicked");
        self.regen.await.expect("regeneration task panicked");
        result
    }
}

/// Starts the collector and page loops on the current runtime.
///
/// All validation and log-directory checks happen before anything is
/// spawned.
pub fn launch(
    config: CollectorConfig,
    clock: SimClock,
    links: Vec<(StationId, Link)>,
    echo: bool,
    shutdown: CancellationToken,
) -> Result<RunningStation, CollectorError> {
    let collector = Collector::new(config.clone(), clock.clone(), links)?.with_console(echo);
    let state = collector.state();
    let stations: Vec<_> = state.snapshot().iter().map(|s| s.station_id).collect();
    let source = PageSource {
        stations,
        state: Arc::clone(&state),
        log_dir: config.log_dir.clone(),
        stale_after: config.stale_after(),
        refresh: config.page_interval,
    };
    let page = PageSlot::new(source.bootstrap_html());
    let api = ApiState {
        page: page.clone(),
        state: Arc::clone(&state),
        log_dir: config.log_dir.clone(),
        clock: clock.clone(),
        stale_after: config.stale_after(),
        started: clock.now(),
    };
    let collector = {
        let shutdown = shutdown.clone();
        tokio::spawn(async move {
            let result = collector.run(shutdown.clone()).await;
            if result.is_err() {
                shutdown.cancel();
            }
            result
        })
    };
    let regen = tokio::spawn(regenerate_loop(source, page.clone(), clock, config.page_interval, shutdown));
    Ok(RunningStation { state, page, api, collector, regen })
}

/// A spawned in-process node; yields the node back when it stops.
pub type NodeTask = JoinHandle<io::Result<Node>>;

/// Spawns simulated nodes wired to in-process links.
pub fn in_process_nodes(
    nodes: Vec<Node>,
    clock: &SimClock,
    shutdown: &CancellationToken,
) -> (Vec<(StationId, Link)>, Vec<NodeTask>) {
    nodes
        .into_iter()
        .map(|node| {
            let id = node.config().station_id;
            let (pipe, handle) = spawn_in_process(node, clock.clone(), shutdown.clone());
            ((id, Link::attached(pipe)), handle)
        })
        .unzip()
}
