#![allow(dead_code)]

use std::io;
use std::path::Path;
use std::time::Duration;

use chrono::{DateTime, Utc};
use tokio::task::JoinHandle;
use tokio_util::sync::CancellationToken;
use wxline::clock::SimClock;
use wxline::collector::CollectorConfig;
use wxline::nodesim::{Node, NodeConfig};
use wxline::protocol::StationId;
use wxline::station::{in_process_nodes, launch, RunningStation};

pub fn origin() -> DateTime<Utc> {
    "2024-06-15T00:00:00Z".parse().unwrap()
}

pub fn id(n: u32) -> StationId {
    StationId::new(n).unwrap()
}

pub fn node_config(n: u32) -> NodeConfig {
    let mut cfg = NodeConfig::new(id(n));
    cfg.climate.seed = 7;
    cfg
}

pub fn collector_config(dir: &Path, ids: &[u32]) -> CollectorConfig {
    let mut cfg = CollectorConfig::new(dir);
    cfg.stations = ids.iter().map(|&n| (id(n), "in-process".to_string())).collect();
    cfg
}

/// Collector, page loop and in-process nodes on a shared clock.
pub struct Rig {
    pub clock: SimClock,
    pub station: Option<RunningStation>,
    pub stop_collector: CancellationToken,
    pub stop_nodes: CancellationToken,
    pub nodes: Vec<JoinHandle<io::Result<Node>>>,
}

impl Rig {
    pub fn start(config: CollectorConfig, nodes: Vec<NodeConfig>, scale: u32) -> Rig {
        let clock = SimClock::new(origin(), scale);
        let stop_collector = CancellationToken::new();
        let stop_nodes = CancellationToken::new();
        let nodes: Vec<Node> = nodes.into_iter().map(|c| Node::new(c).unwrap().with_trace()).collect();
        let (links, nodes) = in_process_nodes(nodes, &clock, &stop_nodes);
        let station = launch(config, clock.clone(), links, false, stop_collector.clone()).unwrap();
        Rig { clock, station: Some(station), stop_collector, stop_nodes, nodes }
    }

    pub fn station(&self) -> &RunningStation {
        self.station.as_ref().unwrap()
    }

    /// Advances sim time to `origin + secs`.
    pub async fn run_until(&self, secs: u64) {
        self.clock.sleep_until(origin() + chrono::Duration::seconds(secs as i64)).await;
    }

    /// Stops the collector, then the nodes, returning the nodes.
    pub async fn stop(&mut self) -> Vec<Node> {
        self.stop_collector.cancel();
        self.station.take().unwrap().join().await.unwrap();
        self.stop_nodes.cancel();
        let mut nodes = Vec::new();
        for h in self.nodes.drain(..) {
            nodes.push(h.await.unwrap().unwrap());
        }
        nodes
    }
}

pub fn secs(n: u64) -> Duration {
    Duration::from_secs(n)
}
