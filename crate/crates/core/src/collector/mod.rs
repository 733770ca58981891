//! The polling side of the station: asks every node for a measurement on a
//! fixed-rate schedule, logs and prints what arrives, and keeps per-station
//! state for the web layer.

mod poll;
mod state;

use std::collections::BTreeSet;
use std::io;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, Utc};
use futures::future::join_all;
use tokio_util::sync::CancellationToken;

pub use poll::{poll_once, Link, PollFailure, Polled, Transport};
pub use state::{StateStore, StationState, Totals};

use crate::clock::{truncate_to_seconds, SimClock};
use crate::logstore::{format_rx_time, LogRecord, LogStore};
use crate::protocol::StationId;
use crate::ConfigError;

#[derive(Clone, Debug, PartialEq)]
pub struct CollectorConfig {
    /// Station ids with the TCP address of each node.
    pub stations: Vec<(StationId, String)>,
    pub poll_interval: Duration,
    pub poll_timeout: Duration,
    /// Directory holding the daily CSV files.
    pub log_dir: PathBuf,
    pub page_interval: Duration,
    pub http_bind: String,
    pub time_scale: u32,
}

impl CollectorConfig {
    pub fn new(log_dir: impl Into<PathBuf>) -> Self {
        CollectorConfig {
            stations: Vec::new(),
            poll_interval: Duration::from_secs(10),
            poll_timeout: Duration::from_secs(8),
            log_dir: log_dir.into(),
            page_interval: Duration::from_secs(300),
            http_bind: "127.0.0.1:8080".into(),
            time_scale: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.poll_interval.is_zero() || self.poll_timeout.is_zero() || self.page_interval.is_zero() {
            return Err(ConfigError::new("intervals and timeouts must be positive"));
        }
        if self.poll_timeout >= self.poll_interval {
            return Err(ConfigError::new("poll_timeout_s must be less than poll_interval_s"));
        }
        let mut seen = BTreeSet::new();
        for (id, _) in &self.stations {
            if !seen.insert(*id) {
                return Err(ConfigError::new(format!("duplicate station id {id}")));
            }
        }
        if self.time_scale == 0 {
            return Err(ConfigError::new("time_scale must be at least 1"));
        }
        Ok(())
    }

    pub fn station_ids(&self) -> Vec<StationId> {
        let mut ids: Vec<_> = self.stations.iter().map(|(id, _)| *id).collect();
        ids.sort();
        ids
    }

    /// A reading older than this is shown as stale.
    pub fn stale_after(&self) -> Duration {
        self.poll_interval * 3
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CollectorError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot open log directory {path}: {source}")]
    OpenLog { path: PathBuf, source: io::Error },
    #[error("log append failed twice, stopping to avoid data loss: {0}")]
    LogWrite(io::Error),
}

/// `<ISO-8601 UTC> st=<id> seq=<n> T=<x>C RH=<x>% IRR=<n>W/m2 WS=<x>m/s WD=<n>deg`
pub fn console_line(record: &LogRecord) -> String {
    let r = &record.reading;
    format!(
        "{} st={} seq={} T={}C RH={}% IRR={}W/m2 WS={}m/s WD={}deg",
        format_rx_time(record.rx_time),
        r.station_id,
        r.seq,
        r.temperature,
        r.humidity,
        r.irradiance,
        r.wind_speed,
        r.wind_dir
    )
}

pub struct Collector {
    config: CollectorConfig,
    clock: SimClock,
    links: Vec<(StationId, Link)>,
    log: LogStore,
    state: Arc<StateStore>,
    echo: bool,
}

impl Collector {
    /// Validates the config and opens the log directory. Links are matched
    /// to stations by id; stations without a link are polled over TCP at
    /// their configured address.
    pub fn new(
        config: CollectorConfig,
        clock: SimClock,
        mut links: Vec<(StationId, Link)>,
    ) -> Result<Self, CollectorError> {
        config.validate()?;
        let log = LogStore::open(&config.log_dir)
            .map_err(|source| CollectorError::OpenLog { path: config.log_dir.clone(), source })?;
        for (id, address) in &config.stations {
            if !links.iter().any(|(l, _)| l == id) {
                links.push((*id, Link::tcp(address.clone())));
            }
        }
        links.sort_by_key(|(id, _)| *id);
        let state = Arc::new(StateStore::new(links.iter().map(|(id, _)| *id)));
        Ok(Collector { config, clock, links, log, state, echo: false })
    }

    /// Print a console line for every reading.
    pub fn with_console(mut self, echo: bool) -> Self {
        self.echo = echo;
        self
    }

    pub fn state(&self) -> Arc<StateStore> {
        Arc::clone(&self.state)
    }

    pub fn config(&self) -> &CollectorConfig {
        &self.config
    }

    /// Polls every station once, concurrently, then logs and applies the
    /// results in station-id order.
    pub async fn tick(&mut self) -> Result<(), CollectorError> {
        let (timeout, clock) = (self.config.poll_timeout, &self.clock);
        let polls = self.links.iter_mut().map(|(id, link)| poll_once(link, *id, timeout, clock));
        let results = join_all(polls).await;
        for ((id, _), result) in self.links.iter().zip(results) {
            match result {
                Ok(polled) => {
                    let record = LogRecord::new(truncate_to_seconds(polled.rx_time), polled.reading);
                    if let Err(first) = self.log.append(&record) {
                        tracing::warn!(error = %first, "log append failed, retrying once");
                        self.log.append(&record).map_err(CollectorError::LogWrite)?;
                    }
                    if self.echo {
                        println!("{}", console_line(&record));
                    }
                    self.state.record_success(&record, Some(polled.latency));
                }
                Err(failure) => {
                    tracing::info!(station = %id, %failure, "poll failed");
                    self.state.record_failure(*id, &failure);
                }
            }
        }
        Ok(())
    }

    /// Ticks at `start + n * poll_interval` until `shutdown`. A tick in
    /// progress always finishes; ticks missed while one overran are skipped.
    pub async fn run(mut self, shutdown: CancellationToken) -> Result<(), CollectorError> {
        let start = self.clock.now();
        let interval = self.config.poll_interval;
        let mut n: u32 = 0;
        loop {
            let due = tick_time(start, interval, n);
            tokio::select! {
                biased;
                _ = shutdown.cancelled() => return Ok(()),
                _ = self.clock.sleep_until(due) => {}
            }
            self.tick().await?;
            let elapsed = (self.clock.now() - start).to_std().unwrap_or_default();
            let behind = (elapsed.as_nanos() / interval.as_nanos()) as u32;
            n = (n + 1).max(behind + 1);
        }
    }
}

fn tick_time(start: DateTime<Utc>, interval: Duration, n: u32) -> DateTime<Utc> {
    start + chrono::Duration::from_std(interval * n).expect("schedule overflow")
}
