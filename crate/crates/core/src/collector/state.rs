use std::collections::BTreeMap;
use std::sync::RwLock;
use std::time::Duration;

use chrono::{DateTime, Utc};

use super::poll::PollFailure;
use crate::logstore::{Aggregator, LogRecord};
use crate::protocol::{Reading, StationId};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Totals {
    pub polls: u64,
    pub ok: u64,
    pub checksum_errors: u64,
    pub timeouts: u64,
    pub other_errors: u64,
}

impl Totals {
    pub fn failures(&self) -> u64 {
        self.checksum_errors + self.timeouts + self.other_errors
    }

    /// `polls == ok + failures`.
    pub fn conserved(&self) -> bool {
        self.polls == self.ok + self.failures()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StationState {
    pub station_id: StationId,
    pub last_reading: Option<Reading>,
    pub last_rx_time: Option<DateTime<Utc>>,
    pub last_latency: Option<Duration>,
    pub consecutive_failures: u32,
    pub totals: Totals,
    /// Aggregates over every reading accepted since the collector started.
    pub online: Aggregator,
}

impl StationState {
    pub fn new(station_id: StationId) -> Self {
        StationState {
            station_id,
            last_reading: None,
            last_rx_time: None,
            last_latency: None,
            consecutive_failures: 0,
            totals: Totals::default(),
            online: Aggregator::new(),
        }
    }

    pub fn last_record(&self) -> Option<LogRecord> {
        Some(LogRecord::new(self.last_rx_time?, self.last_reading?))
    }

    /// Stale once the latest reading is more than `threshold` old at `now`.
    /// A station without readings counts as stale.
    pub fn is_stale(&self, now: DateTime<Utc>, threshold: Duration) -> bool {
        match self.last_rx_time {
            Some(rx) => (now - rx).to_std().is_ok_and(|age| age > threshold),
            None => true,
        }
    }
}

/// Per-station state shared between the poll loop (single writer) and any
/// number of readers taking snapshots.
#[derive(Debug, Default)]
pub struct StateStore {
    stations: RwLock<BTreeMap<StationId, StationState>>,
}

impl StateStore {
    pub fn new(ids: impl IntoIterator<Item = StationId>) -> Self {
        let stations = ids.into_iter().map(|id| (id, StationState::new(id))).collect();
        StateStore { stations: RwLock::new(stations) }
    }

    /// A point-in-time copy of every station, ordered by id.
    pub fn snapshot(&self) -> Vec<StationState> {
        self.stations.read().expect("state lock poisoned").values().cloned().collect()
    }

    pub fn station(&self, id: StationId) -> Option<StationState> {
        self.stations.read().expect("state lock poisoned").get(&id).cloned()
    }

    fn with_station<R>(&self, id: StationId, f: impl FnOnce(&mut StationState) -> R) -> R {
        let mut guard = self.stations.write().expect("state lock poisoned");
        f(guard.entry(id).or_insert_with(|| StationState::new(id)))
    }

    pub fn record_success(&self, record: &LogRecord, latency: Option<Duration>) {
        self.with_station(record.reading.station_id, |s| {
            s.totals.polls += 1;
            s.totals.ok += 1;
            s.consecutive_failures = 0;
            s.last_reading = Some(record.reading);
            s.last_latency = latency;
            s.last_rx_time = Some(s.last_rx_time.map_or(record.rx_time, |prev| prev.max(record.rx_time)));
            s.online.push(&record.reading);
        })
    }

    pub fn record_failure(&self, id: StationId, failure: &PollFailure) {
        self.with_station(id, |s| {
            s.totals.polls += 1;
            s.consecutive_failures += 1;
            match failure {
                PollFailure::Timeout => s.totals.timeouts += 1,
                PollFailure::ChecksumMismatch(_) => s.totals.checksum_errors += 1,
                PollFailure::Malformed(_) => s.totals.other_errors += 1,
            }
        })
    }

    /// Applies a logged record as if it had just been polled. Used when
    /// rebuilding state from a log.
    pub fn apply_logged(&self, record: &LogRecord) {
        self.record_success(record, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Seq, Tenths};

    fn id(n: u32) -> StationId {
        StationId::new(n).unwrap()
    }

    fn record(at: &str) -> LogRecord {
        LogRecord::new(
            at.parse().unwrap(),
            Reading {
                station_id: id(1),
                seq: Seq::new(3).unwrap(),
                temperature: Tenths::from_tenths(250),
                humidity: Tenths::from_tenths(700),
                irradiance: 10,
                wind_speed: Tenths::from_tenths(20),
                wind_dir: 45,
            },
        )
    }

    #[test]
    fn initial_snapshot() {
        let store = StateStore::new([id(2), id(1)]);
        let snap = store.snapshot();
        assert_eq!(snap.iter().map(|s| s.station_id.get()).collect::<Vec<_>>(), [1, 2]);
        assert!(snap.iter().all(|s| s.last_reading.is_none() && s.totals.polls == 0));
    }

    #[test]
    fn counters_and_snapshot_purity() {
        let store = StateStore::new([id(1)]);
        store.record_success(&record("2024-06-15T00:00:04Z"), None);
        assert_eq!(store.station(id(1)).unwrap().totals.ok, 1);
        store.record_failure(id(1), &PollFailure::Timeout);
        store.record_failure(id(1), &PollFailure::ChecksumMismatch("x".into()));
        store.record_failure(id(1), &PollFailure::Malformed("y".into()));
        let a = store.snapshot();
        let b = store.snapshot();
        assert_eq!(a, b);
        let t = a[0].totals;
        assert_eq!((t.polls, t.ok, t.timeouts, t.checksum_errors, t.other_errors), (4, 1, 1, 1, 1));
        assert!(t.conserved());
        assert_eq!(a[0].consecutive_failures, 3);
    }

    #[test]
    fn staleness_threshold() {
        let store = StateStore::new([id(1)]);
        let s = store.station(id(1)).unwrap();
        let now: DateTime<Utc> = "2024-06-15T00:01:00Z".parse().unwrap();
        assert!(s.is_stale(now, Duration::from_secs(30)));
        store.record_success(&record("2024-06-15T00:00:30Z"), None);
        let s = store.station(id(1)).unwrap();
        assert!(!s.is_stale(now, Duration::from_secs(30)));
        assert!(s.is_stale(now, Duration::from_secs(29)));
    }
}
