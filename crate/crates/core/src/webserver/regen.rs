use std::io;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, Utc};
use tokio::sync::watch;
use tokio_util::sync::CancellationToken;

use super::page::{render_page, PageModel, SUMMARY_WINDOW};
use crate::clock::SimClock;
use crate::collector::StateStore;
use crate::logstore::read_range;
use crate::protocol::StationId;

/// One published version of the station page.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServedPage {
    pub html: Arc<str>,
    pub generated_at: Option<DateTime<Utc>>,
    /// 0 for the bootstrap page, then 1, 2, ... per regeneration.
    pub generation: u64,
}

#[derive(Debug)]
struct SlotInner {
    tx: watch::Sender<Arc<ServedPage>>,
    errors: AtomicU64,
}

/// The page being served. Readers always get a whole page; the
/// regeneration loop swaps in a new one atomically.
#[derive(Clone, Debug)]
pub struct PageSlot {
    inner: Arc<SlotInner>,
}

impl PageSlot {
    pub fn new(bootstrap_html: String) -> Self {
        let page = ServedPage { html: bootstrap_html.into(), generated_at: None, generation: 0 };
        let (tx, _) = watch::channel(Arc::new(page));
        PageSlot { inner: Arc::new(SlotInner { tx, errors: AtomicU64::new(0) }) }
    }

    pub fn current(&self) -> Arc<ServedPage> {
        Arc::clone(&self.inner.tx.borrow())
    }

    pub fn subscribe(&self) -> watch::Receiver<Arc<ServedPage>> {
        self.inner.tx.subscribe()
    }

    pub fn publish(&self, html: String, generated_at: DateTime<Utc>) {
        self.inner.tx.send_modify(|page| {
            *page = Arc::new(ServedPage {
                html: html.into(),
                generated_at: Some(generated_at),
                generation: page.generation + 1,
            });
        });
    }

    /// Regenerations that failed and left the previous page in place.
    pub fn errors(&self) -> u64 {
        self.inner.errors.load(Ordering::Relaxed)
    }

    fn count_error(&self) {
        self.inner.errors.fetch_add(1, Ordering::Relaxed);
    }
}

/// Smallest multiple of `interval` (counted from the Unix epoch) strictly
/// after `t`.
pub fn next_boundary(t: DateTime<Utc>, interval: Duration) -> DateTime<Utc> {
    let step = interval.as_nanos() as i128;
    let nanos = i128::from(t.timestamp()) * 1_000_000_000 + i128::from(t.timestamp_subsec_nanos());
    let next = (nanos.div_euclid(step) + 1) * step;
    let secs = next.div_euclid(1_000_000_000) as i64;
    let sub = next.rem_euclid(1_000_000_000) as u32;
    DateTime::from_timestamp(secs, sub).expect("boundary in range")
}

/// Where a live page gets its data.
#[derive(Clone, Debug)]
pub struct PageSource {
    pub stations: Vec<StationId>,
    pub state: Arc<StateStore>,
    pub log_dir: PathBuf,
    pub stale_after: Duration,
    pub refresh: Duration,
}

impl PageSource {
    pub fn bootstrap_html(&self) -> String {
        render_page(&PageModel::bootstrap(&self.stations, self.refresh))
    }

    /// Current state plus the last 24 h of log, as of `at`.
    pub fn model_at(&self, at: DateTime<Utc>) -> io::Result<PageModel> {
        let window = read_range(&self.log_dir, at - SUMMARY_WINDOW, at, None)?;
        let latest: Vec<_> = self
            .stations
            .iter()
            .map(|&id| (id, self.state.station(id).and_then(|s| s.last_record())))
            .collect();
        Ok(PageModel::build(at, &latest, &window.records, self.stale_after, self.refresh))
    }
}

/// Rebuilds the page at every multiple of `interval` on the sim clock until
/// `shutdown`. A failed rebuild keeps the old page and bumps the error count.
pub async fn regenerate_loop(
    source: PageSource,
    slot: PageSlot,
    clock: SimClock,
    interval: Duration,
    shutdown: CancellationToken,
) {
    let mut due = next_boundary(clock.now(), interval);
    loop {
        tokio::select! {
            biased;
            _ = shutdown.cancelled() => return,
            _ = clock.sleep_until(due) => {}
        }
        match source.model_at(due) {
            Ok(model) => slot.publish(render_page(&model), due),
            Err(e) => {
                tracing::warn!(error = %e, "page regeneration failed; keeping previous page");
                slot.count_error();
            }
        }
        due = next_boundary(due.max(clock.now()), interval);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> DateTime<Utc> {
        s.parse().unwrap()
    }

    #[test]
    fn boundaries_are_strictly_after() {
        let five = Duration::from_secs(300);
        assert_eq!(next_boundary(t("2024-06-15T00:00:00Z"), five), t("2024-06-15T00:05:00Z"));
        assert_eq!(next_boundary(t("2024-06-15T00:04:59.999Z"), five), t("2024-06-15T00:05:00Z"));
        assert_eq!(next_boundary(t("2024-06-15T00:05:00Z"), five), t("2024-06-15T00:10:00Z"));
    }

    #[test]
    fn publish_bumps_generation() {
        let slot = PageSlot::new("boot".into());
        assert_eq!(slot.current().generation, 0);
        slot.publish("one".into(), t("2024-06-15T00:05:00Z"));
        let page = slot.current();
        assert_eq!((page.generation, &*page.html), (1, "one"));
    }

    #[tokio::test(start_paused = true)]
    async fn three_regenerations_in_900_seconds() {
        let dir = tempfile::tempdir().unwrap();
        let clock = SimClock::new(t("2024-06-15T00:00:00Z"), 1);
        let source = PageSource {
            stations: vec![StationId::new(1).unwrap()],
            state: Arc::new(StateStore::new([StationId::new(1).unwrap()])),
            log_dir: dir.path().to_path_buf(),
            stale_after: Duration::from_secs(30),
            refresh: Duration::from_secs(300),
        };
        let slot = PageSlot::new(source.bootstrap_html());
        let shutdown = CancellationToken::new();
        let task = tokio::spawn(regenerate_loop(
            source,
            slot.clone(),
            clock.clone(),
            Duration::from_secs(300),
            shutdown.clone(),
        ));
        clock.sleep(Duration::from_secs(900) + Duration::from_millis(1)).await;
        shutdown.cancel();
        task.await.unwrap();
        let page = slot.current();
        assert_eq!(page.generation, 3);
        assert_eq!(page.generated_at, Some(t("2024-06-15T00:15:00Z")));
        assert_eq!(slot.errors(), 0);
    }
}
