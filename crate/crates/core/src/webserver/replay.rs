use std::io;
use std::path::Path;
use std::time::Duration;

use chrono::{DateTime, Utc};

use super::page::{render_page, PageModel, SUMMARY_WINDOW};
use super::regen::next_boundary;
use crate::collector::StateStore;
use crate::logstore::{read_all, LogRecord};
use crate::protocol::StationId;

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayOptions {
    pub poll_interval: Duration,
    pub page_interval: Duration,
    /// Stations to show; defaults to every station found in the log.
    pub stations: Option<Vec<StationId>>,
    /// Last regeneration time to include; defaults to the first
    /// regeneration after the final record.
    pub until: Option<DateTime<Utc>>,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        ReplayOptions {
            poll_interval: Duration::from_secs(10),
            page_interval: Duration::from_secs(300),
            stations: None,
            until: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayedPage {
    pub generated_at: DateTime<Utc>,
    pub html: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    pub pages: Vec<ReplayedPage>,
    pub malformed: usize,
    bootstrap: String,
}

impl Replay {
    /// The last page, or the bootstrap page when nothing was regenerated.
    pub fn final_html(&self) -> &str {
        self.pages.last().map_or(&self.bootstrap, |p| &p.html)
    }
}

/// Rebuilds the sequence of pages a live collector would have served over
/// the logged data, regenerating at the same clock-aligned instants.
pub fn replay(log_dir: &Path, opts: &ReplayOptions) -> io::Result<Replay> {
    let read = read_all(log_dir, None)?;
    let mut records = read.records;
    // Stable: per-station file order is already time order.
    records.sort_by_key(|r| r.rx_time);

    let stations = opts.stations.clone().unwrap_or_else(|| {
        let mut ids: Vec<_> = records.iter().map(|r| r.reading.station_id).collect();
        ids.sort();
        ids.dedup();
        ids
    });
    let bootstrap = render_page(&PageModel::bootstrap(&stations, opts.page_interval));
    let mut out = Replay { pages: Vec::new(), malformed: read.malformed, bootstrap };
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return Ok(out);
    };
    let until = opts.until.unwrap_or_else(|| next_boundary(last.rx_time, opts.page_interval));

    let state = StateStore::new(stations.iter().copied());
    let mut applied = 0;
    let mut due = next_boundary(first.rx_time, opts.page_interval);
    while due <= until {
        let end = records.partition_point(|r| r.rx_time < due);
        for rec in &records[applied..end] {
            state.apply_logged(rec);
        }
        applied = end;
        let start = records.partition_point(|r| r.rx_time < due - SUMMARY_WINDOW);
        let window: &[LogRecord] = &records[start..end];
        let latest: Vec<_> =
            stations.iter().map(|&id| (id, state.station(id).and_then(|s| s.last_record()))).collect();
        let model = PageModel::build(due, &latest, window, opts.poll_interval * 3, opts.page_interval);
        out.pages.push(ReplayedPage { generated_at: due, html: render_page(&model) });
        due = next_boundary(due, opts.page_interval);
    }
    Ok(out)
}
