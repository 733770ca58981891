use std::fmt::Write as _;
use std::time::Duration;

use chrono::{DateTime, Utc};

use crate::logstore::{aggregate, format_rx_time, AggregateStats, LogRecord, Quantity};
use crate::protocol::StationId;

/// Width of the summary window shown on the page.
pub const SUMMARY_WINDOW: chrono::Duration = chrono::Duration::hours(24);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StationView {
    pub station_id: StationId,
    pub latest: Option<LogRecord>,
    pub stale: bool,
    pub summary: AggregateStats,
}

/// Everything the station page shows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PageModel {
    /// `None` for the placeholder page served before the first regeneration.
    pub generated_at: Option<DateTime<Utc>>,
    pub refresh_s: u64,
    pub stations: Vec<StationView>,
}

impl PageModel {
    pub fn bootstrap(stations: &[StationId], refresh: Duration) -> Self {
        let epoch = DateTime::<Utc>::UNIX_EPOCH;
        PageModel {
            generated_at: None,
            refresh_s: refresh.as_secs(),
            stations: stations
                .iter()
                .map(|&station_id| StationView {
                    station_id,
                    latest: None,
                    stale: true,
                    summary: aggregate(&[], (epoch, epoch)),
                })
                .collect(),
        }
    }

    /// `latest` holds each station's newest record; `window_records` the
    /// log contents for `[generated_at - 24h, generated_at)`.
    pub fn build(
        generated_at: DateTime<Utc>,
        latest: &[(StationId, Option<LogRecord>)],
        window_records: &[LogRecord],
        stale_after: Duration,
        refresh: Duration,
    ) -> Self {
        let window = (generated_at - SUMMARY_WINDOW, generated_at);
        let stations = latest
            .iter()
            .map(|&(station_id, latest)| {
                let stale = latest.is_none_or(|rec| {
                    (generated_at - rec.rx_time).to_std().is_ok_and(|age| age > stale_after)
                });
                let summary =
                    aggregate(window_records.iter().filter(|r| r.reading.station_id == station_id), window);
                StationView { station_id, latest, stale, summary }
            })
            .collect();
        PageModel { generated_at: Some(generated_at), refresh_s: refresh.as_secs(), stations }
    }
}

const STYLE: &str = "body{font-family:sans-serif;margin:2em;color:#222}\
table{border-collapse:collapse;margin-bottom:1.5em}\
th,td{border:1px solid #bbb;padding:.3em .7em;text-align:right}\
th{background:#eef}\
td.nodata{text-align:center;color:#888}\
tr.stale td{color:#a33}";

fn value(record: &LogRecord, q: Quantity) -> String {
    q.format_tenths(q.tenths_of(&record.reading))
}

/// Renders the station page. Equal models give byte-identical output.
pub fn render_page(model: &PageModel) -> String {
    let mut h = String::with_capacity(4096);
    // Writing to a String cannot fail.
    let _ = write_page(&mut h, model);
    h
}

fn write_page(h: &mut String, model: &PageModel) -> std::fmt::Result {
    h.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    writeln!(h, "<meta http-equiv=\"refresh\" content=\"{}\">", model.refresh_s)?;
    h.push_str("<title>Weather station</title>\n");
    writeln!(h, "<style>{STYLE}</style>")?;
    h.push_str("</head>\n<body>\n<h1>Weather station</h1>\n");
    match model.generated_at {
        Some(t) => {
            let t = format_rx_time(t);
            writeln!(h, "<p class=\"generated\">Updated <time datetime=\"{t}\">{t}</time></p>")?;
        }
        None => h.push_str("<p class=\"generated\">Waiting for the first update.</p>\n"),
    }

    h.push_str("<h2>Current conditions</h2>\n<table class=\"current\">\n<thead><tr><th>Station</th><th>Received</th><th>Seq</th>");
    for q in Quantity::ALL {
        write!(h, "<th>{} ({})</th>", q.label(), q.unit())?;
    }
    h.push_str("<th>Status</th></tr></thead>\n<tbody>\n");
    for s in &model.stations {
        match &s.latest {
            Some(rec) => {
                let class = if s.stale { " class=\"stale\"" } else { "" };
                let t = format_rx_time(rec.rx_time);
                write!(
                    h,
                    "<tr{class}><td>{}</td><td><time datetime=\"{t}\">{t}</time></td><td>{}</td>",
                    s.station_id, rec.reading.seq
                )?;
                for q in Quantity::ALL {
                    write!(h, "<td>{}</td>", value(rec, q))?;
                }
                writeln!(h, "<td>{}</td></tr>", if s.stale { "stale" } else { "ok" })?;
            }
            None => writeln!(
                h,
                "<tr><td>{}</td><td class=\"nodata\" colspan=\"{}\">no data</td></tr>",
                s.station_id,
                Quantity::ALL.len() + 3
            )?,
        }
    }
    h.push_str("</tbody>\n</table>\n");

    h.push_str("<h2>Last 24 hours</h2>\n");
    for s in &model.stations {
        if s.summary.count == 0 {
            writeln!(h, "<p class=\"nodata\">Station {}: no data</p>", s.station_id)?;
            continue;
        }
        writeln!(
            h,
            "<table class=\"summary\">\n<caption>Station {} ({} readings)</caption>",
            s.station_id, s.summary.count
        )?;
        h.push_str(
            "<thead><tr><th>Quantity</th><th>Min</th><th>Max</th><th>Mean</th></tr></thead>\n<tbody>\n",
        );
        for q in Quantity::ALL {
            if let Some(stat) = s.summary.get(q) {
                writeln!(
                    h,
                    "<tr><th>{} ({})</th><td>{}</td><td>{}</td><td>{}</td></tr>",
                    q.label(),
                    q.unit(),
                    stat.min_text(),
                    stat.max_text(),
                    stat.mean_text()
                )?;
            }
        }
        h.push_str("</tbody>\n</table>\n");
    }
    h.push_str("</body>\n</html>\n");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Reading, Seq, Tenths};

    fn id(n: u32) -> StationId {
        StationId::new(n).unwrap()
    }

    fn rec(at: &str, station: u32, temp: i32) -> LogRecord {
        LogRecord::new(
            at.parse().unwrap(),
            Reading {
                station_id: id(station),
                seq: Seq::new(5).unwrap(),
                temperature: Tenths::from_tenths(temp),
                humidity: Tenths::from_tenths(655),
                irradiance: 720,
                wind_speed: Tenths::from_tenths(33),
                wind_dir: 270,
            },
        )
    }

    fn assert_valid_html(html: &str) {
        let doc = scraper::Html::parse_document(html);
        assert!(doc.errors.is_empty(), "parse errors: {:?}", doc.errors);
        assert!(html.starts_with("<!DOCTYPE html>"));
    }

    #[test]
    fn bootstrap_page_says_no_data() {
        let html = render_page(&PageModel::bootstrap(&[id(1), id(2)], Duration::from_secs(300)));
        assert_valid_html(&html);
        assert_eq!(html.matches(">no data<").count(), 2);
        assert!(html.contains("<meta http-equiv=\"refresh\" content=\"300\">"));
    }

    #[test]
    fn populated_page() {
        let at: DateTime<Utc> = "2024-06-15T12:05:00Z".parse().unwrap();
        let records = [rec("2024-06-15T12:04:44Z", 1, 251), rec("2024-06-15T12:04:54Z", 1, 249)];
        let model = PageModel::build(
            at,
            &[(id(1), Some(records[1])), (id(2), None)],
            &records,
            Duration::from_secs(30),
            Duration::from_secs(300),
        );
        assert!(!model.stations[0].stale);
        assert!(model.stations[1].stale);
        let html = render_page(&model);
        assert_valid_html(&html);
        assert!(html.contains("<td>24.9</td><td>65.5</td><td>720</td><td>3.3</td><td>270</td><td>ok</td>"));
        assert!(html.contains("<caption>Station 1 (2 readings)</caption>"));
        assert!(html.contains("<td>24.9</td><td>25.1</td><td>25.0</td>"));
        assert!(html.contains("Station 2: no data"));
        assert_eq!(html, render_page(&model.clone()));
    }

    #[test]
    fn stale_flag_follows_threshold() {
        let at: DateTime<Utc> = "2024-06-15T12:05:00Z".parse().unwrap();
        let r = rec("2024-06-15T12:04:30Z", 1, 250);
        let fresh = PageModel::build(
            at,
            &[(id(1), Some(r))],
            &[r],
            Duration::from_secs(30),
            Duration::from_secs(300),
        );
        let stale = PageModel::build(
            at,
            &[(id(1), Some(r))],
            &[r],
            Duration::from_secs(29),
            Duration::from_secs(300),
        );
        assert!(!fresh.stations[0].stale);
        assert!(stale.stations[0].stale);
        assert!(render_page(&stale).contains("<tr class=\"stale\">"));
    }
}
