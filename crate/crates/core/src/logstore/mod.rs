#![doc = include_str!("../../../../docs/log-format.md")]

mod aggregate;
mod record;

use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};

pub use aggregate::{aggregate, AggregateStats, Aggregator, Quantity, Stat};
pub use record::{format_rx_time, LogRecord, RecordError, CSV_HEADER};

use crate::protocol::StationId;

/// `wx-YYYY-MM-DD.csv`
pub fn day_file_name(day: NaiveDate) -> String {
    format!("wx-{}.csv", day.format("%Y-%m-%d"))
}

fn parse_day_file_name(name: &str) -> Option<NaiveDate> {
    let date = name.strip_prefix("wx-")?.strip_suffix(".csv")?;
    NaiveDate::parse_from_str(date, "%Y-%m-%d").ok()
}

/// Append-only writer for the daily CSV files in one directory.
#[derive(Debug)]
pub struct LogStore {
    dir: PathBuf,
    current: Option<(NaiveDate, File)>,
}

impl LogStore {
    /// Creates the directory if needed and checks it is writable.
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let probe = dir.join(".wxline-write-probe");
        File::create(&probe)?;
        fs::remove_file(&probe)?;
        Ok(LogStore { dir, current: None })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn file_for(&mut self, day: NaiveDate) -> io::Result<&mut File> {
        if self.current.as_ref().map(|(d, _)| *d) != Some(day) {
            let path = self.dir.join(day_file_name(day));
            let mut file = OpenOptions::new().read(true).append(true).create(true).open(path)?;
            let len = file.metadata()?.len();
            if len > 0 {
                // Seal a torn tail left by an earlier crash so the next
                // record starts on its own line.
                let mut last = [0u8; 1];
                file.seek(SeekFrom::Start(len - 1))?;
                file.read_exact(&mut last)?;
                if last[0] != b'\n' {
                    file.write_all(b"\n")?;
                }
            }
            self.current = Some((day, file));
        }
        Ok(&mut self.current.as_mut().expect("just set").1)
    }

    /// Appends one record as a single write, preceded by the header when the
    /// day file is new, then flushes it to disk.
    pub fn append(&mut self, record: &LogRecord) -> io::Result<()> {
        let file = self.file_for(record.rx_time.date_naive())?;
        let mut buf = String::new();
        if file.metadata()?.len() == 0 {
            buf.push_str(CSV_HEADER);
            buf.push('\n');
        }
        buf.push_str(&record.to_csv_line());
        let result = file.write_all(buf.as_bytes()).and_then(|()| file.sync_data());
        if result.is_err() {
            // Reopen on the next attempt.
            self.current = None;
        }
        result
    }
}

/// Records from a range read plus the number of lines that failed to parse.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RangeRead {
    pub records: Vec<LogRecord>,
    pub malformed: usize,
}

fn day_files(dir: &Path) -> io::Result<Vec<(NaiveDate, PathBuf)>> {
    let entries = match fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry?;
        if let Some(day) = entry.file_name().to_str().and_then(parse_day_file_name) {
            files.push((day, entry.path()));
        }
    }
    files.sort();
    Ok(files)
}

/// Parses one day file. A final line without its newline is still being
/// written and is left out without counting as malformed.
fn read_day_file(
    path: &Path,
    mut keep: impl FnMut(&LogRecord) -> bool,
    out: &mut RangeRead,
) -> io::Result<()> {
    let text = match fs::read(path) {
        Ok(bytes) => bytes,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(e),
    };
    let complete = match text.iter().rposition(|&b| b == b'\n') {
        Some(i) => &text[..=i],
        None => return Ok(()),
    };
    for (i, line) in complete.split(|&b| b == b'\n').enumerate() {
        if line.is_empty() {
            continue;
        }
        let Ok(line) = std::str::from_utf8(line) else {
            out.malformed += 1;
            continue;
        };
        if i == 0 && line == CSV_HEADER {
            continue;
        }
        match LogRecord::parse_csv_line(line) {
            Ok(rec) if keep(&rec) => out.records.push(rec),
            Ok(_) => {}
            Err(e) => {
                tracing::warn!(file = %path.display(), line = i + 1, error = %e, "skipping malformed log line");
                out.malformed += 1;
            }
        }
    }
    Ok(())
}

/// Every record with `from <= rx_time < to` (and matching `station`, when
/// given), in file order. A missing directory reads as empty.
pub fn read_range(
    dir: &Path,
    from: DateTime<Utc>,
    to: DateTime<Utc>,
    station: Option<StationId>,
) -> io::Result<RangeRead> {
    if from > to {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "range start after range end"));
    }
    let mut out = RangeRead::default();
    let (first_day, last_day) = (from.date_naive(), to.date_naive());
    for (day, path) in day_files(dir)? {
        if day < first_day || day > last_day {
            continue;
        }
        let keep = |r: &LogRecord| {
            r.rx_time >= from && r.rx_time < to && station.is_none_or(|s| r.reading.station_id == s)
        };
        read_day_file(&path, keep, &mut out)?;
    }
    Ok(out)
}

/// Every record in the directory.
pub fn read_all(dir: &Path, station: Option<StationId>) -> io::Result<RangeRead> {
    let mut out = RangeRead::default();
    for (_, path) in day_files(dir)? {
        read_day_file(&path, |r| station.is_none_or(|s| r.reading.station_id == s), &mut out)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Reading, Seq, Tenths};

    fn rec(at: &str, station: u32, seq: u32, rh_tenths: i32) -> LogRecord {
        LogRecord::new(
            at.parse().unwrap(),
            Reading {
                station_id: StationId::new(station).unwrap(),
                seq: Seq::new(seq).unwrap(),
                temperature: Tenths::from_tenths(255),
                humidity: Tenths::from_tenths(rh_tenths),
                irradiance: 300,
                wind_speed: Tenths::from_tenths(41),
                wind_dir: 120,
            },
        )
    }

    fn t(s: &str) -> DateTime<Utc> {
        s.parse().unwrap()
    }

    #[test]
    fn first_append_writes_header() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = LogStore::open(dir.path()).unwrap();
        store.append(&rec("2024-06-15T10:00:04Z", 1, 1, 1000)).unwrap();
        let text = fs::read_to_string(dir.path().join("wx-2024-06-15.csv")).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\n2024-06-15T10:00:04Z,1,1,25.5,100.0,300,4.1,120\n"));
    }

    #[test]
    fn appends_in_order_and_rotate_by_day() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = LogStore::open(dir.path()).unwrap();
        let recs = [
            rec("2024-06-15T23:59:54Z", 1, 1, 500),
            rec("2024-06-16T00:00:04Z", 1, 2, 510),
            rec("2024-06-16T00:00:14Z", 1, 3, 520),
        ];
        for r in &recs {
            store.append(r).unwrap();
        }
        assert!(dir.path().join("wx-2024-06-15.csv").exists());
        assert!(dir.path().join("wx-2024-06-16.csv").exists());
        let all = read_range(dir.path(), t("2024-06-15T00:00:00Z"), t("2024-06-17T00:00:00Z"), None).unwrap();
        assert_eq!(all.records, recs);
        assert_eq!(all.malformed, 0);
        let window =
            read_range(dir.path(), t("2024-06-16T00:00:04Z"), t("2024-06-16T00:00:14Z"), None).unwrap();
        assert_eq!(window.records, &recs[1..2]);
    }

    #[test]
    fn empty_window_and_missing_dir() {
        let dir = tempfile::tempdir().unwrap();
        let t0 = t("2024-06-15T00:00:00Z");
        assert!(read_range(&dir.path().join("nope"), t0, t0, None).unwrap().records.is_empty());
        let mut store = LogStore::open(dir.path()).unwrap();
        store.append(&rec("2024-06-15T10:00:04Z", 1, 1, 500)).unwrap();
        assert!(read_range(dir.path(), t0, t0, None).unwrap().records.is_empty());
        assert!(read_range(dir.path(), t("2024-06-16T00:00:00Z"), t0, None).is_err());
    }

    #[test]
    fn station_filter() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = LogStore::open(dir.path()).unwrap();
        store.append(&rec("2024-06-15T10:00:04Z", 1, 1, 500)).unwrap();
        store.append(&rec("2024-06-15T10:00:05Z", 2, 1, 500)).unwrap();
        let only2 = read_all(dir.path(), Some(StationId::new(2).unwrap())).unwrap();
        assert_eq!(only2.records.len(), 1);
        assert_eq!(only2.records[0].reading.station_id.get(), 2);
    }

    #[test]
    fn one_corrupted_line_among_ten() {
        // Hand-built fixture: ten data lines, the fourth damaged.
        let dir = tempfile::tempdir().unwrap();
        let mut text = format!("{CSV_HEADER}\n");
        for i in 0..10 {
            if i == 3 {
                text.push_str("2024-06-15T10:00:34Z,1,3,25.5,1#0.0,300,4.1,120\n");
            } else {
                text.push_str(&format!("2024-06-15T10:{i:02}:04Z,1,{i},25.5,50.0,300,4.1,120\n"));
            }
        }
        fs::write(dir.path().join("wx-2024-06-15.csv"), text).unwrap();
        let got = read_all(dir.path(), None).unwrap();
        assert_eq!(got.records.len(), 9);
        assert_eq!(got.malformed, 1);
    }

    #[test]
    fn unterminated_tail_is_invisible_then_sealed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wx-2024-06-15.csv");
        fs::write(
            &path,
            format!(
                "{CSV_HEADER}\n2024-06-15T10:00:04Z,1,1,25.5,50.0,300,4.1,120\n2024-06-15T10:00:14Z,1,2,2"
            ),
        )
        .unwrap();
        let got = read_all(dir.path(), None).unwrap();
        assert_eq!((got.records.len(), got.malformed), (1, 0));

        let mut store = LogStore::open(dir.path()).unwrap();
        store.append(&rec("2024-06-15T10:00:24Z", 1, 3, 500)).unwrap();
        let got = read_all(dir.path(), None).unwrap();
        assert_eq!((got.records.len(), got.malformed), (2, 1));
    }

    #[test]
    fn unwritable_directory_fails_open() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain-file");
        fs::write(&file, "x").unwrap();
        assert!(LogStore::open(file.join("sub")).is_err());
    }
}
