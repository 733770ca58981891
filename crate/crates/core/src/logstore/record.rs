use std::fmt::Write as _;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::protocol::{ProtocolError, Reading, Seq, StationId, Tenths};

pub const CSV_HEADER: &str = "rx_time,station_id,seq,temp_c,rh_pct,irr_wm2,wind_ms,wind_deg";

/// A reading stamped with the collector's receive time, whole seconds UTC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "RecordJson", try_from = "RecordJson")]
pub struct LogRecord {
    pub rx_time: DateTime<Utc>,
    pub reading: Reading,
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("expected 8 fields, found {0}")]
    FieldCount(usize),
    #[error("bad rx_time {0:?}")]
    Time(String),
    #[error("bad {field}: {value:?}")]
    Field { field: &'static str, value: String },
    #[error(transparent)]
    Range(#[from] ProtocolError),
}

pub fn format_rx_time(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

impl LogRecord {
    pub fn new(rx_time: DateTime<Utc>, reading: Reading) -> Self {
        LogRecord { rx_time, reading }
    }

    /// One CSV line including the trailing newline.
    pub fn to_csv_line(&self) -> String {
        let r = &self.reading;
        let mut line = String::with_capacity(64);
        writeln!(
            line,
            "{},{},{},{},{},{},{},{}",
            format_rx_time(self.rx_time),
            r.station_id,
            r.seq,
            r.temperature,
            r.humidity,
            r.irradiance,
            r.wind_speed,
            r.wind_dir
        )
        .expect("writing to a String");
        line
    }

    /// Parses one CSV line without its newline.
    pub fn parse_csv_line(line: &str) -> Result<Self, RecordError> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(RecordError::FieldCount(fields.len()));
        }
        let rx_time = DateTime::parse_from_rfc3339(fields[0])
            .map_err(|_| RecordError::Time(fields[0].to_owned()))?
            .with_timezone(&Utc);
        let int = |field: &'static str, value: &str| -> Result<u32, RecordError> {
            if value.is_empty() || !value.bytes().all(|b| b.is_ascii_digit()) {
                return Err(RecordError::Field { field, value: value.to_owned() });
            }
            value.parse().map_err(|_| RecordError::Field { field, value: value.to_owned() })
        };
        let small = |field: &'static str, value: &str| -> Result<u16, RecordError> {
            u16::try_from(int(field, value)?)
                .map_err(|_| RecordError::Field { field, value: value.to_owned() })
        };
        let reading = Reading {
            station_id: StationId::new(int("station_id", fields[1])?)?,
            seq: Seq::new(int("seq", fields[2])?)?,
            temperature: fields[3].parse::<Tenths>()?,
            humidity: fields[4].parse::<Tenths>()?,
            irradiance: small("irr_wm2", fields[5])?,
            wind_speed: fields[6].parse::<Tenths>()?,
            wind_dir: small("wind_deg", fields[7])?,
        };
        reading.validate()?;
        Ok(LogRecord { rx_time, reading })
    }
}

/// JSON shape shared by the history and current-state endpoints.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct RecordJson {
    station_id: StationId,
    seq: Seq,
    rx_time: String,
    temp_c: Tenths,
    rh_pct: Tenths,
    irr_wm2: u16,
    wind_ms: Tenths,
    wind_deg: u16,
}

impl From<LogRecord> for RecordJson {
    fn from(rec: LogRecord) -> Self {
        let r = rec.reading;
        RecordJson {
            station_id: r.station_id,
            seq: r.seq,
            rx_time: format_rx_time(rec.rx_time),
            temp_c: r.temperature,
            rh_pct: r.humidity,
            irr_wm2: r.irradiance,
            wind_ms: r.wind_speed,
            wind_deg: r.wind_dir,
        }
    }
}

impl TryFrom<RecordJson> for LogRecord {
    type Error = String;

    fn try_from(j: RecordJson) -> Result<Self, Self::Error> {
        let rx_time = DateTime::parse_from_rfc3339(&j.rx_time)
            .map_err(|e| format!("rx_time: {e}"))?
            .with_timezone(&Utc);
        let reading = Reading {
            station_id: j.station_id,
            seq: j.seq,
            temperature: j.temp_c,
            humidity: j.rh_pct,
            irradiance: j.irr_wm2,
            wind_speed: j.wind_ms,
            wind_dir: j.wind_deg,
        };
        reading.validate().map_err(|e| e.to_string())?;
        Ok(LogRecord { rx_time, reading })
    }
}
