use std::path::PathBuf;

use chrono::{DateTime, NaiveDate, Utc};
use clap::{Args, Parser, Subcommand};

use crate::config::{parse_assignment, CONFIG_ENV};

#[derive(Debug, Parser)]
#[command(name = "wxline", version, about = "Simulated serial weather station with a web front end")]
pub struct Cli {
    /// INI configuration file.
    #[arg(long, global = true, env = CONFIG_ENV, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Override one setting; repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE", value_parser = parse_assignment)]
    pub set: Vec<(String, String)>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulated sensor node answering polls over TCP.
    Node(NodeArgs),
    /// Poll stations, log readings and serve the station page.
    Collect(CollectArgs),
    /// Summarise logged readings.
    Stats(StatsArgs),
    /// Rebuild the station pages from a log directory.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct NodeArgs {
    #[arg(long)]
    pub station_id: Option<String>,
    #[arg(long)]
    pub baud: Option<String>,
    /// Sim seconds per wall second.
    #[arg(long)]
    pub time_scale: Option<String>,
    /// TCP address to accept the collector on.
    #[arg(long, value_name = "ADDR")]
    pub listen: Option<String>,
}

#[derive(Debug, Args)]
pub struct CollectArgs {
    /// Station to poll as ID@ADDR, or ID@in-process; repeatable.
    #[arg(long = "station", value_name = "ID@ADDR")]
    pub stations: Vec<String>,
    #[arg(long, value_name = "DIR")]
    pub log_dir: Option<String>,
    /// HTTP listen address.
    #[arg(long, value_name = "ADDR")]
    pub bind: Option<String>,
    #[arg(long)]
    pub time_scale: Option<String>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long, value_name = "DIR")]
    pub log_dir: Option<String>,
    /// Window start, RFC 3339 or YYYY-MM-DD (inclusive).
    #[arg(long, value_parser = parse_instant)]
    pub from: Option<DateTime<Utc>>,
    /// Window end, RFC 3339 or YYYY-MM-DD (exclusive).
    #[arg(long, value_parser = parse_instant)]
    pub to: Option<DateTime<Utc>>,
    #[arg(long, value_name = "ID")]
    pub station: Option<wxline::protocol::StationId>,
    /// Print CSV instead of an aligned table.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long, value_name = "DIR")]
    pub log_dir: Option<String>,
    /// Playback speed relative to sim time; as fast as possible when absent.
    #[arg(long, value_parser = parse_speed)]
    pub speed: Option<f64>,
    /// Last regeneration instant to replay.
    #[arg(long, value_parser = parse_instant)]
    pub until: Option<DateTime<Utc>>,
    /// Also write every page into this directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// RFC 3339, or a bare date meaning midnight UTC.
pub fn parse_instant(s: &str) -> Result<DateTime<Utc>, String> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc())
        .map_err(|_| format!("{s:?} is neither RFC 3339 nor YYYY-MM-DD"))
}

fn parse_speed(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("speed must be a positive number, got {s:?}")),
    }
}

impl Cli {
    /// Command-line settings in application order: `--set` first, then the
    /// dedicated flags.
    pub fn overrides(&self) -> Vec<(String, String)> {
        let mut out = self.set.clone();
        let mut push = |key: &str, value: &Option<String>| {
            if let Some(v) = value {
                out.push((key.to_string(), v.clone()));
            }
        };
        match &self.command {
            Command::Node(a) => {
                push("node.station_id", &a.station_id);
                push("node.baud", &a.baud);
                push("node.time_scale", &a.time_scale);
                push("node.listen", &a.listen);
            }
            Command::Collect(a) => {
                let stations = (!a.stations.is_empty()).then(|| a.stations.join(","));
                push("collector.stations", &stations);
                push("collector.log_dir", &a.log_dir);
                push("http.bind", &a.bind);
                push("collector.time_scale", &a.time_scale);
            }
            Command::Stats(a) => push("collector.log_dir", &a.log_dir),
            Command::Replay(a) => push("collector.log_dir", &a.log_dir),
        }
        out
    }
}
