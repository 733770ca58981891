use std::fmt::Write;
use std::path::Path;

use chrono::{DateTime, Utc};
use wxline::logstore::{aggregate, format_rx_time, read_range, AggregateStats, Quantity};

use crate::args::StatsArgs;
use crate::{CliError, Settings};

/// Renders the summary of the selected window; "no records" when empty.
pub fn run(settings: &Settings, args: &StatsArgs) -> Result<String, CliError> {
    let from = args.from.unwrap_or(DateTime::<Utc>::MIN_UTC);
    let to = args.to.unwrap_or(DateTime::<Utc>::MAX_UTC);
    if from > to {
        return Err(CliError::Usage("--from is after --to".into()));
    }
    let dir = Path::new(settings.raw("collector.log_dir"));
    let read =
        read_range(dir, from, to, args.station).map_err(|e| CliError::runtime("cannot read log", e))?;
    if read.malformed > 0 {
        eprintln!("skipped {} malformed line(s)", read.malformed);
    }
    let (Some(first), Some(last)) = (read.records.first(), read.records.last()) else {
        return Ok("no records\n".into());
    };
    let window = (args.from.unwrap_or(first.rx_time), args.to.unwrap_or(last.rx_time));
    let stats = aggregate(&read.records, window);
    Ok(if args.csv { csv(&stats) } else { table(&stats) })
}

fn csv(stats: &AggregateStats) -> String {
    let mut out = String::from("quantity,unit,count,min,max,mean\n");
    for q in Quantity::ALL {
        let s = stats.get(q).expect("non-empty aggregate");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            q.column(),
            q.unit(),
            stats.count,
            s.min_text(),
            s.max_text(),
            s.mean_text()
        );
    }
    out
}

fn table(stats: &AggregateStats) -> String {
    let (from, to) = stats.window;
    let mut out = format!("{} records, {} .. {}\n", stats.count, format_rx_time(from), format_rx_time(to));
    let _ = writeln!(out, "{:<18} {:>6} {:>8} {:>8} {:>8}", "quantity", "unit", "min", "max", "mean");
    for q in Quantity::ALL {
        let s = stats.get(q).expect("non-empty aggregate");
        let _ = writeln!(
            out,
            "{:<18} {:>6} {:>8} {:>8} {:>8}",
            q.label(),
            q.unit(),
            s.min_text(),
            s.max_text(),
            s.mean_text()
        );
    }
    out
}
