use std::path::Path;

use wxline::webserver::{replay, ReplayOptions};

use crate::args::ReplayArgs;
use crate::config::Source;
use crate::{CliError, Settings};

/// Replays the log, optionally pacing and saving each page, and prints the
/// final page.
pub async fn run(settings: &Settings, args: &ReplayArgs) -> Result<(), CliError> {
    let config = settings.collector_config()?;
    let stations = (settings.source("collector.stations") != Source::Default).then(|| config.station_ids());
    let opts = ReplayOptions {
        poll_interval: config.poll_interval,
        page_interval: config.page_interval,
        stations,
        until: args.until,
    };
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)
            .map_err(|e| CliError::runtime(&format!("cannot create {}", out.display()), e))?;
    }
    let result =
        replay(Path::new(&config.log_dir), &opts).map_err(|e| CliError::runtime("cannot read log", e))?;
    if result.malformed > 0 {
        eprintln!("skipped {} malformed line(s)", result.malformed);
    }
    let pause = args.speed.map(|speed| config.page_interval.div_f64(speed));
    for (i, page) in result.pages.iter().enumerate() {
        if let (Some(pause), true) = (pause, i > 0) {
            tokio::time::sleep(pause).await;
        }
        if let Some(out) = &args.out {
            let name = format!("page-{}.html", page.generated_at.format("%Y%m%dT%H%M%SZ"));
            std::fs::write(out.join(&name), &page.html)
                .map_err(|e| CliError::runtime(&format!("cannot write {name}"), e))?;
        }
        eprintln!("page {}", page.generated_at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    }
    print!("{}", result.final_html());
    Ok(())
}
