//! Run configuration: built-in defaults, overlaid by an INI file, overlaid by
//! command-line settings.
//!
//! Every key lives in a section named after the part of the station it
//! configures:
//!
//! ```ini
//! [node]
//! station_id = 1
//! baud = 9600
//! listen = 127.0.0.1:7001
//!
//! [collector]
//! stations = 1@127.0.0.1:7001, 2@in-process
//! log_dir = logs
//!
//! [http]
//! bind = 127.0.0.1:8080
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use chrono::{DateTime, Utc};
use ini::Ini;
use wxline::collector::CollectorConfig;
use wxline::nodesim::NodeConfig;
use wxline::protocol::StationId;
use wxline::ConfigError;

/// Environment variable naming the config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "WXLINE_CONFIG";

/// Station address that runs a simulated node inside the collector process.
pub const IN_PROCESS: &str = "in-process";

/// Where a setting's value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Source {
    Default,
    File,
    CommandLine,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    values: BTreeMap<&'static str, (String, Source)>,
}

fn default_values() -> Vec<(&'static str, String)> {
    let node = NodeConfig::new(StationId::new(1).expect("1 is a station id"));
    let collector = CollectorConfig::new("logs");
    let (c, k, n) = (&node.climate, &node.corruption, &node.noise);
    vec![
        ("node.station_id", node.station_id.to_string()),
        ("node.baud", node.baud.to_string()),
        ("node.latency_min_s", node.latency_min_s.to_string()),
        ("node.latency_max_s", node.latency_max_s.to_string()),
        ("node.time_scale", node.time_scale.to_string()),
        ("node.listen", "127.0.0.1:7001".into()),
        ("node.start_time", String::new()),
        ("climate.t_mean", c.t_mean.to_string()),
        ("climate.t_amplitude", c.t_amplitude.to_string()),
        ("climate.t_peak_hour", c.t_peak_hour.to_string()),
        ("climate.s_max", c.s_max.to_string()),
        ("climate.sunrise_hour", c.sunrise_hour.to_string()),
        ("climate.sunset_hour", c.sunset_hour.to_string()),
        ("climate.rh_base", c.rh_base.to_string()),
        ("climate.rh_temp_slope", c.rh_temp_slope.to_string()),
        ("climate.wind_mean", c.wind_mean.to_string()),
        ("climate.wind_reversion", c.wind_reversion.to_string()),
        ("climate.wind_noise", c.wind_noise.to_string()),
        ("climate.seed", c.seed.to_string()),
        ("noise.temperature", n.temperature.to_string()),
        ("noise.humidity", n.humidity.to_string()),
        ("noise.irradiance", n.irradiance.to_string()),
        ("noise.wind_speed", n.wind_speed.to_string()),
        ("noise.wind_dir", n.wind_dir.to_string()),
        ("corruption.safe_baud", k.safe_baud.to_string()),
        ("corruption.max_baud", k.max_baud.to_string()),
        ("corruption.p_max", k.p_max.to_string()),
        ("collector.stations", "1@127.0.0.1:7001".into()),
        ("collector.poll_interval_s", collector.poll_interval.as_secs_f64().to_string()),
        ("collector.poll_timeout_s", collector.poll_timeout.as_secs_f64().to_string()),
        ("collector.log_dir", collector.log_dir.display().to_string()),
        ("collector.page_interval_s", collector.page_interval.as_secs_f64().to_string()),
        ("collector.time_scale", collector.time_scale.to_string()),
        ("collector.start_time", String::new()),
        ("http.bind", collector.http_bind.clone()),
    ]
}

/// Every recognised `section.key`.
pub fn keys() -> Vec<&'static str> {
    default_values().into_iter().map(|(k, _)| k).collect()
}

/// Splits `section.key=value`.
pub fn parse_assignment(s: &str) -> Result<(String, String), String> {
    let (key, value) = s.split_once('=').ok_or_else(|| format!("expected section.key=value, got {s:?}"))?;
    Ok((key.trim().to_string(), value.trim().to_string()))
}

fn invalid(key: &str, value: &str, why: impl fmt::Display) -> ConfigError {
    ConfigError::new(format!("{key} = {value:?}: {why}"))
}

impl Default for Settings {
    fn default() -> Self {
        let values = default_values().into_iter().map(|(k, v)| (k, (v, Source::Default))).collect();
        Settings { values }
    }
}

impl Settings {
    /// Defaults, then `file`, then `overrides` in order.
    pub fn resolve(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Settings, ConfigError> {
        let mut settings = Settings::default();
        if let Some(path) = file {
            settings.load_file(path)?;
        }
        for (key, value) in overrides {
            settings.set(key, value, Source::CommandLine)?;
        }
        Ok(settings)
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let ini = Ini::load_from_file(path)
            .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                let Some(section) = section else {
                    return Err(ConfigError::new(format!(
                        "{}: key {key:?} is outside any section",
                        path.display()
                    )));
                };
                self.set(&format!("{section}.{key}"), value, Source::File)
                    .map_err(|e| ConfigError::new(format!("{}: {}", path.display(), e.0)))?;
            }
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>, source: Source) -> Result<(), ConfigError> {
        let slot = self
            .values
            .iter_mut()
            .find(|(k, _)| **k == key)
            .map(|(_, v)| v)
            .ok_or_else(|| ConfigError::new(format!("unknown setting {key:?}")))?;
        *slot = (value.into(), source);
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        &self.entry(key).0
    }

    pub fn source(&self, key: &str) -> Source {
        self.entry(key).1
    }

    fn entry(&self, key: &str) -> &(String, Source) {
        self.values.get(key).unwrap_or_else(|| panic!("unknown setting {key:?}"))
    }

    pub fn get<T>(&self, key: &str) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let raw = self.raw(key);
        raw.parse().map_err(|e| invalid(key, raw, e))
    }

    fn seconds(&self, key: &str) -> Result<Duration, ConfigError> {
        let secs: f64 = self.get(key)?;
        Duration::try_from_secs_f64(secs).map_err(|e| invalid(key, self.raw(key), e))
    }

    /// The sim-clock origin for `section`, or `None` for "now".
    pub fn start_time(&self, section: &str) -> Result<Option<DateTime<Utc>>, ConfigError> {
        let key = format!("{section}.start_time");
        let raw = self.raw(&key);
        if raw.is_empty() {
            return Ok(None);
        }
        DateTime::parse_from_rfc3339(raw)
            .map(|t| Some(t.with_timezone(&Utc)))
            .map_err(|e| invalid(&key, raw, e))
    }

    pub fn node_listen(&self) -> &str {
        self.raw("node.listen")
    }

    /// The `[node]`, `[climate]`, `[noise]` and `[corruption]` sections,
    /// validated.
    pub fn node_config(&self) -> Result<NodeConfig, ConfigError> {
        let mut cfg = NodeConfig::new(self.get("node.station_id")?);
        cfg.baud = self.get("node.baud")?;
        cfg.latency_min_s = self.get("node.latency_min_s")?;
        cfg.latency_max_s = self.get("node.latency_max_s")?;
        cfg.time_scale = self.get("node.time_scale")?;
        let c = &mut cfg.climate;
        c.t_mean = self.get("climate.t_mean")?;
        c.t_amplitude = self.get("climate.t_amplitude")?;
        c.t_peak_hour = self.get("climate.t_peak_hour")?;
        c.s_max = self.get("climate.s_max")?;
        c.sunrise_hour = self.get("climate.sunrise_hour")?;
        c.sunset_hour = self.get("climate.sunset_hour")?;
        c.rh_base = self.get("climate.rh_base")?;
        c.rh_temp_slope = self.get("climate.rh_temp_slope")?;
        c.wind_mean = self.get("climate.wind_mean")?;
        c.wind_reversion = self.get("climate.wind_reversion")?;
        c.wind_noise = self.get("climate.wind_noise")?;
        c.seed = self.get("climate.seed")?;
        let n = &mut cfg.noise;
        n.temperature = self.get("noise.temperature")?;
        n.humidity = self.get("noise.humidity")?;
        n.irradiance = self.get("noise.irradiance")?;
        n.wind_speed = self.get("noise.wind_speed")?;
        n.wind_dir = self.get("noise.wind_dir")?;
        let k = &mut cfg.corruption;
        k.safe_baud = self.get("corruption.safe_baud")?;
        k.max_baud = self.get("corruption.max_baud")?;
        k.p_max = self.get("corruption.p_max")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The `[collector]` and `[http]` sections, validated.
    pub fn collector_config(&self) -> Result<CollectorConfig, ConfigError> {
        let mut cfg = CollectorConfig::new(PathBuf::from(self.raw("collector.log_dir")));
        cfg.stations = parse_stations(self.raw("collector.stations"))?;
        cfg.poll_interval = self.seconds("collector.poll_interval_s")?;
        cfg.poll_timeout = self.seconds("collector.poll_timeout_s")?;
        cfg.page_interval = self.seconds("collector.page_interval_s")?;
        cfg.time_scale = self.get("collector.time_scale")?;
        cfg.http_bind = self.raw("http.bind").to_string();
        if cfg.log_dir.as_os_str().is_empty() {
            return Err(ConfigError::new("collector.log_dir must not be empty"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Node configs for the collector's in-process stations, sharing the
    /// collector's time scale.
    pub fn in_process_nodes(&self, collector: &CollectorConfig) -> Result<Vec<NodeConfig>, ConfigError> {
        let base = self.node_config()?;
        let nodes: Vec<_> = collector
            .stations
            .iter()
            .filter(|(_, addr)| addr == IN_PROCESS)
            .map(|(id, _)| NodeConfig { station_id: *id, time_scale: collector.time_scale, ..base.clone() })
            .collect();
        for node in &nodes {
            node.validate()?;
        }
        Ok(nodes)
    }
}

/// Parses `id@address` entries separated by commas.
pub fn parse_stations(list: &str) -> Result<Vec<(StationId, String)>, ConfigError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|entry| {
            let (id, addr) = entry
                .split_once('@')
                .ok_or_else(|| invalid("collector.stations", entry, "expected id@address"))?;
            let id: StationId = id.trim().parse().map_err(|e| invalid("collector.stations", entry, e))?;
            let addr = addr.trim();
            if addr.is_empty() {
                return Err(invalid("collector.stations", entry, "empty address"));
            }
            Ok((id, addr.to_string()))
        })
        .collect()
}
