use std::f64::consts::PI;

use chrono::{DateTime, Timelike, Utc};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ConfigError;

/// Wind direction diffusion, degrees per sqrt(second).
const WIND_DIR_DIFFUSION: f64 = 3.0;

/// Parameters of the simulated atmosphere. Defaults describe a warm
/// tropical coast: a 26 °C mean with a mid-afternoon peak, 12 h of daylight,
/// humid air and a steady light breeze.
#[derive(Clone, Debug, PartialEq)]
pub struct ClimateModel {
    /// °C
    pub t_mean: f64,
    /// °C
    pub t_amplitude: f64,
    pub t_peak_hour: f64,
    /// Clear-sky irradiance at solar noon, W/m².
    pub s_max: f64,
    pub sunrise_hour: f64,
    pub sunset_hour: f64,
    /// %RH at the mean temperature.
    pub rh_base: f64,
    /// %RH per °C above the mean.
    pub rh_temp_slope: f64,
    /// m/s
    pub wind_mean: f64,
    /// 1/s
    pub wind_reversion: f64,
    /// m/s per sqrt(s)
    pub wind_noise: f64,
    pub seed: u64,
}

impl Default for ClimateModel {
    fn default() -> Self {
        ClimateModel {
            t_mean: 26.0,
            t_amplitude: 6.0,
            t_peak_hour: 15.0,
            s_max: 1000.0,
            sunrise_hour: 6.0,
            sunset_hour: 18.0,
            rh_base: 75.0,
            rh_temp_slope: -1.5,
            wind_mean: 4.0,
            wind_reversion: 0.01,
            wind_noise: 0.3,
            seed: 0,
        }
    }
}

/// Noise-free state of the atmosphere at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundTruth {
    pub temperature: f64,
    pub humidity: f64,
    pub irradiance: f64,
    pub wind_speed: f64,
    pub wind_dir: f64,
}

fn hour_of_day(t: DateTime<Utc>) -> f64 {
    (f64::from(t.num_seconds_from_midnight()) + f64::from(t.nanosecond()) * 1e-9) / 3600.0
}

impl ClimateModel {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = [
            self.t_mean,
            self.t_amplitude,
            self.t_peak_hour,
            self.s_max,
            self.sunrise_hour,
            self.sunset_hour,
            self.rh_base,
            self.rh_temp_slope,
            self.wind_mean,
            self.wind_reversion,
            self.wind_noise,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::new("climate parameters must be finite"));
        }
        if !(0.0 <= self.sunrise_hour && self.sunrise_hour < self.sunset_hour && self.sunset_hour <= 24.0) {
            return Err(ConfigError::new("climate needs 0 <= sunrise_hour < sunset_hour <= 24"));
        }
        if self.t_amplitude < 0.0 || self.s_max < 0.0 || self.wind_noise < 0.0 {
            return Err(ConfigError::new("climate amplitudes must be non-negative"));
        }
        if self.wind_mean < 0.0 || self.wind_reversion < 0.0 {
            return Err(ConfigError::new("wind_mean and wind_reversion must be non-negative"));
        }
        Ok(())
    }

    pub fn temperature_at(&self, t: DateTime<Utc>) -> f64 {
        let phase = 2.0 * PI * (hour_of_day(t) - self.t_peak_hour) / 24.0;
        self.t_mean + self.t_amplitude * phase.cos()
    }

    /// Zero outside `[sunrise_hour, sunset_hour]`, a half sine inside.
    pub fn irradiance_at(&self, t: DateTime<Utc>) -> f64 {
        let h = hour_of_day(t);
        if h < self.sunrise_hour || h > self.sunset_hour {
            return 0.0;
        }
        let day_fraction = (h - self.sunrise_hour) / (self.sunset_hour - self.sunrise_hour);
        (self.s_max * (PI * day_fraction).sin()).max(0.0)
    }

    pub fn humidity_for(&self, temperature: f64) -> f64 {
        (self.rh_base + self.rh_temp_slope * (temperature - self.t_mean)).clamp(0.0, 100.0)
    }
}

/// Mean-reverting wind process advanced lazily to each query time.
#[derive(Clone, Debug)]
struct Wind {
    at: Option<DateTime<Utc>>,
    speed: f64,
    dir: f64,
}

/// A climate model plus the stateful parts (wind) it needs. Queries at
/// non-decreasing times give a deterministic sequence for a given seed.
#[derive(Clone, Debug)]
pub struct Atmosphere {
    model: ClimateModel,
    wind: Wind,
    rng: ChaCha8Rng,
}

impl Atmosphere {
    pub fn new(model: ClimateModel, rng: ChaCha8Rng) -> Self {
        let wind = Wind { at: None, speed: model.wind_mean, dir: 0.0 };
        Atmosphere { model, wind, rng }
    }

    pub fn model(&self) -> &ClimateModel {
        &self.model
    }

    pub fn weather_at(&mut self, t: DateTime<Utc>) -> GroundTruth {
        self.advance_wind(t);
        let temperature = self.model.temperature_at(t);
        GroundTruth {
            temperature,
            humidity: self.model.humidity_for(temperature),
            irradiance: self.model.irradiance_at(t),
            wind_speed: self.wind.speed,
            wind_dir: self.wind.dir,
        }
    }

    fn advance_wind(&mut self, t: DateTime<Utc>) {
        let Some(prev) = self.wind.at else {
            self.wind.dir = self.rng.random_range(0.0..360.0);
            self.wind.at = Some(t);
            return;
        };
        let dt = (t - prev).num_nanoseconds().unwrap_or(i64::MAX) as f64 * 1e-9;
        if dt <= 0.0 {
            return;
        }
        let m = &self.model;
        // Exact Ornstein-Uhlenbeck transition over dt.
        let decay = (-m.wind_reversion * dt).exp();
        let variance = if m.wind_reversion > 0.0 {
            m.wind_noise.powi(2) * (1.0 - decay * decay) / (2.0 * m.wind_reversion)
        } else {
            m.wind_noise.powi(2) * dt
        };
        let z: f64 = self.rng.sample(StandardNormal);
        let speed = m.wind_mean + (self.wind.speed - m.wind_mean) * decay + variance.sqrt() * z;
        self.wind.speed = speed.clamp(0.0, 75.0);
        let z: f64 = self.rng.sample(StandardNormal);
        self.wind.dir = (self.wind.dir + WIND_DIR_DIFFUSION * dt.sqrt() * z).rem_euclid(360.0);
        self.wind.at = Some(t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn at(hms: &str) -> DateTime<Utc> {
        format!("2024-06-15T{hms}Z").parse().unwrap()
    }

    #[test]
    fn temperature_peaks_at_peak_hour() {
        let m = ClimateModel::default();
        assert_eq!(m.temperature_at(at("15:00:00")), m.t_mean + m.t_amplitude);
        let trough = m.temperature_at(at("03:00:00"));
        assert!((trough - (m.t_mean - m.t_amplitude)).abs() < 1e-9);
    }

    #[test]
    fn irradiance_zero_at_night_and_peak_at_noon() {
        let m = ClimateModel::default();
        assert_eq!(m.irradiance_at(at("00:00:00")), 0.0);
        assert_eq!(m.irradiance_at(at("05:59:59")), 0.0);
        assert_eq!(m.irradiance_at(at("18:00:01")), 0.0);
        assert_eq!(m.irradiance_at(at("12:00:00")), m.s_max);
    }

    #[test]
    fn humidity_tracks_temperature_and_clamps() {
        let m = ClimateModel::default();
        assert_eq!(m.humidity_for(m.t_mean), 75.0);
        assert_eq!(m.humidity_for(m.t_mean + 2.0), 72.0);
        assert_eq!(m.humidity_for(-100.0), 100.0);
    }

    #[test]
    fn validation() {
        assert!(ClimateModel::default().validate().is_ok());
        let inverted = ClimateModel { sunrise_hour: 19.0, ..Default::default() };
        assert!(inverted.validate().is_err());
        let negative = ClimateModel { t_amplitude: -1.0, ..Default::default() };
        assert!(negative.validate().is_err());
    }

    #[test]
    fn wind_is_deterministic_and_bounded() {
        let run = || {
            let mut atm = Atmosphere::new(ClimateModel::default(), ChaCha8Rng::seed_from_u64(9));
            (0..2000)
                .map(|i| atm.weather_at(at("00:00:00") + chrono::Duration::seconds(i * 10)))
                .collect::<Vec<_>>()
        };
        let a = run();
        assert_eq!(a, run());
        assert!(a.iter().all(|g| (0.0..=75.0).contains(&g.wind_speed)));
        assert!(a.iter().all(|g| (0.0..360.0).contains(&g.wind_dir)));
        let mean = a.iter().map(|g| g.wind_speed).sum::<f64>() / a.len() as f64;
        assert!((mean - 4.0).abs() < 2.0, "mean wind {mean}");
    }

    #[test]
    fn wind_does_not_move_backwards_in_time() {
        let mut atm = Atmosphere::new(ClimateModel::default(), ChaCha8Rng::seed_from_u64(1));
        let a = atm.weather_at(at("10:00:00"));
        let b = atm.weather_at(at("09:00:00"));
        assert_eq!(a.wind_speed, b.wind_speed);
        assert_eq!(a.wind_dir, b.wind_dir);
    }
}
