use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::climate::GroundTruth;
use crate::protocol::{Reading, Seq, StationId, Tenths, IRRADIANCE_MAX};
use crate::ConfigError;

/// Standard deviation of additive sensor noise per quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorNoise {
    pub temperature: f64,
    pub humidity: f64,
    pub irradiance: f64,
    pub wind_speed: f64,
    pub wind_dir: f64,
}

impl Default for SensorNoise {
    fn default() -> Self {
        SensorNoise { temperature: 0.1, humidity: 0.5, irradiance: 5.0, wind_speed: 0.1, wind_dir: 2.0 }
    }
}

impl SensorNoise {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let sigmas = [self.temperature, self.humidity, self.irradiance, self.wind_speed, self.wind_dir];
        if sigmas.iter().all(|s| s.is_finite() && *s >= 0.0) {
            Ok(())
        } else {
            Err(ConfigError::new("noise sigmas must be finite and non-negative"))
        }
    }

    pub const NONE: SensorNoise =
        SensorNoise { temperature: 0.0, humidity: 0.0, irradiance: 0.0, wind_speed: 0.0, wind_dir: 0.0 };
}

fn gauss(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
}

fn tenths_clamped(value: f64, lo: f64, hi: f64) -> Tenths {
    Tenths::from_f64(value.clamp(lo, hi))
}

/// The node's sensor bank: adds noise, clamps, quantizes and stamps a
/// sequence number.
#[derive(Clone, Debug)]
pub struct Sensors {
    station_id: StationId,
    noise: SensorNoise,
    rng: ChaCha8Rng,
    next_seq: Seq,
}

impl Sensors {
    pub fn new(station_id: StationId, noise: SensorNoise, rng: ChaCha8Rng) -> Self {
        Sensors { station_id, noise, rng, next_seq: Seq::default() }
    }

    pub fn next_seq(&self) -> Seq {
        self.next_seq
    }

    pub fn sample(&mut self, truth: &GroundTruth) -> Reading {
        let n = self.noise;
        let rng = &mut self.rng;
        let temperature = tenths_clamped(truth.temperature + gauss(rng, n.temperature), -40.0, 60.0);
        let humidity = tenths_clamped(truth.humidity + gauss(rng, n.humidity), 0.0, 100.0);
        let irr_noise = gauss(rng, n.irradiance);
        // A dark cell reads exactly zero.
        let irradiance = if truth.irradiance > 0.0 {
            (truth.irradiance + irr_noise).clamp(0.0, f64::from(IRRADIANCE_MAX)).round() as u16
        } else {
            0
        };
        let wind_speed = tenths_clamped(truth.wind_speed + gauss(rng, n.wind_speed), 0.0, 75.0);
        let wind_dir = ((truth.wind_dir + gauss(rng, n.wind_dir)).round() as i64).rem_euclid(360) as u16;
        // Keep the stream position independent of the noise settings.
        let _: u32 = rng.random();
        let seq = self.next_seq;
        self.next_seq = seq.next();
        Reading { station_id: self.station_id, seq, temperature, humidity, irradiance, wind_speed, wind_dir }
    }
}
