use rand::Rng;

use crate::ConfigError;

/// Per-byte corruption probability as a function of line speed: zero up to
/// `safe_baud`, rising linearly to `p_max` at `max_baud`, flat beyond.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorruptionModel {
    pub safe_baud: u32,
    pub max_baud: u32,
    pub p_max: f64,
}

impl Default for CorruptionModel {
    fn default() -> Self {
        CorruptionModel { safe_baud: 115_200, max_baud: 1_000_000, p_max: 0.02 }
    }
}

impl CorruptionModel {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.p_max) {
            return Err(ConfigError::new("p_max must be within 0..=1"));
        }
        if self.safe_baud >= self.max_baud {
            return Err(ConfigError::new("safe_baud must be below max_baud"));
        }
        Ok(())
    }

    pub fn probability(&self, baud: u32) -> f64 {
        if baud <= self.safe_baud {
            0.0
        } else if baud >= self.max_baud {
            self.p_max
        } else {
            let span = f64::from(self.max_baud - self.safe_baud);
            self.p_max * f64::from(baud - self.safe_baud) / span
        }
    }

    /// Replaces each byte, independently with probability `p(baud)`, by a
    /// different random byte. Length is preserved.
    pub fn corrupt<R: Rng + ?Sized>(&self, bytes: &[u8], baud: u32, rng: &mut R) -> Vec<u8> {
        let p = self.probability(baud);
        if p == 0.0 {
            return bytes.to_vec();
        }
        bytes.iter().map(|&b| if rng.random_bool(p) { b ^ rng.random_range(1..=255u8) } else { b }).collect()
    }
}
