use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ProtocolError;

/// A quantity carried at one-decimal precision, stored as an integer
/// count of tenths so that wire, log and JSON values compare exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tenths(i32);

impl Tenths {
    pub const ZERO: Tenths = Tenths(0);

    pub const fn from_tenths(tenths: i32) -> Self {
        Tenths(tenths)
    }

    /// Rounds half away from zero to the nearest tenth.
    pub fn from_f64(value: f64) -> Self {
        Tenths((value * 10.0).round() as i32)
    }

    pub const fn tenths(self) -> i32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 10.0
    }
}

impl fmt::Display for Tenths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{}", abs / 10, abs % 10)
    }
}

impl FromStr for Tenths {
    type Err = ProtocolError;

    /// Accepts exactly `-?D+.D`, the form produced by `Display`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ProtocolError::RangeError(format!("not a one-decimal number: {s:?}"));
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = body.split_once('.').ok_or_else(bad)?;
        if int.is_empty() || frac.len() != 1 || !all_digits(int) || !all_digits(frac) {
            return Err(bad());
        }
        if int.len() > 6 {
            return Err(bad());
        }
        let int: i32 = int.parse().map_err(|_| bad())?;
        let frac: i32 = frac.parse().map_err(|_| bad())?;
        let magnitude = int * 10 + frac;
        Ok(Tenths(if negative { -magnitude } else { magnitude }))
    }
}

impl Serialize for Tenths {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Tenths {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = f64::deserialize(deserializer)?;
        if !value.is_finite() {
            return Err(serde::de::Error::custom("non-finite value"));
        }
        Ok(Tenths::from_f64(value))
    }
}

pub(crate) fn all_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Station address, 1..=255.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct StationId(u8);

impl StationId {
    pub fn new(id: u32) -> Result<Self, ProtocolError> {
        match u8::try_from(id) {
            Ok(id) if id >= 1 => Ok(StationId(id)),
            _ => Err(ProtocolError::RangeError(format!("station id {id} outside 1..=255"))),
        }
    }

    pub const fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u32> for StationId {
    type Error = ProtocolError;

    fn try_from(id: u32) -> Result<Self, Self::Error> {
        StationId::new(id)
    }
}

impl From<StationId> for u32 {
    fn from(id: StationId) -> u32 {
        u32::from(id.0)
    }
}

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for StationId {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if !all_digits(s) || s.len() > 3 {
            return Err(ProtocolError::RangeError(format!("bad station id {s:?}")));
        }
        StationId::new(s.parse().expect("at most three digits"))
    }
}

/// Response sequence number; wraps at 10000 to fit four wire digits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Seq(u16);

impl Seq {
    pub const MODULUS: u16 = 10_000;

    pub fn new(n: u32) -> Result<Self, ProtocolError> {
        if n < u32::from(Self::MODULUS) {
            Ok(Seq(n as u16))
        } else {
            Err(ProtocolError::RangeError(format!("seq {n} outside 0..10000")))
        }
    }

    pub const fn get(self) -> u16 {
        self.0
    }

    #[must_use]
    pub fn next(self) -> Seq {
        Seq((self.0 + 1) % Self::MODULUS)
    }

    /// Forward distance from `self` to `later`, modulo 10000.
    pub fn distance_to(self, later: Seq) -> u16 {
        (later.0 + Self::MODULUS - self.0) % Self::MODULUS
    }
}

impl TryFrom<u32> for Seq {
    type Error = ProtocolError;

    fn try_from(n: u32) -> Result<Self, Self::Error> {
        Seq::new(n)
    }
}

impl From<Seq> for u32 {
    fn from(seq: Seq) -> u32 {
        u32::from(seq.0)
    }
}

impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub const TEMPERATURE_RANGE: (Tenths, Tenths) = (Tenths(-400), Tenths(600));
pub const HUMIDITY_RANGE: (Tenths, Tenths) = (Tenths(0), Tenths(1000));
pub const IRRADIANCE_MAX: u16 = 1500;
pub const WIND_SPEED_RANGE: (Tenths, Tenths) = (Tenths(0), Tenths(750));
pub const WIND_DIR_MAX: u16 = 359;

/// One sensor sample as it travels from node to collector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Reading {
    pub station_id: StationId,
    pub seq: Seq,
    /// Degrees Celsius.
    pub temperature: Tenths,
    /// Percent relative humidity.
    pub humidity: Tenths,
    /// W/m².
    pub irradiance: u16,
    /// m/s.
    pub wind_speed: Tenths,
    /// Degrees clockwise from north.
    pub wind_dir: u16,
}

impl Reading {
    /// Checks every quantity against its closed range.
    pub fn validate(&self) -> Result<(), ProtocolError> {
        check_tenths("temperature", self.temperature, TEMPERATURE_RANGE)?;
        check_tenths("humidity", self.humidity, HUMIDITY_RANGE)?;
        if self.irradiance > IRRADIANCE_MAX {
            return Err(ProtocolError::RangeError(format!(
                "irradiance {} outside 0..=1500",
                self.irradiance
            )));
        }
        check_tenths("wind speed", self.wind_speed, WIND_SPEED_RANGE)?;
        if self.wind_dir > WIND_DIR_MAX {
            return Err(ProtocolError::RangeError(format!(
                "wind direction {} outside 0..=359",
                self.wind_dir
            )));
        }
        Ok(())
    }
}

fn check_tenths(name: &str, value: Tenths, (lo, hi): (Tenths, Tenths)) -> Result<(), ProtocolError> {
    if value < lo || value > hi {
        Err(ProtocolError::RangeError(format!("{name} {value} outside {lo}..={hi}")))
    } else {
        Ok(())
    }
}
