use chrono::{DateTime, Utc};

use super::LogRecord;
use crate::protocol::{Reading, Tenths};

/// The five logged weather quantities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    Temperature,
    Humidity,
    Irradiance,
    WindSpeed,
    WindDir,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::Temperature,
        Quantity::Humidity,
        Quantity::Irradiance,
        Quantity::WindSpeed,
        Quantity::WindDir,
    ];

    /// CSV / JSON column name.
    pub fn column(self) -> &'static str {
        match self {
            Quantity::Temperature => "temp_c",
            Quantity::Humidity => "rh_pct",
            Quantity::Irradiance => "irr_wm2",
            Quantity::WindSpeed => "wind_ms",
            Quantity::WindDir => "wind_deg",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Quantity::Temperature => "Temperature",
            Quantity::Humidity => "Relative humidity",
            Quantity::Irradiance => "Solar irradiance",
            Quantity::WindSpeed => "Wind speed",
            Quantity::WindDir => "Wind direction",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Quantity::Temperature => "°C",
            Quantity::Humidity => "%",
            Quantity::Irradiance => "W/m²",
            Quantity::WindSpeed => "m/s",
            Quantity::WindDir => "°",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Whether the wire carries a decimal place.
    pub fn has_decimal(self) -> bool {
        matches!(self, Quantity::Temperature | Quantity::Humidity | Quantity::WindSpeed)
    }

    /// The value in tenths of its unit.
    pub fn tenths_of(self, r: &Reading) -> i64 {
        match self {
            Quantity::Temperature => i64::from(r.temperature.tenths()),
            Quantity::Humidity => i64::from(r.humidity.tenths()),
            Quantity::Irradiance => i64::from(r.irradiance) * 10,
            Quantity::WindSpeed => i64::from(r.wind_speed.tenths()),
            Quantity::WindDir => i64::from(r.wind_dir) * 10,
        }
    }

    /// Renders a tenths value at this quantity's wire precision.
    pub fn format_tenths(self, tenths: i64) -> String {
        if self.has_decimal() {
            Tenths::from_tenths(tenths as i32).to_string()
        } else {
            (tenths / 10).to_string()
        }
    }
}

/// Min, max and running sum of one quantity, in tenths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stat {
    quantity: Quantity,
    min: i64,
    max: i64,
    sum: i64,
    count: u64,
}

fn div_round(num: i64, den: i64) -> i64 {
    // Half away from zero.
    let q = num / den;
    let r = num % den;
    if 2 * r.abs() >= den {
        q + num.signum()
    } else {
        q
    }
}

impl Stat {
    pub fn quantity(&self) -> Quantity {
        self.quantity
    }

    pub fn min(&self) -> f64 {
        self.min as f64 / 10.0
    }

    pub fn max(&self) -> f64 {
        self.max as f64 / 10.0
    }

    /// sum / count at full precision.
    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64 / 10.0
    }

    pub fn min_text(&self) -> String {
        self.quantity.format_tenths(self.min)
    }

    pub fn max_text(&self) -> String {
        self.quantity.format_tenths(self.max)
    }

    /// The mean rounded to wire precision.
    pub fn mean_text(&self) -> String {
        let count = self.count as i64;
        if self.quantity.has_decimal() {
            self.quantity.format_tenths(div_round(self.sum, count))
        } else {
            div_round(self.sum, count * 10).to_string()
        }
    }
}

/// Summary of the records in a time window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggregateStats {
    pub count: u64,
    pub window: (DateTime<Utc>, DateTime<Utc>),
    stats: [Option<Stat>; 5],
}

impl AggregateStats {
    /// `None` when the window holds no records.
    pub fn get(&self, quantity: Quantity) -> Option<&Stat> {
        self.stats[quantity.index()].as_ref()
    }
}

/// Incremental accumulator behind [`aggregate`]. Sums are kept in integer
/// tenths, so the result does not depend on the order records arrive in.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Aggregator {
    count: u64,
    stats: [Option<Stat>; 5],
}

impl Aggregator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, reading: &Reading) {
        self.count += 1;
        for q in Quantity::ALL {
            let v = q.tenths_of(reading);
            let slot = &mut self.stats[q.index()];
            match slot {
                None => *slot = Some(Stat { quantity: q, min: v, max: v, sum: v, count: 1 }),
                Some(s) => {
                    s.min = s.min.min(v);
                    s.max = s.max.max(v);
                    s.sum += v;
                    s.count += 1;
                }
            }
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn finish(&self, window: (DateTime<Utc>, DateTime<Utc>)) -> AggregateStats {
        AggregateStats { count: self.count, window, stats: self.stats }
    }
}

/// Exact min/max and mean of every quantity over `records`.
pub fn aggregate<'a, I>(records: I, window: (DateTime<Utc>, DateTime<Utc>)) -> AggregateStats
where
    I: IntoIterator<Item = &'a LogRecord>,
{
    let mut acc = Aggregator::new();
    for rec in records {
        acc.push(&rec.reading);
    }
    acc.finish(window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Seq, StationId};
    use proptest::prelude::*;

    fn rec(temp_tenths: i32, irr: u16) -> LogRecord {
        LogRecord::new(
            "2024-06-15T12:00:00Z".parse().unwrap(),
            Reading {
                station_id: StationId::new(1).unwrap(),
                seq: Seq::new(0).unwrap(),
                temperature: Tenths::from_tenths(temp_tenths),
                humidity: Tenths::from_tenths(500),
                irradiance: irr,
                wind_speed: Tenths::from_tenths(10),
                wind_dir: 180,
            },
        )
    }

    fn window() -> (DateTime<Utc>, DateTime<Utc>) {
        ("2024-06-15T00:00:00Z".parse().unwrap(), "2024-06-16T00:00:00Z".parse().unwrap())
    }

    #[test]
    fn three_temperatures() {
        let recs = [rec(10, 0), rec(20, 0), rec(30, 0)];
        let agg = aggregate(&recs, window());
        let t = agg.get(Quantity::Temperature).unwrap();
        assert_eq!((t.min(), t.max(), t.mean()), (1.0, 3.0, 2.0));
        assert_eq!(t.mean_text(), "2.0");
        assert_eq!(agg.count, 3);
    }

    #[test]
    fn single_record() {
        let agg = aggregate(&[rec(-73, 640)], window());
        let irr = agg.get(Quantity::Irradiance).unwrap();
        assert_eq!((irr.min(), irr.max(), irr.mean()), (640.0, 640.0, 640.0));
        let t = agg.get(Quantity::Temperature).unwrap();
        assert_eq!(
            (t.min_text(), t.max_text(), t.mean_text()),
            ("-7.3".into(), "-7.3".into(), "-7.3".into())
        );
    }

    #[test]
    fn empty_has_no_stats() {
        let agg = aggregate(&[], window());
        assert_eq!(agg.count, 0);
        assert!(Quantity::ALL.iter().all(|&q| agg.get(q).is_none()));
    }

    #[test]
    fn mean_text_rounds_half_away_from_zero() {
        let agg = aggregate(&[rec(-10, 1), rec(-5, 2)], window());
        // -0.75 -> -0.8, 1.5 -> 2
        assert_eq!(agg.get(Quantity::Temperature).unwrap().mean_text(), "-0.8");
        assert_eq!(agg.get(Quantity::Irradiance).unwrap().mean_text(), "2");
    }

    proptest! {
        #[test]
        fn min_le_mean_le_max(temps in proptest::collection::vec(-400i32..=600, 1..50)) {
            let recs: Vec<_> = temps.iter().map(|&t| rec(t, 0)).collect();
            let agg = aggregate(&recs, window());
            let s = agg.get(Quantity::Temperature).unwrap();
            prop_assert!(s.min() <= s.mean() && s.mean() <= s.max());
        }
    }
}
