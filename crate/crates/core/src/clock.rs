//! Simulation clock shared by nodes, the collector and the page loop.
//!
//! Sim time runs `scale` times faster than the tokio clock. Under a paused
//! tokio runtime (`start_paused = true`) the tokio clock is virtual, which
//! turns a `SimClock` into a fully deterministic harness clock.

use std::future::Future;
use std::time::Duration;

use chrono::{DateTime, Utc};
use tokio::time::{error::Elapsed, Instant};

#[derive(Clone, Debug)]
pub struct SimClock {
    origin: DateTime<Utc>,
    anchor: Instant,
    scale: u32,
}

impl SimClock {
    /// Starts a clock reading `origin` now and advancing `scale` sim
    /// seconds per tokio second.
    ///
    /// Panics if `scale` is 0.
    pub fn new(origin: DateTime<Utc>, scale: u32) -> Self {
        assert!(scale >= 1, "time scale must be at least 1");
        SimClock { origin, anchor: Instant::now(), scale }
    }

    /// Wall-clock time, unscaled.
    pub fn realtime() -> Self {
        Self::new(Utc::now(), 1)
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn origin(&self) -> DateTime<Utc> {
        self.origin
    }

    pub fn now(&self) -> DateTime<Utc> {
        let sim = (Instant::now() - self.anchor) * self.scale;
        self.origin + chrono::Duration::from_std(sim).expect("sim time overflow")
    }

    /// Wall duration corresponding to `sim`, rounded up to whole nanoseconds.
    pub fn to_wall(&self, sim: Duration) -> Duration {
        let nanos = sim.as_nanos().div_ceil(u128::from(self.scale));
        Duration::from_nanos(u64::try_from(nanos).unwrap_or(u64::MAX))
    }

    pub async fn sleep(&self, sim: Duration) {
        tokio::time::sleep(self.to_wall(sim)).await
    }

    /// Sleeps until the clock reads at least `deadline`.
    pub async fn sleep_until(&self, deadline: DateTime<Utc>) {
        let offset = (deadline - self.origin).to_std().unwrap_or_default();
        tokio::time::sleep_until(self.anchor + self.to_wall(offset)).await
    }

    pub async fn timeout<F: Future>(&self, sim: Duration, fut: F) -> Result<F::Output, Elapsed> {
        tokio::time::timeout(self.to_wall(sim), fut).await
    }
}

/// `value` truncated to whole seconds.
pub fn truncate_to_seconds(value: DateTime<Utc>) -> DateTime<Utc> {
    DateTime::from_timestamp(value.timestamp(), 0).expect("in range")
}
