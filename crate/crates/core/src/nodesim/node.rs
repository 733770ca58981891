use std::io;
use std::time::Duration;

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tokio::io::{AsyncRead, AsyncReadExt, AsyncWrite, AsyncWriteExt, DuplexStream};
use tokio::task::JoinHandle;
use tokio_util::sync::CancellationToken;

use super::climate::{Atmosphere, ClimateModel};
use super::corruption::CorruptionModel;
use super::sensors::{SensorNoise, Sensors};
use crate::clock::SimClock;
use crate::protocol::{encode_measurement, Frame, FrameScanner, Reading, StationId};
use crate::ConfigError;

#[derive(Clone, Debug, PartialEq)]
pub struct NodeConfig {
    pub station_id: StationId,
    /// Line speed; only affects the corruption rate.
    pub baud: u32,
    pub latency_min_s: f64,
    pub latency_max_s: f64,
    pub corruption: CorruptionModel,
    pub climate: ClimateModel,
    pub noise: SensorNoise,
    /// Sim seconds per wall second. Used to build the node's clock when the
    /// node runs on its own; an injected clock takes precedence.
    pub time_scale: u32,
}

impl NodeConfig {
    pub fn new(station_id: StationId) -> Self {
        NodeConfig {
            station_id,
            baud: 9600,
            latency_min_s: 4.0,
            latency_max_s: 5.0,
            corruption: CorruptionModel::default(),
            climate: ClimateModel::default(),
            noise: SensorNoise::default(),
            time_scale: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.baud == 0 {
            return Err(ConfigError::new("baud must be positive"));
        }
        if !(self.latency_min_s.is_finite() && self.latency_max_s.is_finite()) || self.latency_min_s < 0.0 {
            return Err(ConfigError::new("latencies must be finite and non-negative"));
        }
        if self.latency_min_s > self.latency_max_s {
            return Err(ConfigError::new("latency_min_s must not exceed latency_max_s"));
        }
        if self.time_scale == 0 {
            return Err(ConfigError::new("time_scale must be at least 1"));
        }
        self.noise.validate()?;
        self.corruption.validate()?;
        self.climate.validate()
    }
}

fn stream_rng(seed: u64, station: StationId, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(station.get()) << 8 | purpose);
    rng
}

/// The simulated sensor node.
///
/// Weather, sensor noise, latency and corruption each draw from their own
/// seeded stream, so the clean response payloads depend only on the config
/// and the sim times at which polls are answered.
#[derive(Debug)]
pub struct Node {
    config: NodeConfig,
    atmosphere: Atmosphere,
    sensors: Sensors,
    latency_rng: ChaCha8Rng,
    corrupt_rng: ChaCha8Rng,
    trace: Option<Vec<Reading>>,
}

impl Node {
    pub fn new(config: NodeConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let seed = config.climate.seed;
        let id = config.station_id;
        Ok(Node {
            atmosphere: Atmosphere::new(config.climate.clone(), stream_rng(seed, id, 0)),
            sensors: Sensors::new(id, config.noise, stream_rng(seed, id, 1)),
            latency_rng: stream_rng(seed, id, 2),
            corrupt_rng: stream_rng(seed, id, 3),
            trace: None,
            config,
        })
    }

    /// Keeps a copy of every reading sent, before corruption.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn trace(&self) -> &[Reading] {
        self.trace.as_deref().unwrap_or_default()
    }

    pub fn config(&self) -> &NodeConfig {
        &self.config
    }

    pub fn draw_latency(&mut self) -> Duration {
        let (lo, hi) = (self.config.latency_min_s, self.config.latency_max_s);
        let secs = if lo == hi { lo } else { self.latency_rng.random_range(lo..=hi) };
        Duration::from_secs_f64(secs)
    }

    /// Samples the sensors at `sim_time` and returns the reading with its
    /// clean (uncorrupted) frame.
    pub fn respond(&mut self, sim_time: DateTime<Utc>) -> (Reading, Vec<u8>) {
        let truth = self.atmosphere.weather_at(sim_time);
        let reading = self.sensors.sample(&truth);
        let frame = encode_measurement(&reading).expect("sensors clamp to wire ranges");
        if let Some(trace) = &mut self.trace {
            trace.push(reading);
        }
        (reading, frame)
    }

    pub fn corrupt(&mut self, frame: &[u8]) -> Vec<u8> {
        self.config.corruption.corrupt(frame, self.config.baud, &mut self.corrupt_rng)
    }
}

fn is_disconnect(e: &io::Error) -> bool {
    matches!(
        e.kind(),
        io::ErrorKind::BrokenPipe | io::ErrorKind::ConnectionReset | io::ErrorKind::ConnectionAborted
    )
}

/// Serves polls on `transport` until the peer closes it or `shutdown`
/// fires. Polls for other stations and malformed input are ignored.
pub async fn run_node<T>(
    node: &mut Node,
    transport: T,
    clock: &SimClock,
    shutdown: &CancellationToken,
) -> io::Result<()>
where
    T: AsyncRead + AsyncWrite,
{
    let (mut rx, mut tx) = tokio::io::split(transport);
    let mut scanner = FrameScanner::new();
    let mut buf = [0u8; 256];
    let mut items = Vec::new();
    loop {
        let n = tokio::select! {
            _ = shutdown.cancelled() => return Ok(()),
            read = rx.read(&mut buf) => match read {
                Ok(n) => n,
                Err(e) if is_disconnect(&e) => return Ok(()),
                Err(e) => return Err(e),
            },
        };
        if n == 0 {
            return Ok(());
        }
        items.clear();
        scanner.feed_into(&buf[..n], &mut items);
        for item in &items {
            let Ok(Frame::Poll(id)) = item else { continue };
            if *id != node.config.station_id {
                continue;
            }
            let latency = node.draw_latency();
            tokio::select! {
                _ = shutdown.cancelled() => return Ok(()),
                _ = clock.sleep(latency) => {}
            }
            let (_, frame) = node.respond(clock.now());
            let wire = node.corrupt(&frame);
            match tx.write_all(&wire).await {
                Ok(()) => {}
                Err(e) if is_disconnect(&e) => return Ok(()),
                Err(e) => return Err(e),
            }
        }
    }
}

/// Runs `node` on one end of an in-process pipe and returns the other end.
/// The task yields the node back when the pipe closes or `shutdown` fires.
pub fn spawn_in_process(
    mut node: Node,
    clock: SimClock,
    shutdown: CancellationToken,
) -> (DuplexStream, JoinHandle<io::Result<Node>>) {
    let (near, far) = tokio::io::duplex(4096);
    let handle = tokio::spawn(async move {
        run_node(&mut node, far, &clock, &shutdown).await?;
        Ok(node)
    });
    (near, handle)
}
