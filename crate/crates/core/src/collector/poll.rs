use std::fmt;
use std::time::Duration;

use chrono::{DateTime, Utc};
use tokio::io::{AsyncRead, AsyncReadExt, AsyncWrite, AsyncWriteExt};
use tokio::net::TcpStream;

use crate::clock::SimClock;
use crate::protocol::{poll_frame, Frame, FrameScanner, ProtocolError, Reading, StationId};

/// Any duplex byte stream a node can be reached over.
pub trait Transport: AsyncRead + AsyncWrite + Send + Unpin {}

impl<T: AsyncRead + AsyncWrite + Send + Unpin> Transport for T {}

/// The collector's end of one node connection, with its scanner state.
pub struct Link {
    address: Option<String>,
    conn: Option<Box<dyn Transport>>,
    scanner: FrameScanner,
}

impl fmt::Debug for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Link")
            .field("address", &self.address)
            .field("connected", &self.conn.is_some())
            .finish()
    }
}

impl Link {
    /// A TCP link, (re)connected on demand.
    pub fn tcp(address: impl Into<String>) -> Self {
        Link { address: Some(address.into()), conn: None, scanner: FrameScanner::new() }
    }

    /// A link over an already open stream. Once the stream closes the link
    /// stays down.
    pub fn attached<T: Transport + 'static>(stream: T) -> Self {
        Link { address: None, conn: Some(Box::new(stream)), scanner: FrameScanner::new() }
    }

    pub fn address(&self) -> Option<&str> {
        self.address.as_deref()
    }

    async fn connection(&mut self) -> Result<&mut Box<dyn Transport>, PollFailure> {
        if self.conn.is_none() {
            let Some(address) = &self.address else {
                return Err(PollFailure::Malformed("transport closed".into()));
            };
            match TcpStream::connect(address.as_str()).await {
                Ok(stream) => {
                    stream.set_nodelay(true).ok();
                    self.conn = Some(Box::new(stream));
                }
                Err(e) => {
                    tracing::debug!(%address, error = %e, "node unreachable");
                    return Err(PollFailure::Timeout);
                }
            }
        }
        Ok(self.conn.as_mut().expect("connected above"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PollFailure {
    #[error("no answer before the poll timeout")]
    Timeout,
    #[error("checksum mismatch: {0}")]
    ChecksumMismatch(String),
    #[error("malformed response: {0}")]
    Malformed(String),
}

/// A successful poll.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Polled {
    pub reading: Reading,
    /// Collector clock when the response completed.
    pub rx_time: DateTime<Utc>,
    /// Sim time from sending the poll to receiving the full response.
    pub latency: Duration,
}

async fn exchange(link: &mut Link, station: StationId) -> Result<Reading, PollFailure> {
    let mut buf = [0u8; 256];
    let mut items = Vec::new();
    let conn = link.connection().await?;
    if let Err(e) = conn.write_all(&poll_frame(station)).await {
        link.conn = None;
        return Err(PollFailure::Malformed(format!("transport closed: {e}")));
    }
    loop {
        let conn = link.connection().await?;
        let n = match conn.read(&mut buf).await {
            Ok(0) => {
                link.conn = None;
                return Err(PollFailure::Malformed("transport closed".into()));
            }
            Ok(n) => n,
            Err(e) => {
                link.conn = None;
                return Err(PollFailure::Malformed(format!("transport closed: {e}")));
            }
        };
        items.clear();
        link.scanner.feed_into(&buf[..n], &mut items);
        for item in items.drain(..) {
            match item {
                Ok(Frame::Measurement(r)) if r.station_id == station => return Ok(r),
                Ok(_) => {}
                Err(ProtocolError::ChecksumMismatch(detail)) => {
                    return Err(PollFailure::ChecksumMismatch(detail))
                }
                Err(e) => return Err(PollFailure::Malformed(e.to_string())),
            }
        }
    }
}

/// Sends one poll and waits, at most `timeout` of sim time, for the
/// station's measurement.
///
/// Anything left in the scanner from earlier exchanges is dropped first. A
/// timeout with a partial frame buffered counts as malformed rather than
/// as a silent node.
pub async fn poll_once(
    link: &mut Link,
    station: StationId,
    timeout: Duration,
    clock: &SimClock,
) -> Result<Polled, PollFailure> {
    link.scanner.reset();
    let sent = clock.now();
    let outcome = clock.timeout(timeout, exchange(link, station)).await;
    let rx_time = clock.now();
    match outcome {
        Ok(Ok(reading)) => {
            let latency = (rx_time - sent).to_std().unwrap_or_default();
            Ok(Polled { reading, rx_time, latency })
        }
        Ok(Err(failure)) => Err(failure),
        Err(_) => match link.scanner.reset() {
            Some(partial) => Err(PollFailure::Malformed(partial.to_string())),
            None => Err(PollFailure::Timeout),
        },
    }
}
