#![doc = include_str!("../../../../docs/wire-format.md")]

mod frame;
mod reading;
mod scan;

pub(crate) use frame::poll_frame;
pub use frame::{checksum, decode_frame, encode_measurement, encode_poll, Frame, FrameKind, WireFrame};
pub use reading::{
    Reading, Seq, StationId, Tenths, HUMIDITY_RANGE, IRRADIANCE_MAX, TEMPERATURE_RANGE, WIND_DIR_MAX,
    WIND_SPEED_RANGE,
};
pub use scan::{FrameScanner, ScanItem, MAX_FRAME_LEN};

/// Why a frame was rejected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    /// No terminator, no start byte, or bytes discarded while resynchronizing.
    #[error("incomplete frame: {0}")]
    Incomplete(String),
    #[error("checksum mismatch: {0}")]
    ChecksumMismatch(String),
    #[error("bad field count: {0}")]
    BadFieldCount(String),
    #[error("out of range: {0}")]
    RangeError(String),
    #[error("unknown frame kind: {0}")]
    UnknownKind(String),
}
