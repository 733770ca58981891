use std::fmt::Write as _;

use super::reading::{all_digits, Reading, Seq, StationId};
use super::ProtocolError;

pub const START: u8 = b'$';
pub const CHECKSUM_DELIM: u8 = b'*';
pub const CR: u8 = b'\r';
pub const LF: u8 = b'\n';

const POLL_TAG: &str = "RQ";
const MEASUREMENT_TAG: &str = "WX";
const MEASUREMENT_FIELDS: usize = 8;

/// XOR of every payload byte; 0 for an empty payload.
pub fn checksum(payload: &[u8]) -> u8 {
    payload.iter().fold(0, |acc, b| acc ^ b)
}

fn is_framing_byte(b: u8) -> bool {
    matches!(b, START | CHECKSUM_DELIM | CR | LF)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameKind {
    Poll,
    Measurement,
}

/// A frame split into payload and checksum but not yet interpreted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireFrame {
    payload: String,
    checksum: u8,
}

impl WireFrame {
    /// Builds a frame around `payload`, computing its checksum.
    ///
    /// Panics if the payload contains a framing byte or non-ASCII text;
    /// only the encoders in this module construct payloads.
    fn from_payload(payload: String) -> Self {
        assert!(
            payload.is_ascii() && !payload.bytes().any(is_framing_byte),
            "payload contains framing bytes: {payload:?}"
        );
        let checksum = checksum(payload.as_bytes());
        WireFrame { payload, checksum }
    }

    pub fn payload(&self) -> &str {
        &self.payload
    }

    pub fn checksum(&self) -> u8 {
        self.checksum
    }

    pub fn kind(&self) -> Result<FrameKind, ProtocolError> {
        let tag = self.payload.split(',').next().unwrap_or_default();
        match tag {
            POLL_TAG => Ok(FrameKind::Poll),
            MEASUREMENT_TAG => Ok(FrameKind::Measurement),
            other => Err(ProtocolError::UnknownKind(format!("payload prefix {other:?}"))),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = String::with_capacity(self.payload.len() + 6);
        out.push('$');
        out.push_str(&self.payload);
        write!(out, "*{:02X}\r\n", self.checksum).expect("writing to a String");
        out.into_bytes()
    }

    /// Splits one complete line into payload and checksum, verifying the
    /// checksum. Field contents are not inspected.
    pub fn parse(line: &[u8]) -> Result<WireFrame, ProtocolError> {
        let body = line
            .strip_suffix(b"\r\n")
            .ok_or_else(|| ProtocolError::Incomplete("missing CR LF terminator".into()))?;
        let body = body
            .strip_prefix(b"$")
            .ok_or_else(|| ProtocolError::Incomplete("missing '$' start byte".into()))?;
        let star = body
            .iter()
            .rposition(|&b| b == CHECKSUM_DELIM)
            .ok_or_else(|| ProtocolError::Incomplete("missing '*' checksum delimiter".into()))?;
        let (payload, hex) = (&body[..star], &body[star + 1..]);
        let claimed = parse_hex_byte(hex).ok_or_else(|| {
            ProtocolError::ChecksumMismatch(format!(
                "checksum field {:?} is not two uppercase hex digits",
                String::from_utf8_lossy(hex)
            ))
        })?;
        let actual = checksum(payload);
        if claimed != actual {
            return Err(ProtocolError::ChecksumMismatch(format!(
                "frame says {claimed:02X}, payload XOR is {actual:02X}"
            )));
        }
        // A checksum can collide under multi-byte damage; framing bytes or
        // non-ASCII text in the payload are still rejected.
        if payload.iter().any(|&b| is_framing_byte(b) || !b.is_ascii()) {
            return Err(ProtocolError::Incomplete("framing byte inside payload".into()));
        }
        let payload = String::from_utf8(payload.to_vec()).expect("checked ASCII");
        Ok(WireFrame { payload, checksum: claimed })
    }

    /// Interprets the payload.
    pub fn decode(&self) -> Result<Frame, ProtocolError> {
        let fields: Vec<&str> = self.payload.split(',').collect();
        match self.kind()? {
            FrameKind::Poll => {
                if fields.len() != 2 {
                    return Err(ProtocolError::BadFieldCount(format!(
                        "poll has {} fields, expected 2",
                        fields.len()
                    )));
                }
                Ok(Frame::Poll(fields[1].parse()?))
            }
            FrameKind::Measurement => {
                if fields.len() != MEASUREMENT_FIELDS {
                    return Err(ProtocolError::BadFieldCount(format!(
                        "measurement has {} fields, expected {MEASUREMENT_FIELDS}",
                        fields.len()
                    )));
                }
                let reading = Reading {
                    station_id: fields[1].parse()?,
                    seq: parse_seq(fields[2])?,
                    temperature: fields[3].parse()?,
                    humidity: fields[4].parse()?,
                    irradiance: parse_uint(fields[5], "irradiance")?,
                    wind_speed: fields[6].parse()?,
                    wind_dir: parse_uint(fields[7], "wind direction")?,
                };
                reading.validate()?;
                Ok(Frame::Measurement(reading))
            }
        }
    }
}

fn parse_hex_byte(hex: &[u8]) -> Option<u8> {
    fn nibble(b: u8) -> Option<u8> {
        match b {
            b'0'..=b'9' => Some(b - b'0'),
            b'A'..=b'F' => Some(b - b'A' + 10),
            _ => None,
        }
    }
    match hex {
        [hi, lo] => Some(nibble(*hi)? << 4 | nibble(*lo)?),
        _ => None,
    }
}

fn parse_seq(field: &str) -> Result<Seq, ProtocolError> {
    if field.len() != 4 || !all_digits(field) {
        return Err(ProtocolError::RangeError(format!("seq {field:?} is not four digits")));
    }
    Seq::new(field.parse().expect("four digits"))
}

fn parse_uint(field: &str, name: &str) -> Result<u16, ProtocolError> {
    if !all_digits(field) || field.len() > 5 {
        return Err(ProtocolError::RangeError(format!("{name} {field:?} is not an integer")));
    }
    field.parse().map_err(|_| ProtocolError::RangeError(format!("{name} {field:?} too large")))
}

/// A decoded frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Poll(StationId),
    Measurement(Reading),
}

/// `$RQ,<id>*HH\r\n`
pub fn encode_poll(station_id: u32) -> Result<Vec<u8>, ProtocolError> {
    let id = StationId::new(station_id)?;
    Ok(poll_frame(id))
}

pub(crate) fn poll_frame(id: StationId) -> Vec<u8> {
    WireFrame::from_payload(format!("{POLL_TAG},{id}")).to_bytes()
}

/// `$WX,<id>,<seq:04>,<temp>,<rh>,<irr>,<wspd>,<wdir>*HH\r\n`
pub fn encode_measurement(reading: &Reading) -> Result<Vec<u8>, ProtocolError> {
    reading.validate()?;
    let payload = format!(
        "{MEASUREMENT_TAG},{},{:04},{},{},{},{},{}",
        reading.station_id,
        reading.seq.get(),
        reading.temperature,
        reading.humidity,
        reading.irradiance,
        reading.wind_speed,
        reading.wind_dir,
    );
    Ok(WireFrame::from_payload(payload).to_bytes())
}

/// Decodes one complete frame. The checksum is verified before any field
/// is parsed; ranges are verified last.
pub fn decode_frame(line: &[u8]) -> Result<Frame, ProtocolError> {
    WireFrame::parse(line)?.decode()
}
