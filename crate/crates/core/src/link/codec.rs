use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::GeodeticPosition;

pub const MAGIC: [u8; 4] = *b"OPGT";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 10;
pub const TRAILER_LEN: usize = 4;
/// Largest payload either side accepts.
pub const MAX_PAYLOAD: usize = 1024;

const TYPE_TELEMETRY: u8 = 1;
const TYPE_CORRECTION: u8 = 2;
const TELEMETRY_LEN: usize = 4 + 4 * 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryMessage {
    pub seq: u32,
    /// Drone clock, seconds.
    pub t: f64,
    pub position: GeodeticPosition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionMessage {
    pub seq: u32,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Message {
    Telemetry(TelemetryMessage),
    Correction(CorrectionMessage),
}

impl Message {
    pub fn seq(&self) -> u32 {
        match self {
            Message::Telemetry(m) => m.seq,
            Message::Correction(m) => m.seq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("payload of {0} bytes exceeds the {MAX_PAYLOAD}-byte limit")]
    PayloadTooLarge(usize),
    #[error("invalid message: {0}")]
    InvalidMessage(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("not a frame: bad magic")]
    NotAFrame,
    #[error("unsupported frame version {0}")]
    UnsupportedVersion(u8),
    #[error("incomplete frame: need {needed} bytes, have {available}")]
    Incomplete { needed: usize, available: usize },
    #[error("corrupt frame: {0}")]
    Corrupt(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded<'a> {
    pub message: Message,
    /// Bytes after the end of the decoded frame.
    pub rest: &'a [u8],
}

fn crc(bytes: &[u8]) -> u32 {
    crc32fast::hash(bytes)
}

pub fn encode(msg: &Message) -> Result<Vec<u8>, EncodeError> {
    let (tag, payload) = match msg {
        Message::Telemetry(m) => {
            m.position
                .validate()
                .map_err(|e| EncodeError::InvalidMessage(e.to_string()))?;
            if !m.t.is_finite() {
                return Err(EncodeError::InvalidMessage("non-finite timestamp".into()));
            }
            let mut p = Vec::with_capacity(TELEMETRY_LEN);
            p.extend_from_slice(&m.seq.to_le_bytes());
            for v in [m.t, m.position.latitude, m.position.longitude, m.position.altitude] {
                p.extend_from_slice(&v.to_le_bytes());
            }
            (TYPE_TELEMETRY, p)
        }
        Message::Correction(m) => {
            let mut p = Vec::with_capacity(4 + m.payload.len());
            p.extend_from_slice(&m.seq.to_le_bytes());
            p.extend_from_slice(&m.payload);
            (TYPE_CORRECTION, p)
        }
    };
    if payload.len() > MAX_PAYLOAD {
        return Err(EncodeError::PayloadTooLarge(payload.len()));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + TRAILER_LEN);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(tag);
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&payload);
    let checksum = crc(&out[5..]);
    out.extend_from_slice(&checksum.to_le_bytes());
    Ok(out)
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8-byte slice"))
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4-byte slice"))
}

/// Decodes the frame at the start of `bytes`.
pub fn decode(bytes: &[u8]) -> Result<Decoded<'_>, DecodeError> {
    let prefix = bytes.len().min(MAGIC.len());
    if bytes[..prefix] != MAGIC[..prefix] {
        return Err(DecodeError::NotAFrame);
    }
    if bytes.len() < HEADER_LEN {
        return Err(DecodeError::Incomplete {
            needed: HEADER_LEN,
            available: bytes.len(),
        });
    }
    if bytes[4] != VERSION {
        return Err(DecodeError::UnsupportedVersion(bytes[4]));
    }
    let len = u32_at(bytes, 6) as usize;
    if len > MAX_PAYLOAD {
        return Err(DecodeError::Corrupt("declared length exceeds the payload limit"));
    }
    let total = HEADER_LEN + len + TRAILER_LEN;
    if bytes.len() < total {
        return Err(DecodeError::Incomplete {
            needed: total,
            available: bytes.len(),
        });
    }
    let body = &bytes[5..HEADER_LEN + len];
    if crc(body) != u32_at(bytes, HEADER_LEN + len) {
        return Err(DecodeError::Corrupt("checksum mismatch"));
    }
    let payload = &bytes[HEADER_LEN..HEADER_LEN + len];
    let message = match bytes[5] {
        TYPE_TELEMETRY => {
            if len != TELEMETRY_LEN {
                return Err(DecodeError::Corrupt("telemetry payload has the wrong length"));
            }
            let position = GeodeticPosition {
                latitude: f64_at(payload, 12),
                longitude: f64_at(payload, 20),
                altitude: f64_at(payload, 28),
            };
            let t = f64_at(payload, 4);
            if position.validate().is_err() || !t.is_finite() {
                return Err(DecodeError::Corrupt("telemetry fields out of range"));
            }
            Message::Telemetry(TelemetryMessage {
                seq: u32_at(payload, 0),
                t,
                position,
            })
        }
        TYPE_CORRECTION => {
            if len < 4 {
                return Err(DecodeError::Corrupt("correction payload too short"));
            }
            Message::Correction(CorrectionMessage {
                seq: u32_at(payload, 0),
                payload: payload[4..].to_vec(),
            })
        }
        _ => return Err(DecodeError::Corrupt("unknown message type")),
    };
    Ok(Decoded {
        message,
        rest: &bytes[total..],
    })
}
