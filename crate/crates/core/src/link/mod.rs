//! Drone/ground wire protocol and the lossy channel it travels over.
//!
//! Frame layout, all integers little-endian:
//!
//! | bytes | field                                    |
//! |-------|------------------------------------------|
//! | 4     | magic `OPGT`                             |
//! | 1     | version (1)                              |
//! | 1     | type: 1 telemetry, 2 correction          |
//! | 4     | payload length `n`                       |
//! | n     | payload                                  |
//! | 4     | CRC-32 (IEEE) over type, length, payload |
//!
//! Telemetry payload: `seq: u32, t: f64, lat: f64, lon: f64, alt: f64`.
//! Correction payload: `seq: u32` followed by opaque bytes.

mod channel;
mod codec;

pub use channel::{Channel, LinkParams};
pub use codec::{
    decode, encode, CorrectionMessage, DecodeError, Decoded, EncodeError, Message, TelemetryMessage, HEADER_LEN,
    MAGIC, MAX_PAYLOAD, TRAILER_LEN, VERSION,
};
