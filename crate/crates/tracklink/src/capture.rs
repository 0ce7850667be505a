//! Raw frame captures.
//!
//! ```text
//! "FTNACAP1"                      8-byte file header
//! repeated:
//!   time     f64 LE               simulated send time [s]
//!   cycle    u32 LE
//!   channel  u8                   message type byte of the channel
//!   len      u32 LE
//!   frame    len bytes            exactly as put on the wire
//! ```
//!
//! Frames are stored before decoding, so a capture can hold corrupt frames too.

use std::fmt;

use tracklink_core::wire::MsgType;

pub const CAPTURE_MAGIC: [u8; 8] = *b"FTNACAP1";
const RECORD_HEADER: usize = 8 + 4 + 1 + 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CapturedFrame {
    pub time: f64,
    pub cycle: u32,
    pub channel: MsgType,
    pub frame: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureError {
    pub offset: usize,
    pub reason: &'static str,
}

impl fmt::Display for CaptureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "capture byte {}: {}", self.offset, self.reason)
    }
}

impl std::error::Error for CaptureError {}

pub fn encode(frames: &[CapturedFrame]) -> Vec<u8> {
    let mut out = CAPTURE_MAGIC.to_vec();
    for f in frames {
        out.extend_from_slice(&f.time.to_le_bytes());
        out.extend_from_slice(&f.cycle.to_le_bytes());
        out.push(f.channel.to_u8());
        out.extend_from_slice(&(f.frame.len() as u32).to_le_bytes());
        out.extend_from_slice(&f.frame);
    }
    out
}

pub fn is_capture(bytes: &[u8]) -> bool {
    bytes.starts_with(&CAPTURE_MAGIC)
}

pub fn decode(bytes: &[u8]) -> Result<Vec<CapturedFrame>, CaptureError> {
    if !is_capture(bytes) {
        return Err(CaptureError {
            offset: 0,
            reason: "missing FTNACAP1 header",
        });
    }
    let mut at = CAPTURE_MAGIC.len();
    let mut frames = Vec::new();
    while at < bytes.len() {
        let rest = &bytes[at..];
        if rest.len() < RECORD_HEADER {
            return Err(CaptureError {
                offset: at,
                reason: "truncated record header",
            });
        }
        let time = f64::from_le_bytes(rest[0..8].try_into().unwrap());
        let cycle = u32::from_le_bytes(rest[8..12].try_into().unwrap());
        let channel = MsgType::from_u8(rest[12]).ok_or(CaptureError {
            offset: at + 12,
            reason: "unknown channel",
        })?;
        let len = u32::from_le_bytes(rest[13..17].try_into().unwrap()) as usize;
        let body = rest
            .get(RECORD_HEADER..RECORD_HEADER + len)
            .ok_or(CaptureError {
                offset: at + 13,
                reason: "frame extends past end of file",
            })?;
        frames.push(CapturedFrame {
            time,
            cycle,
            channel,
            frame: body.to_vec(),
        });
        at += RECORD_HEADER + len;
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_truncation() {
        let frames = vec![
            CapturedFrame {
                time: 0.0,
                cycle: 0,
                channel: MsgType::Trajectory,
                frame: vec![1, 2, 3],
            },
            CapturedFrame {
                time: 0.01,
                cycle: 1,
                channel: MsgType::HmiCommand,
                frame: vec![],
            },
        ];
        let bytes = encode(&frames);
        assert_eq!(decode(&bytes).unwrap(), frames);
        assert_eq!(
            decode(&bytes[..bytes.len() - 1]).unwrap_err().offset,
            8 + RECORD_HEADER + 3
        );
        assert_eq!(
            decode(&bytes[..10]).unwrap_err().reason,
            "truncated record header"
        );
        assert_eq!(decode(b"nope").unwrap_err().offset, 0);
    }
}
