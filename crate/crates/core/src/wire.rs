//! Binary framing for every message that crosses a process boundary.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "FTNA"
//! 4       1     version (0x01)
//! 5       1     message type
//! 6       4     payload length, u32 little-endian (<= 65536)
//! 10      n     payload
//! 10+n    4     CRC-32 over bytes 0..10+n, u32 little-endian
//! ```
//!
//! Payloads are fixed-order little-endian: `f64` for reals, `u32` for sequence numbers and
//! counts, `i8` for gears, `u8` for enums and booleans.

use alloc::vec::Vec;
use core::fmt;

use crate::angle;
use crate::control::ControlMode;
use crate::messages::{
    ControlCommand, ControllerStatus, Gear, HmiAction, HmiCommand, LocStatus, LocalizationMsg,
    ModeHint, TrajectoryMsg, TrajectoryPoint,
};
use crate::supervisor::{FaultCause, FsmState};

pub const MAGIC: [u8; 4] = *b"FTNA";
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 10;
pub const CRC_LEN: usize = 4;
pub const MAX_PAYLOAD: usize = 65_536;

const TRAJ_HEADER_LEN: usize = 4 + 8 + 1 + 1 + 4;
const TRAJ_POINT_LEN: usize = 8 * 8;
const LOC_LEN: usize = 4 + 8 + 6 * 8 + 1;
const CMD_LEN: usize = 4 + 8 + 8 + 8 + 1 + 1 + 8 + 8 + 1;
const HMI_LEN: usize = 4 + 8 + 1;
const STATUS_LEN: usize = 4 + 8 + 1 + 1 + 1 + 3 * 8;

const CRC_TABLE: [u32; 256] = {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = i as u32;
        let mut k = 0;
        while k < 8 {
            c = if c & 1 != 0 {
                0xEDB8_8320 ^ (c >> 1)
            } else {
                c >> 1
            };
            k += 1;
        }
        table[i] = c;
        i += 1;
    }
    table
};

/// Reflected CRC-32 (polynomial 0x04C11DB7, init and final XOR 0xFFFFFFFF).
pub fn crc32(bytes: &[u8]) -> u32 {
    let mut crc = 0xFFFF_FFFFu32;
    for &b in bytes {
        crc = CRC_TABLE[((crc ^ b as u32) & 0xFF) as usize] ^ (crc >> 8);
    }
    crc ^ 0xFFFF_FFFF
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MsgType {
    Trajectory,
    Localization,
    ControlCommand,
    HmiCommand,
    ControllerStatus,
}

impl MsgType {
    pub const ALL: [MsgType; 5] = [
        MsgType::Trajectory,
        MsgType::Localization,
        MsgType::ControlCommand,
        MsgType::HmiCommand,
        MsgType::ControllerStatus,
    ];

    pub fn to_u8(self) -> u8 {
        match self {
            MsgType::Trajectory => 0x01,
            MsgType::Localization => 0x02,
            MsgType::ControlCommand => 0x03,
            MsgType::HmiCommand => 0x04,
            MsgType::ControllerStatus => 0x05,
        }
    }

    pub fn from_u8(raw: u8) -> Option<Self> {
        MsgType::ALL.into_iter().find(|t| t.to_u8() == raw)
    }

    pub fn name(self) -> &'static str {
        match self {
            MsgType::Trajectory => "trajectory",
            MsgType::Localization => "localization",
            MsgType::ControlCommand => "control_command",
            MsgType::HmiCommand => "hmi_command",
            MsgType::ControllerStatus => "controller_status",
        }
    }
}

/// Any message that travels in a frame.
#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Trajectory(TrajectoryMsg),
    Localization(LocalizationMsg),
    ControlCommand(ControlCommand),
    HmiCommand(HmiCommand),
    ControllerStatus(ControllerStatus),
}

impl Message {
    pub fn msg_type(&self) -> MsgType {
        match self {
            Message::Trajectory(_) => MsgType::Trajectory,
            Message::Localization(_) => MsgType::Localization,
            Message::ControlCommand(_) => MsgType::ControlCommand,
            Message::HmiCommand(_) => MsgType::HmiCommand,
            Message::ControllerStatus(_) => MsgType::ControllerStatus,
        }
    }

    pub fn seq(&self) -> u32 {
        match self {
            Message::Trajectory(m) => m.seq,
            Message::Localization(m) => m.seq,
            Message::ControlCommand(m) => m.seq,
            Message::HmiCommand(m) => m.seq,
            Message::ControllerStatus(m) => m.seq,
        }
    }
}

impl From<TrajectoryMsg> for Message {
    fn from(m: TrajectoryMsg) -> Self {
        Message::Trajectory(m)
    }
}

impl From<LocalizationMsg> for Message {
    fn from(m: LocalizationMsg) -> Self {
        Message::Localization(m)
    }
}

impl From<ControlCommand> for Message {
    fn from(m: ControlCommand) -> Self {
        Message::ControlCommand(m)
    }
}

impl From<HmiCommand> for Message {
    fn from(m: HmiCommand) -> Self {
        Message::HmiCommand(m)
    }
}

impl From<ControllerStatus> for Message {
    fn from(m: ControllerStatus) -> Self {
        Message::ControllerStatus(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodeError {
    PayloadTooLarge(usize),
}

impl fmt::Display for EncodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodeError::PayloadTooLarge(n) => {
                write!(
                    f,
                    "payload of {n} bytes exceeds the {MAX_PAYLOAD} byte limit"
                )
            }
        }
    }
}

impl core::error::Error for EncodeError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeError {
    BadMagic,
    BadVersion(u8),
    BadLength,
    BadCrc {
        expected: u32,
        actual: u32,
    },
    UnknownType(u8),
    /// CRC matched but an enum or flag byte holds an undefined value.
    InvalidField(&'static str),
}

impl DecodeError {
    pub fn code(&self) -> &'static str {
        match self {
            DecodeError::BadMagic => "BAD_MAGIC",
            DecodeError::BadVersion(_) => "BAD_VERSION",
            DecodeError::BadLength => "BAD_LENGTH",
            DecodeError::BadCrc { .. } => "BAD_CRC",
            DecodeError::UnknownType(_) => "UNKNOWN_TYPE",
            DecodeError::InvalidField(_) => "INVALID_FIELD",
        }
    }
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::BadVersion(v) => write!(f, "BAD_VERSION: {v:#04x}"),
            DecodeError::BadCrc { expected, actual } => {
                write!(
                    f,
                    "BAD_CRC: frame says {expected:#010x}, computed {actual:#010x}"
                )
            }
            DecodeError::UnknownType(t) => write!(f, "UNKNOWN_TYPE: {t:#04x}"),
            DecodeError::InvalidField(name) => write!(f, "INVALID_FIELD: {name}"),
            other => f.write_str(other.code()),
        }
    }
}

impl core::error::Error for DecodeError {}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn i8(&mut self, v: i8) {
        self.0.push(v as u8);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        if self.buf.len() < N {
            return Err(DecodeError::BadLength);
        }
        let (head, tail) = self.buf.split_at(N);
        self.buf = tail;
        let mut out = [0u8; N];
        out.copy_from_slice(head);
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take::<1>()?[0])
    }
    fn i8(&mut self) -> Result<i8, DecodeError> {
        Ok(self.take::<1>()?[0] as i8)
    }
    fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64, DecodeError> {
        Ok(f64::from_le_bytes(self.take()?))
    }
    fn finish(self) -> Result<(), DecodeError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(DecodeError::BadLength)
        }
    }
}

fn mode_to_u8(mode: Option<ControlMode>) -> u8 {
    mode.map_or(0, ControlMode::to_u8)
}

fn write_payload(msg: &Message, w: &mut Writer) {
    match msg {
        Message::Trajectory(m) => {
            w.u32(m.seq);
            w.f64(m.timestamp);
            w.i8(m.gear.to_i8());
            w.u8(m.mode_hint.to_u8());
            w.u32(m.points.len() as u32);
            for p in &m.points {
                for f in [p.x, p.y, p.theta, p.kappa, p.s, p.v, p.a, p.relative_time] {
                    w.f64(f);
                }
            }
        }
        Message::Localization(m) => {
            w.u32(m.seq);
            w.f64(m.timestamp);
            for f in [m.x, m.y, m.theta, m.v, m.yaw_rate, m.a] {
                w.f64(f);
            }
            w.u8(m.status.to_u8());
        }
        Message::ControlCommand(m) => {
            w.u32(m.seq);
            w.f64(m.timestamp);
            w.f64(m.accel_cmd);
            w.f64(m.steer_wheel_cmd);
            w.i8(m.gear_cmd.to_i8());
            w.u8(m.direct_actuation as u8);
            w.f64(m.throttle);
            w.f64(m.brake);
            w.u8(m.mode.to_u8());
        }
        Message::HmiCommand(m) => {
            w.u32(m.seq);
            w.f64(m.timestamp);
            w.u8(m.command.to_u8());
        }
        Message::ControllerStatus(m) => {
            w.u32(m.seq);
            w.f64(m.timestamp);
            w.u8(m.fsm.to_u8());
            w.u8(mode_to_u8(m.mode));
            w.u8(m.cause.map_or(0, FaultCause::to_u8));
            w.f64(m.lateral_error);
            w.f64(m.heading_error);
            w.f64(m.speed_error);
        }
    }
}

fn payload_len(msg: &Message) -> usize {
    match msg {
        Message::Trajectory(m) => TRAJ_HEADER_LEN + TRAJ_POINT_LEN * m.points.len(),
        Message::Localization(_) => LOC_LEN,
        Message::ControlCommand(_) => CMD_LEN,
        Message::HmiCommand(_) => HMI_LEN,
        Message::ControllerStatus(_) => STATUS_LEN,
    }
}

/// Encodes one message into a complete frame.
pub fn encode(msg: &Message) -> Result<Vec<u8>, EncodeError> {
    let len = payload_len(msg);
    if len > MAX_PAYLOAD {
        return Err(EncodeError::PayloadTooLarge(len));
    }
    let mut w = Writer(Vec::with_capacity(HEADER_LEN + len + CRC_LEN));
    w.0.extend_from_slice(&MAGIC);
    w.u8(VERSION);
    w.u8(msg.msg_type().to_u8());
    w.u32(len as u32);
    write_payload(msg, &mut w);
    debug_assert_eq!(w.0.len(), HEADER_LEN + len);
    let crc = crc32(&w.0);
    w.u32(crc);
    Ok(w.0)
}

fn read_trajectory(r: &mut Reader<'_>) -> Result<TrajectoryMsg, DecodeError> {
    let seq = r.u32()?;
    let timestamp = r.f64()?;
    let gear = Gear::from_i8(r.i8()?).ok_or(DecodeError::InvalidField("gear"))?;
    let mode_hint = ModeHint::from_u8(r.u8()?).ok_or(DecodeError::InvalidField("mode_hint"))?;
    let count = r.u32()? as usize;
    if r.buf.len() != count * TRAJ_POINT_LEN {
        return Err(DecodeError::BadLength);
    }
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        points.push(TrajectoryPoint {
            x: r.f64()?,
            y: r.f64()?,
            theta: angle::wrap(r.f64()?),
            kappa: r.f64()?,
            s: r.f64()?,
            v: r.f64()?,
            a: r.f64()?,
            relative_time: r.f64()?,
        });
    }
    Ok(TrajectoryMsg {
        seq,
        timestamp,
        gear,
        mode_hint,
        points,
    })
}

fn read_payload(kind: MsgType, r: &mut Reader<'_>) -> Result<Message, DecodeError> {
    Ok(match kind {
        MsgType::Trajectory => Message::Trajectory(read_trajectory(r)?),
        MsgType::Localization => Message::Localization(LocalizationMsg {
            seq: r.u32()?,
            timestamp: r.f64()?,
            x: r.f64()?,
            y: r.f64()?,
            theta: angle::wrap(r.f64()?),
            v: r.f64()?,
            yaw_rate: r.f64()?,
            a: r.f64()?,
            status: LocStatus::from_u8(r.u8()?).ok_or(DecodeError::InvalidField("status"))?,
        }),
        MsgType::ControlCommand => Message::ControlCommand(ControlCommand {
            seq: r.u32()?,
            timestamp: r.f64()?,
            accel_cmd: r.f64()?,
            steer_wheel_cmd: r.f64()?,
            gear_cmd: Gear::from_i8(r.i8()?).ok_or(DecodeError::InvalidField("gear_cmd"))?,
            direct_actuation: match r.u8()? {
                0 => false,
                1 => true,
                _ => return Err(DecodeError::InvalidField("direct_actuation")),
            },
            throttle: r.f64()?,
            brake: r.f64()?,
            mode: ControlMode::from_u8(r.u8()?).ok_or(DecodeError::InvalidField("mode"))?,
        }),
        MsgType::HmiCommand => Message::HmiCommand(HmiCommand {
            seq: r.u32()?,
            timestamp: r.f64()?,
            command: HmiAction::from_u8(r.u8()?).ok_or(DecodeError::InvalidField("command"))?,
        }),
        MsgType::ControllerStatus => Message::ControllerStatus(ControllerStatus {
            seq: r.u32()?,
            timestamp: r.f64()?,
            fsm: FsmState::from_u8(r.u8()?).ok_or(DecodeError::InvalidField("fsm"))?,
            mode: match r.u8()? {
                0 => None,
                raw => Some(ControlMode::from_u8(raw).ok_or(DecodeError::InvalidField("mode"))?),
            },
            cause: match r.u8()? {
                0 => None,
                raw => Some(FaultCause::from_u8(raw).ok_or(DecodeError::InvalidField("cause"))?),
            },
            lateral_error: r.f64()?,
            heading_error: r.f64()?,
            speed_error: r.f64()?,
        }),
    })
}

/// Checks framing and CRC, then decodes the payload. Headings are wrapped into `(-pi, pi]`.
pub fn decode(bytes: &[u8]) -> Result<Message, DecodeError> {
    if bytes.len() < HEADER_LEN + CRC_LEN {
        return Err(DecodeError::BadLength);
    }
    if bytes[..4] != MAGIC {
        return Err(DecodeError::BadMagic);
    }
    if bytes[4] != VERSION {
        return Err(DecodeError::BadVersion(bytes[4]));
    }
    let len = u32::from_le_bytes([bytes[6], bytes[7], bytes[8], bytes[9]]) as usize;
    if len > MAX_PAYLOAD || bytes.len() != HEADER_LEN + len + CRC_LEN {
        return Err(DecodeError::BadLength);
    }
    let body_end = HEADER_LEN + len;
    let expected = u32::from_le_bytes([
        bytes[body_end],
        bytes[body_end + 1],
        bytes[body_end + 2],
        bytes[body_end + 3],
    ]);
    let actual = crc32(&bytes[..body_end]);
    if expected != actual {
        return Err(DecodeError::BadCrc { expected, actual });
    }
    let kind = MsgType::from_u8(bytes[5]).ok_or(DecodeError::UnknownType(bytes[5]))?;
    let mut r = Reader {
        buf: &bytes[HEADER_LEN..body_end],
    };
    let msg = read_payload(kind, &mut r)?;
    r.finish()?;
    Ok(msg)
}

/// Single-slot mailbox that only ever accepts a sequence number higher than any it has
/// accepted before, whether or not that earlier message was already taken.
///
/// Ties keep the message that arrived first.
#[derive(Debug, Clone, Default)]
pub struct LatestWins {
    slot: Option<Message>,
    newest: Option<u32>,
}

impl LatestWins {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns true if `msg` replaced the slot content.
    pub fn offer(&mut self, msg: Message) -> bool {
        if self.newest.is_some_and(|n| msg.seq() <= n) {
            return false;
        }
        self.newest = Some(msg.seq());
        self.slot = Some(msg);
        true
    }

    pub fn peek(&self) -> Option<&Message> {
        self.slot.as_ref()
    }

    pub fn take(&mut self) -> Option<Message> {
        self.slot.take()
    }
}

/// Decodes a batch of pending datagrams and returns the newest valid one of `kind`.
///
/// Undecodable datagrams and other message types are dropped; the second element counts
/// the datagrams that failed to decode.
pub fn latest_of<'a, I>(datagrams: I, kind: MsgType) -> (Option<Message>, usize)
where
    I: IntoIterator<Item = &'a [u8]>,
{
    let mut mailbox = LatestWins::new();
    let mut rejected = 0;
    for bytes in datagrams {
        match decode(bytes) {
            Ok(msg) if msg.msg_type() == kind => {
                mailbox.offer(msg);
            }
            Ok(_) => {}
            Err(_) => rejected += 1,
        }
    }
    (mailbox.take(), rejected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn bitwise_crc(bytes: &[u8]) -> u32 {
        let mut crc = 0xFFFF_FFFFu32;
        for &b in bytes {
            crc ^= b as u32;
            for _ in 0..8 {
                let mask = (crc & 1).wrapping_neg();
                crc = (crc >> 1) ^ (0xEDB8_8320 & mask);
            }
        }
        !crc
    }

    #[test]
    fn crc_check_values() {
        assert_eq!(bitwise_crc(b""), 0);
        assert_eq!(crc32fast::hash(b""), 0);
        assert_eq!(crc32(b""), 0x0000_0000);
        assert_eq!(bitwise_crc(b"123456789"), 0xCBF4_3926);
        assert_eq!(crc32fast::hash(b"123456789"), 0xCBF4_3926);
        assert_eq!(crc32(b"123456789"), 0xCBF4_3926);
    }

    proptest::proptest! {
        #[test]
        fn crc_matches_references(bytes in proptest::collection::vec(proptest::num::u8::ANY, 0..512)) {
            let c = crc32(&bytes);
            proptest::prop_assert_eq!(c, crc32(&bytes));
            proptest::prop_assert_eq!(c, bitwise_crc(&bytes));
            proptest::prop_assert_eq!(c, crc32fast::hash(&bytes));
        }
    }

    fn empty_traj() -> Message {
        Message::Trajectory(TrajectoryMsg {
            seq: 7,
            timestamp: 1.5,
            gear: Gear::Forward,
            mode_hint: ModeHint::Auto,
            points: vec![],
        })
    }

    #[test]
    fn empty_trajectory_frame_is_32_bytes() {
        let bytes = encode(&empty_traj()).unwrap();
        assert_eq!(bytes.len(), 10 + 18 + 4);
        assert_eq!(&bytes[..4], b"FTNA");
        assert_eq!(bytes[4], 0x01);
        assert_eq!(bytes[5], 0x01);
        assert_eq!(u32::from_le_bytes(bytes[6..10].try_into().unwrap()), 18);
        assert_eq!(decode(&bytes), Ok(empty_traj()));
        assert_eq!(encode(&empty_traj()).unwrap(), bytes);
    }

    #[test]
    fn fixed_payload_sizes() {
        let loc = Message::Localization(LocalizationMsg::default());
        assert_eq!(encode(&loc).unwrap().len(), HEADER_LEN + 61 + CRC_LEN);
        let cmd = Message::ControlCommand(ControlCommand::default());
        assert_eq!(encode(&cmd).unwrap().len(), HEADER_LEN + 47 + CRC_LEN);
        let hmi = Message::HmiCommand(HmiCommand {
            seq: 0,
            timestamp: 0.0,
            command: HmiAction::Engage,
        });
        assert_eq!(encode(&hmi).unwrap().len(), HEADER_LEN + 13 + CRC_LEN);
    }

    #[test]
    fn oversized_trajectory_is_refused() {
        let m = TrajectoryMsg {
            points: vec![TrajectoryPoint::default(); 1024],
            ..Default::default()
        };
        assert_eq!(
            encode(&Message::Trajectory(m)),
            Err(EncodeError::PayloadTooLarge(18 + 64 * 1024))
        );
        let m = TrajectoryMsg {
            points: vec![TrajectoryPoint::default(); 1023],
            ..Default::default()
        };
        assert!(encode(&Message::Trajectory(m)).is_ok());
    }

    #[test]
    fn header_errors_are_distinct() {
        let good = encode(&empty_traj()).unwrap();

        let mut b = good.clone();
        b[0] = b'X';
        assert_eq!(decode(&b), Err(DecodeError::BadMagic));

        let mut b = good.clone();
        b[4] = 2;
        assert_eq!(decode(&b), Err(DecodeError::BadVersion(2)));

        assert_eq!(decode(&good[..good.len() - 1]), Err(DecodeError::BadLength));
        assert_eq!(decode(&good[..3]), Err(DecodeError::BadLength));

        let mut b = good.clone();
        b[HEADER_LEN] ^= 0x01;
        assert!(matches!(decode(&b), Err(DecodeError::BadCrc { .. })));

        // a correctly checksummed frame with an unknown type byte
        let mut b = good[..good.len() - 4].to_vec();
        b[5] = 0x09;
        let crc = crc32(&b);
        b.extend_from_slice(&crc.to_le_bytes());
        assert_eq!(decode(&b), Err(DecodeError::UnknownType(0x09)));
    }

    #[test]
    fn inconsistent_point_count_is_bad_length() {
        let mut b = encode(&empty_traj()).unwrap();
        b.truncate(b.len() - 4);
        b[HEADER_LEN + 14] = 1; // point_count = 1 with no point bytes
        let crc = crc32(&b);
        b.extend_from_slice(&crc.to_le_bytes());
        assert_eq!(decode(&b), Err(DecodeError::BadLength));
    }

    #[test]
    fn headings_are_wrapped_on_decode() {
        let loc = LocalizationMsg {
            theta: 4.0,
            ..Default::default()
        };
        let Message::Localization(back) = decode(&encode(&loc.into()).unwrap()).unwrap() else {
            panic!("wrong type");
        };
        assert!((back.theta - (4.0 - core::f64::consts::TAU)).abs() < 1e-15);
    }

    fn loc(seq: u32) -> Vec<u8> {
        encode(&Message::Localization(LocalizationMsg {
            seq,
            ..Default::default()
        }))
        .unwrap()
    }

    #[test]
    fn latest_wins_keeps_max_seq() {
        let frames = [loc(3), loc(5), loc(4)];
        let (msg, bad) = latest_of(frames.iter().map(Vec::as_slice), MsgType::Localization);
        assert_eq!(msg.unwrap().seq(), 5);
        assert_eq!(bad, 0);
    }

    #[test]
    fn latest_wins_skips_corrupt_and_empty() {
        let mut corrupt = loc(9);
        corrupt[20] ^= 0xFF;
        let (msg, bad) = latest_of([corrupt.as_slice()], MsgType::Localization);
        assert!(msg.is_none());
        assert_eq!(bad, 1);
        let (msg, _) = latest_of(core::iter::empty(), MsgType::Localization);
        assert!(msg.is_none());
        let (msg, _) = latest_of([loc(1).as_slice()], MsgType::Trajectory);
        assert!(msg.is_none());
    }

    #[test]
    fn duplicate_seq_keeps_first() {
        let mut mb = LatestWins::new();
        let a = LocalizationMsg {
            seq: 2,
            x: 1.0,
            ..Default::default()
        };
        let b = LocalizationMsg {
            seq: 2,
            x: 2.0,
            ..Default::default()
        };
        assert!(mb.offer(a.into()));
        assert!(!mb.offer(b.into()));
        assert_eq!(mb.take(), Some(Message::Localization(a)));
        // already delivered seq 2; an older or equal one must not come back
        assert!(!mb.offer(
            LocalizationMsg {
                seq: 1,
                ..Default::default()
            }
            .into()
        ));
        assert!(!mb.offer(b.into()));
        assert!(mb.take().is_none());
        assert!(mb.offer(
            LocalizationMsg {
                seq: 3,
                ..Default::default()
            }
            .into()
        ));
    }
}
