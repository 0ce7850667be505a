use core::f64::consts::PI;

use proptest::collection::vec;
use proptest::prelude::*;
use tracklink_core::control::ControlMode;
use tracklink_core::messages::*;
use tracklink_core::supervisor::{FaultCause, FsmState};
use tracklink_core::wire::{self, DecodeError, Message, CRC_LEN, HEADER_LEN};

fn heading() -> impl Strategy<Value = f64> {
    (-PI..=PI).prop_filter("wrapped", |h| *h > -PI)
}

fn real() -> impl Strategy<Value = f64> {
    -1e4..1e4f64
}

fn gear() -> impl Strategy<Value = Gear> {
    prop_oneof![
        Just(Gear::Forward),
        Just(Gear::Reverse),
        Just(Gear::Neutral)
    ]
}

fn point() -> impl Strategy<Value = TrajectoryPoint> {
    (
        real(),
        real(),
        heading(),
        real(),
        real(),
        0.0..40.0f64,
        real(),
        real(),
    )
        .prop_map(
            |(x, y, theta, kappa, s, v, a, relative_time)| TrajectoryPoint {
                x,
                y,
                theta,
                kappa,
                s,
                v,
                a,
                relative_time,
            },
        )
}

fn message() -> impl Strategy<Value = Message> {
    let traj = (any::<u32>(), real(), gear(), 0u8..3, vec(point(), 0..40)).prop_map(
        |(seq, timestamp, gear, hint, points)| {
            Message::Trajectory(TrajectoryMsg {
                seq,
                timestamp,
                gear,
                mode_hint: ModeHint::from_u8(hint).unwrap(),
                points,
            })
        },
    );
    let loc = (
        any::<u32>(),
        real(),
        real(),
        real(),
        heading(),
        real(),
        real(),
        real(),
        0u8..3,
    )
        .prop_map(|(seq, timestamp, x, y, theta, v, yaw_rate, a, st)| {
            Message::Localization(LocalizationMsg {
                seq,
                timestamp,
                x,
                y,
                theta,
                v,
                yaw_rate,
                a,
                status: LocStatus::from_u8(st).unwrap(),
            })
        });
    let cmd = (
        any::<u32>(),
        real(),
        real(),
        real(),
        gear(),
        any::<bool>(),
        0.0..1.0f64,
        0.0..1.0f64,
        1u8..4,
    )
        .prop_map(
            |(
                seq,
                timestamp,
                accel_cmd,
                steer_wheel_cmd,
                gear_cmd,
                direct,
                throttle,
                brake,
                mode,
            )| {
                Message::ControlCommand(ControlCommand {
                    seq,
                    timestamp,
                    accel_cmd,
                    steer_wheel_cmd,
                    gear_cmd,
                    direct_actuation: direct,
                    throttle,
                    brake,
                    mode: ControlMode::from_u8(mode).unwrap(),
                })
            },
        );
    let hmi = (any::<u32>(), real(), 0u8..3).prop_map(|(seq, timestamp, c)| {
        Message::HmiCommand(HmiCommand {
            seq,
            timestamp,
            command: HmiAction::from_u8(c).unwrap(),
        })
    });
    let status = (
        any::<u32>(),
        real(),
        0usize..5,
        0u8..4,
        0u8..26,
        real(),
        heading(),
        real(),
    )
        .prop_map(
            |(seq, timestamp, fsm, mode, cause, lateral_error, heading_error, speed_error)| {
                Message::ControllerStatus(ControllerStatus {
                    seq,
                    timestamp,
                    fsm: FsmState::ALL[fsm],
                    mode: ControlMode::from_u8(mode),
                    cause: FaultCause::from_u8(cause),
                    lateral_error,
                    heading_error,
                    speed_error,
                })
            },
        );
    prop_oneof![traj, loc, cmd, hmi, status]
}

proptest! {
    #[test]
    fn roundtrip_is_exact(msg in message()) {
        let frame = wire::encode(&msg).unwrap();
        let back = wire::decode(&frame).unwrap();
        prop_assert_eq!(&back, &msg);
        prop_assert_eq!(wire::encode(&back).unwrap(), frame);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in vec(any::<u8>(), 0..600)) {
        let _ = wire::decode(&bytes);
    }

    #[test]
    fn framed_garbage_is_rejected_or_decoded(kind in 1u8..6, payload in vec(any::<u8>(), 0..300)) {
        let mut frame = b"FTNA".to_vec();
        frame.push(wire::VERSION);
        frame.push(kind);
        frame.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        frame.extend_from_slice(&payload);
        let crc = wire::crc32(&frame);
        frame.extend_from_slice(&crc.to_le_bytes());
        if let Ok(msg) = wire::decode(&frame) {
            prop_assert_eq!(msg.msg_type().to_u8(), kind);
        }
    }

    #[test]
    fn payload_bit_flip_is_bad_crc(msg in message(), pick in any::<usize>(), bit in 0u8..8) {
        let mut frame = wire::encode(&msg).unwrap();
        let payload = frame.len() - HEADER_LEN - CRC_LEN;
        prop_assume!(payload > 0);
        frame[HEADER_LEN + pick % payload] ^= 1 << bit;
        let is_bad_crc = matches!(wire::decode(&frame), Err(DecodeError::BadCrc { .. }));
        prop_assert!(is_bad_crc);
    }
}
