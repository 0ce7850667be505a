//! Domain messages exchanged between planner, localization, controller, vehicle gateway and HMI,
//! with the data and time validity checks the supervisor runs on every input.
//!
//! All times are seconds on the localization time base. Poses live in one planar Cartesian
//! world frame (x east, y north, headings counter-clockwise from +x).

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::control::ControlMode;
use crate::supervisor::{FaultCause, FsmState};

/// Upper bound on the number of samples in one trajectory.
pub const MAX_TRAJECTORY_POINTS: usize = 1000;

/// One sample of a planned trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrajectoryPoint {
    pub x: f64,
    pub y: f64,
    /// Vehicle heading in `(-pi, pi]`.
    pub theta: f64,
    pub kappa: f64,
    /// Arc length along the trajectory.
    pub s: f64,
    /// Speed magnitude, never negative. Reverse travel is expressed by the message gear.
    pub v: f64,
    pub a: f64,
    /// Offset from the trajectory timestamp.
    pub relative_time: f64,
}

impl TrajectoryPoint {
    fn fields(&self) -> [f64; 8] {
        [
            self.x,
            self.y,
            self.theta,
            self.kappa,
            self.s,
            self.v,
            self.a,
            self.relative_time,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.is_finite())
    }
}

/// Drive direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gear {
    Forward,
    Reverse,
    #[default]
    Neutral,
}

impl Gear {
    /// +1, -1 or 0.
    pub fn sign(self) -> f64 {
        match self {
            Gear::Forward => 1.0,
            Gear::Reverse => -1.0,
            Gear::Neutral => 0.0,
        }
    }

    pub fn to_i8(self) -> i8 {
        match self {
            Gear::Forward => 1,
            Gear::Reverse => -1,
            Gear::Neutral => 0,
        }
    }

    pub fn from_i8(raw: i8) -> Option<Self> {
        match raw {
            1 => Some(Gear::Forward),
            -1 => Some(Gear::Reverse),
            0 => Some(Gear::Neutral),
            _ => None,
        }
    }
}

/// Tracking mode requested by the planner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeHint {
    #[default]
    Auto,
    Trajectory,
    Path,
}

impl ModeHint {
    pub fn to_u8(self) -> u8 {
        match self {
            ModeHint::Auto => 0,
            ModeHint::Trajectory => 1,
            ModeHint::Path => 2,
        }
    }

    pub fn from_u8(raw: u8) -> Option<Self> {
        match raw {
            0 => Some(ModeHint::Auto),
            1 => Some(ModeHint::Trajectory),
            2 => Some(ModeHint::Path),
            _ => None,
        }
    }
}

/// A sampled trajectory over a backward and forward horizon around `timestamp`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryMsg {
    pub seq: u32,
    pub timestamp: f64,
    /// Forward or reverse. A trajectory never carries neutral once validated.
    pub gear: Gear,
    pub mode_hint: ModeHint,
    pub points: Vec<TrajectoryPoint>,
}

impl TrajectoryMsg {
    /// Absolute time of the last sample.
    pub fn horizon_end(&self) -> Option<f64> {
        self.points.last().map(|p| self.timestamp + p.relative_time)
    }

    pub fn max_speed(&self) -> f64 {
        self.points
            .iter()
            .fold(0.0, |m, p| if p.v > m { p.v } else { m })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocStatus {
    #[default]
    Ok,
    Degraded,
    Invalid,
}

impl LocStatus {
    pub fn to_u8(self) -> u8 {
        match self {
            LocStatus::Ok => 0,
            LocStatus::Degraded => 1,
            LocStatus::Invalid => 2,
        }
    }

    pub fn from_u8(raw: u8) -> Option<Self> {
        match raw {
            0 => Some(LocStatus::Ok),
            1 => Some(LocStatus::Degraded),
            2 => Some(LocStatus::Invalid),
            _ => None,
        }
    }
}

/// Filtered vehicle pose and twist. Its timestamp is the common time base.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalizationMsg {
    pub seq: u32,
    pub timestamp: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    /// Signed longitudinal speed, negative when reversing.
    pub v: f64,
    pub yaw_rate: f64,
    pub a: f64,
    pub status: LocStatus,
}

impl LocalizationMsg {
    pub fn is_finite(&self) -> bool {
        [
            self.timestamp,
            self.x,
            self.y,
            self.theta,
            self.v,
            self.yaw_rate,
            self.a,
        ]
        .iter()
        .all(|f| f.is_finite())
    }
}

/// High-level command for the vehicle gateway.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlCommand {
    pub seq: u32,
    pub timestamp: f64,
    /// Signed longitudinal acceleration along the vehicle x axis.
    pub accel_cmd: f64,
    pub steer_wheel_cmd: f64,
    pub gear_cmd: Gear,
    /// Throttle and brake are authoritative instead of `accel_cmd`.
    pub direct_actuation: bool,
    pub throttle: f64,
    pub brake: f64,
    pub mode: ControlMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmiAction {
    Disengage,
    Engage,
    EmergencyStop,
}

impl HmiAction {
    pub fn to_u8(self) -> u8 {
        match self {
            HmiAction::Disengage => 0,
            HmiAction::Engage => 1,
            HmiAction::EmergencyStop => 2,
        }
    }

    pub fn from_u8(raw: u8) -> Option<Self> {
        match raw {
            0 => Some(HmiAction::Disengage),
            1 => Some(HmiAction::Engage),
            2 => Some(HmiAction::EmergencyStop),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HmiCommand {
    pub seq: u32,
    pub timestamp: f64,
    pub command: HmiAction,
}

/// Per-cycle controller status, published for observability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerStatus {
    pub seq: u32,
    pub timestamp: f64,
    pub fsm: FsmState,
    pub mode: Option<ControlMode>,
    pub cause: Option<FaultCause>,
    /// Tracking-quality metric: current lateral error, zero when not tracking.
    pub lateral_error: f64,
    pub heading_error: f64,
    pub speed_error: f64,
}

/// Why an input was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rejection {
    Stale,
    NonMonotonic,
    NonFinite,
    Empty,
    HorizonTooShort,
    StatusInvalid,
    /// Finite but outside the type's range: heading not normalized, negative speed,
    /// neutral trajectory gear or too many points.
    OutOfRange,
}

impl Rejection {
    pub const ALL: [Rejection; 7] = [
        Rejection::Stale,
        Rejection::NonMonotonic,
        Rejection::NonFinite,
        Rejection::Empty,
        Rejection::HorizonTooShort,
        Rejection::StatusInvalid,
        Rejection::OutOfRange,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Rejection::Stale => "STALE",
            Rejection::NonMonotonic => "NON_MONOTONIC",
            Rejection::NonFinite => "NON_FINITE",
            Rejection::Empty => "EMPTY",
            Rejection::HorizonTooShort => "HORIZON_TOO_SHORT",
            Rejection::StatusInvalid => "STATUS_INVALID",
            Rejection::OutOfRange => "OUT_OF_RANGE",
        }
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `Ok(())` when the message may be used, otherwise the first failed check.
pub type ValidationResult = Result<(), Rejection>;

/// Input watchdog thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WatchdogConfig {
    pub traj_max_age: f64,
    pub loc_max_age: f64,
    pub min_forward_horizon: f64,
}

impl Default for WatchdogConfig {
    fn default() -> Self {
        Self {
            traj_max_age: 0.5,
            loc_max_age: 0.1,
            min_forward_horizon: 1.0,
        }
    }
}

fn theta_in_range(theta: f64) -> bool {
    theta > -PI && theta <= PI
}

/// Data and time validity of a trajectory at time `now`.
pub fn validate_trajectory(
    msg: &TrajectoryMsg,
    now: f64,
    cfg: &WatchdogConfig,
) -> ValidationResult {
    if !msg.timestamp.is_finite() || !msg.points.iter().all(TrajectoryPoint::is_finite) {
        return Err(Rejection::NonFinite);
    }
    if msg.points.len() < 2 {
        return Err(Rejection::Empty);
    }
    if msg.points.len() > MAX_TRAJECTORY_POINTS
        || msg.gear == Gear::Neutral
        || msg
            .points
            .iter()
            .any(|p| !theta_in_range(p.theta) || p.v < 0.0)
    {
        return Err(Rejection::OutOfRange);
    }
    let monotonic = msg
        .points
        .windows(2)
        .all(|w| w[1].relative_time > w[0].relative_time && w[1].s >= w[0].s);
    if !monotonic {
        return Err(Rejection::NonMonotonic);
    }
    if now - msg.timestamp > cfg.traj_max_age {
        return Err(Rejection::Stale);
    }
    let end = msg.timestamp + msg.points[msg.points.len() - 1].relative_time;
    if end < now + cfg.min_forward_horizon {
        return Err(Rejection::HorizonTooShort);
    }
    Ok(())
}

/// Data and time validity of a localization message at time `now`.
pub fn validate_localization(
    msg: &LocalizationMsg,
    now: f64,
    cfg: &WatchdogConfig,
) -> ValidationResult {
    if !msg.is_finite() {
        return Err(Rejection::NonFinite);
    }
    if msg.status == LocStatus::Invalid {
        return Err(Rejection::StatusInvalid);
    }
    if now - msg.timestamp > cfg.loc_max_age {
        return Err(Rejection::Stale);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn point(t: f64, x: f64) -> TrajectoryPoint {
        TrajectoryPoint {
            x,
            s: x,
            v: 1.0,
            relative_time: t,
            ..Default::default()
        }
    }

    fn two_point() -> TrajectoryMsg {
        TrajectoryMsg {
            seq: 1,
            timestamp: 10.0,
            gear: Gear::Forward,
            mode_hint: ModeHint::Auto,
            points: vec![point(0.0, 0.0), point(8.0, 8.0)],
        }
    }

    fn loc(timestamp: f64) -> LocalizationMsg {
        LocalizationMsg {
            seq: 1,
            timestamp,
            ..Default::default()
        }
    }

    #[test]
    fn well_formed_trajectory_is_valid() {
        assert_eq!(
            validate_trajectory(&two_point(), 10.0, &WatchdogConfig::default()),
            Ok(())
        );
    }

    #[test]
    fn nan_is_rejected() {
        let mut m = two_point();
        m.points[1].x = f64::NAN;
        assert_eq!(
            validate_trajectory(&m, 10.0, &WatchdogConfig::default()),
            Err(Rejection::NonFinite)
        );
        m.points[1].x = 1.0;
        m.timestamp = f64::INFINITY;
        assert_eq!(
            validate_trajectory(&m, 10.0, &WatchdogConfig::default()),
            Err(Rejection::NonFinite)
        );
    }

    #[test]
    fn repeated_time_is_non_monotonic() {
        let mut m = two_point();
        m.points[1].relative_time = 0.0;
        assert_eq!(
            validate_trajectory(&m, 10.0, &WatchdogConfig::default()),
            Err(Rejection::NonMonotonic)
        );
        let mut m = two_point();
        m.points[1].s = -1.0;
        assert_eq!(
            validate_trajectory(&m, 10.0, &WatchdogConfig::default()),
            Err(Rejection::NonMonotonic)
        );
    }

    #[test]
    fn old_trajectory_is_stale() {
        // 0.6 s old against the 0.5 s default
        assert_eq!(
            validate_trajectory(&two_point(), 10.6, &WatchdogConfig::default()),
            Err(Rejection::Stale)
        );
        assert_eq!(
            validate_trajectory(&two_point(), 10.5, &WatchdogConfig::default()),
            Ok(())
        );
    }

    #[test]
    fn short_or_empty_trajectory() {
        let mut m = two_point();
        m.points[1].relative_time = 0.5;
        assert_eq!(
            validate_trajectory(&m, 10.0, &WatchdogConfig::default()),
            Err(Rejection::HorizonTooShort)
        );
        m.points.truncate(1);
        assert_eq!(
            validate_trajectory(&m, 10.0, &WatchdogConfig::default()),
            Err(Rejection::Empty)
        );
        m.points.clear();
        assert_eq!(
            validate_trajectory(&m, 10.0, &WatchdogConfig::default()),
            Err(Rejection::Empty)
        );
    }

    #[test]
    fn out_of_range_fields() {
        let cfg = WatchdogConfig::default();
        let mut m = two_point();
        m.points[0].v = -0.1;
        assert_eq!(
            validate_trajectory(&m, 10.0, &cfg),
            Err(Rejection::OutOfRange)
        );
        let mut m = two_point();
        m.points[0].theta = -PI;
        assert_eq!(
            validate_trajectory(&m, 10.0, &cfg),
            Err(Rejection::OutOfRange)
        );
        let mut m = two_point();
        m.gear = Gear::Neutral;
        assert_eq!(
            validate_trajectory(&m, 10.0, &cfg),
            Err(Rejection::OutOfRange)
        );
    }

    #[test]
    fn localization_checks() {
        let cfg = WatchdogConfig::default();
        assert_eq!(validate_localization(&loc(5.0), 5.0, &cfg), Ok(()));
        let mut bad = loc(5.0);
        bad.status = LocStatus::Invalid;
        assert_eq!(
            validate_localization(&bad, 5.0, &cfg),
            Err(Rejection::StatusInvalid)
        );
        // 0.15 s old against the 0.1 s default
        assert_eq!(
            validate_localization(&loc(5.0), 5.15, &cfg),
            Err(Rejection::Stale)
        );
        let mut nan = loc(5.0);
        nan.yaw_rate = f64::NAN;
        assert_eq!(
            validate_localization(&nan, 5.0, &cfg),
            Err(Rejection::NonFinite)
        );
        let mut degraded = loc(5.0);
        degraded.status = LocStatus::Degraded;
        assert_eq!(validate_localization(&degraded, 5.0, &cfg), Ok(()));
    }

    fn any_f64() -> impl Strategy<Value = f64> {
        prop_oneof![
            8 => -10.0f64..10.0,
            1 => Just(f64::NAN),
            1 => Just(f64::INFINITY),
            1 => Just(-4.0f64),
        ]
    }

    prop_compose! {
        fn arb_point()(x in any_f64(), y in any_f64(), theta in any_f64(), kappa in any_f64(),
                       s in any_f64(), v in any_f64(), a in any_f64(), t in any_f64())
                       -> TrajectoryPoint {
            TrajectoryPoint { x, y, theta, kappa, s, v, a, relative_time: t }
        }
    }

    proptest! {
        #[test]
        fn accepted_trajectories_satisfy_point_invariants(
            points in proptest::collection::vec(arb_point(), 0..6),
            ts in any_f64(),
            now in -10.0f64..10.0,
        ) {
            let msg = TrajectoryMsg { seq: 0, timestamp: ts, gear: Gear::Forward,
                                      mode_hint: ModeHint::Auto, points };
            let cfg = WatchdogConfig { traj_max_age: 100.0, loc_max_age: 0.1,
                                       min_forward_horizon: -100.0 };
            let r1 = validate_trajectory(&msg, now, &cfg);
            prop_assert_eq!(r1, validate_trajectory(&msg, now, &cfg));
            if r1.is_ok() {
                for p in &msg.points {
                    prop_assert!(p.is_finite());
                    prop_assert!(p.theta > -PI && p.theta <= PI);
                    prop_assert!(p.v >= 0.0);
                }
                for w in msg.points.windows(2) {
                    prop_assert!(w[1].relative_time > w[0].relative_time);
                    prop_assert!(w[1].s >= w[0].s);
                }
            }
        }
    }
}
