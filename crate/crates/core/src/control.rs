//! Frenet-frame tracking errors and the longitudinal/lateral control law.
//!
//! The law is a cascaded feedback with feedforward:
//!
//! - longitudinal, trajectory mode: `a = a_ref + k_s * e_s + k_v * e_v`
//! - longitudinal, path mode: `a = k_v * (v_path - v)`
//! - lateral: `kappa = kappa_ref - k_d * d - k_psi * e_psi`, converted to a steering wheel angle
//!   through the kinematic bicycle relation `delta = atan(L * kappa)` and the steering ratio.
//!
//! Both commands then pass through absolute and rate limits every cycle.

use crate::angle;
use crate::messages::{ControlCommand, Gear, LocalizationMsg};
use crate::reference::ReferencePoint;

/// Which control law runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControlMode {
    /// Time-parametrized tracking with station error feedback.
    #[default]
    Trajectory,
    /// Geometric tracking of the closest point; time is ignored.
    Path,
    /// Path tracking laterally while ramping speed down to zero.
    Stop,
}

impl ControlMode {
    pub fn to_u8(self) -> u8 {
        match self {
            ControlMode::Trajectory => 1,
            ControlMode::Path => 2,
            ControlMode::Stop => 3,
        }
    }

    pub fn from_u8(raw: u8) -> Option<Self> {
        match raw {
            1 => Some(ControlMode::Trajectory),
            2 => Some(ControlMode::Path),
            3 => Some(ControlMode::Stop),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ControlMode::Trajectory => "TRAJECTORY",
            ControlMode::Path => "PATH",
            ControlMode::Stop => "STOP",
        }
    }
}

/// Tracking errors at the reference point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrenetError {
    /// Along-track distance from the vehicle to the reference point, positive when the
    /// vehicle lags behind it. Zero in path and stop modes.
    pub e_s: f64,
    /// Lateral offset, positive left of the reference tangent.
    pub d: f64,
    /// `theta - theta_ref`, wrapped.
    pub e_psi: f64,
    /// `v * sin(e_psi)`.
    pub d_dot: f64,
    /// Reference speed (signed by gear) minus vehicle speed.
    pub e_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlGains {
    pub k_s: f64,
    pub k_v: f64,
    pub k_d: f64,
    pub k_psi: f64,
    /// Speed feedback used while stopping [1/s].
    pub k_stop: f64,
    /// Deceleration bound while stopping [m/s^2].
    pub stop_decel: f64,
    /// Above this speed `k_d` shrinks as (v0/|v|)^2 and `k_psi` as v0/|v|, which holds the
    /// lateral loop's bandwidth at its v0 value [m/s]. Infinity disables scheduling.
    pub schedule_speed: f64,
}

impl Default for ControlGains {
    fn default() -> Self {
        Self {
            k_s: 0.5,
            k_v: 1.0,
            k_d: 0.08,
            k_psi: 0.6,
            k_stop: 4.0,
            stop_decel: 3.0,
            schedule_speed: 5.0,
        }
    }
}

impl ControlGains {
    /// `(k_d, k_psi)` in effect at speed `v`.
    pub fn lateral_at(&self, v: f64) -> (f64, f64) {
        let speed = libm::fabs(v);
        if speed <= self.schedule_speed {
            return (self.k_d, self.k_psi);
        }
        let r = self.schedule_speed / speed;
        (self.k_d * r * r, self.k_psi * r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    pub wheelbase: f64,
    /// Steering wheel angle per road-wheel angle.
    pub steering_ratio: f64,
    pub accel_min: f64,
    pub accel_max: f64,
    /// [m/s^3]
    pub accel_rate: f64,
    /// Absolute steering wheel limit [rad].
    pub steer_wheel_max: f64,
    /// [rad/s]
    pub steer_wheel_rate: f64,
    pub max_road_wheel: f64,
    /// Below this speed path and stop modes drive throttle and brake directly.
    pub direct_actuation_speed: f64,
    /// Acceleration produced by full throttle.
    pub throttle_full_accel: f64,
    /// Deceleration produced by full brake.
    pub brake_full_decel: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            wheelbase: 2.8,
            steering_ratio: 14.0,
            accel_min: -4.0,
            accel_max: 2.0,
            accel_rate: 5.0,
            steer_wheel_max: 7.85,
            steer_wheel_rate: 6.0,
            max_road_wheel: 0.6,
            direct_actuation_speed: 2.0,
            throttle_full_accel: 2.0,
            brake_full_decel: 4.0,
        }
    }
}

fn gear_sign(gear: Gear) -> f64 {
    if gear == Gear::Reverse {
        -1.0
    } else {
        1.0
    }
}

pub fn frenet_errors(
    pose: &LocalizationMsg,
    reference: &ReferencePoint,
    mode: ControlMode,
    gear: Gear,
) -> FrenetError {
    let (sin_r, cos_r) = libm::sincos(reference.theta);
    let (dx, dy) = (pose.x - reference.x, pose.y - reference.y);
    let d = -sin_r * dx + cos_r * dy;
    let e_s = match mode {
        ControlMode::Trajectory => -(cos_r * dx + sin_r * dy),
        ControlMode::Path | ControlMode::Stop => 0.0,
    };
    let e_psi = angle::wrap(pose.theta - reference.theta);
    FrenetError {
        e_s,
        d,
        e_psi,
        d_dot: pose.v * libm::sin(e_psi),
        e_v: gear_sign(gear) * reference.v - pose.v,
    }
}

/// Unlimited acceleration request. `v` is the signed vehicle speed.
pub fn longitudinal_cmd(
    err: &FrenetError,
    reference: &ReferencePoint,
    gains: &ControlGains,
    mode: ControlMode,
    gear: Gear,
    v: f64,
) -> f64 {
    match mode {
        ControlMode::Trajectory => {
            gear_sign(gear) * reference.a + gains.k_s * err.e_s + gains.k_v * err.e_v
        }
        ControlMode::Path => gains.k_v * err.e_v,
        ControlMode::Stop => -(gains.k_stop * v).clamp(-gains.stop_decel, gains.stop_decel),
    }
}

/// Unlimited steering wheel request at vehicle speed `v`.
///
/// Reversing flips the heading-error feedback: the lateral offset keeps its sign in the
/// vehicle frame while the travel direction inverts.
pub fn lateral_cmd(
    err: &FrenetError,
    reference: &ReferencePoint,
    gains: &ControlGains,
    params: &VehicleParams,
    gear: Gear,
    v: f64,
) -> f64 {
    let (k_d, k_psi) = gains.lateral_at(v);
    let kappa = reference.kappa - k_d * err.d - gear_sign(gear) * k_psi * err.e_psi;
    let road =
        libm::atan(params.wheelbase * kappa).clamp(-params.max_road_wheel, params.max_road_wheel);
    params.steering_ratio * road
}

/// Clamps `raw` into `[min, max]`, then to within `rate * dt` of `prev`.
pub fn apply_limits(raw: f64, prev: f64, min: f64, max: f64, rate: f64, dt: f64) -> f64 {
    debug_assert!(dt > 0.0);
    let step = rate * dt;
    raw.clamp(min, max).clamp(prev - step, prev + step)
}

/// Throttle and brake for a signed acceleration, relative to the gear's travel direction.
pub fn direct_map(accel: f64, gear: Gear, params: &VehicleParams) -> (f64, f64) {
    let along = gear_sign(gear) * accel;
    if along > 0.0 {
        ((along / params.throttle_full_accel).min(1.0), 0.0)
    } else if along < 0.0 {
        (0.0, (-along / params.brake_full_decel).min(1.0))
    } else {
        (0.0, 0.0)
    }
}

/// Everything one control cycle computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub command: ControlCommand,
    pub errors: FrenetError,
    pub accel_raw: f64,
    pub steer_raw: f64,
}

/// Inputs that stay fixed for a cycle besides pose and reference.
#[derive(Debug, Clone, Copy)]
pub struct ControlContext<'a> {
    pub mode: ControlMode,
    pub gear: Gear,
    pub gains: &'a ControlGains,
    pub params: &'a VehicleParams,
    pub dt: f64,
}

/// One control cycle: errors, control law, limits and actuation mapping.
pub fn control_step(
    loc: &LocalizationMsg,
    reference: &ReferencePoint,
    ctx: &ControlContext<'_>,
    prev: &ControlCommand,
    seq: u32,
    timestamp: f64,
) -> ControlOutput {
    let p = ctx.params;
    let errors = frenet_errors(loc, reference, ctx.mode, ctx.gear);
    let accel_raw = longitudinal_cmd(&errors, reference, ctx.gains, ctx.mode, ctx.gear, loc.v);
    let steer_raw = lateral_cmd(&errors, reference, ctx.gains, p, ctx.gear, loc.v);
    let accel_cmd = apply_limits(
        accel_raw,
        prev.accel_cmd,
        p.accel_min,
        p.accel_max,
        p.accel_rate,
        ctx.dt,
    );
    let steer_wheel_cmd = apply_limits(
        steer_raw,
        prev.steer_wheel_cmd,
        -p.steer_wheel_max,
        p.steer_wheel_max,
        p.steer_wheel_rate,
        ctx.dt,
    );
    let direct_actuation =
        ctx.mode != ControlMode::Trajectory && libm::fabs(loc.v) < p.direct_actuation_speed;
    let (throttle, brake) = if direct_actuation {
        direct_map(accel_cmd, ctx.gear, p)
    } else {
        (0.0, 0.0)
    };
    ControlOutput {
        command: ControlCommand {
            seq,
            timestamp,
            accel_cmd,
            steer_wheel_cmd,
            gear_cmd: ctx.gear,
            direct_actuation,
            throttle,
            brake,
            mode: ctx.mode,
        },
        errors,
        accel_raw,
        steer_raw,
    }
}
