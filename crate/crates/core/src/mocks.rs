//! Mock planner and mock localization.
//!
//! The planner samples an analytic reference (straight, arc, lane change, stop, reverse
//! straight) around the current time. Every plan is cut from the same path and the same
//! speed profile, so consecutive plans agree wherever they overlap and the controller's
//! convergence is never disturbed by planner feedback.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::angle;
use crate::messages::{
    Gear, LocStatus, LocalizationMsg, ModeHint, TrajectoryMsg, TrajectoryPoint,
    MAX_TRAJECTORY_POINTS,
};
use crate::vehicle_sim::PlantState;

/// Speed cap of reverse maneuvers [m/s].
pub const REVERSE_MAX_SPEED: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Straight,
    Arc,
    LaneChange,
    Stop,
    ReverseStraight,
}

impl Shape {
    pub const ALL: [Shape; 5] = [
        Shape::Straight,
        Shape::Arc,
        Shape::LaneChange,
        Shape::Stop,
        Shape::ReverseStraight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Shape::Straight => "STRAIGHT",
            Shape::Arc => "ARC",
            Shape::LaneChange => "LANE_CHANGE",
            Shape::Stop => "STOP",
            Shape::ReverseStraight => "REVERSE_STRAIGHT",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Shape::ALL
            .into_iter()
            .find(|x| x.as_str().eq_ignore_ascii_case(s))
    }
}

/// Scripted events of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Engage,
    Disengage,
    EmergencyStop,
    /// The vehicle gateway reports a failed actuator from here on.
    ActuatorFault,
    /// The localization source goes silent from here on.
    LocalizationOutage,
    /// The planner goes silent from here on.
    PlannerOutage,
}

impl EventKind {
    pub const ALL: [EventKind; 6] = [
        EventKind::Engage,
        EventKind::Disengage,
        EventKind::EmergencyStop,
        EventKind::ActuatorFault,
        EventKind::LocalizationOutage,
        EventKind::PlannerOutage,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Engage => "engage",
            EventKind::Disengage => "disengage",
            EventKind::EmergencyStop => "emergency_stop",
            EventKind::ActuatorFault => "actuator_fault",
            EventKind::LocalizationOutage => "localization_outage",
            EventKind::PlannerOutage => "planner_outage",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        EventKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduledEvent {
    pub at: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub shape: Shape,
    /// Cruise speed [m/s]; reverse maneuvers cap it at [`REVERSE_MAX_SPEED`].
    pub speed: f64,
    /// Simulated run length [s].
    pub duration: f64,
    pub arc_radius: f64,
    pub lane_offset: f64,
    /// Arc length at which the lane change begins [m].
    pub lane_change_start: f64,
    /// Longitudinal distance of the lane change [m].
    pub lane_change_distance: f64,
    /// Scenario time at which a STOP shape starts braking [s].
    pub stop_start: f64,
    pub stop_decel: f64,
    pub replan_period: f64,
    pub sample_spacing: f64,
    pub backward_horizon: f64,
    pub forward_horizon: f64,
    pub noise_xy: f64,
    pub noise_theta: f64,
    pub loc_dropout: f64,
    pub loc_latency: f64,
    pub traj_drop: f64,
    /// Start pose offset to the left of the path [m].
    pub initial_offset: f64,
    pub initial_heading_error: f64,
    pub events: Vec<ScheduledEvent>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            shape: Shape::Straight,
            speed: 5.0,
            duration: 20.0,
            arc_radius: 20.0,
            lane_offset: 3.5,
            lane_change_start: 20.0,
            lane_change_distance: 40.0,
            stop_start: 0.0,
            stop_decel: 1.0,
            replan_period: 0.1,
            sample_spacing: 0.1,
            backward_horizon: 1.0,
            forward_horizon: 8.0,
            noise_xy: 0.0,
            noise_theta: 0.0,
            loc_dropout: 0.0,
            loc_latency: 0.0,
            traj_drop: 0.0,
            initial_offset: 0.0,
            initial_heading_error: 0.0,
            events: alloc::vec![ScheduledEvent {
                at: 0.0,
                kind: EventKind::Engage
            }],
        }
    }
}

/// A scenario field outside its allowed range.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub field: &'static str,
    pub reason: &'static str,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

impl core::error::Error for SpecError {}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        let err = |field, reason| Err(SpecError { field, reason });
        let positive = [
            ("duration", self.duration),
            ("arc_radius", self.arc_radius),
            ("lane_change_distance", self.lane_change_distance),
            ("stop_decel", self.stop_decel),
            ("replan_period", self.replan_period),
            ("sample_spacing", self.sample_spacing),
            ("backward_horizon", self.backward_horizon),
            ("forward_horizon", self.forward_horizon),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return err(field, "must be finite and > 0");
            }
        }
        let non_negative = [
            ("speed", self.speed),
            ("noise_xy", self.noise_xy),
            ("noise_theta", self.noise_theta),
            ("loc_latency", self.loc_latency),
            ("stop_start", self.stop_start),
        ];
        for (field, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return err(field, "must be finite and >= 0");
            }
        }
        for (field, p) in [
            ("loc_dropout", self.loc_dropout),
            ("traj_drop", self.traj_drop),
        ] {
            if !(0.0..1.0).contains(&p) {
                return err(field, "probability must lie in [0, 1)");
            }
        }
        for (field, v) in [
            ("lane_offset", self.lane_offset),
            ("lane_change_start", self.lane_change_start),
            ("initial_offset", self.initial_offset),
            ("initial_heading_error", self.initial_heading_error),
        ] {
            if !v.is_finite() {
                return err(field, "must be finite");
            }
        }
        if self.sample_count() > MAX_TRAJECTORY_POINTS {
            return err("sample_spacing", "horizon holds more than 1000 samples");
        }
        if self.events.iter().any(|e| !e.at.is_finite()) {
            return err("events", "event time must be finite");
        }
        Ok(())
    }

    /// Samples per plan.
    pub fn sample_count(&self) -> usize {
        libm::round((self.backward_horizon + self.forward_horizon) / self.sample_spacing) as usize
            + 1
    }

    pub fn gear(&self) -> Gear {
        if self.shape == Shape::ReverseStraight {
            Gear::Reverse
        } else {
            Gear::Forward
        }
    }

    /// Cruise speed after the reverse cap.
    pub fn cruise_speed(&self) -> f64 {
        if self.shape == Shape::ReverseStraight {
            self.speed.min(REVERSE_MAX_SPEED)
        } else {
            self.speed
        }
    }
}

/// Pose on the analytic path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub kappa: f64,
}

const GAUSS_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];
const ARC_PANELS: usize = 32;

/// Lateral quintic `offset * (10u^3 - 15u^4 + 6u^5)` over `u = (x - start) / distance`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LaneChange {
    start: f64,
    distance: f64,
    offset: f64,
}

impl LaneChange {
    fn u(&self, x: f64) -> f64 {
        ((x - self.start) / self.distance).clamp(0.0, 1.0)
    }

    fn y(&self, x: f64) -> f64 {
        let u = self.u(x);
        self.offset * u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }

    fn dy(&self, x: f64) -> f64 {
        let u = self.u(x);
        self.offset / self.distance * 30.0 * u * u * (1.0 - u) * (1.0 - u)
    }

    fn ddy(&self, x: f64) -> f64 {
        let u = self.u(x);
        self.offset / (self.distance * self.distance) * 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)
    }

    fn speed_factor(&self, x: f64) -> f64 {
        let d = self.dy(x);
        libm::sqrt(1.0 + d * d)
    }

    /// Arc length from `start` to `x` within the transition.
    fn transition_arc(&self, x: f64) -> f64 {
        let x = x.clamp(self.start, self.start + self.distance);
        let h = (x - self.start) / ARC_PANELS as f64;
        if h == 0.0 {
            return 0.0;
        }
        let mut total = 0.0;
        for k in 0..ARC_PANELS {
            let mid = self.start + (k as f64 + 0.5) * h;
            for (n, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
                total += w * self.speed_factor(mid + n * h / 2.0);
            }
        }
        total * h / 2.0
    }

    fn arc(&self, x: f64) -> f64 {
        let end = self.start + self.distance;
        if x <= self.start {
            x
        } else if x <= end {
            self.start + self.transition_arc(x)
        } else {
            self.start + self.transition_arc(end) + (x - end)
        }
    }

    fn x_at(&self, s: f64) -> f64 {
        if s <= self.start {
            return s;
        }
        let total = self.transition_arc(self.start + self.distance);
        if s >= self.start + total {
            return self.start + self.distance + (s - self.start - total);
        }
        let mut x = self.start + (s - self.start) * self.distance / total;
        for _ in 0..50 {
            let step = (self.arc(x) - s) / self.speed_factor(x);
            x -= step;
            if libm::fabs(step) < 1e-13 {
                break;
            }
        }
        x
    }

    fn pose(&self, s: f64) -> PathPose {
        let x = self.x_at(s);
        let (dy, ddy) = (self.dy(x), self.ddy(x));
        let q = 1.0 + dy * dy;
        PathPose {
            x,
            y: self.y(x),
            theta: libm::atan(dy),
            kappa: ddy / (q * libm::sqrt(q)),
        }
    }
}

/// The analytic reference of a scenario, parametrized by arc length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferencePath {
    Straight,
    /// Left-hand circle through the origin, heading +x at s = 0.
    Arc {
        radius: f64,
    },
    LaneChange(LaneChangeParams),
    /// Vehicle faces +x and travels toward -x.
    Reverse,
}

/// Public parameters of the lane change quintic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneChangeParams {
    pub start: f64,
    pub distance: f64,
    pub offset: f64,
}

impl ReferencePath {
    pub fn for_spec(spec: &ScenarioSpec) -> Self {
        match spec.shape {
            Shape::Straight | Shape::Stop => ReferencePath::Straight,
            Shape::Arc => ReferencePath::Arc {
                radius: spec.arc_radius,
            },
            Shape::LaneChange => ReferencePath::LaneChange(LaneChangeParams {
                start: spec.lane_change_start,
                distance: spec.lane_change_distance,
                offset: spec.lane_offset,
            }),
            Shape::ReverseStraight => ReferencePath::Reverse,
        }
    }

    pub fn pose(&self, s: f64) -> PathPose {
        match *self {
            ReferencePath::Straight => PathPose {
                x: s,
                y: 0.0,
                theta: 0.0,
                kappa: 0.0,
            },
            ReferencePath::Arc { radius } => {
                let phi = s / radius;
                PathPose {
                    x: radius * libm::sin(phi),
                    y: radius * (1.0 - libm::cos(phi)),
                    theta: angle::wrap(phi),
                    kappa: 1.0 / radius,
                }
            }
            ReferencePath::LaneChange(p) => LaneChange {
                start: p.start,
                distance: p.distance,
                offset: p.offset,
            }
            .pose(s),
            ReferencePath::Reverse => PathPose {
                x: -s,
                y: 0.0,
                theta: 0.0,
                kappa: 0.0,
            },
        }
    }
}

/// Arc length, speed and acceleration along the path as a function of scenario time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedProfile {
    pub cruise: f64,
    /// Braking starts here, if at all.
    pub brake_at: Option<f64>,
    pub decel: f64,
}

impl SpeedProfile {
    pub fn for_spec(spec: &ScenarioSpec) -> Self {
        SpeedProfile {
            cruise: spec.cruise_speed(),
            brake_at: (spec.shape == Shape::Stop).then_some(spec.stop_start),
            decel: spec.stop_decel,
        }
    }

    /// `(s, v, a)` at scenario time `t`.
    pub fn at(&self, t: f64) -> (f64, f64, f64) {
        let v0 = self.cruise;
        match self.brake_at {
            Some(t0) if t > t0 => {
                let dt = t - t0;
                let t_stop = v0 / self.decel;
                if dt < t_stop {
                    (
                        v0 * t - 0.5 * self.decel * dt * dt,
                        v0 - self.decel * dt,
                        -self.decel,
                    )
                } else {
                    (v0 * t0 + 0.5 * v0 * t_stop, 0.0, 0.0)
                }
            }
            _ => (v0 * t, v0, 0.0),
        }
    }
}

/// Samples the scenario's reference over the planning horizon around `now`.
pub fn gen_trajectory(spec: &ScenarioSpec, seq: u32, now: f64) -> TrajectoryMsg {
    let path = ReferencePath::for_spec(spec);
    let profile = SpeedProfile::for_spec(spec);
    let points = (0..spec.sample_count())
        .map(|k| {
            let rel = k as f64 * spec.sample_spacing - spec.backward_horizon;
            let (s, v, a) = profile.at(now + rel);
            let pose = path.pose(s);
            TrajectoryPoint {
                x: pose.x,
                y: pose.y,
                theta: angle::wrap(pose.theta),
                kappa: pose.kappa,
                s,
                v,
                a,
                relative_time: rel,
            }
        })
        .collect();
    TrajectoryMsg {
        seq,
        timestamp: now,
        gear: spec.gear(),
        mode_hint: ModeHint::Auto,
        points,
    }
}

/// Replans on a fixed period.
#[derive(Debug, Clone)]
pub struct MockPlanner {
    spec: ScenarioSpec,
    seq: u32,
    next_plan: f64,
}

impl MockPlanner {
    pub fn new(spec: ScenarioSpec) -> Self {
        Self {
            spec,
            seq: 0,
            next_plan: 0.0,
        }
    }

    /// A new plan if one is due at `now`.
    pub fn tick(&mut self, now: f64) -> Option<TrajectoryMsg> {
        // tolerance against the accumulated cycle clock
        if now + 1e-9 < self.next_plan {
            return None;
        }
        self.seq += 1;
        self.next_plan += self.spec.replan_period;
        Some(gen_trajectory(&self.spec, self.seq, now))
    }
}

/// Start pose: on the path at s = 0, shifted left by the initial offset, at cruise speed.
pub fn initial_state(spec: &ScenarioSpec) -> PlantState {
    let pose = ReferencePath::for_spec(spec).pose(0.0);
    let (sin_t, cos_t) = libm::sincos(pose.theta);
    let gear = spec.gear();
    PlantState {
        x: pose.x - sin_t * spec.initial_offset,
        y: pose.y + cos_t * spec.initial_offset,
        theta: angle::wrap(pose.theta + spec.initial_heading_error),
        v: gear.sign() * SpeedProfile::for_spec(spec).at(0.0).1,
        delta_road: 0.0,
        a_act: 0.0,
        gear,
    }
}

/// Turns ground truth into a localization message with noise, dropout and latency.
///
/// Draws one uniform for the dropout decision, then three normals, in that order.
pub fn localization_tick<R: Rng + ?Sized>(
    truth: &PlantState,
    spec: &ScenarioSpec,
    wheelbase: f64,
    seq: u32,
    now: f64,
    rng: &mut R,
) -> Option<LocalizationMsg> {
    let roll: f64 = rng.random();
    if roll < spec.loc_dropout {
        return None;
    }
    let xy = Normal::new(0.0, spec.noise_xy).expect("validated sigma");
    let th = Normal::new(0.0, spec.noise_theta).expect("validated sigma");
    let (nx, ny, nt) = (xy.sample(rng), xy.sample(rng), th.sample(rng));
    Some(LocalizationMsg {
        seq,
        timestamp: now - spec.loc_latency,
        x: truth.x + nx,
        y: truth.y + ny,
        theta: angle::wrap(truth.theta + nt),
        v: truth.v,
        yaw_rate: truth.v * libm::tan(truth.delta_road) / wheelbase,
        a: truth.a_act,
        status: LocStatus::Ok,
    })
}
