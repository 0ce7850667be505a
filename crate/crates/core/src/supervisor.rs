//! Supervisory state machine.
//!
//! The supervisor owns the 10 ms control cycle. Each cycle it takes the newest inputs,
//! validates them, steps the automaton and, only in the engaged and stopping states, runs the
//! controller on the stored trajectory. Control algorithm code (in [`crate::control`]) never
//! sees an input the supervisor has not validated.
//!
//! ```text
//!              ENGAGE + inputs ok                    horizon short
//!  INACTIVE ───────────────────────► ENGAGED_* ───────────────────► DEGRADED_STOP
//!     ▲                                  │  ▲          new plan          │
//!     │ DISENGAGE                        │  └────────────────────────────┤
//!     │                 fault / loc loss │                               │ stopped,
//!     └──────────────── HANDOVER ◄───────┴───────────────────────────────┘ fault
//! ```

use core::fmt;

use crate::control::{
    control_step, ControlContext, ControlGains, ControlMode, ControlOutput, VehicleParams,
};
use crate::messages::{
    validate_localization, ControlCommand, ControllerStatus, Gear, HmiAction, LocalizationMsg,
    ModeHint, Rejection, TrajectoryMsg, ValidationResult, WatchdogConfig,
};
use crate::reference::{
    ref_by_time, ProjectionTracker, ReferencePoint, StoreReject, TrajectoryStore,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FsmState {
    #[default]
    Inactive,
    EngagedTrajectory,
    EngagedPath,
    DegradedStop,
    Handover,
}

impl FsmState {
    pub const ALL: [FsmState; 5] = [
        FsmState::Inactive,
        FsmState::EngagedTrajectory,
        FsmState::EngagedPath,
        FsmState::DegradedStop,
        FsmState::Handover,
    ];

    pub fn to_u8(self) -> u8 {
        match self {
            FsmState::Inactive => 0,
            FsmState::EngagedTrajectory => 1,
            FsmState::EngagedPath => 2,
            FsmState::DegradedStop => 3,
            FsmState::Handover => 4,
        }
    }

    pub fn from_u8(raw: u8) -> Option<Self> {
        FsmState::ALL.into_iter().find(|s| s.to_u8() == raw)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FsmState::Inactive => "INACTIVE",
            FsmState::EngagedTrajectory => "ENGAGED_TRAJECTORY",
            FsmState::EngagedPath => "ENGAGED_PATH",
            FsmState::DegradedStop => "DEGRADED_STOP",
            FsmState::Handover => "HANDOVER",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        FsmState::ALL.into_iter().find(|st| st.as_str() == s)
    }

    /// States in which the controller commands the vehicle.
    pub fn is_actuating(self) -> bool {
        matches!(
            self,
            FsmState::EngagedTrajectory | FsmState::EngagedPath | FsmState::DegradedStop
        )
    }

    fn engaged(mode: ControlMode) -> Self {
        match mode {
            ControlMode::Path => FsmState::EngagedPath,
            _ => FsmState::EngagedTrajectory,
        }
    }
}

impl fmt::Display for FsmState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why control was handed back to the driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultCause {
    Localization(Rejection),
    NoLocalization,
    ActuatorFault,
    EmergencyStop,
    /// The stored trajectory ran out before a stop could complete.
    HorizonExpired,
    /// Time interpolation fell outside the sampled trajectory.
    ReferenceOutOfHorizon,
    /// A degraded stop finished at standstill.
    StoppedAfterPlannerLoss,
}

impl FaultCause {
    pub fn to_u8(self) -> u8 {
        match self {
            FaultCause::Localization(r) => {
                1 + Rejection::ALL.iter().position(|x| *x == r).unwrap_or(0) as u8
            }
            FaultCause::NoLocalization => 20,
            FaultCause::ActuatorFault => 21,
            FaultCause::EmergencyStop => 22,
            FaultCause::HorizonExpired => 23,
            FaultCause::ReferenceOutOfHorizon => 24,
            FaultCause::StoppedAfterPlannerLoss => 25,
        }
    }

    pub fn from_u8(raw: u8) -> Option<Self> {
        Some(match raw {
            1..=7 => FaultCause::Localization(Rejection::ALL[raw as usize - 1]),
            20 => FaultCause::NoLocalization,
            21 => FaultCause::ActuatorFault,
            22 => FaultCause::EmergencyStop,
            23 => FaultCause::HorizonExpired,
            24 => FaultCause::ReferenceOutOfHorizon,
            25 => FaultCause::StoppedAfterPlannerLoss,
            _ => return None,
        })
    }
}

impl fmt::Display for FaultCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultCause::Localization(r) => write!(f, "LOCALIZATION_{r}"),
            FaultCause::NoLocalization => f.write_str("NO_LOCALIZATION"),
            FaultCause::ActuatorFault => f.write_str("ACTUATOR_FAULT"),
            FaultCause::EmergencyStop => f.write_str("EMERGENCY_STOP"),
            FaultCause::HorizonExpired => f.write_str("HORIZON_EXPIRED"),
            FaultCause::ReferenceOutOfHorizon => f.write_str("REFERENCE_OUT_OF_HORIZON"),
            FaultCause::StoppedAfterPlannerLoss => f.write_str("STOPPED_AFTER_PLANNER_LOSS"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupervisorConfig {
    pub watchdog: WatchdogConfig,
    /// Extra horizon kept in reserve beyond the time a ramped stop needs [s].
    pub stop_margin: f64,
    /// Below this maximum trajectory speed the path mode is selected [m/s].
    pub path_speed_threshold: f64,
    /// Speed regarded as standstill at the end of a degraded stop [m/s].
    pub standstill_speed: f64,
    /// Arc-length half-width of the projection search window [m].
    pub projection_window: f64,
    pub cycle_time: f64,
}

impl Default for SupervisorConfig {
    fn default() -> Self {
        Self {
            watchdog: WatchdogConfig::default(),
            stop_margin: 1.0,
            path_speed_threshold: 2.0,
            standstill_speed: 0.05,
            projection_window: 20.0,
            cycle_time: 0.01,
        }
    }
}

/// Tracking mode implied by a trajectory.
pub fn select_mode(traj: &TrajectoryMsg, path_speed_threshold: f64) -> ControlMode {
    if traj.gear == Gear::Reverse {
        return ControlMode::Path;
    }
    match traj.mode_hint {
        ModeHint::Path => ControlMode::Path,
        ModeHint::Trajectory => ControlMode::Trajectory,
        ModeHint::Auto if traj.max_speed() < path_speed_threshold => ControlMode::Path,
        ModeHint::Auto => ControlMode::Trajectory,
    }
}

/// How much of the stored trajectory is left, measured against what a stop would need.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HorizonStatus {
    /// More than stop time plus margin remains.
    Ample,
    /// Within the margin: begin stopping now.
    StopNeeded,
    /// Less than the stop time remains; a ramped stop would overrun the trajectory.
    TooShort,
    /// No trajectory or its last sample is in the past.
    Expired,
}

impl HorizonStatus {
    pub const ALL: [HorizonStatus; 4] = [
        HorizonStatus::Ample,
        HorizonStatus::StopNeeded,
        HorizonStatus::TooShort,
        HorizonStatus::Expired,
    ];

    /// `remaining` seconds left, a stop taking `stop_time` seconds.
    pub fn classify(remaining: Option<f64>, stop_time: f64, margin: f64) -> Self {
        match remaining {
            Some(r) if r > stop_time + margin => HorizonStatus::Ample,
            Some(r) if r > stop_time => HorizonStatus::StopNeeded,
            Some(r) if r > 0.0 => HorizonStatus::TooShort,
            _ => HorizonStatus::Expired,
        }
    }
}

/// Condensed per-cycle inputs of the automaton.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsmInputs {
    pub hmi: Option<HmiAction>,
    /// Set when this cycle's localization is unusable.
    pub loc_fault: Option<FaultCause>,
    pub horizon: HorizonStatus,
    pub actuator_fault: bool,
    pub standstill: bool,
    /// Mode implied by the stored trajectory.
    pub mode: ControlMode,
}

/// What the controller is told to do this cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Directive {
    /// Emit nothing; the driver has authority.
    Idle,
    Track(ControlMode),
    /// Track the last trajectory geometrically while ramping to standstill.
    Stop,
}

impl Directive {
    pub fn mode(self) -> Option<ControlMode> {
        match self {
            Directive::Idle => None,
            Directive::Track(m) => Some(m),
            Directive::Stop => Some(ControlMode::Stop),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub next: FsmState,
    pub directive: Directive,
    /// Cause recorded when the transition enters HANDOVER.
    pub cause: Option<FaultCause>,
}

fn stay_idle(state: FsmState) -> Transition {
    Transition {
        next: state,
        directive: Directive::Idle,
        cause: None,
    }
}

fn handover(cause: FaultCause) -> Transition {
    Transition {
        next: FsmState::Handover,
        directive: Directive::Idle,
        cause: Some(cause),
    }
}

fn track(mode: ControlMode) -> Transition {
    Transition {
        next: FsmState::engaged(mode),
        directive: Directive::Track(mode),
        cause: None,
    }
}

fn degraded_stop() -> Transition {
    Transition {
        next: FsmState::DegradedStop,
        directive: Directive::Stop,
        cause: None,
    }
}

/// The transition table. Total over every state and input combination.
pub fn fsm_step(state: FsmState, inputs: &FsmInputs) -> Transition {
    match inputs.hmi {
        Some(HmiAction::EmergencyStop) => return handover(FaultCause::EmergencyStop),
        Some(HmiAction::Disengage) => return stay_idle(FsmState::Inactive),
        _ => {}
    }
    match state {
        FsmState::Inactive => {
            let ready = inputs.hmi == Some(HmiAction::Engage)
                && inputs.loc_fault.is_none()
                && !inputs.actuator_fault
                && inputs.horizon == HorizonStatus::Ample;
            if ready {
                track(inputs.mode)
            } else {
                stay_idle(FsmState::Inactive)
            }
        }
        FsmState::Handover => stay_idle(FsmState::Handover),
        FsmState::EngagedTrajectory | FsmState::EngagedPath | FsmState::DegradedStop => {
            if inputs.actuator_fault {
                return handover(FaultCause::ActuatorFault);
            }
            if let Some(cause) = inputs.loc_fault {
                return handover(cause);
            }
            let stopping = state == FsmState::DegradedStop;
            match inputs.horizon {
                HorizonStatus::Expired => handover(FaultCause::HorizonExpired),
                HorizonStatus::TooShort if !stopping => handover(FaultCause::HorizonExpired),
                _ if stopping && inputs.standstill => handover(FaultCause::StoppedAfterPlannerLoss),
                HorizonStatus::Ample => track(inputs.mode),
                HorizonStatus::StopNeeded | HorizonStatus::TooShort => degraded_stop(),
            }
        }
    }
}

/// Newest inputs available at the start of a cycle.
#[derive(Debug, Clone, Default)]
pub struct CycleInputs {
    pub now: f64,
    pub trajectory: Option<TrajectoryMsg>,
    pub localization: Option<LocalizationMsg>,
    pub hmi: Option<HmiAction>,
    pub actuator_fault: bool,
}

/// Everything the supervisor decided in one cycle, for logging and publishing.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleReport {
    pub now: f64,
    pub state: FsmState,
    pub previous: FsmState,
    pub directive: Directive,
    /// Outcome of offering a new trajectory to the store, if one arrived.
    pub trajectory_update: Option<Result<(), StoreReject>>,
    /// Validation of the localization used this cycle.
    pub localization_check: ValidationResult,
    pub horizon: HorizonStatus,
    pub reference: Option<ReferencePoint>,
    pub output: Option<ControlOutput>,
    pub status: ControllerStatus,
}

impl CycleReport {
    /// The command to send to the vehicle gateway, if any.
    pub fn command(&self) -> Option<&ControlCommand> {
        self.output.as_ref().map(|o| &o.command)
    }
}

/// Drives the automaton and the controller.
#[derive(Debug, Clone)]
pub struct Supervisor {
    cfg: SupervisorConfig,
    gains: ControlGains,
    params: VehicleParams,
    state: FsmState,
    store: TrajectoryStore,
    last_valid_loc: Option<LocalizationMsg>,
    last_loc_seq: Option<u32>,
    prev_cmd: ControlCommand,
    latch: Option<FaultCause>,
    tracker: ProjectionTracker,
    cmd_seq: u32,
    status_seq: u32,
}

impl Supervisor {
    pub fn new(cfg: SupervisorConfig, gains: ControlGains, params: VehicleParams) -> Self {
        Self {
            cfg,
            gains,
            params,
            state: FsmState::Inactive,
            store: TrajectoryStore::new(),
            last_valid_loc: None,
            last_loc_seq: None,
            prev_cmd: ControlCommand::default(),
            latch: None,
            tracker: ProjectionTracker::new(cfg.projection_window),
            cmd_seq: 0,
            status_seq: 0,
        }
    }

    pub fn state(&self) -> FsmState {
        self.state
    }

    pub fn latched_cause(&self) -> Option<FaultCause> {
        self.latch
    }

    pub fn store(&self) -> &TrajectoryStore {
        &self.store
    }

    pub fn config(&self) -> &SupervisorConfig {
        &self.cfg
    }

    fn check_localization(
        &mut self,
        incoming: Option<LocalizationMsg>,
        now: f64,
    ) -> ValidationResult {
        let wd = &self.cfg.watchdog;
        let fresh = incoming.filter(|m| self.last_loc_seq.is_none_or(|s| m.seq > s));
        if let Some(msg) = fresh {
            self.last_loc_seq = Some(msg.seq);
            let verdict = validate_localization(&msg, now, wd);
            if verdict.is_ok() {
                self.last_valid_loc = Some(msg);
            }
            return verdict;
        }
        match &self.last_valid_loc {
            Some(loc) => validate_localization(loc, now, wd),
            None => Err(Rejection::Empty),
        }
    }

    /// Runs one control cycle.
    pub fn step(&mut self, inputs: CycleInputs) -> CycleReport {
        let now = inputs.now;
        let trajectory_update = inputs
            .trajectory
            .map(|t| self.store.update(t, now, &self.cfg.watchdog));
        let localization_check = self.check_localization(inputs.localization, now);
        let loc_fault = match localization_check {
            Ok(()) => None,
            Err(Rejection::Empty) => Some(FaultCause::NoLocalization),
            Err(r) => Some(FaultCause::Localization(r)),
        };

        let speed = self.last_valid_loc.map_or(0.0, |l| l.v);
        let stop_time = libm::fabs(speed) / self.gains.stop_decel;
        let remaining = self
            .store
            .current()
            .and_then(|t| t.horizon_end())
            .map(|end| end - now);
        let horizon = HorizonStatus::classify(remaining, stop_time, self.cfg.stop_margin);
        let mode = self.store.current().map_or(ControlMode::Trajectory, |t| {
            select_mode(t, self.cfg.path_speed_threshold)
        });

        let fsm_inputs = FsmInputs {
            hmi: inputs.hmi,
            loc_fault,
            horizon,
            actuator_fault: inputs.actuator_fault,
            standstill: libm::fabs(speed) < self.cfg.standstill_speed,
            mode,
        };
        let previous = self.state;
        let mut transition = fsm_step(previous, &fsm_inputs);

        let mut reference = None;
        let mut output = None;
        if let Some(mode) = transition.directive.mode() {
            if !previous.is_actuating() {
                self.prev_cmd = ControlCommand::default();
                self.tracker.reset();
            }
            match self.run_controller(mode, now) {
                Ok((r, out)) => {
                    reference = Some(r);
                    output = Some(out);
                }
                Err(cause) => transition = handover(cause),
            }
        }

        self.apply(transition);
        match &output {
            Some(out) => self.prev_cmd = out.command,
            None => self.prev_cmd = ControlCommand::default(),
        }

        let errors = output.map(|o| o.errors).unwrap_or_default();
        self.status_seq = self.status_seq.wrapping_add(1);
        let status = ControllerStatus {
            seq: self.status_seq,
            timestamp: now,
            fsm: self.state,
            mode: transition.directive.mode(),
            cause: self.latch,
            lateral_error: errors.d,
            heading_error: errors.e_psi,
            speed_error: errors.e_v,
        };
        CycleReport {
            now,
            state: self.state,
            previous,
            directive: transition.directive,
            trajectory_update,
            localization_check,
            horizon,
            reference,
            output,
            status,
        }
    }

    fn apply(&mut self, t: Transition) {
        if t.next == FsmState::Inactive {
            self.latch = None;
        }
        if t.next == FsmState::Handover && self.state != FsmState::Handover {
            self.latch = t.cause;
        }
        self.state = t.next;
    }

    fn run_controller(
        &mut self,
        mode: ControlMode,
        now: f64,
    ) -> Result<(ReferencePoint, ControlOutput), FaultCause> {
        let traj = self.store.current().ok_or(FaultCause::HorizonExpired)?;
        let loc = self.last_valid_loc.ok_or(FaultCause::NoLocalization)?;
        let reference = match mode {
            ControlMode::Trajectory => {
                ref_by_time(traj, loc.timestamp).map_err(|_| FaultCause::ReferenceOutOfHorizon)?
            }
            ControlMode::Path | ControlMode::Stop => self.tracker.project(traj, loc.x, loc.y),
        };
        let ctx = ControlContext {
            mode,
            gear: traj.gear,
            gains: &self.gains,
            params: &self.params,
            dt: self.cfg.cycle_time,
        };
        self.cmd_seq = self.cmd_seq.wrapping_add(1);
        let out = control_step(&loc, &reference, &ctx, &self.prev_cmd, self.cmd_seq, now);
        Ok((reference, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::messages::{LocStatus, TrajectoryPoint};
    use alloc::vec::Vec;

    fn straight(seq: u32, stamp: f64, speed: f64, horizon: f64) -> TrajectoryMsg {
        let n = (horizon / 0.1) as usize + 11;
        let points = (0..n)
            .map(|k| {
                let t = k as f64 * 0.1 - 1.0;
                TrajectoryPoint {
                    x: speed * t,
                    s: speed * t,
                    v: speed,
                    relative_time: t,
                    ..Default::default()
                }
            })
            .collect();
        TrajectoryMsg {
            seq,
            timestamp: stamp,
            gear: Gear::Forward,
            mode_hint: ModeHint::Auto,
            points,
        }
    }

    fn loc(seq: u32, t: f64, speed: f64) -> LocalizationMsg {
        LocalizationMsg {
            seq,
            timestamp: t,
            x: speed * t,
            v: speed,
            ..Default::default()
        }
    }

    fn supervisor() -> Supervisor {
        Supervisor::new(
            SupervisorConfig::default(),
            ControlGains::default(),
            VehicleParams::default(),
        )
    }

    fn engage(sup: &mut Supervisor, speed: f64) -> CycleReport {
        sup.step(CycleInputs {
            now: 0.0,
            trajectory: Some(straight(1, 0.0, speed, 8.0)),
            localization: Some(loc(1, 0.0, speed)),
            hmi: Some(HmiAction::Engage),
            actuator_fault: false,
        })
    }

    #[test]
    fn nominal_engage() {
        let mut sup = supervisor();
        let r = engage(&mut sup, 5.0);
        assert_eq!(r.state, FsmState::EngagedTrajectory);
        let cmd = r.command().unwrap();
        assert_eq!(cmd.accel_cmd, 0.0);
        assert_eq!(cmd.steer_wheel_cmd, 0.0);
        assert_eq!(r.status.fsm, FsmState::EngagedTrajectory);
    }

    #[test]
    fn stale_localization_hands_over() {
        let mut sup = supervisor();
        engage(&mut sup, 5.0);
        // no new localization for 0.15 s
        let r = sup.step(CycleInputs {
            now: 0.15,
            ..Default::default()
        });
        assert_eq!(r.state, FsmState::Handover);
        assert!(r.command().is_none());
        assert_eq!(
            sup.latched_cause(),
            Some(FaultCause::Localization(Rejection::Stale))
        );
    }

    #[test]
    fn invalid_localization_suppresses_command_same_cycle() {
        let mut sup = supervisor();
        engage(&mut sup, 5.0);
        let mut bad = loc(2, 0.01, 5.0);
        bad.status = LocStatus::Invalid;
        let r = sup.step(CycleInputs {
            now: 0.01,
            localization: Some(bad),
            ..Default::default()
        });
        assert_eq!(r.state, FsmState::Handover);
        assert!(r.command().is_none());
    }

    #[test]
    fn planner_silence_keeps_tracking_last_trajectory() {
        let mut sup = supervisor();
        engage(&mut sup, 5.0);
        // 5 s later the 8 s plan still covers 3 s ahead
        let mut seq = 1;
        let mut t = 0.0;
        while t < 5.0 - 1e-9 {
            t += 0.01;
            seq += 1;
            let r = sup.step(CycleInputs {
                now: t,
                localization: Some(loc(seq, t, 5.0)),
                ..Default::default()
            });
            assert_eq!(r.state, FsmState::EngagedTrajectory, "t = {t}");
        }
        assert_eq!(sup.store().current().unwrap().seq, 1);
    }

    #[test]
    fn horizon_classification() {
        use HorizonStatus::*;
        // 5 m/s at 3 m/s^2 needs 1.67 s; plus the 1 s margin
        assert_eq!(HorizonStatus::classify(Some(3.0), 5.0 / 3.0, 1.0), Ample);
        assert_eq!(
            HorizonStatus::classify(Some(2.5), 5.0 / 3.0, 1.0),
            StopNeeded
        );
        assert_eq!(HorizonStatus::classify(Some(1.0), 5.0 / 3.0, 1.0), TooShort);
        assert_eq!(HorizonStatus::classify(Some(0.0), 5.0 / 3.0, 1.0), Expired);
        assert_eq!(HorizonStatus::classify(None, 0.0, 1.0), Expired);
    }

    #[test]
    fn actuator_fault_hands_over() {
        let mut sup = supervisor();
        engage(&mut sup, 5.0);
        let r = sup.step(CycleInputs {
            now: 0.01,
            localization: Some(loc(2, 0.01, 5.0)),
            actuator_fault: true,
            ..Default::default()
        });
        assert_eq!(r.state, FsmState::Handover);
        assert_eq!(r.status.cause, Some(FaultCause::ActuatorFault));
    }

    #[test]
    fn handover_requires_disengage_then_engage() {
        let mut sup = supervisor();
        engage(&mut sup, 5.0);
        sup.step(CycleInputs {
            now: 0.01,
            hmi: Some(HmiAction::EmergencyStop),
            ..Default::default()
        });
        assert_eq!(sup.state(), FsmState::Handover);
        let r = sup.step(CycleInputs {
            now: 0.02,
            trajectory: Some(straight(2, 0.02, 5.0, 8.0)),
            localization: Some(loc(3, 0.02, 5.0)),
            hmi: Some(HmiAction::Engage),
            actuator_fault: false,
        });
        assert_eq!(r.state, FsmState::Handover);
        sup.step(CycleInputs {
            now: 0.03,
            hmi: Some(HmiAction::Disengage),
            ..Default::default()
        });
        assert_eq!(sup.state(), FsmState::Inactive);
        assert_eq!(sup.latched_cause(), None);
        let r = sup.step(CycleInputs {
            now: 0.04,
            localization: Some(loc(4, 0.04, 5.0)),
            hmi: Some(HmiAction::Engage),
            ..Default::default()
        });
        assert_eq!(r.state, FsmState::EngagedTrajectory);
    }

    #[test]
    fn mode_selection_rules() {
        let fast = straight(1, 0.0, 7.0, 8.0);
        assert_eq!(select_mode(&fast, 2.0), ControlMode::Trajectory);
        let mut rev = fast.clone();
        rev.gear = Gear::Reverse;
        rev.mode_hint = ModeHint::Trajectory;
        assert_eq!(select_mode(&rev, 2.0), ControlMode::Path);
        let slow = straight(1, 0.0, 1.5, 8.0);
        assert_eq!(select_mode(&slow, 2.0), ControlMode::Path);
        let mut forced = slow.clone();
        forced.mode_hint = ModeHint::Trajectory;
        assert_eq!(select_mode(&forced, 2.0), ControlMode::Trajectory);
        let mut hinted = fast;
        hinted.mode_hint = ModeHint::Path;
        assert_eq!(select_mode(&hinted, 2.0), ControlMode::Path);
    }

    proptest::proptest! {
        #[test]
        fn raising_speeds_never_flips_to_path(base in 2.0f64..20.0, scale in 1.0f64..10.0) {
            let t = straight(1, 0.0, base, 2.0);
            let mut scaled = t.clone();
            for p in &mut scaled.points {
                p.v *= scale;
            }
            proptest::prop_assert_eq!(select_mode(&t, 2.0), ControlMode::Trajectory);
            proptest::prop_assert_eq!(select_mode(&scaled, 2.0), ControlMode::Trajectory);
        }
    }

    /// Every (state, input) combination of the condensed automaton.
    pub(crate) fn all_inputs() -> Vec<FsmInputs> {
        let hmis = [
            None,
            Some(HmiAction::Engage),
            Some(HmiAction::Disengage),
            Some(HmiAction::EmergencyStop),
        ];
        let locs = [
            None,
            Some(FaultCause::Localization(Rejection::Stale)),
            Some(FaultCause::NoLocalization),
        ];
        let mut out = Vec::new();
        for hmi in hmis {
            for loc_fault in locs {
                for horizon in HorizonStatus::ALL {
                    for actuator_fault in [false, true] {
                        for standstill in [false, true] {
                            for mode in [ControlMode::Trajectory, ControlMode::Path] {
                                out.push(FsmInputs {
                                    hmi,
                                    loc_fault,
                                    horizon,
                                    actuator_fault,
                                    standstill,
                                    mode,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn transition_table_is_total_and_safe() {
        let inputs = all_inputs();
        assert_eq!(inputs.len(), 4 * 3 * 4 * 2 * 2 * 2);
        for state in FsmState::ALL {
            for i in &inputs {
                let t = fsm_step(state, i);
                assert_eq!(
                    t.directive == Directive::Idle,
                    !t.next.is_actuating(),
                    "{state:?} {i:?}"
                );
                if t.next.is_actuating() {
                    assert!(i.loc_fault.is_none() && !i.actuator_fault);
                    assert_ne!(i.horizon, HorizonStatus::Expired);
                }
                if state == FsmState::Handover {
                    assert!(matches!(t.next, FsmState::Handover | FsmState::Inactive));
                }
                if i.hmi == Some(HmiAction::EmergencyStop) {
                    assert_eq!(t.next, FsmState::Handover);
                }
            }
        }
    }
}
