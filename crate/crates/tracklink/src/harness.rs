//! Closed-loop scenario runner.
//!
//! One loop iteration is one 10 ms control cycle:
//!
//! 1. apply scenario events due at this cycle
//! 2. mock planner replans when due; the frame may be dropped in transit
//! 3. mock localization samples the plant truth
//! 4. controller drains its channels, runs the supervisor, sends command and status
//! 5. gateway takes the newest command, plant integrates one cycle at 1 ms substeps
//! 6. the cycle is logged and checked against the run invariants
//!
//! Every message goes through the wire codec. Without pacing the bus is in-memory and the run
//! is a pure function of scenario and seed.

use std::fmt;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tracklink_core::mocks::{
    self, EventKind, MockPlanner, ScenarioSpec, ScheduledEvent, SpecError,
};
use tracklink_core::supervisor::{CycleInputs, CycleReport};
use tracklink_core::wire::{self, LatestWins, Message, MsgType};
use tracklink_core::{
    ActuatorModel, ControlGains, Gateway, HmiAction, HmiCommand, Supervisor, SupervisorConfig,
    VehicleParams,
};

use crate::capture::{self, CapturedFrame};
use crate::log::{self, CommandFields, LocFields, LogRow, Tx};
use crate::report::{self, ReportBuilder, RunReport};
use crate::transport::{Bus, MemoryBus, UdpBus};
use crate::udp::{PortMap, TransportError};

/// Slack on limit checks for floating point rounding.
const LIMIT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    pub seed: u64,
    /// Overrides the scenario's duration.
    pub duration: Option<f64>,
    /// Pace cycles to the wall clock and exchange frames over loopback UDP.
    pub paced: bool,
    /// First UDP port in paced mode; 0 picks free ports.
    pub port_base: u16,
    pub gains: ControlGains,
    pub params: VehicleParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub cycle: u64,
    pub time: f64,
    pub what: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cycle {} (t = {:.2} s): {}",
            self.cycle, self.time, self.what
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid scenario: {0}")]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<LogRow>,
    pub report: RunReport,
    pub capture: Vec<CapturedFrame>,
    /// First broken invariant; the run stops at that cycle.
    pub violation: Option<Violation>,
}

impl RunOutput {
    pub fn log_bytes(&self) -> Vec<u8> {
        log::to_bytes(&self.rows)
    }

    /// No broken invariant and no handover that was not provoked by an injected fault.
    pub fn passed(&self) -> bool {
        self.violation.is_none() && self.report.unexpected_handovers == 0
    }

    /// Writes `run.csv`, `report.txt`, `frames.bin` and, if needed, `violation.txt`.
    pub fn write_to(&self, dir: &Path) -> Result<(), HarnessError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| HarnessError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let files = [
            ("run.csv", self.log_bytes()),
            ("report.txt", self.report.to_text().into_bytes()),
            ("frames.bin", capture::encode(&self.capture)),
        ];
        for (name, bytes) in files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(io(&path))?;
        }
        let path = dir.join("violation.txt");
        match &self.violation {
            Some(v) => std::fs::write(&path, format!("{v}\n")).map_err(io(&path))?,
            None if path.exists() => std::fs::remove_file(&path).map_err(io(&path))?,
            None => {}
        }
        Ok(())
    }
}

/// Checks each logged cycle: contiguous cycle numbers, finite plant state, no command outside
/// the actuating states, commands within absolute limits and within `rate * dt` of the
/// previous command (zero after a cycle without one).
#[derive(Debug, Clone)]
pub struct InvariantChecker {
    params: VehicleParams,
    dt: f64,
    next_cycle: u64,
    prev: (f64, f64),
}

impl InvariantChecker {
    pub fn new(params: VehicleParams, dt: f64) -> Self {
        Self {
            params,
            dt,
            next_cycle: 0,
            prev: (0.0, 0.0),
        }
    }

    pub fn check(&mut self, row: &LogRow) -> Result<(), String> {
        if row.cycle != self.next_cycle {
            return Err(format!(
                "expected cycle {}, got {}",
                self.next_cycle, row.cycle
            ));
        }
        self.next_cycle += 1;
        let t = &row.truth;
        if ![t.x, t.y, t.theta, t.v, t.delta_road, t.a_act]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err("plant state is not finite".into());
        }
        let Some(c) = &row.command else {
            self.prev = (0.0, 0.0);
            return Ok(());
        };
        if !row.fsm.is_actuating() {
            return Err(format!("command sent in {}", row.fsm.as_str()));
        }
        let p = &self.params;
        if c.accel < p.accel_min - LIMIT_SLACK || c.accel > p.accel_max + LIMIT_SLACK {
            return Err(format!(
                "accel_cmd {} outside [{}, {}]",
                c.accel, p.accel_min, p.accel_max
            ));
        }
        if c.steer.abs() > p.steer_wheel_max + LIMIT_SLACK {
            return Err(format!(
                "steer_cmd {} outside ±{}",
                c.steer, p.steer_wheel_max
            ));
        }
        let (pa, ps) = self.prev;
        if (c.accel - pa).abs() > p.accel_rate * self.dt + LIMIT_SLACK {
            return Err(format!(
                "accel_cmd step {} -> {} exceeds rate limit",
                pa, c.accel
            ));
        }
        if (c.steer - ps).abs() > p.steer_wheel_rate * self.dt + LIMIT_SLACK {
            return Err(format!(
                "steer_cmd step {} -> {} exceeds rate limit",
                ps, c.steer
            ));
        }
        if !(0.0..=1.0).contains(&c.throttle) || !(0.0..=1.0).contains(&c.brake) {
            return Err(format!(
                "throttle {} / brake {} outside [0, 1]",
                c.throttle, c.brake
            ));
        }
        self.prev = (c.accel, c.steer);
        Ok(())
    }
}

/// First violation in a complete log, checked against `params`.
pub fn check_log(rows: &[LogRow], params: &VehicleParams) -> Option<Violation> {
    let mut checker = InvariantChecker::new(*params, SupervisorConfig::default().cycle_time);
    rows.iter().find_map(|row| {
        checker.check(row).err().map(|what| Violation {
            cycle: row.cycle,
            time: row.time,
            what,
        })
    })
}

/// Controller-side mailboxes, kept across cycles so a late datagram can never roll the
/// controller back to an older message.
#[derive(Debug, Default)]
pub struct Inbox {
    trajectory: LatestWins,
    localization: LatestWins,
    hmi: LatestWins,
}

impl Inbox {
    pub const CHANNELS: [MsgType; 3] = [
        MsgType::Trajectory,
        MsgType::Localization,
        MsgType::HmiCommand,
    ];

    pub fn deliver(&mut self, msg: Option<Message>) {
        let Some(msg) = msg else { return };
        let slot = match msg.msg_type() {
            MsgType::Trajectory => &mut self.trajectory,
            MsgType::Localization => &mut self.localization,
            MsgType::HmiCommand => &mut self.hmi,
            _ => return,
        };
        slot.offer(msg);
    }

    pub fn take_inputs(&mut self, now: f64, actuator_fault: bool) -> CycleInputs {
        CycleInputs {
            now,
            trajectory: match self.trajectory.take() {
                Some(Message::Trajectory(t)) => Some(t),
                _ => None,
            },
            localization: match self.localization.take() {
                Some(Message::Localization(l)) => Some(l),
                _ => None,
            },
            hmi: match self.hmi.take() {
                Some(Message::HmiCommand(h)) => Some(h.command),
                _ => None,
            },
            actuator_fault,
        }
    }
}

/// The encoded command and status a cycle produces, in send order.
pub fn controller_frames(report: &CycleReport) -> Vec<(MsgType, Vec<u8>)> {
    let mut out = Vec::new();
    if let Some(cmd) = report.command() {
        out.push((
            MsgType::ControlCommand,
            encode(&Message::ControlCommand(*cmd)),
        ));
    }
    out.push((
        MsgType::ControllerStatus,
        encode(&Message::ControllerStatus(report.status)),
    ));
    out
}

fn encode(msg: &Message) -> Vec<u8> {
    wire::encode(msg).expect("fixed-size messages always fit")
}

pub fn new_supervisor(gains: &ControlGains, params: &VehicleParams) -> Supervisor {
    Supervisor::new(SupervisorConfig::default(), *gains, *params)
}

struct Sim {
    spec: ScenarioSpec,
    dt: f64,
    bus: Box<dyn Bus>,
    planner: MockPlanner,
    planner_on: bool,
    loc_on: bool,
    loc_seq: u32,
    hmi_seq: u32,
    loc_rng: ChaCha8Rng,
    drop_rng: ChaCha8Rng,
    supervisor: Supervisor,
    gateway: Gateway,
    inbox: Inbox,
    gateway_inbox: LatestWins,
    events: Vec<ScheduledEvent>,
    next_event: usize,
    capture: Vec<CapturedFrame>,
}

impl Sim {
    fn send(&mut self, msg: &Message, cycle: u64, now: f64) -> Result<(), TransportError> {
        self.send_frame(msg.msg_type(), encode(msg), cycle, now)
    }

    fn send_frame(
        &mut self,
        kind: MsgType,
        frame: Vec<u8>,
        cycle: u64,
        now: f64,
    ) -> Result<(), TransportError> {
        self.bus.send(kind, &frame)?;
        self.capture.push(CapturedFrame {
            time: now,
            cycle: cycle as u32,
            channel: kind,
            frame,
        });
        Ok(())
    }

    fn cycle(&mut self, k: u64) -> Result<LogRow, TransportError> {
        let now = k as f64 * self.dt;

        let mut events = Vec::new();
        let mut hmi = None;
        while let Some(e) = self
            .events
            .get(self.next_event)
            .filter(|e| e.at <= now + 1e-9)
        {
            match e.kind {
                EventKind::Engage => hmi = Some(HmiAction::Engage),
                EventKind::Disengage => hmi = Some(HmiAction::Disengage),
                EventKind::EmergencyStop => hmi = Some(HmiAction::EmergencyStop),
                EventKind::ActuatorFault => self.gateway.set_fault(true),
                EventKind::LocalizationOutage => self.loc_on = false,
                EventKind::PlannerOutage => self.planner_on = false,
            }
            events.push(e.kind);
            self.next_event += 1;
        }

        let mut traj_tx = Tx::Idle;
        if self.planner_on {
            if let Some(plan) = self.planner.tick(now) {
                let lost = self.drop_rng.random::<f64>() < self.spec.traj_drop;
                traj_tx = if lost { Tx::Dropped } else { Tx::Sent };
                if !lost {
                    self.send(&Message::Trajectory(plan), k, now)?;
                }
            }
        }

        let truth = *self.gateway.truth();
        let mut loc_tx = Tx::Idle;
        if self.loc_on {
            self.loc_seq += 1;
            let wheelbase = self.gateway.model.params.wheelbase;
            let sample = mocks::localization_tick(
                &truth,
                &self.spec,
                wheelbase,
                self.loc_seq,
                now,
                &mut self.loc_rng,
            );
            loc_tx = match sample {
                Some(loc) => {
                    self.send(&Message::Localization(loc), k, now)?;
                    Tx::Sent
                }
                None => Tx::Dropped,
            };
        }

        if let Some(command) = hmi {
            self.hmi_seq += 1;
            self.send(
                &Message::HmiCommand(HmiCommand {
                    seq: self.hmi_seq,
                    timestamp: now,
                    command,
                }),
                k,
                now,
            )?;
        }

        for kind in Inbox::CHANNELS {
            let latest = self.bus.recv_latest(kind)?.latest;
            self.inbox.deliver(latest);
        }
        let actuator_fault = self.gateway.actuator_fault();
        let inputs = self.inbox.take_inputs(now, actuator_fault);
        let received_loc = inputs.localization;
        let report = self.supervisor.step(inputs);
        for (kind, frame) in controller_frames(&report) {
            self.send_frame(kind, frame, k, now)?;
        }

        if let Some(m) = self.bus.recv_latest(MsgType::ControlCommand)?.latest {
            self.gateway_inbox.offer(m);
        }
        self.bus.recv_latest(MsgType::ControllerStatus)?;
        let cmd = match self.gateway_inbox.take() {
            Some(Message::ControlCommand(c)) => Some(c),
            _ => None,
        };
        self.gateway.step(cmd.as_ref(), self.dt);

        let store = self.supervisor.store();
        Ok(LogRow {
            time: now,
            cycle: k,
            fsm: report.state,
            mode: report.directive.mode(),
            traj_tx,
            traj_rx: report.trajectory_update,
            traj_seq: store.current().map(|t| t.seq),
            loc_tx,
            loc_check: report.localization_check,
            horizon: report.horizon,
            horizon_left: store
                .current()
                .and_then(|t| t.horizon_end())
                .map(|end| end - now),
            loc: received_loc.map(|l| LocFields {
                t: l.timestamp,
                x: l.x,
                y: l.y,
                theta: l.theta,
                v: l.v,
            }),
            reference: report.reference,
            errors: report.output.map(|o| o.errors),
            command: report.output.map(|o| CommandFields {
                seq: o.command.seq,
                accel_raw: o.accel_raw,
                steer_raw: o.steer_raw,
                accel: o.command.accel_cmd,
                steer: o.command.steer_wheel_cmd,
                direct: o.command.direct_actuation,
                throttle: o.command.throttle,
                brake: o.command.brake,
                gear: o.command.gear_cmd,
            }),
            truth,
            actuator_fault,
            cause: report.status.cause,
            events,
        })
    }
}

/// Runs `spec` closed loop. Invariant violations end the run early and are reported in the
/// output, not as an error.
pub fn run_scenario(spec: &ScenarioSpec, opts: &RunOptions) -> Result<RunOutput, HarnessError> {
    let mut spec = spec.clone();
    if let Some(d) = opts.duration {
        spec.duration = d;
    }
    spec.validate()?;
    let bus: Box<dyn Bus> = if opts.paced {
        Box::new(UdpBus::bind(PortMap::with_base(opts.port_base))?)
    } else {
        Box::new(MemoryBus::new())
    };
    let supervisor = new_supervisor(&opts.gains, &opts.params);
    let dt = supervisor.config().cycle_time;
    let mut loc_rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut drop_rng = loc_rng.clone();
    loc_rng.set_stream(0);
    drop_rng.set_stream(1);
    let mut sim = Sim {
        dt,
        bus,
        planner: MockPlanner::new(spec.clone()),
        planner_on: true,
        loc_on: true,
        loc_seq: 0,
        hmi_seq: 0,
        loc_rng,
        drop_rng,
        supervisor,
        gateway: Gateway::new(
            ActuatorModel {
                params: opts.params,
                ..Default::default()
            },
            mocks::initial_state(&spec),
        ),
        inbox: Inbox::default(),
        gateway_inbox: LatestWins::new(),
        events: spec.events.clone(),
        next_event: 0,
        capture: Vec::new(),
        spec,
    };

    let cycles = (sim.spec.duration / dt).round() as u64;
    let mut checker = InvariantChecker::new(sim.gateway.model.params, dt);
    let mut builder = ReportBuilder::new();
    let mut rows = Vec::with_capacity(cycles as usize);
    let mut violation = None;
    let start = Instant::now();
    for k in 0..cycles {
        if opts.paced {
            let due = start + Duration::from_secs_f64(k as f64 * dt);
            if let Some(wait) = due.checked_duration_since(Instant::now()) {
                std::thread::sleep(wait);
            }
        }
        let row = sim.cycle(k)?;
        builder.push(&row);
        let broken = checker.check(&row).err();
        if let Some(what) = broken {
            violation = Some(Violation {
                cycle: row.cycle,
                time: row.time,
                what,
            });
        }
        rows.push(row);
        if violation.is_some() {
            break;
        }
    }
    Ok(RunOutput {
        rows,
        report: builder.finish(),
        capture: sim.capture,
        violation,
    })
}

/// Recomputes report and invariant check from a log alone.
pub fn analyze(rows: &[LogRow], params: &VehicleParams) -> (RunReport, Option<Violation>) {
    (report::compute(rows), check_log(rows, params))
}
