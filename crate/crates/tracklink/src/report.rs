//! Run summary computed from log rows.
//!
//! The live harness and the offline analyzer feed the same [`ReportBuilder`] with the same
//! rows in the same order, so both produce identical reports.

use std::fmt::Write as _;

use tracklink_core::angle;
use tracklink_core::mocks::EventKind;
use tracklink_core::FsmState;

use crate::log::{LogRow, Tx};

/// |d| below which tracking counts as converged [m].
pub const CONVERGED_D: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunReport {
    pub cycles: u64,
    /// Cycles that produced tracking errors (controller actuating).
    pub tracked_cycles: u64,
    pub rms_d: Option<f64>,
    pub max_abs_d: Option<f64>,
    pub rms_e_v: Option<f64>,
    /// From the first tracked cycle to the start of the final run of cycles with
    /// |d| < [`CONVERGED_D`]; `None` if the last tracked cycle was not converged.
    pub time_to_converge: Option<f64>,
    pub handovers: u32,
    /// Handovers with no injected fault at or before them.
    pub unexpected_handovers: u32,
    /// Truth versus reference at the last tracked cycle [m].
    pub final_position_error: Option<f64>,
    /// [rad]
    pub final_heading_error: Option<f64>,
    pub traj_sent: u64,
    pub traj_dropped: u64,
    pub traj_accepted: u64,
    pub traj_rejected: u64,
    pub loc_sent: u64,
    pub loc_dropped: u64,
    pub loc_rejected: u64,
    pub commands: u64,
}

fn is_fault_event(e: EventKind) -> bool {
    !matches!(e, EventKind::Engage | EventKind::Disengage)
}

#[derive(Debug, Clone, Default)]
pub struct ReportBuilder {
    r: RunReport,
    sum_d2: f64,
    sum_ev2: f64,
    first_tracked: Option<f64>,
    converged_since: Option<f64>,
    last_fsm: Option<FsmState>,
    fault_injected: bool,
}

impl ReportBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: &LogRow) {
        let r = &mut self.r;
        r.cycles += 1;
        self.fault_injected |= row.events.iter().any(|e| is_fault_event(*e));

        if let Some(e) = row.errors {
            r.tracked_cycles += 1;
            self.sum_d2 += e.d * e.d;
            self.sum_ev2 += e.e_v * e.e_v;
            r.max_abs_d = Some(r.max_abs_d.map_or(e.d.abs(), |m| m.max(e.d.abs())));
            self.first_tracked.get_or_insert(row.time);
            if e.d.abs() < CONVERGED_D {
                self.converged_since.get_or_insert(row.time);
            } else {
                self.converged_since = None;
            }
        }
        if let Some(rf) = &row.reference {
            let t = &row.truth;
            r.final_position_error = Some((t.x - rf.x).hypot(t.y - rf.y));
            r.final_heading_error = Some(angle::wrap(t.theta - rf.theta));
        }

        let prev = self.last_fsm.unwrap_or(FsmState::Inactive);
        if row.fsm == FsmState::Handover && prev != FsmState::Handover {
            r.handovers += 1;
            if !self.fault_injected {
                r.unexpected_handovers += 1;
            }
        }
        self.last_fsm = Some(row.fsm);

        match row.traj_tx {
            Tx::Sent => r.traj_sent += 1,
            Tx::Dropped => r.traj_dropped += 1,
            Tx::Idle => {}
        }
        match row.traj_rx {
            Some(Ok(())) => r.traj_accepted += 1,
            Some(Err(_)) => r.traj_rejected += 1,
            None => {}
        }
        match row.loc_tx {
            Tx::Sent => r.loc_sent += 1,
            Tx::Dropped => r.loc_dropped += 1,
            Tx::Idle => {}
        }
        if row.loc.is_some() && row.loc_check.is_err() {
            r.loc_rejected += 1;
        }
        if row.command.is_some() {
            r.commands += 1;
        }
    }

    pub fn finish(self) -> RunReport {
        let mut r = self.r;
        if r.tracked_cycles > 0 {
            let n = r.tracked_cycles as f64;
            r.rms_d = Some((self.sum_d2 / n).sqrt());
            r.rms_e_v = Some((self.sum_ev2 / n).sqrt());
        }
        r.time_to_converge = match (self.first_tracked, self.converged_since) {
            (Some(first), Some(since)) => Some(since - first),
            _ => None,
        };
        r
    }
}

pub fn compute(rows: &[LogRow]) -> RunReport {
    let mut b = ReportBuilder::new();
    rows.iter().for_each(|r| b.push(r));
    b.finish()
}

impl RunReport {
    /// `key = value` lines; reals in shortest round-trip form, absent values as `none`.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:?}"));
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        kv("cycles", self.cycles.to_string());
        kv("tracked_cycles", self.tracked_cycles.to_string());
        kv("rms_d", opt(self.rms_d));
        kv("max_abs_d", opt(self.max_abs_d));
        kv("rms_e_v", opt(self.rms_e_v));
        kv("time_to_converge", opt(self.time_to_converge));
        kv("handovers", self.handovers.to_string());
        kv(
            "unexpected_handovers",
            self.unexpected_handovers.to_string(),
        );
        kv("final_position_error", opt(self.final_position_error));
        kv("final_heading_error", opt(self.final_heading_error));
        kv("traj_sent", self.traj_sent.to_string());
        kv("traj_dropped", self.traj_dropped.to_string());
        kv("traj_accepted", self.traj_accepted.to_string());
        kv("traj_rejected", self.traj_rejected.to_string());
        kv("loc_sent", self.loc_sent.to_string());
        kv("loc_dropped", self.loc_dropped.to_string());
        kv("loc_rejected", self.loc_rejected.to_string());
        kv("commands", self.commands.to_string());
        out
    }
}
