//! Open-loop replay: a fresh controller is fed the frames captured during a run instead of
//! live sockets and must reproduce the command and status frames byte for byte.

use tracklink_core::wire::{self, MsgType};
use tracklink_core::{ControlGains, VehicleParams};

use crate::capture::CapturedFrame;
use crate::harness::{controller_frames, new_supervisor, Inbox};
use crate::log::LogRow;

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub cycle: u64,
    pub channel: MsgType,
    pub recorded: Option<Vec<u8>>,
    pub replayed: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplayOutcome {
    pub cycles: u64,
    pub commands: u64,
    pub mismatch: Option<Mismatch>,
}

/// `rows` supply the cycle clock and the gateway's fault flag, `frames` the controller inputs.
/// `gains` and `params` must be the ones the run used.
pub fn replay(
    rows: &[LogRow],
    frames: &[CapturedFrame],
    gains: &ControlGains,
    params: &VehicleParams,
) -> ReplayOutcome {
    let mut supervisor = new_supervisor(gains, params);
    let mut inbox = Inbox::default();
    let mut out = ReplayOutcome::default();
    let mut at = 0;
    for row in rows {
        let end = at
            + frames[at..]
                .iter()
                .take_while(|f| u64::from(f.cycle) == row.cycle)
                .count();
        let cycle_frames = &frames[at..end];
        at = end;

        for kind in Inbox::CHANNELS {
            let mine = cycle_frames
                .iter()
                .filter(|f| f.channel == kind)
                .map(|f| f.frame.as_slice());
            inbox.deliver(wire::latest_of(mine, kind).0);
        }
        let report = supervisor.step(inbox.take_inputs(row.time, row.actuator_fault));
        let produced = controller_frames(&report);
        out.cycles += 1;
        out.commands += u64::from(report.command().is_some());

        for kind in [MsgType::ControlCommand, MsgType::ControllerStatus] {
            let recorded = cycle_frames
                .iter()
                .find(|f| f.channel == kind)
                .map(|f| f.frame.clone());
            let replayed = produced
                .iter()
                .find(|(k, _)| *k == kind)
                .map(|(_, f)| f.clone());
            if recorded != replayed {
                out.mismatch = Some(Mismatch {
                    cycle: row.cycle,
                    channel: kind,
                    recorded,
                    replayed,
                });
                return out;
            }
        }
    }
    out
}
