//! Per-cycle log.
//!
//! A header line with the names in [`COLUMNS`], then one comma-separated row per control
//! cycle with no gaps. Reals are written with 17 significant digits (`{:.16e}`) so a parsed
//! log reproduces the live values bit for bit. Empty fields mean "not present this cycle";
//! column groups (localization, reference, errors, command) are either all empty or all set.
//!
//! | columns | content |
//! |---|---|
//! | `time`, `cycle` | simulated time [s], cycle index from 0 |
//! | `fsm`, `mode` | supervisor state after the cycle, active control mode |
//! | `traj_tx` | `sent`, `dropped` (lost in transit) or `-` (no plan this cycle) |
//! | `traj_rx` | `accepted`, a rejection code, `OLD_SEQ`, or empty if nothing arrived |
//! | `traj_seq` | sequence number of the stored trajectory |
//! | `loc_tx` | `sent`, `dropped` or `-` |
//! | `loc_check` | `ok` or the rejection code of the localization in use |
//! | `horizon`, `horizon_left` | horizon classification, seconds of plan left |
//! | `loc_*` | localization received this cycle |
//! | `ref_source`, `ref_*` | `time` (interpolated) or `projection`, reference point |
//! | `e_s` .. `e_v` | Frenet errors |
//! | `cmd_seq` .. `gear_cmd` | raw and limited command as sent |
//! | `truth_*` | plant state at the start of the cycle |
//! | `actuator_fault`, `cause` | gateway fault flag, latched handover cause |
//! | `events` | scenario events applied this cycle, `|`-separated |

use std::fmt;
use std::io::Write;

use tracklink_core::control::ControlMode;
use tracklink_core::messages::{Gear, Rejection, ValidationResult};
use tracklink_core::mocks::EventKind;
use tracklink_core::reference::{ReferencePoint, ReferenceSource, StoreReject};
use tracklink_core::supervisor::{FaultCause, FsmState, HorizonStatus};
use tracklink_core::{FrenetError, PlantState};

pub const COLUMNS: [&str; 49] = [
    "time",
    "cycle",
    "fsm",
    "mode",
    "traj_tx",
    "traj_rx",
    "traj_seq",
    "loc_tx",
    "loc_check",
    "horizon",
    "horizon_left",
    "loc_t",
    "loc_x",
    "loc_y",
    "loc_theta",
    "loc_v",
    "ref_source",
    "ref_x",
    "ref_y",
    "ref_theta",
    "ref_kappa",
    "ref_s",
    "ref_v",
    "ref_a",
    "ref_time",
    "e_s",
    "d",
    "e_psi",
    "d_dot",
    "e_v",
    "cmd_seq",
    "accel_raw",
    "steer_raw",
    "accel_cmd",
    "steer_cmd",
    "direct",
    "throttle",
    "brake",
    "gear_cmd",
    "truth_x",
    "truth_y",
    "truth_theta",
    "truth_v",
    "truth_delta",
    "truth_a",
    "truth_gear",
    "actuator_fault",
    "cause",
    "events",
];

/// What happened to a message on its way out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tx {
    #[default]
    Idle,
    Sent,
    Dropped,
}

impl Tx {
    fn as_str(self) -> &'static str {
        match self {
            Tx::Idle => "-",
            Tx::Sent => "sent",
            Tx::Dropped => "dropped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocFields {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CommandFields {
    pub seq: u32,
    pub accel_raw: f64,
    pub steer_raw: f64,
    pub accel: f64,
    pub steer: f64,
    pub direct: bool,
    pub throttle: f64,
    pub brake: f64,
    pub gear: Gear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub time: f64,
    pub cycle: u64,
    pub fsm: FsmState,
    pub mode: Option<ControlMode>,
    pub traj_tx: Tx,
    pub traj_rx: Option<Result<(), StoreReject>>,
    pub traj_seq: Option<u32>,
    pub loc_tx: Tx,
    pub loc_check: ValidationResult,
    pub horizon: HorizonStatus,
    pub horizon_left: Option<f64>,
    pub loc: Option<LocFields>,
    pub reference: Option<ReferencePoint>,
    pub errors: Option<FrenetError>,
    pub command: Option<CommandFields>,
    pub truth: PlantState,
    pub actuator_fault: bool,
    pub cause: Option<FaultCause>,
    pub events: Vec<EventKind>,
}

fn horizon_str(h: HorizonStatus) -> &'static str {
    match h {
        HorizonStatus::Ample => "AMPLE",
        HorizonStatus::StopNeeded => "STOP_NEEDED",
        HorizonStatus::TooShort => "TOO_SHORT",
        HorizonStatus::Expired => "EXPIRED",
    }
}

fn source_str(s: ReferenceSource) -> &'static str {
    match s {
        ReferenceSource::Trajectory => "time",
        ReferenceSource::Path => "projection",
    }
}

fn traj_rx_str(r: &Result<(), StoreReject>) -> &'static str {
    match r {
        Ok(()) => "accepted",
        Err(StoreReject::OldSeq) => "OLD_SEQ",
        Err(StoreReject::Invalid(rej)) => rej.as_str(),
    }
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_group(present: bool, values: &[String], n: usize, f: &mut Vec<String>) {
    if present {
        f.extend_from_slice(values);
    } else {
        f.extend(std::iter::repeat_n(String::new(), n));
    }
}

fn row_fields(row: &LogRow) -> Vec<String> {
    let mut f: Vec<String> = Vec::with_capacity(COLUMNS.len());
    f.push(real(row.time));
    f.push(row.cycle.to_string());
    f.push(row.fsm.as_str().to_string());
    f.push(row.mode.map_or("", ControlMode::as_str).to_string());
    f.push(row.traj_tx.as_str().to_string());
    f.push(row.traj_rx.as_ref().map_or("", traj_rx_str).to_string());
    f.push(row.traj_seq.map(|s| s.to_string()).unwrap_or_default());
    f.push(row.loc_tx.as_str().to_string());
    f.push(match row.loc_check {
        Ok(()) => "ok".to_string(),
        Err(r) => r.as_str().to_string(),
    });
    f.push(horizon_str(row.horizon).to_string());
    f.push(row.horizon_left.map(real).unwrap_or_default());

    let l = row.loc.unwrap_or_default();
    opt_group(
        row.loc.is_some(),
        &[l.t, l.x, l.y, l.theta, l.v].map(real),
        5,
        &mut f,
    );

    match &row.reference {
        Some(r) => {
            f.push(source_str(r.source).to_string());
            f.extend([r.x, r.y, r.theta, r.kappa, r.s, r.v, r.a, r.relative_time].map(real));
        }
        None => f.extend(std::iter::repeat_n(String::new(), 9)),
    }

    let e = row.errors.unwrap_or_default();
    opt_group(
        row.errors.is_some(),
        &[e.e_s, e.d, e.e_psi, e.d_dot, e.e_v].map(real),
        5,
        &mut f,
    );

    match &row.command {
        Some(c) => {
            f.push(c.seq.to_string());
            f.extend([c.accel_raw, c.steer_raw, c.accel, c.steer].map(real));
            f.push(if c.direct { "1" } else { "0" }.to_string());
            f.extend([c.throttle, c.brake].map(real));
            f.push(c.gear.to_i8().to_string());
        }
        None => f.extend(std::iter::repeat_n(String::new(), 9)),
    }

    let t = &row.truth;
    f.extend([t.x, t.y, t.theta, t.v, t.delta_road, t.a_act].map(real));
    f.push(t.gear.to_i8().to_string());
    f.push(if row.actuator_fault { "1" } else { "0" }.to_string());
    f.push(row.cause.map(|c| c.to_string()).unwrap_or_default());
    f.push(
        row.events
            .iter()
            .map(|e| e.as_str())
            .collect::<Vec<_>>()
            .join("|"),
    );
    debug_assert_eq!(f.len(), COLUMNS.len());
    f
}

/// Streams rows as they are produced.
pub struct LogWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> LogWriter<W> {
    pub fn new(out: W) -> csv::Result<Self> {
        let mut inner = csv::WriterBuilder::new()
            .quote_style(csv::QuoteStyle::Never)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        inner.write_record(COLUMNS)?;
        Ok(Self { inner })
    }

    pub fn write_row(&mut self, row: &LogRow) -> csv::Result<()> {
        self.inner.write_record(row_fields(row))
    }

    pub fn finish(self) -> Result<W, csv::Error> {
        self.inner
            .into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))
    }
}

/// The complete log of `rows`.
pub fn to_bytes(rows: &[LogRow]) -> Vec<u8> {
    let mut w = LogWriter::new(Vec::new()).expect("writing to memory");
    for row in rows {
        w.write_row(row).expect("writing to memory");
    }
    w.finish().expect("writing to memory")
}

/// A malformed log, located by byte offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogParseError {
    pub offset: u64,
    pub line: u64,
    pub column: Option<&'static str>,
    pub reason: String,
}

impl fmt::Display for LogParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "byte {} (line {}", self.offset, self.line)?;
        if let Some(c) = self.column {
            write!(f, ", column `{c}`")?;
        }
        write!(f, "): {}", self.reason)
    }
}

impl std::error::Error for LogParseError {}

struct Cursor<'a> {
    rec: &'a csv::StringRecord,
    idx: usize,
    offset: u64,
    line: u64,
}

impl<'a> Cursor<'a> {
    fn err(&self, idx: usize, offset: u64, reason: String) -> LogParseError {
        LogParseError {
            offset,
            line: self.line,
            column: Some(COLUMNS[idx]),
            reason,
        }
    }

    fn next(&mut self) -> (&'a str, usize, u64) {
        let field = &self.rec[self.idx];
        let at = (self.idx, self.offset);
        self.offset += field.len() as u64 + 1;
        self.idx += 1;
        (field, at.0, at.1)
    }

    fn peek_empty(&self, n: usize) -> Result<bool, LogParseError> {
        let empties = (self.idx..self.idx + n)
            .filter(|&i| self.rec[i].is_empty())
            .count();
        match empties {
            0 => Ok(false),
            e if e == n => Ok(true),
            _ => Err(self.err(
                self.idx,
                self.offset,
                format!("column group of {n} partially filled"),
            )),
        }
    }

    fn skip(&mut self, n: usize) {
        for _ in 0..n {
            self.next();
        }
    }

    fn parse<T>(
        &mut self,
        what: &str,
        f: impl FnOnce(&str) -> Option<T>,
    ) -> Result<T, LogParseError> {
        let (raw, idx, offset) = self.next();
        f(raw).ok_or_else(|| self.err(idx, offset, format!("expected {what}, found `{raw}`")))
    }

    fn real(&mut self) -> Result<f64, LogParseError> {
        self.parse("a real number", |s| s.parse().ok())
    }

    fn opt<T>(
        &mut self,
        what: &str,
        f: impl FnOnce(&str) -> Option<T>,
    ) -> Result<Option<T>, LogParseError> {
        if self.rec[self.idx].is_empty() {
            self.next();
            return Ok(None);
        }
        self.parse(what, f).map(Some)
    }

    fn reals<const N: usize>(&mut self) -> Result<[f64; N], LogParseError> {
        let mut out = [0.0; N];
        for v in &mut out {
            *v = self.real()?;
        }
        Ok(out)
    }

    fn flag(&mut self) -> Result<bool, LogParseError> {
        self.parse("0 or 1", |s| match s {
            "0" => Some(false),
            "1" => Some(true),
            _ => None,
        })
    }

    fn gear(&mut self) -> Result<Gear, LogParseError> {
        self.parse("a gear (-1, 0, 1)", |s| {
            s.parse().ok().and_then(Gear::from_i8)
        })
    }
}

fn parse_tx(s: &str) -> Option<Tx> {
    [Tx::Idle, Tx::Sent, Tx::Dropped]
        .into_iter()
        .find(|t| t.as_str() == s)
}

fn parse_rejection(s: &str) -> Option<Rejection> {
    Rejection::ALL.into_iter().find(|r| r.as_str() == s)
}

fn parse_mode(s: &str) -> Option<ControlMode> {
    (1..=3)
        .filter_map(ControlMode::from_u8)
        .find(|m| m.as_str() == s)
}

fn parse_cause(s: &str) -> Option<FaultCause> {
    (0..=u8::MAX)
        .filter_map(FaultCause::from_u8)
        .find(|c| c.to_string() == s)
}

fn parse_row(c: &mut Cursor<'_>) -> Result<LogRow, LogParseError> {
    let time = c.real()?;
    let cycle = c.parse("a cycle index", |s| s.parse().ok())?;
    let fsm = c.parse("an FSM state", FsmState::parse)?;
    let mode = c.opt("a control mode", parse_mode)?;
    let traj_tx = c.parse("sent, dropped or -", parse_tx)?;
    let traj_rx = c.opt("a trajectory verdict", |s| match s {
        "accepted" => Some(Ok(())),
        "OLD_SEQ" => Some(Err(StoreReject::OldSeq)),
        _ => parse_rejection(s).map(|r| Err(StoreReject::Invalid(r))),
    })?;
    let traj_seq = c.opt("a sequence number", |s| s.parse().ok())?;
    let loc_tx = c.parse("sent, dropped or -", parse_tx)?;
    let loc_check = c.parse("ok or a rejection code", |s| match s {
        "ok" => Some(Ok(())),
        _ => parse_rejection(s).map(Err),
    })?;
    let horizon = c.parse("a horizon status", |s| {
        HorizonStatus::ALL
            .into_iter()
            .find(|h| horizon_str(*h) == s)
    })?;
    let horizon_left = c.opt("a real number", |s| s.parse().ok())?;

    let loc = if c.peek_empty(5)? {
        c.skip(5);
        None
    } else {
        let [t, x, y, theta, v] = c.reals()?;
        Some(LocFields { t, x, y, theta, v })
    };

    let reference = if c.peek_empty(9)? {
        c.skip(9);
        None
    } else {
        let source = c.parse("time or projection", |s| {
            [ReferenceSource::Trajectory, ReferenceSource::Path]
                .into_iter()
                .find(|x| source_str(*x) == s)
        })?;
        let [x, y, theta, kappa, s, v, a, relative_time] = c.reals()?;
        Some(ReferencePoint {
            x,
            y,
            theta,
            kappa,
            s,
            v,
            a,
            relative_time,
            source,
        })
    };

    let errors = if c.peek_empty(5)? {
        c.skip(5);
        None
    } else {
        let [e_s, d, e_psi, d_dot, e_v] = c.reals()?;
        Some(FrenetError {
            e_s,
            d,
            e_psi,
            d_dot,
            e_v,
        })
    };

    let command = if c.peek_empty(9)? {
        c.skip(9);
        None
    } else {
        let seq = c.parse("a sequence number", |s| s.parse().ok())?;
        let [accel_raw, steer_raw, accel, steer] = c.reals()?;
        let direct = c.flag()?;
        let [throttle, brake] = c.reals()?;
        let gear = c.gear()?;
        Some(CommandFields {
            seq,
            accel_raw,
            steer_raw,
            accel,
            steer,
            direct,
            throttle,
            brake,
            gear,
        })
    };

    let [x, y, theta, v, delta_road, a_act] = c.reals()?;
    let gear = c.gear()?;
    let truth = PlantState {
        x,
        y,
        theta,
        v,
        delta_road,
        a_act,
        gear,
    };
    let actuator_fault = c.flag()?;
    let cause = c.opt("a fault cause", parse_cause)?;
    let (raw, idx, offset) = c.next();
    let mut events = Vec::new();
    for name in raw.split('|').filter(|s| !s.is_empty()) {
        events.push(
            EventKind::parse(name)
                .ok_or_else(|| c.err(idx, offset, format!("unknown event `{name}`")))?,
        );
    }

    Ok(LogRow {
        time,
        cycle,
        fsm,
        mode,
        traj_tx,
        traj_rx,
        traj_seq,
        loc_tx,
        loc_check,
        horizon,
        horizon_left,
        loc,
        reference,
        errors,
        command,
        truth,
        actuator_fault,
        cause,
        events,
    })
}

/// Parses a complete log. Rows must be numbered 0, 1, 2, ... and the file must end with a
/// newline, so a log cut off inside a row is always reported.
pub fn parse_log(bytes: &[u8]) -> Result<Vec<LogRow>, LogParseError> {
    let whole = |offset: u64, line: u64, reason: String| LogParseError {
        offset,
        line,
        column: None,
        reason,
    };
    if bytes.is_empty() {
        return Err(whole(0, 1, "empty log".into()));
    }
    if bytes.last() != Some(&b'\n') {
        let line = bytes.iter().filter(|&&b| b == b'\n').count() as u64 + 1;
        return Err(whole(
            bytes.len() as u64,
            line,
            "log ends inside a row (no final newline)".into(),
        ));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(bytes);
    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        let more = reader.read_record(&mut record).map_err(|e| {
            let pos = e.position().cloned().unwrap_or_else(csv::Position::new);
            whole(pos.byte(), pos.line(), e.to_string())
        })?;
        if !more {
            break;
        }
        let pos = record
            .position()
            .cloned()
            .unwrap_or_else(csv::Position::new);
        if record.len() != COLUMNS.len() {
            return Err(whole(
                pos.byte(),
                pos.line(),
                format!("expected {} fields, found {}", COLUMNS.len(), record.len()),
            ));
        }
        if first {
            first = false;
            if let Some(i) = (0..COLUMNS.len()).find(|&i| &record[i] != COLUMNS[i]) {
                return Err(whole(
                    pos.byte(),
                    pos.line(),
                    format!("header column {i} is not `{}`", COLUMNS[i]),
                ));
            }
            continue;
        }
        let mut cursor = Cursor {
            rec: &record,
            idx: 0,
            offset: pos.byte(),
            line: pos.line(),
        };
        let row = parse_row(&mut cursor)?;
        if row.cycle != rows.len() as u64 {
            return Err(LogParseError {
                offset: pos.byte(),
                line: pos.line(),
                column: Some("cycle"),
                reason: format!("expected cycle {}, found {}", rows.len(), row.cycle),
            });
        }
        rows.push(row);
    }
    if first {
        return Err(whole(0, 1, "missing header".into()));
    }
    Ok(rows)
}
