//! Scenario files.
//!
//! Line-based `key = value` text. `#` starts a comment, blank lines are ignored, each key may
//! appear once except `event`.
//!
//! ```text
//! # ARC at 5 m/s for 30 s
//! shape = ARC
//! speed = 5
//! duration = 30
//! arc_radius = 20
//! seed = 7
//! engage_at = 0          # or `never`
//! event = 10 planner_outage
//! ```
//!
//! Numeric keys are the [`ScenarioSpec`] field names. `event = <time> <kind>` schedules one of
//! `engage`, `disengage`, `emergency_stop`, `actuator_fault`, `localization_outage`,
//! `planner_outage`. `engage_at` moves (or with `never` removes) the default engage at t = 0.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use tracklink_core::mocks::{EventKind, ScenarioSpec, ScheduledEvent, Shape, SpecError};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub seed: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: SpecError,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ScenarioError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ScenarioError::Syntax { line, .. } | ScenarioError::Invalid { line, .. } => Some(*line),
            ScenarioError::Io { .. } => None,
        }
    }
}

type FieldRef = fn(&mut ScenarioSpec) -> &mut f64;

const NUMERIC: [(&str, FieldRef); 19] = [
    ("speed", |s| &mut s.speed),
    ("duration", |s| &mut s.duration),
    ("arc_radius", |s| &mut s.arc_radius),
    ("lane_offset", |s| &mut s.lane_offset),
    ("lane_change_start", |s| &mut s.lane_change_start),
    ("lane_change_distance", |s| &mut s.lane_change_distance),
    ("stop_start", |s| &mut s.stop_start),
    ("stop_decel", |s| &mut s.stop_decel),
    ("replan_period", |s| &mut s.replan_period),
    ("sample_spacing", |s| &mut s.sample_spacing),
    ("backward_horizon", |s| &mut s.backward_horizon),
    ("forward_horizon", |s| &mut s.forward_horizon),
    ("noise_xy", |s| &mut s.noise_xy),
    ("noise_theta", |s| &mut s.noise_theta),
    ("loc_dropout", |s| &mut s.loc_dropout),
    ("loc_latency", |s| &mut s.loc_latency),
    ("traj_drop", |s| &mut s.traj_drop),
    ("initial_offset", |s| &mut s.initial_offset),
    ("initial_heading_error", |s| &mut s.initial_heading_error),
];

fn numeric_field(key: &str) -> Option<FieldRef> {
    NUMERIC.iter().find(|(k, _)| *k == key).map(|(_, f)| *f)
}

fn number(line: usize, key: &str, raw: &str) -> Result<f64, ScenarioError> {
    raw.parse::<f64>().map_err(|_| ScenarioError::Syntax {
        line,
        reason: format!("`{key}` expects a number, got `{raw}`"),
    })
}

pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
    let mut spec = ScenarioSpec {
        events: Vec::new(),
        ..Default::default()
    };
    let mut seed = None;
    let mut engage_at = Some(0.0);
    let mut lines: HashMap<&str, usize> = HashMap::new();
    let mut first_event_line = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let syntax = |reason: String| ScenarioError::Syntax { line, reason };
        let (key, value) = body
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| syntax(format!("expected `key = value`, got `{body}`")))?;
        if value.is_empty() {
            return Err(syntax(format!("`{key}` has no value")));
        }
        if key == "event" {
            let mut parts = value.split_whitespace();
            let (at, kind) = match (parts.next(), parts.next(), parts.next()) {
                (Some(at), Some(kind), None) => (at, kind),
                _ => {
                    return Err(syntax(format!(
                        "expected `event = <time> <kind>`, got `{value}`"
                    )))
                }
            };
            let at = number(line, key, at)?;
            let kind = EventKind::parse(kind)
                .ok_or_else(|| syntax(format!("unknown event kind `{kind}`")))?;
            spec.events.push(ScheduledEvent { at, kind });
            first_event_line.get_or_insert(line);
            continue;
        }
        if let Some(prev) = lines.insert(key, line) {
            if numeric_field(key).is_some() || matches!(key, "shape" | "seed" | "engage_at") {
                return Err(syntax(format!("`{key}` already set on line {prev}")));
            }
        }
        match key {
            "shape" => {
                spec.shape = Shape::parse(value)
                    .ok_or_else(|| syntax(format!("unknown shape `{value}`")))?;
            }
            "seed" => {
                seed = Some(value.parse().map_err(|_| {
                    syntax(format!("`seed` expects an unsigned integer, got `{value}`"))
                })?);
            }
            "engage_at" if value == "never" => engage_at = None,
            "engage_at" => engage_at = Some(number(line, key, value)?),
            _ => match numeric_field(key) {
                Some(field) => *field(&mut spec) = number(line, key, value)?,
                None => return Err(syntax(format!("unknown key `{key}`"))),
            },
        }
    }

    if let Some(at) = engage_at {
        spec.events.insert(
            0,
            ScheduledEvent {
                at,
                kind: EventKind::Engage,
            },
        );
    }
    spec.events.sort_by(|a, b| a.at.total_cmp(&b.at));
    spec.validate().map_err(|source| {
        let line = match source.field {
            "events" => first_event_line.or_else(|| lines.get("engage_at").copied()),
            f => lines.get(f).copied(),
        };
        ScenarioError::Invalid {
            line: line.unwrap_or(0),
            source,
        }
    })?;
    Ok(Scenario { spec, seed })
}

pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

/// Writes every key explicitly; `parse(&render(s)) == s` for valid scenarios.
pub fn render(sc: &Scenario) -> String {
    let mut spec = sc.spec.clone();
    let mut out = String::new();
    writeln!(out, "shape = {}", spec.shape.as_str()).unwrap();
    for (key, field) in &NUMERIC {
        writeln!(out, "{key} = {:?}", *field(&mut spec)).unwrap();
    }
    if let Some(seed) = sc.seed {
        writeln!(out, "seed = {seed}").unwrap();
    }
    writeln!(out, "engage_at = never").unwrap();
    for e in &spec.events {
        writeln!(out, "event = {:?} {}", e.at, e.kind.as_str()).unwrap();
    }
    out
}
