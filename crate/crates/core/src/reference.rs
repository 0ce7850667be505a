//! Trajectory storage and reference point extraction.
//!
//! In trajectory mode the reference is found by interpolating the stored trajectory at the
//! localization time; in path mode it is the point on the sampled polyline closest to the
//! vehicle. Samples may be spaced unevenly in both time and distance.

use core::fmt;

use crate::angle;
use crate::messages::{
    validate_trajectory, Rejection, TrajectoryMsg, TrajectoryPoint, WatchdogConfig,
};

/// How a reference point was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSource {
    Trajectory,
    Path,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePoint {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub kappa: f64,
    pub s: f64,
    pub v: f64,
    pub a: f64,
    /// Interpolated offset from the trajectory timestamp.
    pub relative_time: f64,
    pub source: ReferenceSource,
}

impl ReferencePoint {
    fn from_sample(p: &TrajectoryPoint, source: ReferenceSource) -> Self {
        Self {
            x: p.x,
            y: p.y,
            theta: p.theta,
            kappa: p.kappa,
            s: p.s,
            v: p.v,
            a: p.a,
            relative_time: p.relative_time,
            source,
        }
    }

    fn between(
        p: &TrajectoryPoint,
        q: &TrajectoryPoint,
        frac: f64,
        source: ReferenceSource,
    ) -> Self {
        if frac <= 0.0 {
            return Self::from_sample(p, source);
        }
        if frac >= 1.0 {
            return Self::from_sample(q, source);
        }
        let lerp = |a: f64, b: f64| a + frac * (b - a);
        Self {
            x: lerp(p.x, q.x),
            y: lerp(p.y, q.y),
            theta: angle::lerp(p.theta, q.theta, frac),
            kappa: lerp(p.kappa, q.kappa),
            s: lerp(p.s, q.s),
            v: lerp(p.v, q.v),
            a: lerp(p.a, q.a),
            relative_time: lerp(p.relative_time, q.relative_time),
            source,
        }
    }
}

/// Why a trajectory was not taken into the store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreReject {
    Invalid(Rejection),
    /// Sequence number not newer than the stored trajectory.
    OldSeq,
}

/// Holds the last valid trajectory.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryStore {
    current: Option<TrajectoryMsg>,
    received_at: f64,
}

impl TrajectoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces the stored trajectory iff `msg` validates at `now` and is newer.
    pub fn update(
        &mut self,
        msg: TrajectoryMsg,
        now: f64,
        cfg: &WatchdogConfig,
    ) -> Result<(), StoreReject> {
        validate_trajectory(&msg, now, cfg).map_err(StoreReject::Invalid)?;
        if let Some(cur) = &self.current {
            if msg.seq <= cur.seq {
                return Err(StoreReject::OldSeq);
            }
        }
        self.current = Some(msg);
        self.received_at = now;
        Ok(())
    }

    pub fn current(&self) -> Option<&TrajectoryMsg> {
        self.current.as_ref()
    }

    pub fn received_at(&self) -> f64 {
        self.received_at
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_none()
    }

    pub fn clear(&mut self) {
        self.current = None;
    }
}

/// The query time lies outside the sampled horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutOfHorizon {
    /// Query time relative to the trajectory timestamp.
    pub tau: f64,
    pub first: f64,
    pub last: f64,
}

impl fmt::Display for OutOfHorizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "OUT_OF_HORIZON: {} not in [{}, {}]",
            self.tau, self.first, self.last
        )
    }
}

impl core::error::Error for OutOfHorizon {}

/// Interpolates the trajectory at absolute time `t`.
pub fn ref_by_time(traj: &TrajectoryMsg, t: f64) -> Result<ReferencePoint, OutOfHorizon> {
    let pts = &traj.points;
    let tau = t - traj.timestamp;
    let (first, last) = match (pts.first(), pts.last()) {
        (Some(f), Some(l)) => (f.relative_time, l.relative_time),
        _ => {
            return Err(OutOfHorizon {
                tau,
                first: f64::NAN,
                last: f64::NAN,
            })
        }
    };
    if !(tau >= first && tau <= last) {
        return Err(OutOfHorizon { tau, first, last });
    }
    // first index with relative_time > tau
    let upper = pts.partition_point(|p| p.relative_time <= tau);
    let i = upper - 1;
    let p = &pts[i];
    if p.relative_time == tau || upper == pts.len() {
        return Ok(ReferencePoint::from_sample(p, ReferenceSource::Trajectory));
    }
    let q = &pts[upper];
    let frac = (tau - p.relative_time) / (q.relative_time - p.relative_time);
    Ok(ReferencePoint::between(
        p,
        q,
        frac,
        ReferenceSource::Trajectory,
    ))
}

/// Closest-point projection result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub point: ReferencePoint,
    /// Index of the segment's first sample.
    pub segment: usize,
    pub distance: f64,
}

fn project_onto_segment(p: &TrajectoryPoint, q: &TrajectoryPoint, x: f64, y: f64) -> (f64, f64) {
    let (dx, dy) = (q.x - p.x, q.y - p.y);
    let len2 = dx * dx + dy * dy;
    let frac = if len2 > 0.0 {
        (((x - p.x) * dx + (y - p.y) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (fx, fy) = if frac >= 1.0 {
        (q.x, q.y)
    } else {
        (p.x + frac * dx, p.y + frac * dy)
    };
    let (ex, ey) = (x - fx, y - fy);
    (frac, ex * ex + ey * ey)
}

/// Projects `(x, y)` onto the polyline, considering only segments whose arc-length span
/// intersects `window`. Falls back to all segments when the window matches none.
///
/// Equal distances resolve to the lowest segment index.
pub fn project(traj: &TrajectoryMsg, x: f64, y: f64, window: Option<(f64, f64)>) -> Projection {
    let pts = &traj.points;
    match pts.len() {
        0 => panic!("projection onto an empty trajectory"),
        1 => {
            let p = &pts[0];
            let distance = libm::hypot(x - p.x, y - p.y);
            return Projection {
                point: ReferencePoint::from_sample(p, ReferenceSource::Path),
                segment: 0,
                distance,
            };
        }
        _ => {}
    }
    let scan = |window: Option<(f64, f64)>| {
        let mut best: Option<(usize, f64, f64)> = None;
        for (i, seg) in pts.windows(2).enumerate() {
            if let Some((lo, hi)) = window {
                if seg[1].s < lo || seg[0].s > hi {
                    continue;
                }
            }
            let (frac, d2) = project_onto_segment(&seg[0], &seg[1], x, y);
            if best.is_none_or(|(_, _, b)| d2 < b) {
                best = Some((i, frac, d2));
            }
        }
        best
    };
    let (segment, frac, d2) = window
        .and_then(|w| scan(Some(w)))
        .or_else(|| scan(None))
        .expect("at least one segment");
    Projection {
        point: ReferencePoint::between(
            &pts[segment],
            &pts[segment + 1],
            frac,
            ReferenceSource::Path,
        ),
        segment,
        distance: libm::sqrt(d2),
    }
}

/// Global closest-point reference on the trajectory polyline.
pub fn ref_by_projection(traj: &TrajectoryMsg, x: f64, y: f64) -> ReferencePoint {
    project(traj, x, y, None).point
}

/// Projection with arc-length hysteresis: once a match exists, later queries only search
/// within `window` metres of arc length around it, so loops in the path cannot make the
/// reference jump between branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionTracker {
    pub window: f64,
    last_s: Option<f64>,
}

impl Default for ProjectionTracker {
    fn default() -> Self {
        Self {
            window: 20.0,
            last_s: None,
        }
    }
}

impl ProjectionTracker {
    pub fn new(window: f64) -> Self {
        Self {
            window,
            last_s: None,
        }
    }

    pub fn reset(&mut self) {
        self.last_s = None;
    }

    pub fn last_s(&self) -> Option<f64> {
        self.last_s
    }

    pub fn project(&mut self, traj: &TrajectoryMsg, x: f64, y: f64) -> ReferencePoint {
        let window = self.last_s.map(|s| (s - self.window, s + self.window));
        let p = project(traj, x, y, window).point;
        self.last_s = Some(p.s);
        p
    }
}
