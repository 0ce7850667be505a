//! SVG line plots of a run.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::log::LogRow;

#[derive(Debug, thiserror::Error)]
#[error("plot {path}: {reason}")]
pub struct PlotError {
    pub path: String,
    pub reason: String,
}

struct Series {
    label: &'static str,
    color: RGBColor,
    points: Vec<(f64, f64)>,
}

fn bounds(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let pad = |lo: f64, hi: f64| {
        if !lo.is_finite() {
            return (0.0, 1.0);
        }
        let m = ((hi - lo) * 0.05).max(1e-3);
        (lo - m, hi + m)
    };
    (pad(x0, x1), pad(y0, y1))
}

fn chart(
    path: &Path,
    title: &str,
    x_desc: &str,
    y_desc: &str,
    series: &[Series],
) -> Result<(), PlotError> {
    let fail = |e: &dyn std::fmt::Display| PlotError {
        path: path.display().to_string(),
        reason: e.to_string(),
    };
    let root = SVGBackend::new(path, (900, 540)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| fail(&e))?;
    let ((x0, x1), (y0, y1)) = bounds(series);
    let mut c = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| fail(&e))?;
    c.configure_mesh()
        .x_desc(x_desc)
        .y_desc(y_desc)
        .draw()
        .map_err(|e| fail(&e))?;
    for s in series {
        let color = s.color;
        c.draw_series(LineSeries::new(
            s.points.iter().copied(),
            color.stroke_width(2),
        ))
        .map_err(|e| fail(&e))?
        .label(s.label)
        .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    c.configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| fail(&e))?;
    root.present().map_err(|e| fail(&e))?;
    Ok(())
}

fn collect(rows: &[LogRow], f: impl Fn(&LogRow) -> Option<(f64, f64)>) -> Vec<(f64, f64)> {
    rows.iter().filter_map(f).collect()
}

/// Writes `path.svg`, `lateral_error.svg`, `speed.svg`, `accel.svg` and `steering.svg`.
pub fn write_plots(rows: &[LogRow], dir: &Path) -> Result<Vec<PathBuf>, PlotError> {
    std::fs::create_dir_all(dir).map_err(|e| PlotError {
        path: dir.display().to_string(),
        reason: e.to_string(),
    })?;
    let cmd = |r: &LogRow| r.command;
    let plots: [(&str, &str, &str, &str, Vec<Series>); 5] = [
        (
            "path.svg",
            "Path",
            "x [m]",
            "y [m]",
            vec![
                Series {
                    label: "reference",
                    color: BLUE,
                    points: collect(rows, |r| r.reference.map(|p| (p.x, p.y))),
                },
                Series {
                    label: "driven",
                    color: RED,
                    points: collect(rows, |r| Some((r.truth.x, r.truth.y))),
                },
            ],
        ),
        (
            "lateral_error.svg",
            "Lateral error",
            "t [s]",
            "d [m]",
            vec![Series {
                label: "d",
                color: RED,
                points: collect(rows, |r| r.errors.map(|e| (r.time, e.d))),
            }],
        ),
        (
            "speed.svg",
            "Speed",
            "t [s]",
            "v [m/s]",
            vec![
                Series {
                    label: "v_ref",
                    color: BLUE,
                    points: collect(rows, |r| {
                        r.reference.map(|p| (r.time, r.truth.gear.sign() * p.v))
                    }),
                },
                Series {
                    label: "v",
                    color: RED,
                    points: collect(rows, |r| Some((r.time, r.truth.v))),
                },
            ],
        ),
        (
            "accel.svg",
            "Acceleration command",
            "t [s]",
            "a [m/s^2]",
            vec![
                Series {
                    label: "raw",
                    color: BLUE,
                    points: collect(rows, |r| cmd(r).map(|c| (r.time, c.accel_raw))),
                },
                Series {
                    label: "limited",
                    color: RED,
                    points: collect(rows, |r| cmd(r).map(|c| (r.time, c.accel))),
                },
            ],
        ),
        (
            "steering.svg",
            "Steering wheel command",
            "t [s]",
            "angle [rad]",
            vec![
                Series {
                    label: "raw",
                    color: BLUE,
                    points: collect(rows, |r| cmd(r).map(|c| (r.time, c.steer_raw))),
                },
                Series {
                    label: "limited",
                    color: RED,
                    points: collect(rows, |r| cmd(r).map(|c| (r.time, c.steer))),
                },
            ],
        ),
    ];
    let mut written = Vec::new();
    for (name, title, xd, yd, series) in plots {
        let path = dir.join(name);
        chart(&path, title, xd, yd, &series)?;
        written.push(path);
    }
    Ok(written)
}
