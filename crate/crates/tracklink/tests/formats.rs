use std::sync::OnceLock;

use proptest::prelude::*;
use tracklink::capture;
use tracklink::harness::{self, RunOptions, RunOutput};
use tracklink::log::{parse_log, to_bytes};
use tracklink::scenario::{self, Scenario};
use tracklink_core::mocks::{EventKind, ScenarioSpec, ScheduledEvent, Shape};

fn spec() -> impl Strategy<Value = Scenario> {
    let shape = prop::sample::select(Shape::ALL.to_vec());
    let reals = prop::array::uniform8(0.05..50.0f64);
    let probs = (0.0..0.99f64, 0.0..0.99f64);
    let events = prop::collection::vec(
        (0.0..60.0f64, prop::sample::select(EventKind::ALL.to_vec())),
        0..5,
    );
    (
        shape,
        reals,
        probs,
        -5.0..5.0f64,
        events,
        prop::option::of(any::<u64>()),
    )
        .prop_map(
            |(shape, r, (loc_dropout, traj_drop), offset, events, seed)| {
                let mut events: Vec<ScheduledEvent> = events
                    .into_iter()
                    .map(|(at, kind)| ScheduledEvent { at, kind })
                    .collect();
                events.sort_by(|a, b| a.at.total_cmp(&b.at));
                let spec = ScenarioSpec {
                    shape,
                    speed: r[0],
                    duration: r[1],
                    arc_radius: r[2],
                    lane_change_distance: r[3],
                    stop_decel: r[4],
                    replan_period: r[5],
                    sample_spacing: 0.1 + r[6] / 10.0,
                    forward_horizon: r[7],
                    loc_dropout,
                    traj_drop,
                    initial_offset: offset,
                    events,
                    ..Default::default()
                };
                Scenario { spec, seed }
            },
        )
}

fn sample_run() -> &'static RunOutput {
    static RUN: OnceLock<RunOutput> = OnceLock::new();
    RUN.get_or_init(|| {
        let spec = ScenarioSpec {
            shape: Shape::LaneChange,
            duration: 0.5,
            noise_xy: 0.05,
            loc_dropout: 0.2,
            traj_drop: 0.3,
            ..Default::default()
        };
        harness::run_scenario(
            &spec,
            &RunOptions {
                seed: 4,
                ..Default::default()
            },
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scenario_render_parse_roundtrip(sc in spec()) {
        prop_assume!(sc.spec.validate().is_ok());
        let text = scenario::render(&sc);
        prop_assert_eq!(scenario::parse(&text).unwrap(), sc);
    }

    #[test]
    fn scenario_parse_never_panics(text in "[a-z_= 0-9.#\n-]{0,200}") {
        let _ = scenario::parse(&text);
    }

    // A cut inside a row is always reported; a cut on a row boundary yields a prefix.
    #[test]
    fn truncated_log_is_error_or_prefix(cut in 0usize..100_000) {
        let run = sample_run();
        let bytes = run.log_bytes();
        let cut = cut % bytes.len();
        match parse_log(&bytes[..cut]) {
            Ok(rows) => {
                prop_assert_eq!(bytes[cut - 1], b'\n');
                prop_assert_eq!(&rows[..], &run.rows[..rows.len()]);
            }
            Err(e) => prop_assert!(e.offset <= cut as u64, "{} > {}", e.offset, cut),
        }
    }

    #[test]
    fn truncated_capture_is_error(cut in 0usize..1_000_000) {
        let bytes = capture::encode(&sample_run().capture);
        let cut = cut % bytes.len();
        if let Ok(frames) = capture::decode(&bytes[..cut]) {
            prop_assert!(frames.len() < sample_run().capture.len());
            prop_assert_eq!(&capture::encode(&frames)[..], &bytes[..cut]);
        }
    }
}

#[test]
fn log_roundtrip_is_byte_exact() {
    let run = sample_run();
    let bytes = run.log_bytes();
    let rows = parse_log(&bytes).unwrap();
    assert_eq!(rows, run.rows);
    assert_eq!(to_bytes(&rows), bytes);
    assert!(run.report.traj_dropped > 0 && run.report.loc_dropped > 0);
}
