use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use tracklink::capture;
use tracklink::harness::{self, RunOptions};
use tracklink::log::parse_log;
use tracklink::{plot, replay, scenario};
use tracklink_core::wire::{self, Message, HEADER_LEN};
use tracklink_core::{ControlGains, VehicleParams};

/// Trajectory tracking controller bridge: scenario runner and log tools.
#[derive(Debug, Parser)]
#[command(name = "tracklink", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario closed loop and write run.csv, report.txt and frames.bin.
    Run {
        scenario: PathBuf,
        /// RNG seed; defaults to the scenario's `seed`, else 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Simulated duration [s]; defaults to the scenario's `duration`.
        #[arg(long)]
        duration: Option<f64>,
        /// Pace cycles to the wall clock and exchange frames over loopback UDP.
        #[arg(long)]
        paced: bool,
        /// First of five consecutive UDP ports used with --paced.
        #[arg(long, default_value_t = 41001)]
        port_base: u16,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Recompute the report from a log and optionally draw plots.
    Analyze {
        log: PathBuf,
        #[arg(long)]
        plots: Option<PathBuf>,
    },
    /// Decode a frame capture or a file of concatenated raw frames.
    ProtocolDump { file: PathBuf },
    /// Feed a run's captured frames to a fresh controller and compare its output.
    Replay {
        /// Directory holding run.csv and frames.bin.
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e)
            if e.downcast_ref::<io::Error>()
                .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            scenario,
            seed,
            duration,
            paced,
            port_base,
            out,
        } => {
            let sc = scenario::load(&scenario)?;
            let opts = RunOptions {
                seed: seed.or(sc.seed).unwrap_or(0),
                duration,
                paced,
                port_base,
                ..Default::default()
            };
            let run = harness::run_scenario(&sc.spec, &opts)?;
            run.write_to(&out)?;
            print!("{}", run.report.to_text());
            if let Some(v) = &run.violation {
                eprintln!("invariant violated at {v}");
            }
            if run.report.unexpected_handovers > 0 {
                eprintln!("{} unexpected handover(s)", run.report.unexpected_handovers);
            }
            Ok(run.passed())
        }
        Command::Analyze { log, plots } => analyze(&log, plots.as_deref()),
        Command::ProtocolDump { file } => protocol_dump(&file),
        Command::Replay { dir } => {
            let rows = read_log(&dir.join("run.csv"))?;
            let path = dir.join("frames.bin");
            let bytes =
                std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            let frames = capture::decode(&bytes)?;
            let outcome = replay::replay(
                &rows,
                &frames,
                &ControlGains::default(),
                &VehicleParams::default(),
            );
            println!(
                "cycles = {}\ncommands = {}",
                outcome.cycles, outcome.commands
            );
            match outcome.mismatch {
                None => {
                    println!("replay identical");
                    Ok(true)
                }
                Some(m) => {
                    println!(
                        "replay differs at cycle {} on {}",
                        m.cycle,
                        m.channel.name()
                    );
                    Ok(false)
                }
            }
        }
    }
}

fn read_log(path: &Path) -> Result<Vec<tracklink::log::LogRow>> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_log(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn analyze(log: &Path, plots: Option<&Path>) -> Result<bool> {
    let rows = read_log(log)?;
    let (report, violation) = harness::analyze(&rows, &VehicleParams::default());
    let text = report.to_text();
    print!("{text}");
    let mut ok = report.unexpected_handovers == 0;
    if let Some(v) = violation {
        println!("violation = {v}");
        ok = false;
    }
    let live = log.with_file_name("report.txt");
    if let Ok(recorded) = std::fs::read_to_string(&live) {
        if recorded == text {
            println!("# matches {}", live.display());
        } else {
            println!("# differs from {}", live.display());
            ok = false;
        }
    }
    if let Some(dir) = plots {
        for p in plot::write_plots(&rows, dir)? {
            println!("# wrote {}", p.display());
        }
    }
    Ok(ok)
}

fn describe(msg: &Message) -> String {
    match msg {
        Message::Trajectory(t) => format!(
            "seq={} t={} gear={:?} hint={:?} points={}",
            t.seq,
            t.timestamp,
            t.gear,
            t.mode_hint,
            t.points.len()
        ),
        Message::Localization(l) => format!(
            "seq={} t={} x={} y={} theta={} v={} status={:?}",
            l.seq, l.timestamp, l.x, l.y, l.theta, l.v, l.status
        ),
        Message::ControlCommand(c) => format!(
            "seq={} t={} accel={} steer={} gear={:?} mode={} direct={} throttle={} brake={}",
            c.seq,
            c.timestamp,
            c.accel_cmd,
            c.steer_wheel_cmd,
            c.gear_cmd,
            c.mode.as_str(),
            c.direct_actuation,
            c.throttle,
            c.brake
        ),
        Message::HmiCommand(h) => format!("seq={} t={} action={:?}", h.seq, h.timestamp, h.command),
        Message::ControllerStatus(s) => format!(
            "seq={} t={} fsm={} mode={} cause={} d={} e_psi={} e_v={}",
            s.seq,
            s.timestamp,
            s.fsm.as_str(),
            s.mode.map_or("-", |m| m.as_str()),
            s.cause.map_or("-".to_string(), |c| c.to_string()),
            s.lateral_error,
            s.heading_error,
            s.speed_error
        ),
    }
}

fn dump_frame(out: &mut impl Write, prefix: &str, frame: &[u8]) -> io::Result<bool> {
    match wire::decode(frame) {
        Ok(msg) => {
            writeln!(out, "{prefix} {} {}", msg.msg_type().name(), describe(&msg))?;
            Ok(true)
        }
        Err(e) => {
            writeln!(out, "{prefix} {e}")?;
            Ok(false)
        }
    }
}

fn protocol_dump(file: &Path) -> Result<bool> {
    let bytes = std::fs::read(file).with_context(|| format!("reading {}", file.display()))?;
    let mut out = io::stdout().lock();
    let mut ok = true;
    if capture::is_capture(&bytes) {
        for f in capture::decode(&bytes)? {
            let prefix = format!(
                "cycle={} t={:.2} ch={} len={}",
                f.cycle,
                f.time,
                f.channel.name(),
                f.frame.len()
            );
            ok &= dump_frame(&mut out, &prefix, &f.frame)?;
        }
        return Ok(ok);
    }
    let mut at = 0;
    while at < bytes.len() {
        let rest = &bytes[at..];
        if rest.len() < HEADER_LEN {
            bail!(
                "byte {at}: {} trailing bytes do not hold a frame header",
                rest.len()
            );
        }
        let payload = u32::from_le_bytes(rest[6..10].try_into().unwrap()) as usize;
        let len = (HEADER_LEN + payload + wire::CRC_LEN).min(rest.len());
        ok &= dump_frame(&mut out, &format!("offset={at} len={len}"), &rest[..len])?;
        at += len;
    }
    Ok(ok)
}
