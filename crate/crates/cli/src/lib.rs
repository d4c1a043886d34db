//! Scenario runner: loads scenario files, simulates them, predicts their
//! outcome and cross-checks the two.

pub mod scenario;

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use polaris_core::limits::{classify_switching, predict_fixed, FixedSystem, SwitchingSystem};
use polaris_core::{
    simulate_continuous, simulate_discrete, BalancePartition, OpinionState, OutcomeKind,
    OutcomePrediction, Trajectory,
};
use thiserror::Error;

pub use scenario::{load_scenario, parse_scenario, Scenario, System};

/// Terminal-state agreement required of fixed-topology predictions.
pub const LIMIT_TOL: f64 = 1e-4;
/// Largest terminal magnitude accepted as neutralized.
pub const ZERO_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error("check failed: {0}")]
    Mismatch(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Mismatch(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Predict,
    Check,
}

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub name: String,
    pub summary: String,
    pub trajectory: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

pub fn simulate(s: &Scenario) -> Result<Trajectory, CliError> {
    let result = match &s.system {
        System::Discrete { schedule, steps } => simulate_discrete(schedule, &s.x0, *steps),
        System::Continuous { schedule, horizon, dt, method } => {
            simulate_continuous(schedule, &s.x0, *method, *dt, *horizon)
        }
    };
    result.map_err(|e| CliError::Validation(e.to_string()))
}

pub fn predict(s: &Scenario) -> Result<OutcomePrediction, CliError> {
    let fixed = match &s.system {
        System::Discrete { schedule, .. } if schedule.is_fixed() => {
            let k = schedule.selector().index_at(0).expect("validated selector");
            predict_fixed(FixedSystem::Discrete(&schedule.graphs()[k]), &s.x0)
        }
        System::Continuous { schedule, .. } if schedule.is_fixed() => {
            let k = schedule.pieces()[0].graph;
            predict_fixed(FixedSystem::Continuous(&schedule.graphs()[k]), &s.x0)
        }
        System::Discrete { schedule, .. } => return Ok(classify_switching(SwitchingSystem::Discrete(schedule))),
        System::Continuous { schedule, .. } => return Ok(classify_switching(SwitchingSystem::Continuous(schedule))),
    };
    fixed.map_err(|e| CliError::Validation(e.to_string()))
}

/// Largest deviation of the terminal state from `±a` on the two sides of
/// `partition`, with `a` fitted as the mean signed value.
fn side_deviation(x: &[f64], partition: &BalancePartition) -> f64 {
    let signed: Vec<f64> = partition
        .set_one
        .iter()
        .map(|&i| x[i])
        .chain(partition.set_two.iter().map(|&i| -x[i]))
        .collect();
    let a = signed.iter().sum::<f64>() / signed.len() as f64;
    signed.iter().map(|v| (v - a).abs()).fold(0.0, f64::max)
}

/// Compares a prediction with a simulated trajectory. `Ok` carries a short
/// description of what was verified.
pub fn check_prediction(pred: &OutcomePrediction, traj: &Trajectory, fixed: bool) -> Result<String, String> {
    let x = traj.last();
    let xs = x.as_slice();
    match &pred.kind {
        OutcomeKind::Inconclusive { reason } => Err(format!("prediction inconclusive: {reason}")),
        OutcomeKind::Neutralize => {
            let norm = x.max_abs();
            if norm < ZERO_TOL {
                Ok(format!("terminal max-norm {norm:.3e} below {ZERO_TOL:e}"))
            } else {
                Err(format!("expected neutralization, terminal max-norm is {norm:.3e}"))
            }
        }
        _ if fixed => {
            let limit = pred.predicted_limit.as_ref().ok_or("fixed prediction lacks a limit")?;
            let gap = limit.iter().zip(xs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if gap <= LIMIT_TOL {
                Ok(format!("terminal state within {gap:.3e} of the predicted limit"))
            } else {
                Err(format!("terminal state differs from the predicted limit by {gap:.3e}"))
            }
        }
        OutcomeKind::Polarize { partition, .. } => {
            let dev = side_deviation(xs, partition);
            if dev <= LIMIT_TOL {
                Ok(format!("terminal state polarized along the partition (spread {dev:.3e})"))
            } else {
                Err(format!("terminal state not polarized along the partition (spread {dev:.3e})"))
            }
        }
        OutcomeKind::Cluster { root_partition, .. } => {
            let dev = side_deviation(xs, root_partition);
            if dev > LIMIT_TOL {
                return Err(format!("root agents not polarized (spread {dev:.3e})"));
            }
            let roots = root_partition.vertices();
            let c = roots.iter().map(|&i| xs[i].abs()).sum::<f64>() / roots.len() as f64;
            // last quarter of the run
            let tail = &traj.states[traj.len() - traj.len().div_ceil(4)..];
            let m = tail
                .iter()
                .flat_map(|s| {
                    s.as_slice()
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !roots.contains(i))
                        .map(|(_, v)| v.abs())
                        .collect::<Vec<_>>()
                })
                .fold(0.0, f64::max);
            if m <= c + LIMIT_TOL {
                Ok(format!("roots polarized at {c:.6}, remaining agents stay within {m:.6}"))
            } else {
                Err(format!("non-root magnitude {m:.6} leaves the root band {c:.6}"))
            }
        }
        OutcomeKind::Consensus { .. } => {
            let spread = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - xs.iter().copied().fold(f64::INFINITY, f64::min);
            if spread <= LIMIT_TOL {
                Ok(format!("terminal spread {spread:.3e}"))
            } else {
                Err(format!("expected consensus, terminal spread is {spread:.3e}"))
            }
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let mut w = create(path)?;
    traj.write_csv(&mut w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

fn report_text(s: &Scenario, pred: &OutcomePrediction) -> String {
    let mut text = pred.to_report();
    let _ = writeln!(text, "scenario,{}", s.name);
    let _ = writeln!(text, "x0,{}", fmt_state(&s.x0));
    let _ = writeln!(text, "note,outcomes are asserted for generic initial conditions; special x0 may deviate");
    text
}

fn fmt_state(x: &OpinionState) -> String {
    x.as_slice().iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(" ")
}

/// Runs one scenario, writing artifacts under `out_dir`.
pub fn run(s: &Scenario, mode: Mode, out_dir: &Path) -> Result<RunOutcome, CliError> {
    let trajectory_path = out_dir.join(&s.trajectory_path);
    let report_path = out_dir.join(&s.report_path);
    match mode {
        Mode::Simulate => {
            let traj = simulate(s)?;
            write_trajectory(&trajectory_path, &traj)?;
            Ok(RunOutcome {
                name: s.name.clone(),
                summary: format!("{} states, terminal {}", traj.len(), fmt_short(traj.last())),
                trajectory: Some(trajectory_path),
                report: None,
            })
        }
        Mode::Predict => {
            let pred = predict(s)?;
            write_text(&report_path, &report_text(s, &pred))?;
            Ok(RunOutcome {
                name: s.name.clone(),
                summary: summarize(&pred),
                trajectory: None,
                report: Some(report_path),
            })
        }
        Mode::Check => {
            let pred = predict(s)?;
            let traj = simulate(s)?;
            write_trajectory(&trajectory_path, &traj)?;
            let verdict = check_prediction(&pred, &traj, s.system.is_fixed());
            let mut text = report_text(s, &pred);
            let _ = writeln!(text, "terminal_state,{}", fmt_state(traj.last()));
            match &verdict {
                Ok(detail) => {
                    let _ = writeln!(text, "check,pass\ndetail,{detail}");
                }
                Err(detail) => {
                    let _ = writeln!(text, "check,fail\ndetail,{detail}");
                }
            }
            write_text(&report_path, &text)?;
            match verdict {
                Ok(detail) => Ok(RunOutcome {
                    name: s.name.clone(),
                    summary: format!("{}: {detail}", summarize(&pred)),
                    trajectory: Some(trajectory_path),
                    report: Some(report_path),
                }),
                Err(detail) => Err(CliError::Mismatch(format!("{}: {detail}", s.name))),
            }
        }
    }
}

fn fmt_short(x: &OpinionState) -> String {
    let parts: Vec<String> = x.as_slice().iter().map(|v| format!("{v:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn summarize(pred: &OutcomePrediction) -> String {
    let mut s = pred.kind.name().to_string();
    if let Some(tag) = pred.justification {
        let _ = write!(s, " [{tag}]");
    }
    if let Some(c) = pred.magnitude() {
        let _ = write!(s, " C = {c:.6}");
    }
    s
}
