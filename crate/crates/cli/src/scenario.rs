//! TOML scenario files.
//!
//! Agents are numbered from 0. Edges are `{ from, to, weight }` with `from`
//! the influencer. Discrete graphs need `self_weights`; continuous graphs
//! must not have them.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use polaris_core::{
    signed_laplacian, weights_to_trust_matrix, ContinuousMethod, ContinuousSchedule,
    DiscreteSchedule, Intervals, OpinionState, Piece, Selector, SignedDigraph,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    model: RawModel,
    horizon: f64,
    x0: RawX0,
    graphs: Vec<RawGraph>,
    #[serde(default)]
    schedule: RawSchedule,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum RawModel {
    Discrete,
    Continuous,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawX0 {
    values: Option<Vec<f64>>,
    random: Option<bool>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    name: String,
    n: usize,
    self_weights: Option<Vec<f64>>,
    #[serde(default)]
    edges: Vec<RawEdge>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    from: usize,
    to: usize,
    weight: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    selector: Option<Vec<String>>,
    sequence: Option<Vec<String>>,
    interval_length: Option<usize>,
    boundaries: Option<Vec<usize>>,
    gamma: Option<f64>,
    pieces: Option<Vec<RawPiece>>,
    dwell_set: Option<Vec<f64>>,
    pieces_per_interval: Option<usize>,
    weight_bounds: Option<[f64; 2]>,
    dt: Option<f64>,
    method: Option<RawMethod>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPiece {
    graph: String,
    dwell: f64,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum RawMethod {
    Exact,
    Rk4,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    trajectory: Option<PathBuf>,
    report: Option<PathBuf>,
}

/// The dynamics a scenario runs.
#[derive(Debug, Clone)]
pub enum System {
    Discrete {
        schedule: DiscreteSchedule,
        steps: usize,
    },
    Continuous {
        schedule: ContinuousSchedule,
        horizon: f64,
        dt: f64,
        method: ContinuousMethod,
    },
}

impl System {
    pub fn is_fixed(&self) -> bool {
        match self {
            System::Discrete { schedule, .. } => schedule.is_fixed(),
            System::Continuous { schedule, .. } => schedule.is_fixed(),
        }
    }
}

/// A fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub graph_names: Vec<String>,
    pub system: System,
    pub x0: OpinionState,
    /// Relative paths, resolved against the output directory.
    pub trajectory_path: PathBuf,
    pub report_path: PathBuf,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn core(context: &str) -> impl Fn(polaris_core::Error) -> CliError + '_ {
    move |e| invalid(format!("{context}: {e}"))
}

/// `x0` drawn uniformly from `[-1, 1]`.
pub fn random_x0(n: usize, seed: u64) -> OpinionState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    OpinionState::new(values).expect("finite samples")
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| match e {
        CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
    build(raw)
}

fn build(raw: RawScenario) -> Result<Scenario, CliError> {
    if raw.graphs.is_empty() {
        return Err(invalid("at least one graph is required"));
    }
    let n = raw.graphs[0].n;
    if n == 0 {
        return Err(invalid("graphs need at least one agent"));
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut signed = Vec::with_capacity(raw.graphs.len());
    for (k, g) in raw.graphs.iter().enumerate() {
        if index.insert(g.name.as_str(), k).is_some() {
            return Err(invalid(format!("duplicate graph name '{}'", g.name)));
        }
        if g.n != n {
            return Err(invalid(format!("graph '{}' has {} agents, expected {n}", g.name, g.n)));
        }
        let edges = g.edges.iter().map(|e| (e.from, e.to, e.weight));
        signed.push(SignedDigraph::from_edges(n, edges).map_err(core(&format!("graph '{}'", g.name)))?);
    }
    let lookup = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| invalid(format!("unknown graph '{name}'")))
    };

    let x0 = match (&raw.x0.values, raw.x0.random, raw.x0.seed) {
        (Some(v), None | Some(false), None) => {
            if v.len() != n {
                return Err(invalid(format!("x0 has {} entries, expected {n}", v.len())));
            }
            OpinionState::new(v.clone()).map_err(core("x0"))?
        }
        (None, Some(true), Some(seed)) => random_x0(n, seed),
        (None, Some(true), None) => return Err(invalid("random x0 requires a seed")),
        _ => return Err(invalid("x0 must give either values or random = true with a seed")),
    };

    let s = &raw.schedule;
    let system = match raw.model {
        RawModel::Discrete => {
            if s.pieces.is_some() || s.dwell_set.is_some() || s.dt.is_some() || s.method.is_some() {
                return Err(invalid("pieces, dwell_set, dt and method apply to continuous scenarios only"));
            }
            if raw.horizon < 0.0 || raw.horizon.fract() != 0.0 {
                return Err(invalid("discrete horizon must be a whole number of steps"));
            }
            let mut trust = Vec::with_capacity(signed.len());
            for (g, sg) in raw.graphs.iter().zip(&signed) {
                let w = g
                    .self_weights
                    .as_ref()
                    .ok_or_else(|| invalid(format!("graph '{}' needs self_weights", g.name)))?;
                if w.len() != n {
                    return Err(invalid(format!("graph '{}' has {} self weights, expected {n}", g.name, w.len())));
                }
                trust.push(weights_to_trust_matrix(sg, w).map_err(core(&format!("graph '{}'", g.name)))?);
            }
            let selector = match (&s.selector, &s.sequence) {
                (Some(_), Some(_)) => return Err(invalid("give either selector or sequence, not both")),
                (Some(names), None) => Selector::Periodic(names.iter().map(|x| lookup(x)).collect::<Result<_, _>>()?),
                (None, Some(names)) => Selector::Explicit(names.iter().map(|x| lookup(x)).collect::<Result<_, _>>()?),
                (None, None) => Selector::Periodic(vec![0]),
            };
            let intervals = match (s.interval_length, &s.boundaries) {
                (Some(_), Some(_)) => return Err(invalid("give either interval_length or boundaries, not both")),
                (Some(t), None) => Intervals::Uniform(t),
                (None, Some(b)) => Intervals::Explicit(b.clone()),
                (None, None) => Intervals::Uniform(match &selector {
                    Selector::Periodic(p) => p.len(),
                    Selector::Explicit(_) => 1,
                }),
            };
            let steps = raw.horizon as usize;
            if let Selector::Explicit(seq) = &selector {
                if seq.len() < steps {
                    return Err(invalid(format!("sequence covers {} steps, horizon is {steps}", seq.len())));
                }
            }
            let schedule = DiscreteSchedule::new(trust, selector, s.gamma, intervals).map_err(core("schedule"))?;
            System::Discrete { schedule, steps }
        }
        RawModel::Continuous => {
            if s.selector.is_some() || s.sequence.is_some() || s.gamma.is_some() || s.interval_length.is_some() || s.boundaries.is_some() {
                return Err(invalid("selector, sequence, gamma and interval settings apply to discrete scenarios only"));
            }
            if let Some(g) = raw.graphs.iter().find(|g| g.self_weights.is_some()) {
                return Err(invalid(format!("graph '{}': self_weights apply to discrete scenarios only", g.name)));
            }
            if !(raw.horizon > 0.0) || !raw.horizon.is_finite() {
                return Err(invalid("continuous horizon must be positive"));
            }
            let laplacians = signed.iter().map(signed_laplacian).collect();
            let pieces: Vec<Piece> = match &s.pieces {
                Some(ps) => ps
                    .iter()
                    .map(|p| Ok(Piece { graph: lookup(&p.graph)?, dwell: p.dwell }))
                    .collect::<Result<_, CliError>>()?,
                None => vec![Piece { graph: 0, dwell: raw.horizon }],
            };
            let dwell_set = s.dwell_set.clone().unwrap_or_else(|| {
                let mut d: Vec<f64> = pieces.iter().map(|p| p.dwell).collect();
                d.sort_by(f64::total_cmp);
                d.dedup();
                d
            });
            let schedule = ContinuousSchedule::new(
                laplacians,
                pieces,
                dwell_set,
                s.weight_bounds.map(|[lo, hi]| (lo, hi)),
                s.pieces_per_interval.unwrap_or(1),
            )
            .map_err(core("schedule"))?;
            let dt = s.dt.unwrap_or(0.01);
            if !(dt > 0.0) {
                return Err(invalid("dt must be positive"));
            }
            let method = match s.method.unwrap_or(RawMethod::Exact) {
                RawMethod::Exact => ContinuousMethod::Exact,
                RawMethod::Rk4 => {
                    if dt > schedule.min_dwell() {
                        return Err(invalid("rk4 step dt exceeds the smallest dwell time"));
                    }
                    ContinuousMethod::Rk4
                }
            };
            System::Continuous { schedule, horizon: raw.horizon, dt, method }
        }
    };

    let trajectory_path = raw.output.trajectory.unwrap_or_else(|| PathBuf::from(format!("{}.csv", raw.name)));
    let report_path = raw.output.report.unwrap_or_else(|| PathBuf::from(format!("{}.report.csv", raw.name)));
    Ok(Scenario {
        name: raw.name,
        graph_names: raw.graphs.into_iter().map(|g| g.name).collect(),
        system,
        x0,
        trajectory_path,
        report_path,
    })
}
