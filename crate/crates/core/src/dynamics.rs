//! Trajectory simulation for the discrete (`x(t+1) = P(t) x(t)`) and
//! continuous (`dx/dt = -L(t) x`) models, including the lifted `2n`-state
//! systems, plus the statistics the switching results talk about.

use std::collections::HashMap;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::graph::SignedDigraph;
use crate::lift::{lift_stochastic, InteractionMatrix, SignedLaplacian, TrustMatrix};

/// Consecutive states closer than this (max-norm) count as stationary.
pub const CONVERGENCE_TOL: f64 = 1e-10;
/// Number of consecutive stationary steps before declaring convergence.
pub const CONVERGENCE_WINDOW: usize = 50;

const DWELL_TOL: f64 = 1e-9;

/// Opinion vector; all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionState(DVector<f64>);

impl OpinionState {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("opinion {i} is not finite")));
        }
        Ok(Self(DVector::from_vec(values)))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(x, -x)`.
    pub fn lifted(&self) -> Self {
        let n = self.len();
        Self(DVector::from_fn(2 * n, |k, _| if k < n { self.0[k] } else { -self.0[k - n] }))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self(&self.0 * alpha)
    }

    /// Elementwise product with a `±1` gauge.
    pub fn gauged(&self, signs: &[f64]) -> Self {
        Self(DVector::from_fn(self.len(), |i, _| signs[i] * self.0[i]))
    }
}

impl From<DVector<f64>> for OpinionState {
    fn from(v: DVector<f64>) -> Self {
        Self(v)
    }
}

/// Dense product with left-to-right summation over columns.
fn mat_vec(m: &DMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(m.nrows(), |i, _| {
        let mut acc = 0.0;
        for j in 0..m.ncols() {
            acc += m[(i, j)] * x[j];
        }
        acc
    })
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}

/// One discrete update `x' = P x`.
pub fn step_discrete(p: &TrustMatrix, x: &OpinionState) -> Result<OpinionState> {
    check_dim(p.dim(), x.len())?;
    Ok(OpinionState(mat_vec(p.entries(), &x.0)))
}

/// Maps a step to a graph index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    /// `pattern[t % pattern.len()]`.
    Periodic(Vec<usize>),
    /// `sequence[t]`; undefined past the end.
    Explicit(Vec<usize>),
}

impl Selector {
    pub fn index_at(&self, t: usize) -> Option<usize> {
        match self {
            Selector::Periodic(p) if !p.is_empty() => Some(p[t % p.len()]),
            Selector::Periodic(_) => None,
            Selector::Explicit(s) => s.get(t).copied(),
        }
    }

    fn indices(&self) -> &[usize] {
        match self {
            Selector::Periodic(v) | Selector::Explicit(v) => v,
        }
    }
}

/// Interval structure `t_0 = 0 < t_1 < ...` used by the joint-connectivity
/// conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Intervals {
    /// `t_k = k * len`.
    Uniform(usize),
    /// Listed boundaries, starting at 0 and strictly increasing.
    Explicit(Vec<usize>),
}

impl Intervals {
    fn validate(&self) -> Result<()> {
        match self {
            Intervals::Uniform(0) => Err(Error::Parameter("interval length must be positive".into())),
            Intervals::Uniform(_) => Ok(()),
            Intervals::Explicit(b) => {
                if b.len() < 2 || b[0] != 0 || b.windows(2).any(|w| w[1] <= w[0]) {
                    Err(Error::Parameter(
                        "interval boundaries must start at 0 and strictly increase".into(),
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Uniform bound `T` on interval lengths.
    pub fn bound(&self) -> usize {
        match self {
            Intervals::Uniform(t) => *t,
            Intervals::Explicit(b) => b.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0),
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn sorted_unique(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// A time-varying sequence of trust matrices.
#[derive(Debug, Clone)]
pub struct DiscreteSchedule {
    graphs: Vec<TrustMatrix>,
    selector: Selector,
    gamma: f64,
    intervals: Intervals,
}

impl DiscreteSchedule {
    /// Validates the lower bound `gamma` on nonzero entry magnitudes; when
    /// `gamma` is `None` it is taken as the smallest such magnitude.
    pub fn new(
        graphs: Vec<TrustMatrix>,
        selector: Selector,
        gamma: Option<f64>,
        intervals: Intervals,
    ) -> Result<Self> {
        let n = graphs
            .first()
            .map(|p| p.dim())
            .ok_or_else(|| Error::Parameter("schedule needs at least one graph".into()))?;
        for p in &graphs {
            check_dim(n, p.dim())?;
        }
        for (step, &index) in selector.indices().iter().enumerate() {
            if index >= graphs.len() {
                return Err(Error::SelectorOutOfRange { step, index, count: graphs.len() });
            }
        }
        if selector.indices().is_empty() {
            return Err(Error::Parameter("selector must name at least one graph".into()));
        }
        intervals.validate()?;

        let min_mag = graphs
            .iter()
            .map(TrustMatrix::min_nonzero_magnitude)
            .fold(f64::INFINITY, f64::min);
        let gamma = match gamma {
            Some(g) => {
                if !(g > 0.0 && g < 1.0) {
                    return Err(Error::Parameter(format!("gamma = {g} must lie in (0, 1)")));
                }
                if min_mag < g {
                    return Err(Error::Parameter(format!(
                        "nonzero entry magnitude {min_mag} is below the declared lower bound gamma = {g}"
                    )));
                }
                g
            }
            // a matrix of isolated agents has only unit entries; any bound below 1 holds
            None if min_mag >= 1.0 => 0.5,
            None => min_mag,
        };
        Ok(Self { graphs, selector, gamma, intervals })
    }

    /// A single matrix applied at every step.
    pub fn fixed(p: TrustMatrix) -> Self {
        Self::new(vec![p], Selector::Periodic(vec![0]), None, Intervals::Uniform(1))
            .expect("a single valid matrix is a valid schedule")
    }

    pub fn dim(&self) -> usize {
        self.graphs[0].dim()
    }

    pub fn graphs(&self) -> &[TrustMatrix] {
        &self.graphs
    }

    pub fn selector(&self) -> &Selector {
        &self.selector
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn intervals(&self) -> &Intervals {
        &self.intervals
    }

    pub fn signed_graphs(&self) -> Vec<SignedDigraph> {
        self.graphs.iter().map(InteractionMatrix::graph).collect()
    }

    /// Whether only one graph is ever used.
    pub fn is_fixed(&self) -> bool {
        sorted_unique(self.selector.indices().to_vec()).len() == 1
    }

    pub fn matrix_at(&self, t: usize) -> Result<&TrustMatrix> {
        let index = self.selector.index_at(t).ok_or(Error::SelectorOutOfRange {
            step: t,
            index: usize::MAX,
            count: self.graphs.len(),
        })?;
        Ok(&self.graphs[index])
    }

    /// Graph indices active in each distinct interval. For a periodic
    /// selector with uniform intervals the pattern repeats after
    /// `lcm(period, T)` steps, so that many steps cover every case.
    pub fn interval_windows(&self) -> Vec<Vec<usize>> {
        let horizon = match (&self.selector, &self.intervals) {
            (Selector::Periodic(p), Intervals::Uniform(t)) => p.len() / gcd(p.len(), *t) * t,
            (Selector::Periodic(_), Intervals::Explicit(b)) => *b.last().unwrap(),
            (Selector::Explicit(s), _) => s.len(),
        };
        let bounds: Vec<usize> = match &self.intervals {
            Intervals::Uniform(t) => (0..=horizon.div_ceil(*t)).map(|k| k * t).collect(),
            Intervals::Explicit(b) => b.clone(),
        };
        let mut windows: Vec<Vec<usize>> = bounds
            .windows(2)
            .filter(|w| w[0] < horizon)
            .map(|w| {
                sorted_unique(
                    (w[0]..w[1].min(horizon))
                        .filter_map(|t| self.selector.index_at(t))
                        .collect(),
                )
            })
            .collect();
        windows.sort();
        windows.dedup();
        windows
    }
}

/// One constant piece of a continuous schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub graph: usize,
    pub dwell: f64,
}

/// Whether `tau` is a combination of `dwell_set` elements with nonnegative
/// integer coefficients, not all zero.
pub fn dwell_representable(tau: f64, dwell_set: &[f64]) -> bool {
    fn search(rest: f64, set: &[f64]) -> bool {
        if rest.abs() <= DWELL_TOL {
            return true;
        }
        match set.split_first() {
            None => false,
            Some((&d, tail)) => {
                let max = ((rest + DWELL_TOL) / d).floor() as usize;
                (0..=max).rev().any(|k| search(rest - k as f64 * d, tail))
            }
        }
    }
    tau > DWELL_TOL && dwell_set.iter().all(|d| *d > 0.0) && search(tau, dwell_set)
}

/// Piecewise-constant signed Laplacians; `pieces` repeat cyclically.
#[derive(Debug, Clone)]
pub struct ContinuousSchedule {
    graphs: Vec<SignedLaplacian>,
    pieces: Vec<Piece>,
    dwell_set: Vec<f64>,
    weight_bounds: (f64, f64),
    pieces_per_interval: usize,
}

impl ContinuousSchedule {
    /// `weight_bounds` defaults to the observed range of nonzero weight
    /// magnitudes.
    pub fn new(
        graphs: Vec<SignedLaplacian>,
        pieces: Vec<Piece>,
        dwell_set: Vec<f64>,
        weight_bounds: Option<(f64, f64)>,
        pieces_per_interval: usize,
    ) -> Result<Self> {
        let n = graphs
            .first()
            .map(|l| l.dim())
            .ok_or_else(|| Error::Parameter("schedule needs at least one graph".into()))?;
        for l in &graphs {
            check_dim(n, l.dim())?;
        }
        if pieces.is_empty() {
            return Err(Error::Parameter("schedule needs at least one piece".into()));
        }
        if pieces_per_interval == 0 {
            return Err(Error::Parameter("pieces per interval must be positive".into()));
        }
        if dwell_set.is_empty() || dwell_set.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(Error::Parameter("dwell set must hold positive durations".into()));
        }
        for (step, piece) in pieces.iter().enumerate() {
            if piece.graph >= graphs.len() {
                return Err(Error::SelectorOutOfRange { step, index: piece.graph, count: graphs.len() });
            }
            if !dwell_representable(piece.dwell, &dwell_set) {
                return Err(Error::DwellNotRepresentable(piece.dwell));
            }
        }
        let mags: Vec<f64> = graphs
            .iter()
            .flat_map(|l| l.graph().edges().map(|e| e.weight.abs()).collect::<Vec<_>>())
            .collect();
        let observed = (
            mags.iter().copied().fold(f64::INFINITY, f64::min),
            mags.iter().copied().fold(0.0, f64::max),
        );
        let weight_bounds = match weight_bounds {
            None => observed,
            Some((lo, hi)) => {
                if !(lo > 0.0 && lo <= hi) {
                    return Err(Error::Parameter(format!("weight bounds [{lo}, {hi}] invalid")));
                }
                if !mags.is_empty() && (observed.0 < lo || observed.1 > hi) {
                    return Err(Error::Parameter(format!(
                        "edge weight magnitudes span [{}, {}], outside declared [{lo}, {hi}]",
                        observed.0, observed.1
                    )));
                }
                (lo, hi)
            }
        };
        Ok(Self { graphs, pieces, dwell_set, weight_bounds, pieces_per_interval })
    }

    /// A single Laplacian held for `dwell` at a time.
    pub fn fixed(l: SignedLaplacian, dwell: f64) -> Result<Self> {
        Self::new(vec![l], vec![Piece { graph: 0, dwell }], vec![dwell], None, 1)
    }

    pub fn dim(&self) -> usize {
        self.graphs[0].dim()
    }

    pub fn graphs(&self) -> &[SignedLaplacian] {
        &self.graphs
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn dwell_set(&self) -> &[f64] {
        &self.dwell_set
    }

    pub fn weight_bounds(&self) -> (f64, f64) {
        self.weight_bounds
    }

    pub fn signed_graphs(&self) -> Vec<SignedDigraph> {
        self.graphs.iter().map(InteractionMatrix::graph).collect()
    }

    pub fn is_fixed(&self) -> bool {
        sorted_unique(self.pieces.iter().map(|p| p.graph).collect()).len() == 1
    }

    pub fn pieces_per_interval(&self) -> usize {
        self.pieces_per_interval
    }

    pub fn min_dwell(&self) -> f64 {
        self.pieces.iter().map(|p| p.dwell).fold(f64::INFINITY, f64::min)
    }

    /// Graph indices active in each distinct group of
    /// `pieces_per_interval` consecutive pieces.
    pub fn interval_windows(&self) -> Vec<Vec<usize>> {
        let m = self.pieces.len();
        let k = self.pieces_per_interval;
        let count = m / gcd(m, k);
        let mut windows: Vec<Vec<usize>> = (0..count)
            .map(|j| sorted_unique((0..k).map(|s| self.pieces[(j * k + s) % m].graph).collect()))
            .collect();
        windows.sort();
        windows.dedup();
        windows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Discrete,
    Continuous,
}

/// Time series of opinion vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<OpinionState>,
    pub model: Model,
    /// Indices into `states` sampled exactly at piece boundaries
    /// (continuous runs); every index for discrete runs.
    pub boundary_indices: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &OpinionState {
        self.states.last().expect("trajectories hold at least the initial state")
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, OpinionState::len)
    }

    /// Values of agent `i` over time.
    pub fn series(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(move |s| s.0[i])
    }

    /// First index after which `CONVERGENCE_WINDOW` consecutive updates
    /// all move the state by less than `CONVERGENCE_TOL`.
    pub fn converged_at(&self) -> Option<usize> {
        let mut run = 0;
        for k in 1..self.states.len() {
            if (&self.states[k].0 - &self.states[k - 1].0).amax() < CONVERGENCE_TOL {
                run += 1;
                if run >= CONVERGENCE_WINDOW {
                    return Some(k - CONVERGENCE_WINDOW);
                }
            } else {
                run = 0;
            }
        }
        None
    }

    /// CSV with header `t,x0,x1,...`; 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.dim();
        let mut header = String::from("t");
        for i in 0..n {
            header.push_str(&format!(",x{i}"));
        }
        writeln!(out, "{header}")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut line = match self.model {
                Model::Discrete => format!("{}", *t as u64),
                Model::Continuous => format!("{t:.16e}"),
            };
            for v in s.0.iter() {
                line.push_str(&format!(",{v:.16e}"));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

fn run_discrete<F>(
    x0: &DVector<f64>,
    steps: usize,
    mut matrix_at: F,
) -> Result<Trajectory>
where
    F: FnMut(usize) -> Result<DMatrix<f64>>,
{
    let mut states = Vec::with_capacity(steps + 1);
    states.push(OpinionState(x0.clone()));
    let mut x = x0.clone();
    for t in 0..steps {
        x = mat_vec(&matrix_at(t)?, &x);
        states.push(OpinionState(x.clone()));
    }
    Ok(Trajectory {
        times: (0..=steps).map(|t| t as f64).collect(),
        boundary_indices: (0..=steps).collect(),
        states,
        model: Model::Discrete,
    })
}

/// Iterates `x(t+1) = P(t) x(t)` for `steps` steps.
pub fn simulate_discrete(s: &DiscreteSchedule, x0: &OpinionState, steps: usize) -> Result<Trajectory> {
    check_dim(s.dim(), x0.len())?;
    run_discrete(&x0.0, steps, |t| s.matrix_at(t).map(|p| p.entries().clone()))
}

/// Like [`simulate_discrete`] but stops once [`Trajectory::converged_at`]
/// would fire, or after `max_steps`.
pub fn simulate_until_converged(
    s: &DiscreteSchedule,
    x0: &OpinionState,
    max_steps: usize,
) -> Result<(Trajectory, Option<usize>)> {
    check_dim(s.dim(), x0.len())?;
    let mut states = vec![x0.clone()];
    let mut run = 0;
    let mut x = x0.0.clone();
    let mut converged = None;
    for t in 0..max_steps {
        let next = mat_vec(s.matrix_at(t)?.entries(), &x);
        if (&next - &x).amax() < CONVERGENCE_TOL {
            run += 1;
        } else {
            run = 0;
        }
        x = next;
        states.push(OpinionState(x.clone()));
        if run >= CONVERGENCE_WINDOW {
            converged = Some(t + 1 - CONVERGENCE_WINDOW);
            break;
        }
    }
    let len = states.len();
    Ok((
        Trajectory {
            times: (0..len).map(|t| t as f64).collect(),
            boundary_indices: (0..len).collect(),
            states,
            model: Model::Discrete,
        },
        converged,
    ))
}

/// How a continuous piece is propagated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuousMethod {
    /// Matrix exponential of `-L h` per sub-step.
    Exact,
    /// Classical fourth-order Runge-Kutta.
    Rk4,
}

/// `exp(-L tau) x`.
pub fn propagate_exact(l: &DMatrix<f64>, x: &DVector<f64>, tau: f64) -> DVector<f64> {
    mat_vec(&expm(&(l * -tau)), x)
}

fn rk4_step(l: &DMatrix<f64>, x: &DVector<f64>, h: f64) -> DVector<f64> {
    let f = |v: &DVector<f64>| -mat_vec(l, v);
    let k1 = f(x);
    let k2 = f(&(x + &k1 * (h / 2.0)));
    let k3 = f(&(x + &k2 * (h / 2.0)));
    let k4 = f(&(x + &k3 * h));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

fn run_continuous(
    laplacians: &[DMatrix<f64>],
    pieces: &[Piece],
    x0: &DVector<f64>,
    method: ContinuousMethod,
    dt: f64,
    horizon: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Parameter(format!("time step dt = {dt} must be positive")));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::Parameter(format!("horizon {horizon} must be nonnegative")));
    }
    if method == ContinuousMethod::Rk4 {
        let min_dwell = pieces.iter().map(|p| p.dwell).fold(f64::INFINITY, f64::min);
        if dt > min_dwell {
            return Err(Error::Parameter(format!(
                "integrator step {dt} exceeds the smallest dwell {min_dwell}"
            )));
        }
    }

    let mut cache: HashMap<(usize, u64), DMatrix<f64>> = HashMap::new();
    let mut times = vec![0.0];
    let mut states = vec![OpinionState(x0.clone())];
    let mut boundary_indices = vec![0];
    let mut x = x0.clone();
    let mut t = 0.0;
    let mut k = 0;
    while horizon - t > DWELL_TOL {
        let piece = pieces[k % pieces.len()];
        k += 1;
        let duration = piece.dwell.min(horizon - t);
        let substeps = ((duration / dt) - 1e-9).ceil().max(1.0) as usize;
        let h = duration / substeps as f64;
        let l = &laplacians[piece.graph];
        let propagator = match method {
            ContinuousMethod::Exact => Some(
                cache
                    .entry((piece.graph, h.to_bits()))
                    .or_insert_with(|| expm(&(l * -h)))
                    .clone(),
            ),
            ContinuousMethod::Rk4 => None,
        };
        for s in 1..=substeps {
            x = match &propagator {
                Some(e) => mat_vec(e, &x),
                None => rk4_step(l, &x, h),
            };
            times.push(if s == substeps { t + duration } else { t + s as f64 * h });
            states.push(OpinionState(x.clone()));
        }
        t += duration;
        boundary_indices.push(states.len() - 1);
    }
    Ok(Trajectory { times, states, model: Model::Continuous, boundary_indices })
}

/// Integrates `dx/dt = -L(t) x` up to `horizon`, cycling through the
/// schedule's pieces. `dt` is the sampling step (exact mode) or the
/// integration step (RK4); each piece is split evenly so that its end is
/// sampled exactly.
pub fn simulate_continuous(
    s: &ContinuousSchedule,
    x0: &OpinionState,
    method: ContinuousMethod,
    dt: f64,
    horizon: f64,
) -> Result<Trajectory> {
    check_dim(s.dim(), x0.len())?;
    let ls: Vec<DMatrix<f64>> = s.graphs.iter().map(|l| l.entries().clone()).collect();
    run_continuous(&ls, &s.pieces, &x0.0, method, dt, horizon)
}

/// Agreement between a lifted `y` trajectory and the primal one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftReport {
    /// `max_t max_i |y_i + y_{n+i}|`, relative to the largest `|y|` seen.
    pub antisymmetry_defect: f64,
    /// `max_t max_i |y_i - x_i|`, same scaling.
    pub primal_deviation: f64,
}

fn lift_report(y: &Trajectory, x: &Trajectory) -> LiftReport {
    let n = x.dim();
    let scale = y
        .states
        .iter()
        .map(OpinionState::max_abs)
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut anti: f64 = 0.0;
    let mut dev: f64 = 0.0;
    for (ys, xs) in y.states.iter().zip(&x.states) {
        for i in 0..n {
            anti = anti.max((ys.0[i] + ys.0[n + i]).abs());
            dev = dev.max((ys.0[i] - xs.0[i]).abs());
        }
    }
    LiftReport { antisymmetry_defect: anti / scale, primal_deviation: dev / scale }
}

/// Runs the `2n`-state system `y(t+1) = Q(t) y(t)` from `(x0, -x0)`.
pub fn simulate_lifted_discrete(
    s: &DiscreteSchedule,
    x0: &OpinionState,
    steps: usize,
) -> Result<(Trajectory, LiftReport)> {
    check_dim(s.dim(), x0.len())?;
    let lifted: Vec<DMatrix<f64>> = s.graphs.iter().map(|p| lift_stochastic(p).entries).collect();
    let y = run_discrete(&x0.lifted().0, steps, |t| {
        let index = s.selector.index_at(t).ok_or(Error::SelectorOutOfRange {
            step: t,
            index: usize::MAX,
            count: lifted.len(),
        })?;
        Ok(lifted[index].clone())
    })?;
    let x = simulate_discrete(s, x0, steps)?;
    let report = lift_report(&y, &x);
    Ok((y, report))
}

/// Runs `dy/dt = -W(t) y` from `(x0, -x0)`.
pub fn simulate_lifted_continuous(
    s: &ContinuousSchedule,
    x0: &OpinionState,
    method: ContinuousMethod,
    dt: f64,
    horizon: f64,
) -> Result<(Trajectory, LiftReport)> {
    check_dim(s.dim(), x0.len())?;
    let ws: Vec<DMatrix<f64>> = s
        .signed_graphs()
        .iter()
        .map(|g| crate::lift::lift_laplacian(g).entries)
        .collect();
    let y = run_continuous(&ws, &s.pieces, &x0.lifted().0, method, dt, horizon)?;
    let x = simulate_continuous(s, x0, method, dt, horizon)?;
    let report = lift_report(&y, &x);
    Ok((y, report))
}

/// `C(t)`: largest magnitude among roots; `M(t)`: among the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSample {
    pub c: f64,
    pub m: f64,
}

pub fn band_statistics(traj: &Trajectory, roots: &[usize]) -> Result<Vec<BandSample>> {
    let n = traj.dim();
    if roots.is_empty() {
        return Err(Error::Parameter("root set must be nonempty".into()));
    }
    if let Some(&v) = roots.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange { vertex: v, n });
    }
    let mut is_root = vec![false; n];
    for &v in roots {
        is_root[v] = true;
    }
    if is_root.iter().all(|&r| r) {
        return Err(Error::Parameter("band statistics need at least one non-root agent".into()));
    }
    Ok(traj
        .states
        .iter()
        .map(|s| {
            let mut c: f64 = 0.0;
            let mut m: f64 = 0.0;
            for (i, v) in s.0.iter().enumerate() {
                if is_root[i] {
                    c = c.max(v.abs());
                } else {
                    m = m.max(v.abs());
                }
            }
            BandSample { c, m }
        })
        .collect())
}
