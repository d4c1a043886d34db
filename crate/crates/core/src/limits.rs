//! Closed-form asymptotics of the lifted systems and outcome classification.
//!
//! For a graph with a spanning tree whose root block is structurally
//! balanced, the lifted matrix `Q` splits (after reordering) into two equal
//! irreducible blocks `Q1` on the root copies and a transient block `Q33`.
//! Then `lim Q^k = [[1 xi', 0, 0], [0, 1 xi', 0], [eta1 xi', eta2 xi', 0]]`
//! with `xi' Q1 = xi'` and `eta_{1,2} = (I - Q33)^{-1} Q3{1,2} 1`.
//! Continuous-time systems are handled through the uniformized matrix
//! `I - eps W`, which has the same limit projector as `exp(-W t)`.

use std::fmt::{self, Write as _};

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{ContinuousSchedule, DiscreteSchedule, OpinionState};
use crate::error::{Error, Result};
use crate::graph::{
    check_balance, check_balance_within, common_bipartition, is_strongly_connected,
    root_vertex_set, union_graphs, BalancePartition, SignedDigraph, UnionSignGraph,
};
use crate::lift::{
    lift_laplacian, lift_stochastic, tree_canonical_form, InteractionMatrix, SignedLaplacian,
    TrustMatrix,
};

const STOCHASTIC_TOL: f64 = 1e-10;
/// Agreement required between the direct solve and power iteration.
pub const STATIONARY_CROSS_CHECK_TOL: f64 = 1e-12;
const POWER_ITERATION_MAX: usize = 200_000;

/// Result of analysing the lifted matrix in block order.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryData {
    pub xi: DVector<f64>,
    pub eta1: DVector<f64>,
    pub eta2: DVector<f64>,
    /// `lim Q^k` in block order.
    pub limit_matrix: DMatrix<f64>,
    /// `order[k]` is the lifted index (`i` for `v_i^+`, `n + i` for
    /// `v_i^-`) at block position `k`.
    pub order: Vec<usize>,
}

impl StationaryData {
    /// `lim Q^k` in the original lifted ordering.
    pub fn limit_in_lifted_order(&self) -> DMatrix<f64> {
        let m = self.order.len();
        let mut out = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                out[(self.order[a], self.order[b])] = self.limit_matrix[(a, b)];
            }
        }
        out
    }

    /// Limit of the primal state started from `x0`.
    pub fn primal_limit(&self, x0: &OpinionState) -> Vec<f64> {
        let y0 = x0.lifted();
        let y = self.limit_in_lifted_order() * y0.vector();
        y.iter().take(x0.len()).copied().collect()
    }
}

/// `Q` reordered as `[V1 copies, V2 copies, transient]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedBlockForm {
    pub q: DMatrix<f64>,
    pub order: Vec<usize>,
    pub r: usize,
    pub root_partition: BalancePartition,
}

impl LiftedBlockForm {
    pub fn from_trust_matrix(p: &TrustMatrix) -> Result<Self> {
        Self::build(&lift_stochastic(p).entries, p)
    }

    /// Uses `I - eps W` with `eps = 1 / (1 + max degree)`.
    pub fn from_laplacian(l: &SignedLaplacian) -> Result<Self> {
        let w = lift_laplacian(&l.graph()).entries;
        let eps = 1.0 / (1.0 + l.max_degree());
        let q = DMatrix::identity(w.nrows(), w.ncols()) - w * eps;
        Self::build(&q, l)
    }

    fn build<M: InteractionMatrix>(lifted: &DMatrix<f64>, m: &M) -> Result<Self> {
        let n = m.dim();
        let g = m.graph();
        let tcf = tree_canonical_form(m)?;
        let roots = tcf.roots().to_vec();
        let root_partition = check_balance_within(&g, &roots).ok_or_else(|| {
            Error::Precondition("root block is structurally unbalanced".into())
        })?;
        let plus_side: Vec<usize> = roots
            .iter()
            .map(|&v| if root_partition.side(v) == Some(1.0) { v } else { n + v })
            .collect();
        let minus_side: Vec<usize> = plus_side.iter().map(|&k| (k + n) % (2 * n)).collect();
        let mut order = plus_side;
        order.extend(&minus_side);
        order.extend(tcf.permutation[tcf.r..].iter().copied());
        order.extend(tcf.permutation[tcf.r..].iter().map(|v| n + v));

        let q = DMatrix::from_fn(2 * n, 2 * n, |a, b| lifted[(order[a], order[b])]);
        let r = roots.len();
        // rows of the two root copies only see their own copy
        for a in 0..2 * r {
            let own = if a < r { 0..r } else { r..2 * r };
            for b in 0..2 * n {
                if !own.contains(&b) && q[(a, b)] != 0.0 {
                    return Err(Error::Precondition(format!(
                        "lifted root copies are coupled at block entry ({a}, {b})"
                    )));
                }
            }
        }
        Ok(Self { q, order, r, root_partition })
    }

    pub fn q1(&self) -> DMatrix<f64> {
        self.q.view((0, 0), (self.r, self.r)).into_owned()
    }
}

fn is_irreducible(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    if n == 1 {
        return true;
    }
    let mut g = SignedDigraph::new(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)] != 0.0 {
                g.add_edge(j, i, 1.0).expect("valid indices");
            }
        }
    }
    is_strongly_connected(&g)
}

/// Power iteration `xi' <- xi' Q1` from the uniform vector. `None` when the
/// successive change does not drop below `tol` within `max_iter` steps.
pub fn stationary_by_power_iteration(q1: &DMatrix<f64>, tol: f64, max_iter: usize) -> Option<DVector<f64>> {
    let r = q1.nrows();
    let qt = q1.transpose();
    let mut v = DVector::from_element(r, 1.0 / r as f64);
    for _ in 0..max_iter {
        let next = &qt * &v;
        let change = (&next - &v).amax();
        v = next;
        if change < tol {
            return Some(v);
        }
    }
    None
}

/// The normalized nonnegative left fixed vector of an irreducible
/// row-stochastic matrix.
///
/// Solves `(Q1' - I) xi = 0` with the normalization row `1' xi = 1`
/// appended, then compares against power iteration.
pub fn stationary_left_vector(q1: &DMatrix<f64>) -> Result<DVector<f64>> {
    let r = q1.nrows();
    if r == 0 || !q1.is_square() {
        return Err(Error::Precondition("stationary vector needs a nonempty square matrix".into()));
    }
    if q1.iter().any(|v| *v < 0.0) {
        return Err(Error::Precondition("matrix has negative entries".into()));
    }
    for (i, row) in q1.row_iter().enumerate() {
        if (row.sum() - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::Precondition(format!("row {i} does not sum to 1")));
        }
    }
    if !is_irreducible(q1) {
        return Err(Error::Precondition("matrix is reducible".into()));
    }

    let mut a = DMatrix::zeros(r + 1, r);
    a.view_mut((0, 0), (r, r)).copy_from(&(q1.transpose() - DMatrix::identity(r, r)));
    a.row_mut(r).fill(1.0);
    let mut b = DVector::zeros(r + 1);
    b[r] = 1.0;
    let xi = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Precondition(format!("stationary solve failed: {e}")))?;
    let xi = xi.map(|v| v.max(0.0));
    let xi = &xi / xi.sum();

    if let Some(power) = stationary_by_power_iteration(q1, 1e-16, POWER_ITERATION_MAX) {
        let gap = (&power - &xi).amax();
        if gap > STATIONARY_CROSS_CHECK_TOL {
            return Err(Error::Precondition(format!(
                "stationary vector cross-check failed: direct and power iteration differ by {gap:e}"
            )));
        }
    }
    Ok(xi)
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Limit of `Q^k` for a lifted matrix in block form.
pub fn lemma10_limit(form: &LiftedBlockForm) -> Result<StationaryData> {
    let r = form.r;
    let m = form.q.nrows();
    let t = m - 2 * r;
    let q1 = form.q1();
    let q2 = form.q.view((r, r), (r, r)).into_owned();
    if (&q1 - &q2).amax() > 0.0 {
        return Err(Error::Precondition("the two root copies differ".into()));
    }
    let xi = stationary_left_vector(&q1)?;

    let (eta1, eta2) = if t == 0 {
        (DVector::zeros(0), DVector::zeros(0))
    } else {
        let q33 = form.q.view((2 * r, 2 * r), (t, t)).into_owned();
        let rho = spectral_radius(&q33);
        if rho >= 1.0 - 1e-12 {
            return Err(Error::Precondition(format!(
                "transient block has spectral radius {rho}, not below 1"
            )));
        }
        let lu = (DMatrix::identity(t, t) - q33).lu();
        let ones = DVector::from_element(r, 1.0);
        let rhs1 = form.q.view((2 * r, 0), (t, r)) * &ones;
        let rhs2 = form.q.view((2 * r, r), (t, r)) * &ones;
        let solve = |rhs: DVector<f64>| {
            lu.solve(&rhs)
                .ok_or_else(|| Error::Precondition("I - Q33 is singular".into()))
        };
        (solve(rhs1)?, solve(rhs2)?)
    };

    let mut limit = DMatrix::zeros(m, m);
    for a in 0..r {
        for b in 0..r {
            limit[(a, b)] = xi[b];
            limit[(r + a, r + b)] = xi[b];
        }
    }
    for a in 0..t {
        for b in 0..r {
            limit[(2 * r + a, b)] = eta1[a] * xi[b];
            limit[(2 * r + a, r + b)] = eta2[a] * xi[b];
        }
    }
    Ok(StationaryData { xi, eta1, eta2, limit_matrix: limit, order: form.order.clone() })
}

/// Which result justifies a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremTag {
    /// Fixed, strongly connected, discrete.
    T1,
    /// Fixed, spanning tree, discrete.
    T2,
    /// Switching, jointly strongly connected, common bipartition.
    T3,
    /// Switching, jointly strongly connected, no bipartition per interval.
    T4,
    /// Switching, spanning tree with invariant root set, root bipartition.
    T5,
    /// Switching, spanning tree, no root bipartition per interval.
    T6,
    /// Fixed, spanning tree, continuous.
    T7,
    /// Switching continuous, root bipartition.
    T8,
    /// Switching continuous, no root bipartition per interval.
    T9,
    /// All weights nonnegative: ordinary consensus.
    Classical,
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TheoremTag::Classical => write!(f, "classical"),
            other => write!(f, "{other:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeKind {
    /// Everyone converges to `±magnitude`, sign given by the partition.
    Polarize { partition: BalancePartition, magnitude: Option<f64> },
    Neutralize,
    /// Roots polarize at `±magnitude`; everyone else ends in
    /// `[-magnitude, magnitude]`.
    Cluster { root_partition: BalancePartition, magnitude: Option<f64> },
    Consensus { value: Option<f64> },
    Inconclusive { reason: String },
}

impl OutcomeKind {
    pub fn name(&self) -> &'static str {
        match self {
            OutcomeKind::Polarize { .. } => "polarize",
            OutcomeKind::Neutralize => "neutralize",
            OutcomeKind::Cluster { .. } => "cluster",
            OutcomeKind::Consensus { .. } => "consensus",
            OutcomeKind::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn same_kind(&self, other: &OutcomeKind) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomePrediction {
    pub kind: OutcomeKind,
    pub justification: Option<TheoremTag>,
    /// Present for fixed topologies unless the outcome is inconclusive.
    pub predicted_limit: Option<Vec<f64>>,
}

impl OutcomePrediction {
    fn inconclusive(reason: impl Into<String>) -> Self {
        Self {
            kind: OutcomeKind::Inconclusive { reason: reason.into() },
            justification: None,
            predicted_limit: None,
        }
    }

    pub fn magnitude(&self) -> Option<f64> {
        match &self.kind {
            OutcomeKind::Polarize { magnitude, .. } | OutcomeKind::Cluster { magnitude, .. } => *magnitude,
            _ => None,
        }
    }

    /// `[-C, C]` for clustering outcomes with a known `C`.
    pub fn band(&self) -> Option<(f64, f64)> {
        match &self.kind {
            OutcomeKind::Cluster { magnitude: Some(c), .. } => Some((-c, *c)),
            _ => None,
        }
    }

    /// `field,value` lines.
    pub fn to_report(&self) -> String {
        let fmt_set = |s: &[usize]| s.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        let mut out = String::from("field,value\n");
        let _ = writeln!(out, "kind,{}", self.kind.name());
        let _ = writeln!(
            out,
            "theorem,{}",
            self.justification.map_or_else(|| "none".to_string(), |t| t.to_string())
        );
        match &self.kind {
            OutcomeKind::Polarize { partition, .. } | OutcomeKind::Cluster { root_partition: partition, .. } => {
                if let Some(c) = self.magnitude() {
                    let _ = writeln!(out, "magnitude,{c:.16e}");
                }
                if let Some((lo, hi)) = self.band() {
                    let _ = writeln!(out, "band,{lo:.16e} {hi:.16e}");
                }
                let _ = writeln!(out, "set_one,{}", fmt_set(&partition.set_one));
                let _ = writeln!(out, "set_two,{}", fmt_set(&partition.set_two));
            }
            OutcomeKind::Consensus { value: Some(v) } => {
                let _ = writeln!(out, "value,{v:.16e}");
            }
            OutcomeKind::Inconclusive { reason } => {
                let _ = writeln!(out, "reason,\"{}\"", reason.replace('"', "'"));
            }
            _ => {}
        }
        if let Some(limit) = &self.predicted_limit {
            let values: Vec<String> = limit.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "predicted_limit,{}", values.join(" "));
        }
        out
    }
}

/// A fixed-topology system.
#[derive(Debug, Clone, Copy)]
pub enum FixedSystem<'a> {
    Discrete(&'a TrustMatrix),
    Continuous(&'a SignedLaplacian),
}

impl FixedSystem<'_> {
    fn graph(&self) -> SignedDigraph {
        match self {
            FixedSystem::Discrete(p) => p.graph(),
            FixedSystem::Continuous(l) => l.graph(),
        }
    }

    fn block_form(&self) -> Result<LiftedBlockForm> {
        match self {
            FixedSystem::Discrete(p) => LiftedBlockForm::from_trust_matrix(p),
            FixedSystem::Continuous(l) => LiftedBlockForm::from_laplacian(l),
        }
    }
}

/// Predicts the asymptotic outcome of a fixed-topology system from `x0`.
pub fn predict_fixed(system: FixedSystem<'_>, x0: &OpinionState) -> Result<OutcomePrediction> {
    let g = system.graph();
    let n = g.vertex_count();
    if x0.len() != n {
        return Err(Error::Dimension { expected: n, found: x0.len() });
    }
    let roots = match root_vertex_set(&g) {
        Ok(r) => r,
        Err(_) => return Ok(OutcomePrediction::inconclusive("graph contains no spanning tree")),
    };
    let continuous = matches!(system, FixedSystem::Continuous(_));
    let tag = if continuous {
        TheoremTag::T7
    } else if roots.len() == n {
        TheoremTag::T1
    } else {
        TheoremTag::T2
    };

    if check_balance_within(&g, &roots).is_none() {
        return Ok(OutcomePrediction {
            kind: OutcomeKind::Neutralize,
            justification: Some(tag),
            predicted_limit: Some(vec![0.0; n]),
        });
    }

    let form = system.block_form()?;
    let data = lemma10_limit(&form)?;
    let limit = data.primal_limit(x0);
    // xi' applied to the V1 copies of y(0): root opinions with set_two flipped
    let y0 = x0.lifted();
    let signed_root_value: f64 = (0..form.r).map(|k| data.xi[k] * y0.as_slice()[form.order[k]]).sum();

    if !g.has_negative_edge() {
        return Ok(OutcomePrediction {
            kind: OutcomeKind::Consensus { value: Some(signed_root_value) },
            justification: Some(TheoremTag::Classical),
            predicted_limit: Some(limit),
        });
    }
    let magnitude = Some(signed_root_value.abs());
    let kind = match check_balance(&g) {
        Some(partition) => OutcomeKind::Polarize { partition, magnitude },
        None => OutcomeKind::Cluster { root_partition: form.root_partition.clone(), magnitude },
    };
    Ok(OutcomePrediction { kind, justification: Some(tag), predicted_limit: Some(limit) })
}

/// A switching schedule to classify.
#[derive(Debug, Clone, Copy)]
pub enum SwitchingSystem<'a> {
    Discrete(&'a DiscreteSchedule),
    Continuous(&'a ContinuousSchedule),
}

/// Qualitative outcome of a switching schedule from its interval unions.
pub fn classify_switching(system: SwitchingSystem<'_>) -> OutcomePrediction {
    let (graphs, windows, continuous) = match system {
        SwitchingSystem::Discrete(s) => (s.signed_graphs(), s.interval_windows(), false),
        SwitchingSystem::Continuous(s) => (s.signed_graphs(), s.interval_windows(), true),
    };
    classify_windows(&graphs, &windows, continuous)
}

fn union_of(graphs: &[SignedDigraph], indices: &[usize]) -> UnionSignGraph {
    let chosen: Vec<SignedDigraph> = indices.iter().map(|&k| graphs[k].clone()).collect();
    union_graphs(&chosen).expect("schedules hold graphs of one dimension")
}

/// Classification given the graph indices active in each interval.
pub fn classify_windows(graphs: &[SignedDigraph], windows: &[Vec<usize>], continuous: bool) -> OutcomePrediction {
    if windows.is_empty() || windows.iter().any(Vec::is_empty) {
        return OutcomePrediction::inconclusive("schedule declares an empty interval");
    }
    let n = graphs[0].vertex_count();
    let all: Vec<usize> = (0..n).collect();

    let mut per_window = Vec::with_capacity(windows.len());
    for (k, w) in windows.iter().enumerate() {
        let u = union_of(graphs, w);
        match root_vertex_set(&u.support()) {
            Ok(roots) => per_window.push((u, roots)),
            Err(_) => {
                return OutcomePrediction::inconclusive(format!(
                    "union over interval {k} contains no spanning tree"
                ))
            }
        }
    }

    if per_window.iter().all(|(u, roots)| common_bipartition(u, roots).is_none()) {
        let tag = if continuous {
            TheoremTag::T9
        } else if per_window.iter().all(|(_, roots)| roots.len() == n) {
            TheoremTag::T4
        } else {
            TheoremTag::T6
        };
        return OutcomePrediction {
            kind: OutcomeKind::Neutralize,
            justification: Some(tag),
            predicted_limit: None,
        };
    }

    let mut used: Vec<usize> = windows.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let whole = union_of(graphs, &used);
    let stable_roots = match root_vertex_set(&whole.support()) {
        Ok(r) => r,
        Err(_) => return OutcomePrediction::inconclusive("union over all time contains no spanning tree"),
    };
    if let Some(k) = per_window.iter().position(|(_, roots)| *roots != stable_roots) {
        return OutcomePrediction::inconclusive(format!(
            "root set of interval {k} differs from the root set of the union over all time"
        ));
    }
    let Some(root_partition) = common_bipartition(&whole, &stable_roots) else {
        return OutcomePrediction::inconclusive(
            "some intervals admit a root bipartition but no single bipartition holds for every graph",
        );
    };

    let has_negative = used.iter().any(|&k| graphs[k].has_negative_edge());
    if !has_negative {
        return OutcomePrediction {
            kind: OutcomeKind::Consensus { value: None },
            justification: Some(TheoremTag::Classical),
            predicted_limit: None,
        };
    }
    let tag = match (continuous, stable_roots.len() == n) {
        (true, _) => TheoremTag::T8,
        (false, true) => TheoremTag::T3,
        (false, false) => TheoremTag::T5,
    };
    let kind = match common_bipartition(&whole, &all) {
        Some(partition) => OutcomeKind::Polarize { partition, magnitude: None },
        None => OutcomeKind::Cluster { root_partition, magnitude: None },
    };
    OutcomePrediction { kind, justification: Some(tag), predicted_limit: None }
}
