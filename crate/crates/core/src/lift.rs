//! System matrices: normalized trust matrices, signed Laplacians, their
//! lifted nonnegative counterparts and spanning-tree block forms.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{root_vertex_set, scc_decompose, SignedDigraph};

/// Row-sum tolerance for `p_ii + sum |p_ij| = 1`.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Anything whose off-diagonal pattern defines a signed interaction graph.
pub trait InteractionMatrix {
    fn matrix(&self) -> &DMatrix<f64>;

    /// The signed graph read off the off-diagonal entries.
    fn graph(&self) -> SignedDigraph;

    fn dim(&self) -> usize {
        self.matrix().nrows()
    }
}

/// Discrete update matrix `P` with positive diagonal and `|P|` row-stochastic.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustMatrix {
    entries: DMatrix<f64>,
}

impl TrustMatrix {
    /// Validates a raw matrix.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension { expected: entries.nrows(), found: entries.ncols() });
        }
        for (i, row) in entries.row_iter().enumerate() {
            if !(row[i] > 0.0) {
                return Err(Error::Parameter(format!("diagonal entry p[{i}][{i}] must be positive")));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parameter(format!("row {i} has non-finite entries")));
            }
            let s: f64 = row.iter().map(|v| v.abs()).sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Parameter(format!(
                    "row {i}: p_ii + sum |p_ij| = {s}, expected 1"
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Smallest nonzero magnitude over all entries.
    pub fn min_nonzero_magnitude(&self) -> f64 {
        self.entries
            .iter()
            .filter(|v| **v != 0.0)
            .fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }
}

impl InteractionMatrix for TrustMatrix {
    fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    fn graph(&self) -> SignedDigraph {
        graph_of(&self.entries, 1.0)
    }
}

fn graph_of(m: &DMatrix<f64>, sign: f64) -> SignedDigraph {
    let n = m.nrows();
    let mut g = SignedDigraph::new(n);
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            if i != j && v != 0.0 {
                g.add_edge(j, i, sign * v).expect("indices in range, weight nonzero");
            }
        }
    }
    g
}

/// `p_ij = a_ij / (a_ii + sum_k |a_ik|)`, `p_ii = a_ii / (same)`.
pub fn weights_to_trust_matrix(g: &SignedDigraph, self_weights: &[f64]) -> Result<TrustMatrix> {
    let n = g.vertex_count();
    if self_weights.len() != n {
        return Err(Error::Dimension { expected: n, found: self_weights.len() });
    }
    if let Some(i) = self_weights.iter().position(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::Parameter(format!("self weight must be positive (vertex {i})")));
    }
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        let denom = self_weights[i] + g.in_edges(i).map(|(_, w)| w.abs()).sum::<f64>();
        p[(i, i)] = self_weights[i] / denom;
        for (j, w) in g.in_edges(i) {
            p[(i, j)] = w / denom;
        }
    }
    TrustMatrix::new(p)
}

/// Splits `m` into nonnegative parts with `m = plus - minus`.
pub fn split_signs(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|v| v.max(0.0)), m.map(|v| (-v).max(0.0)))
}

fn assemble_blocks(diag: &DMatrix<f64>, off: &DMatrix<f64>) -> DMatrix<f64> {
    let n = diag.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(diag);
    out.view_mut((n, n), (n, n)).copy_from(diag);
    out.view_mut((0, n), (n, n)).copy_from(off);
    out.view_mut((n, 0), (n, n)).copy_from(off);
    out
}

/// `Q = [[P+, P-], [P-, P+]]`, row-stochastic on `2n` states.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedStochastic {
    pub entries: DMatrix<f64>,
}

impl LiftedStochastic {
    pub fn half_dim(&self) -> usize {
        self.entries.nrows() / 2
    }
}

impl InteractionMatrix for LiftedStochastic {
    fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    fn graph(&self) -> SignedDigraph {
        graph_of(&self.entries, 1.0)
    }
}

pub fn lift_stochastic(p: &TrustMatrix) -> LiftedStochastic {
    let (plus, minus) = split_signs(p.entries());
    LiftedStochastic { entries: assemble_blocks(&plus, &minus) }
}

/// Continuous-time signed Laplacian:
/// `l_ii = sum_j |a_ij|`, `l_ij = -a_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedLaplacian {
    entries: DMatrix<f64>,
}

impl SignedLaplacian {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Largest diagonal entry, i.e. the largest total in-weight.
    pub fn max_degree(&self) -> f64 {
        self.entries.diagonal().iter().fold(0.0, |m, v| m.max(*v))
    }
}

impl InteractionMatrix for SignedLaplacian {
    fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    fn graph(&self) -> SignedDigraph {
        graph_of(&self.entries, -1.0)
    }
}

pub fn signed_laplacian(g: &SignedDigraph) -> SignedLaplacian {
    let n = g.vertex_count();
    let mut l = DMatrix::zeros(n, n);
    for e in g.edges() {
        l[(e.to, e.to)] += e.weight.abs();
        l[(e.to, e.from)] = -e.weight;
    }
    SignedLaplacian { entries: l }
}

/// `W = diag(D, D) - [[A+, A-], [A-, A+]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedLaplacian {
    pub entries: DMatrix<f64>,
}

impl InteractionMatrix for LiftedLaplacian {
    fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    fn graph(&self) -> SignedDigraph {
        graph_of(&self.entries, -1.0)
    }
}

pub fn lift_laplacian(g: &SignedDigraph) -> LiftedLaplacian {
    let n = g.vertex_count();
    let mut adj = DMatrix::zeros(n, n);
    let mut degree = DMatrix::zeros(n, n);
    for e in g.edges() {
        adj[(e.to, e.from)] = e.weight;
        degree[(e.to, e.to)] += e.weight.abs();
    }
    let (plus, minus) = split_signs(&adj);
    LiftedLaplacian { entries: assemble_blocks(&(degree - plus), &(-minus)) }
}

/// `D M D` for a diagonal `D` given by `signs`.
pub fn gauge_transform(m: &DMatrix<f64>, signs: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| signs[i] * m[(i, j)] * signs[j])
}

/// Lower block-triangular arrangement with the root SCC first.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeCanonicalForm {
    /// `permutation[k]` is the original index placed at position `k`.
    pub permutation: Vec<usize>,
    pub r: usize,
    pub root_block: DMatrix<f64>,
    pub coupling: DMatrix<f64>,
    pub tail: DMatrix<f64>,
}

impl TreeCanonicalForm {
    /// Root-set vertices in original labels, in canonical order.
    pub fn roots(&self) -> &[usize] {
        &self.permutation[..self.r]
    }

    /// The full matrix in canonical order (upper-right block is zero).
    pub fn permuted(&self) -> DMatrix<f64> {
        let n = self.permutation.len();
        let r = self.r;
        let mut m = DMatrix::zeros(n, n);
        m.view_mut((0, 0), (r, r)).copy_from(&self.root_block);
        m.view_mut((r, 0), (n - r, r)).copy_from(&self.coupling);
        m.view_mut((r, r), (n - r, n - r)).copy_from(&self.tail);
        m
    }

    /// Undoes the permutation.
    pub fn restore(&self) -> DMatrix<f64> {
        let p = self.permuted();
        let n = self.permutation.len();
        let mut out = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                out[(self.permutation[a], self.permutation[b])] = p[(a, b)];
            }
        }
        out
    }
}

/// Root SCC first, remaining components in condensation order, ascending
/// original index inside each component.
pub fn tree_canonical_form<M: InteractionMatrix>(m: &M) -> Result<TreeCanonicalForm> {
    let g = m.graph();
    let roots = root_vertex_set(&g)?;
    let scc = scc_decompose(&g);
    let mut permutation = roots.clone();
    for comp in &scc.components {
        if comp[0] != roots[0] {
            permutation.extend_from_slice(comp);
        }
    }
    let n = permutation.len();
    let r = roots.len();
    let src = m.matrix();
    let pm = DMatrix::from_fn(n, n, |a, b| src[(permutation[a], permutation[b])]);
    Ok(TreeCanonicalForm {
        r,
        root_block: pm.view((0, 0), (r, r)).into_owned(),
        coupling: pm.view((r, 0), (n - r, r)).into_owned(),
        tail: pm.view((r, r), (n - r, n - r)).into_owned(),
        permutation,
    })
}
