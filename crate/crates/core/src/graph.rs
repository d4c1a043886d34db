//! Directed signed graphs and their structural analysis.
//!
//! Edges are stored keyed by `(influenced, influencer)`, i.e. `(i, j)` for an
//! edge drawn `j -> i`. This mirrors the row/column convention of the update
//! matrices: entry `p_ij` is the weight agent `i` puts on agent `j`. The public
//! API speaks in `from`/`to` terms (`from` is the influencer) to keep call
//! sites readable.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::cmp::Reverse;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::error::{Error, Result};

/// A single directed edge `from -> to`; `from` influences `to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Trust/mistrust network on `n` agents.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignedDigraph {
    n: usize,
    // (influenced, influencer) -> a_ij
    edges: BTreeMap<(usize, usize), f64>,
}

impl SignedDigraph {
    pub fn new(n: usize) -> Self {
        Self { n, edges: BTreeMap::new() }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut g = Self::new(n);
        for (from, to, weight) in edges {
            g.add_edge(from, to, weight)?;
        }
        Ok(g)
    }

    /// Inserts (or overwrites) the edge `from -> to`.
    pub fn add_edge(&mut self, from: usize, to: usize, weight: f64) -> Result<()> {
        for v in [from, to] {
            if v >= self.n {
                return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
            }
        }
        if from == to {
            return Err(Error::SelfLoop(from));
        }
        if weight == 0.0 || !weight.is_finite() {
            return Err(Error::InvalidWeight { from, to, weight });
        }
        self.edges.insert((to, from), weight);
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Weight of `from -> to`, if present.
    pub fn weight(&self, from: usize, to: usize) -> Option<f64> {
        self.edges.get(&(to, from)).copied()
    }

    /// Edges ordered by `(to, from)`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges
            .iter()
            .map(|(&(to, from), &weight)| Edge { from, to, weight })
    }

    /// Influencers of `vertex` with their weights.
    pub fn in_edges(&self, vertex: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.edges
            .range((vertex, 0)..(vertex, usize::MAX))
            .map(|(&(_, from), &w)| (from, w))
    }

    pub fn has_negative_edge(&self) -> bool {
        self.edges.values().any(|&w| w < 0.0)
    }

    /// Subgraph induced on `subset`, relabelled to `0..subset.len()` in the
    /// order given.
    pub fn induced(&self, subset: &[usize]) -> Self {
        let index: BTreeMap<usize, usize> =
            subset.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let mut g = Self::new(subset.len());
        for e in self.edges() {
            if let (Some(&f), Some(&t)) = (index.get(&e.from), index.get(&e.to)) {
                g.edges.insert((t, f), e.weight);
            }
        }
        g
    }

    fn to_petgraph(&self) -> DiGraph<(), ()> {
        let mut pg = DiGraph::with_capacity(self.n, self.edges.len());
        for _ in 0..self.n {
            pg.add_node(());
        }
        for e in self.edges() {
            pg.add_edge(NodeIndex::new(e.from), NodeIndex::new(e.to), ());
        }
        pg
    }
}

/// Two-set split of a vertex set. `set_two` may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancePartition {
    pub set_one: Vec<usize>,
    pub set_two: Vec<usize>,
}

impl BalancePartition {
    /// `+1` for vertices of `set_one`, `-1` for `set_two`, `None` otherwise.
    pub fn side(&self, v: usize) -> Option<f64> {
        if self.set_one.binary_search(&v).is_ok() {
            Some(1.0)
        } else if self.set_two.binary_search(&v).is_ok() {
            Some(-1.0)
        } else {
            None
        }
    }

    pub fn is_two_sided(&self) -> bool {
        !self.set_one.is_empty() && !self.set_two.is_empty()
    }

    pub fn vertices(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.set_one.iter().chain(&self.set_two).copied().collect();
        all.sort_unstable();
        all
    }

    /// Diagonal of the gauge matrix on `n` vertices; vertices outside the
    /// partition get `+1`.
    pub fn gauge(&self, n: usize) -> Vec<f64> {
        (0..n).map(|v| self.side(v).unwrap_or(1.0)).collect()
    }

    /// Checks every edge of `g` between partitioned vertices: positive
    /// inside a set, negative across.
    pub fn is_valid_for(&self, g: &SignedDigraph) -> bool {
        g.edges().all(|e| match (self.side(e.from), self.side(e.to)) {
            (Some(a), Some(b)) => (a * b > 0.0) == (e.weight > 0.0),
            _ => true,
        })
    }
}

/// Strongly connected components in a topological order of the condensation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDecomposition {
    /// Sources first; vertices inside a component ascending.
    pub components: Vec<Vec<usize>>,
    /// `(from, to)` component indices.
    pub condensation_edges: BTreeSet<(usize, usize)>,
}

impl SccDecomposition {
    /// Components with no incoming condensation edge.
    pub fn sources(&self) -> Vec<usize> {
        let mut has_in = vec![false; self.components.len()];
        for &(_, to) in &self.condensation_edges {
            has_in[to] = true;
        }
        (0..self.components.len()).filter(|&c| !has_in[c]).collect()
    }

    pub fn component_of(&self, vertex: usize) -> Option<usize> {
        self.components
            .iter()
            .position(|c| c.binary_search(&vertex).is_ok())
    }
}

/// SCCs of the underlying digraph (signs ignored).
///
/// Among components whose predecessors are all placed, the one holding the
/// smallest vertex index goes first.
pub fn scc_decompose(g: &SignedDigraph) -> SccDecomposition {
    let mut raw: Vec<Vec<usize>> = tarjan_scc(&g.to_petgraph())
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|v| v.index()).collect();
            c.sort_unstable();
            c
        })
        .collect();
    raw.sort_by_key(|c| c[0]);

    let mut comp_of = vec![0usize; g.vertex_count()];
    for (k, c) in raw.iter().enumerate() {
        for &v in c {
            comp_of[v] = k;
        }
    }
    let mut raw_edges = BTreeSet::new();
    for e in g.edges() {
        let (a, b) = (comp_of[e.from], comp_of[e.to]);
        if a != b {
            raw_edges.insert((a, b));
        }
    }

    // Kahn's algorithm; `raw` is sorted by minimum vertex so the component
    // index doubles as the tie-break key.
    let mut indegree = vec![0usize; raw.len()];
    for &(_, b) in &raw_edges {
        indegree[b] += 1;
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..raw.len())
        .filter(|&c| indegree[c] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(raw.len());
    while let Some(Reverse(c)) = ready.pop() {
        order.push(c);
        for &(a, b) in raw_edges.range((c, 0)..(c + 1, 0)) {
            debug_assert_eq!(a, c);
            indegree[b] -= 1;
            if indegree[b] == 0 {
                ready.push(Reverse(b));
            }
        }
    }
    let mut position = vec![0usize; raw.len()];
    for (pos, &c) in order.iter().enumerate() {
        position[c] = pos;
    }
    let components = order.iter().map(|&c| raw[c].clone()).collect();
    let condensation_edges = raw_edges
        .into_iter()
        .map(|(a, b)| (position[a], position[b]))
        .collect();
    SccDecomposition { components, condensation_edges }
}

pub fn is_strongly_connected(g: &SignedDigraph) -> bool {
    g.vertex_count() > 0 && scc_decompose(g).components.len() == 1
}

/// Vertices that have a directed path to every other vertex.
///
/// Fails with [`Error::NoSpanningTree`] when the condensation has more than
/// one source component.
pub fn root_vertex_set(g: &SignedDigraph) -> Result<Vec<usize>> {
    let scc = scc_decompose(g);
    match scc.sources().as_slice() {
        [only] => Ok(scc.components[*only].clone()),
        _ => Err(Error::NoSpanningTree),
    }
}

/// Sign content of a (possibly multi-) edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SignSet {
    pub positive: bool,
    pub negative: bool,
}

impl SignSet {
    pub fn of(weight: f64) -> Self {
        Self { positive: weight > 0.0, negative: weight < 0.0 }
    }

    pub fn is_mixed(self) -> bool {
        self.positive && self.negative
    }

    fn merge(&mut self, other: SignSet) {
        self.positive |= other.positive;
        self.negative |= other.negative;
    }
}

/// Union of several signed graphs on the same vertex set, remembering every
/// sign that occurred on each ordered pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnionSignGraph {
    pub n: usize,
    /// `(influenced, influencer) -> signs`.
    pub edge_signs: BTreeMap<(usize, usize), SignSet>,
}

impl UnionSignGraph {
    /// Signs of `from -> to`.
    pub fn signs(&self, from: usize, to: usize) -> Option<SignSet> {
        self.edge_signs.get(&(to, from)).copied()
    }

    /// Underlying digraph with unit weights, for connectivity questions.
    pub fn support(&self) -> SignedDigraph {
        let mut g = SignedDigraph::new(self.n);
        for &(to, from) in self.edge_signs.keys() {
            g.edges.insert((to, from), 1.0);
        }
        g
    }

    /// Edge set `(from, to)` of the enlarged graph of the union, treating a
    /// mixed pair as two parallel edges.
    pub fn enlarged_edges(&self) -> BTreeSet<(usize, usize)> {
        let n = self.n;
        let mut out = BTreeSet::new();
        for (&(to, from), signs) in &self.edge_signs {
            if signs.positive {
                out.insert((from, to));
                out.insert((n + from, n + to));
            }
            if signs.negative {
                out.insert((from, n + to));
                out.insert((n + from, to));
            }
        }
        out
    }
}

pub fn union_graphs(gs: &[SignedDigraph]) -> Result<UnionSignGraph> {
    let n = gs.first().map_or(0, SignedDigraph::vertex_count);
    let mut edge_signs: BTreeMap<(usize, usize), SignSet> = BTreeMap::new();
    for g in gs {
        if g.vertex_count() != n {
            return Err(Error::Dimension { expected: n, found: g.vertex_count() });
        }
        for (&key, &w) in &g.edges {
            edge_signs.entry(key).or_default().merge(SignSet::of(w));
        }
    }
    Ok(UnionSignGraph { n, edge_signs })
}

/// Sign-respecting two-colouring of `subset`, ignoring edge direction.
/// Each weak component starts from its lowest vertex in `set_one`.
fn two_color<I>(n: usize, subset: &[usize], edges: I) -> Option<BalancePartition>
where
    I: IntoIterator<Item = (usize, usize, SignSet)>,
{
    let mut member = vec![false; n];
    for &v in subset {
        member[v] = true;
    }
    let mut adj: Vec<Vec<(usize, SignSet)>> = vec![Vec::new(); n];
    for (a, b, s) in edges {
        if !(member[a] && member[b]) {
            continue;
        }
        if s.is_mixed() {
            return None;
        }
        adj[a].push((b, s));
        adj[b].push((a, s));
    }

    let mut color: Vec<Option<bool>> = vec![None; n];
    let mut order: Vec<usize> = subset.to_vec();
    order.sort_unstable();
    order.dedup();
    let mut queue = VecDeque::new();
    for &start in &order {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(true);
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            let cu = color[u].expect("queued vertices are coloured");
            for &(v, s) in &adj[u] {
                let want = if s.positive { cu } else { !cu };
                match color[v] {
                    None => {
                        color[v] = Some(want);
                        queue.push_back(v);
                    }
                    Some(cv) if cv != want => return None,
                    Some(_) => {}
                }
            }
        }
    }

    let (set_one, set_two): (Vec<usize>, Vec<usize>) =
        order.iter().partition(|&&v| color[v] == Some(true));
    Some(BalancePartition { set_one, set_two })
}

/// Structural balance test on the whole vertex set. `None` means unbalanced.
pub fn check_balance(g: &SignedDigraph) -> Option<BalancePartition> {
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    check_balance_within(g, &all)
}

/// Structural balance of the subgraph induced on `subset` (original labels).
pub fn check_balance_within(g: &SignedDigraph, subset: &[usize]) -> Option<BalancePartition> {
    two_color(
        g.vertex_count(),
        subset,
        g.edges().map(|e| (e.from, e.to, SignSet::of(e.weight))),
    )
}

/// A bipartition of `subset` valid for every graph folded into `u`
/// simultaneously, or `None`.
pub fn common_bipartition(u: &UnionSignGraph, subset: &[usize]) -> Option<BalancePartition> {
    two_color(
        u.n,
        subset,
        u.edge_signs.iter().map(|(&(to, from), &s)| (from, to, s)),
    )
}

/// The all-positive graph on `2n` vertices encoding the sign structure of `g`.
///
/// `v_i^+` sits at index `i` and `v_i^-` at `n + i`.
pub fn enlarge(g: &SignedDigraph) -> SignedDigraph {
    let n = g.vertex_count();
    let mut out = SignedDigraph::new(2 * n);
    for e in g.edges() {
        let (a, b) = if e.weight > 0.0 {
            ((e.from, e.to), (n + e.from, n + e.to))
        } else {
            ((e.from, n + e.to), (n + e.from, e.to))
        };
        out.edges.insert((a.1, a.0), 1.0);
        out.edges.insert((b.1, b.0), 1.0);
    }
    out
}
