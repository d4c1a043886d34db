//! Seeded random signed graphs shared by the integration tests.

#![allow(dead_code)]

use polaris_core::{OpinionState, SignedDigraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn magnitude(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.5..2.0)
}

pub fn sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random_bool(0.5) {
        -1.0
    } else {
        1.0
    }
}

pub fn self_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| magnitude(rng)).collect()
}

pub fn x0(rng: &mut ChaCha8Rng, n: usize) -> OpinionState {
    OpinionState::new((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()).unwrap()
}

/// Every bipartition with vertex 0 on the first side.
pub fn brute_force_balanced(g: &SignedDigraph) -> bool {
    let n = g.vertex_count();
    assert!(n <= 12);
    if n == 0 {
        return true;
    }
    (0u32..1 << (n - 1)).any(|mask| {
        let side = |v: usize| if v == 0 || mask >> (v - 1) & 1 == 0 { 1.0 } else { -1.0 };
        g.edges().all(|e| e.weight.signum() == side(e.from) * side(e.to))
    })
}

/// Arbitrary signed digraph.
pub fn any_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> SignedDigraph {
    let mut g = SignedDigraph::new(n);
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(density) {
                let w = sign(rng) * magnitude(rng);
                g.add_edge(a, b, w).unwrap();
            }
        }
    }
    g
}

/// Strongly connected on `vertices` (a shuffled cycle plus extras).
fn strongly_connected_pairs(rng: &mut ChaCha8Rng, vertices: &[usize]) -> Vec<(usize, usize)> {
    let mut order = vertices.to_vec();
    order.shuffle(rng);
    let k = order.len();
    let mut pairs: Vec<(usize, usize)> = if k > 1 { (0..k).map(|i| (order[i], order[(i + 1) % k])).collect() } else { Vec::new() };
    pairs.dedup();
    for &a in vertices {
        for &b in vertices {
            if a != b && !pairs.contains(&(a, b)) && rng.random_bool(0.25) {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// ±1 per vertex of `vertices`, both signs present when possible.
pub fn random_sides(rng: &mut ChaCha8Rng, vertices: &[usize], n: usize) -> Vec<f64> {
    let mut side = vec![1.0; n];
    for &v in vertices {
        side[v] = sign(rng);
    }
    if vertices.len() > 1 {
        side[vertices[0]] = 1.0;
        side[vertices[1 + rng.random_range(0..vertices.len() - 1)]] = -1.0;
    }
    side
}

pub fn strongly_connected(rng: &mut ChaCha8Rng, n: usize, balanced: bool) -> SignedDigraph {
    let all: Vec<usize> = (0..n).collect();
    let side = random_sides(rng, &all, n);
    let mut g = SignedDigraph::new(n);
    for (a, b) in strongly_connected_pairs(rng, &all) {
        let s = if balanced { side[a] * side[b] } else { sign(rng) };
        g.add_edge(a, b, s * magnitude(rng)).unwrap();
    }
    g
}

/// Spanning-tree graph whose root set is a random `r`-subset; returns the
/// sorted root set alongside.
pub fn spanning_tree(rng: &mut ChaCha8Rng, n: usize, r: usize, root_balanced: bool) -> (SignedDigraph, Vec<usize>) {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let roots = perm[..r].to_vec();
    let pairs = strongly_connected_pairs(rng, &roots);
    let mut g;
    loop {
        let side = random_sides(rng, &roots, n);
        g = SignedDigraph::new(n);
        for &(a, b) in &pairs {
            let s = if root_balanced { side[a] * side[b] } else { sign(rng) };
            g.add_edge(a, b, s * magnitude(rng)).unwrap();
        }
        // unbalanced roots need some cycle with an odd number of negative edges
        if root_balanced || r < 2 || !brute_force_balanced(&g) {
            break;
        }
    }
    for k in r..n {
        let v = perm[k];
        let parent = perm[rng.random_range(0..k)];
        let w = sign(rng) * magnitude(rng);
        g.add_edge(parent, v, w).unwrap();
        for &u in &perm {
            if u != v && u != parent && rng.random_bool(0.2) {
                let w = sign(rng) * magnitude(rng);
                g.add_edge(u, v, w).unwrap();
            }
        }
    }
    let mut roots = roots;
    roots.sort_unstable();
    (g, roots)
}
