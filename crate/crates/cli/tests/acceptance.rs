//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//!     cargo test -p polaris-cli --test acceptance

use std::path::PathBuf;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use polaris_cli::{load_scenario, Scenario, System};
use polaris_core::lift::gauge_transform;
use polaris_core::limits::{
    classify_switching, lemma10_limit, predict_fixed, FixedSystem, LiftedBlockForm,
    SwitchingSystem,
};
use polaris_core::{
    check_balance, enlarge, lift_stochastic, root_vertex_set, scc_decompose, signed_laplacian,
    simulate_continuous, simulate_discrete, simulate_lifted_continuous, simulate_lifted_discrete,
    simulate_until_converged, weights_to_trust_matrix, ContinuousMethod, ContinuousSchedule,
    DiscreteSchedule, InteractionMatrix, Intervals, OpinionState, OutcomeKind, Selector, SignedDigraph,
    SignedLaplacian, Trajectory, TrustMatrix,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------- fixtures

const X0: [f64; 6] = [0.9, 0.7, -0.9, -1.0, 0.2, 0.9];

fn p1_graph() -> SignedDigraph {
    SignedDigraph::from_edges(
        6,
        [
            (2, 0, -1.0),
            (2, 1, -1.0),
            (0, 2, -1.0),
            (1, 2, -1.0),
            (1, 3, 1.0),
            (2, 3, 1.0),
            (4, 3, -1.0),
            (2, 4, 1.0),
            (3, 5, 1.0),
            (4, 5, 1.0),
        ],
    )
    .unwrap()
}

fn p2_graph() -> SignedDigraph {
    SignedDigraph::from_edges(
        6,
        [
            (1, 0, 1.0),
            (2, 0, -1.0),
            (0, 1, 1.0),
            (0, 2, -1.0),
            (1, 3, 1.0),
            (4, 3, -1.0),
            (2, 4, 1.0),
            (3, 5, -1.0),
            (4, 5, 1.0),
        ],
    )
    .unwrap()
}

fn trust(g: &SignedDigraph) -> TrustMatrix {
    weights_to_trust_matrix(g, &vec![1.0; g.vertex_count()]).unwrap()
}

fn matrix_power(m: &DMatrix<f64>, mut k: u32) -> DMatrix<f64> {
    let mut base = m.clone();
    let mut acc = DMatrix::identity(m.nrows(), m.ncols());
    while k > 0 {
        if k & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    acc
}

/// Structural balance by enumerating every bipartition with vertex 0 fixed.
fn brute_force_balanced(g: &SignedDigraph) -> bool {
    let n = g.vertex_count();
    assert!(n <= 12);
    (0u32..1 << (n - 1)).any(|mask| {
        let side = |v: usize| if v == 0 || mask >> (v - 1) & 1 == 0 { 1.0 } else { -1.0 };
        g.edges().all(|e| e.weight.signum() == side(e.from) * side(e.to))
    })
}

// ------------------------------------------------------------- generators

fn magnitude(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.5..2.0)
}

fn self_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| magnitude(rng)).collect()
}

fn random_x0(rng: &mut ChaCha8Rng, n: usize) -> OpinionState {
    OpinionState::new((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()).unwrap()
}

/// Two-sided ±1 labelling of `vertices`.
fn two_sided(rng: &mut ChaCha8Rng, vertices: &[usize], n: usize) -> Vec<f64> {
    let mut side = vec![1.0; n];
    for &v in vertices {
        side[v] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    }
    side[vertices[0]] = 1.0;
    side[vertices[1 + rng.random_range(0..vertices.len() - 1)]] = -1.0;
    side
}

/// Ordered pairs of a strongly connected random digraph on `vertices`.
fn strongly_connected_pairs(rng: &mut ChaCha8Rng, vertices: &[usize]) -> Vec<(usize, usize)> {
    let mut order = vertices.to_vec();
    order.shuffle(rng);
    let k = order.len();
    let mut pairs: Vec<(usize, usize)> = (0..k).map(|i| (order[i], order[(i + 1) % k])).collect();
    if k == 2 {
        pairs.truncate(2);
    }
    for &a in vertices {
        for &b in vertices {
            if a != b && !pairs.contains(&(a, b)) && rng.random_bool(0.25) {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

enum Signs {
    Balanced(Vec<f64>),
    Random,
}

fn signed_edges(rng: &mut ChaCha8Rng, pairs: &[(usize, usize)], signs: &Signs) -> Vec<(usize, usize, f64)> {
    let mut edges: Vec<(usize, usize, f64)> = pairs
        .iter()
        .map(|&(a, b)| {
            let sign = match signs {
                Signs::Balanced(side) => side[a] * side[b],
                Signs::Random => {
                    if rng.random_bool(0.5) {
                        -1.0
                    } else {
                        1.0
                    }
                }
            };
            (a, b, sign * magnitude(rng))
        })
        .collect();
    if !edges.iter().any(|e| e.2 < 0.0) {
        edges[0].2 = -edges[0].2;
    }
    edges
}

/// Strongly connected graph with at least one negative edge; half of the
/// seeds are balanced by construction, the rest carry random signs.
fn strongly_connected_instance(seed: u64) -> (SignedDigraph, Vec<f64>, OpinionState) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=8);
    let all: Vec<usize> = (0..n).collect();
    let pairs = strongly_connected_pairs(&mut rng, &all);
    let signs = if seed % 2 == 0 { Signs::Balanced(two_sided(&mut rng, &all, n)) } else { Signs::Random };
    let edges = signed_edges(&mut rng, &pairs, &signs);
    let g = SignedDigraph::from_edges(n, edges).unwrap();
    (g, self_weights(&mut rng, n), random_x0(&mut rng, n))
}

/// Graph whose root set is `roots` (strongly connected), with followers
/// attached so that every vertex is reachable from the roots.
fn spanning_tree_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    r: usize,
    root_balanced: bool,
) -> (SignedDigraph, Vec<usize>) {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let roots: Vec<usize> = perm[..r].to_vec();
    let pairs = strongly_connected_pairs(rng, &roots);
    let signs = if root_balanced { Signs::Balanced(two_sided(rng, &roots, n)) } else { Signs::Random };
    let mut edges = signed_edges(rng, &pairs, &signs);
    // random signs are unbalanced with probability at least 1/2
    while !root_balanced && brute_force_balanced(&SignedDigraph::from_edges(n, edges.clone()).unwrap()) {
        edges = signed_edges(rng, &pairs, &signs);
    }
    for k in r..n {
        let v = perm[k];
        let parent = perm[rng.random_range(0..k)];
        let mut sources = vec![parent];
        for &u in &perm {
            if u != v && u != parent && rng.random_bool(0.2) {
                sources.push(u);
            }
        }
        for u in sources {
            let sign = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
            edges.push((u, v, sign * magnitude(rng)));
        }
    }
    let mut sorted_roots = roots;
    sorted_roots.sort_unstable();
    (SignedDigraph::from_edges(n, edges).unwrap(), sorted_roots)
}

fn p1_p2_schedule() -> DiscreteSchedule {
    DiscreteSchedule::new(
        vec![trust(&p1_graph()), trust(&p2_graph())],
        Selector::Periodic(vec![0, 1]),
        None,
        Intervals::Uniform(2),
    )
    .unwrap()
}

// ------------------------------------------------------------- criteria

fn criterion_1() -> Check {
    let p = trust(&p1_graph());
    let x0 = OpinionState::new(X0.to_vec()).unwrap();
    let schedule = DiscreteSchedule::fixed(p.clone());
    let start = Instant::now();
    let (traj, converged) = simulate_until_converged(&schedule, &x0, 10_000).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let converged = converged.ok_or("simulation did not converge")?;
    let x = traj.last().as_slice().to_vec();

    // oracle 1: fixed vector of the root block of the lifted matrix
    let q1 = DMatrix::from_row_slice(3, 3, &[0.5, 0.0, 0.5, 0.0, 0.5, 0.5, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
    let mut a = q1.transpose() - DMatrix::identity(3, 3);
    a.row_mut(2).fill(1.0);
    let xi = a.lu().solve(&DVector::from_vec(vec![0.0, 0.0, 1.0])).ok_or("singular")?;
    let c_solve = xi[0] * X0[0] + xi[1] * X0[1] - xi[2] * X0[2];
    // oracle 2: 2000-step powering of the lifted matrix
    let q = lift_stochastic(&p).entries;
    let y = matrix_power(&q, 2000) * x0.lifted().vector();
    let c_power = y[0];
    let c = 5.9 / 7.0;
    ensure((c_solve - c).abs() < 1e-12 && (c_power - c).abs() < 1e-12, || {
        format!("oracles give C = {c_solve} and {c_power}, expected {c}")
    })?;

    let root_gap = max_diff(&x[..3], &[c, c, -c]);
    ensure(root_gap <= 1e-6, || format!("roots {:?} differ from (C, C, -C) by {root_gap:e}", &x[..3]))?;

    // oracle 3: followers solve x_f = P_ff x_f + P_fr x_r
    let e = p.entries();
    let p_ff = e.view((3, 3), (3, 3)).into_owned();
    let p_fr = e.view((3, 0), (3, 3)).into_owned();
    let x_f = (DMatrix::identity(3, 3) - p_ff)
        .lu()
        .solve(&(p_fr * DVector::from_vec(vec![c, c, -c])))
        .ok_or("singular")?;
    let expected = [c / 3.0, -c, -c / 3.0];
    ensure(max_diff(x_f.as_slice(), &expected) < 1e-12, || format!("follower oracle {x_f:?}"))?;
    let follower_gap = max_diff(&x[3..], &expected);
    ensure(follower_gap <= 1e-6, || format!("followers {:?} differ by {follower_gap:e}", &x[3..]))?;
    ensure(x[3..].iter().all(|v| v.abs() <= c + 1e-9), || "follower outside [-C, C]".into())?;
    ensure(elapsed < 0.1, || format!("simulation took {elapsed:.3} s"))?;
    Ok(format!(
        "C = {c:.9}, root gap {root_gap:.1e}, follower gap {follower_gap:.1e}, converged at step {converged}, {:.1} ms",
        elapsed * 1e3
    ))
}

fn criterion_2() -> Check {
    let x0 = OpinionState::new(X0.to_vec()).unwrap();
    let traj = simulate_discrete(&p1_p2_schedule(), &x0, 5000).map_err(|e| e.to_string())?;
    let x = traj.last().as_slice();
    let c = (x[0] + x[1] - x[2]) / 3.0;
    let spread = max_diff(&[x[0], x[1], -x[2]], &[c, c, c]);
    ensure(spread <= 1e-6 && c.abs() > 1e-3, || format!("roots {:?} not at (C', C', -C')", &x[..3]))?;
    let c = c.abs();
    let tail = &traj.states[traj.len() - 500..];
    let mut details = Vec::new();
    for agent in [3, 5] {
        let values: Vec<f64> = tail.iter().map(|s| s.as_slice()[agent]).collect();
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let peak = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        ensure(hi - lo > 1e-3, || format!("agent {agent} settles (amplitude {:.2e})", hi - lo))?;
        ensure(peak <= c + 1e-6, || format!("agent {agent} reaches {peak} > C' = {c}"))?;
        details.push(format!("agent {agent} amplitude {:.4}, peak {peak:.4}", hi - lo));
    }
    let pred = classify_switching(SwitchingSystem::Discrete(&p1_p2_schedule()));
    ensure(matches!(pred.kind, OutcomeKind::Cluster { .. }), || format!("classified as {:?}", pred.kind))?;
    Ok(format!("C' = {c:.6}, root spread {spread:.1e}, {}", details.join(", ")))
}

fn criterion_3() -> Check {
    let (mut balanced, mut unbalanced) = (0, 0);
    for seed in 0..100 {
        let (g, w, x0) = strongly_connected_instance(seed);
        let verdict = check_balance(&g);
        ensure(verdict.is_some() == brute_force_balanced(&g), || format!("seed {seed}: balance verdict disagrees with enumeration"))?;
        let p = weights_to_trust_matrix(&g, &w).map_err(|e| e.to_string())?;
        let traj = simulate_discrete(&DiscreteSchedule::fixed(p.clone()), &x0, 10_000).map_err(|e| e.to_string())?;
        let x = traj.last().as_slice();
        let pred = predict_fixed(FixedSystem::Discrete(&p), &x0).map_err(|e| e.to_string())?;
        if let Some(partition) = verdict {
            balanced += 1;
            ensure(matches!(pred.kind, OutcomeKind::Polarize { .. }), || format!("seed {seed}: predicted {:?}", pred.kind))?;
            let a = x.iter().map(|v| v.abs()).sum::<f64>() / x.len() as f64;
            let spread = x.iter().map(|v| (v.abs() - a).abs()).fold(0.0, f64::max);
            let signs_follow = partition.set_one.iter().all(|&i| x[i].signum() == x[partition.set_one[0]].signum())
                && partition.set_two.iter().all(|&i| x[i].signum() == -x[partition.set_one[0]].signum());
            ensure(spread <= 1e-6 && a > 1e-6 && signs_follow, || {
                format!("seed {seed}: balanced instance ended at {x:?}")
            })?;
        } else {
            unbalanced += 1;
            ensure(pred.kind == OutcomeKind::Neutralize, || format!("seed {seed}: predicted {:?}", pred.kind))?;
            let norm = traj.last().max_abs();
            ensure(norm < 1e-6, || format!("seed {seed}: unbalanced instance ended at norm {norm:e}"))?;
        }
    }
    ensure(balanced > 0 && unbalanced > 0, || "corpus lacks one of the two classes".into())?;
    Ok(format!("{balanced} balanced polarized, {unbalanced} unbalanced neutralized"))
}

fn criterion_4() -> Check {
    for seed in 0..100 {
        let (g, _, _) = strongly_connected_instance(seed);
        let balanced = check_balance(&g).is_some();
        let components = scc_decompose(&enlarge(&g)).components.len();
        let expected = if balanced { 2 } else { 1 };
        ensure(components == expected, || {
            format!("seed {seed}: balanced = {balanced} but the enlarged graph has {components} components")
        })?;
    }
    Ok("100/100 agree".into())
}

fn criterion_5() -> Check {
    let mut worst = 0.0f64;
    let mut worst_eta = 0.0f64;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + seed);
        let n = rng.random_range(3..=8);
        let r = rng.random_range(2..=n);
        let (g, roots) = spanning_tree_instance(&mut rng, n, r, true);
        ensure(root_vertex_set(&g).ok() == Some(roots.clone()), || format!("seed {seed}: generator root set"))?;
        let p = weights_to_trust_matrix(&g, &self_weights(&mut rng, n)).map_err(|e| e.to_string())?;
        let form = LiftedBlockForm::from_trust_matrix(&p).map_err(|e| e.to_string())?;
        let data = lemma10_limit(&form).map_err(|e| format!("seed {seed}: {e}"))?;
        let power = matrix_power(&lift_stochastic(&p).entries, 2000);
        let gap = (data.limit_in_lifted_order() - power).amax();
        worst = worst.max(gap);
        ensure(gap <= 1e-8, || format!("seed {seed}: limit differs from Q^2000 by {gap:e}"))?;
        let sum_gap = data.eta1.iter().zip(&data.eta2).map(|(a, b)| (a + b - 1.0).abs()).fold(0.0, f64::max);
        let diff = data.eta1.iter().zip(&data.eta2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_eta = worst_eta.max(sum_gap);
        ensure(sum_gap <= 1e-10, || format!("seed {seed}: eta1 + eta2 off by {sum_gap:e}"))?;
        ensure(diff <= 1.0 + 1e-10, || format!("seed {seed}: |eta1 - eta2| = {diff}"))?;
    }
    Ok(format!("50 instances, max |limit - Q^2000| = {worst:.1e}, max |eta1 + eta2 - 1| = {worst_eta:.1e}"))
}

fn criterion_6() -> Check {
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2_000 + seed);
        let n = rng.random_range(3..=8);
        // even seeds: strongly connected unions; odd seeds: spanning tree unions
        let r = if seed % 2 == 0 { n } else { rng.random_range(2..n) };
        let (union, _) = spanning_tree_instance(&mut rng, n, r, false);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for e in union.edges() {
            match rng.random_range(0..5) {
                0 => {
                    a.push((e.from, e.to, e.weight));
                    b.push((e.from, e.to, e.weight));
                }
                1 | 2 => a.push((e.from, e.to, e.weight)),
                _ => b.push((e.from, e.to, e.weight)),
            }
        }
        let w = self_weights(&mut rng, n);
        let graphs = [a, b].map(|edges| {
            weights_to_trust_matrix(&SignedDigraph::from_edges(n, edges).unwrap(), &w).unwrap()
        });
        let schedule = DiscreteSchedule::new(graphs.to_vec(), Selector::Periodic(vec![0, 1]), None, Intervals::Uniform(2))
            .map_err(|e| e.to_string())?;
        let pred = classify_switching(SwitchingSystem::Discrete(&schedule));
        ensure(pred.kind == OutcomeKind::Neutralize, || format!("seed {seed}: classified as {:?}", pred.kind))?;
        let x0 = random_x0(&mut rng, n);
        let traj = simulate_discrete(&schedule, &x0, 10_000).map_err(|e| e.to_string())?;
        let norm = traj.last().max_abs();
        worst = worst.max(norm);
        ensure(norm < 1e-6, || format!("seed {seed}: terminal norm {norm:e}"))?;
    }
    Ok(format!("50 schedules neutralized, largest terminal norm {worst:.1e}"))
}

fn boundary_states(t: &Trajectory) -> Vec<(f64, &OpinionState)> {
    t.boundary_indices.iter().map(|&k| (t.times[k], &t.states[k])).collect()
}

fn criterion_7() -> Check {
    let mut systems: Vec<(String, SignedLaplacian, OpinionState)> = vec![
        ("P1 graph".into(), signed_laplacian(&p1_graph()), OpinionState::new(X0.to_vec()).unwrap()),
        ("P2 graph".into(), signed_laplacian(&p2_graph()), OpinionState::new(X0.to_vec()).unwrap()),
    ];
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(3_000 + seed);
        let n = rng.random_range(3..=8);
        let r = rng.random_range(2..=n);
        let (g, _) = spanning_tree_instance(&mut rng, n, r, seed % 4 != 3);
        systems.push((format!("seed {seed}"), signed_laplacian(&g), random_x0(&mut rng, n)));
    }
    let mut worst = 0.0f64;
    for (label, l, x0) in &systems {
        let pred = predict_fixed(FixedSystem::Continuous(l), x0).map_err(|e| e.to_string())?;
        let discrete = predict_fixed(FixedSystem::Discrete(&trust(&l.graph())), x0).map_err(|e| e.to_string())?;
        ensure(pred.kind.same_kind(&discrete.kind), || {
            format!("{label}: continuous {:?} vs discrete {:?}", pred.kind, discrete.kind)
        })?;
        let horizon = 2000.0;
        let schedule = ContinuousSchedule::fixed(l.clone(), horizon).map_err(|e| e.to_string())?;
        let traj = simulate_continuous(&schedule, x0, ContinuousMethod::Exact, 1.0, horizon).map_err(|e| e.to_string())?;
        let limit = pred.predicted_limit.as_ref().ok_or_else(|| format!("{label}: no predicted limit"))?;
        let gap = max_diff(limit, traj.last().as_slice());
        worst = worst.max(gap);
        ensure(gap <= 1e-5, || format!("{label}: terminal state differs from the prediction by {gap:e}"))?;
    }

    let mut worst_rk4 = 0.0f64;
    for name in ["p1_continuous", "g1_g3_continuous", "g1_g4_continuous", "triangle_continuous"] {
        let s = golden(name)?;
        let System::Continuous { schedule, .. } = &s.system else {
            return Err(format!("{name} is not continuous"));
        };
        let horizon = 20.0;
        let exact = simulate_continuous(schedule, &s.x0, ContinuousMethod::Exact, 0.01, horizon).map_err(|e| e.to_string())?;
        let rk4 = simulate_continuous(schedule, &s.x0, ContinuousMethod::Rk4, 0.01, horizon).map_err(|e| e.to_string())?;
        let (be, br) = (boundary_states(&exact), boundary_states(&rk4));
        ensure(be.len() == br.len() && be.len() > 1, || format!("{name}: boundary mismatch"))?;
        for ((te, xe), (tr, xr)) in be.iter().zip(&br) {
            ensure(te == tr, || format!("{name}: boundary times {te} vs {tr}"))?;
            let gap = max_diff(xe.as_slice(), xr.as_slice());
            worst_rk4 = worst_rk4.max(gap);
            ensure(gap <= 1e-6, || format!("{name}: exact and rk4 differ by {gap:e} at t = {te}"))?;
        }
    }
    Ok(format!(
        "{} fixed systems, max limit gap {worst:.1e}; exact vs rk4 max boundary gap {worst_rk4:.1e}",
        systems.len()
    ))
}

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn golden(name: &str) -> Result<Scenario, String> {
    load_scenario(&scenario_dir().join(format!("{name}.toml"))).map_err(|e| e.to_string())
}

fn golden_suite() -> Result<Vec<Scenario>, String> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_scenario(p).map_err(|e| e.to_string())).collect()
}

fn gauged_graph(g: &SignedDigraph, d: &[f64]) -> SignedDigraph {
    SignedDigraph::from_edges(g.vertex_count(), g.edges().map(|e| (e.from, e.to, d[e.from] * e.weight * d[e.to]))).unwrap()
}

/// Runs the scenario and its gauge transform by `d`; returns whether
/// `D x(t)` equals the transformed trajectory bit for bit.
fn gauge_matches(s: &Scenario, d: &[f64]) -> Result<bool, String> {
    let dx0 = s.x0.gauged(d);
    let (plain, gauged) = match &s.system {
        System::Discrete { schedule, steps } => {
            let graphs = schedule
                .graphs()
                .iter()
                .map(|p| TrustMatrix::new(gauge_transform(p.entries(), d)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            let other = DiscreteSchedule::new(graphs, schedule.selector().clone(), Some(schedule.gamma()), schedule.intervals().clone())
                .map_err(|e| e.to_string())?;
            (
                simulate_discrete(schedule, &s.x0, *steps).map_err(|e| e.to_string())?,
                simulate_discrete(&other, &dx0, *steps).map_err(|e| e.to_string())?,
            )
        }
        System::Continuous { schedule, horizon, dt, method } => {
            let graphs = schedule.graphs().iter().map(|l| signed_laplacian(&gauged_graph(&l.graph(), d))).collect();
            let other = ContinuousSchedule::new(
                graphs,
                schedule.pieces().to_vec(),
                schedule.dwell_set().to_vec(),
                Some(schedule.weight_bounds()),
                schedule.pieces_per_interval(),
            )
            .map_err(|e| e.to_string())?;
            (
                simulate_continuous(schedule, &s.x0, *method, *dt, *horizon).map_err(|e| e.to_string())?,
                simulate_continuous(&other, &dx0, *method, *dt, *horizon).map_err(|e| e.to_string())?,
            )
        }
    };
    Ok(plain.times == gauged.times
        && plain.states.iter().zip(&gauged.states).all(|(x, y)| x.gauged(d).as_slice() == y.as_slice()))
}

fn criterion_8() -> Check {
    let suite = golden_suite()?;
    ensure(!suite.is_empty(), || "no golden scenarios found".into())?;
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for s in &suite {
        let report = match &s.system {
            System::Discrete { schedule, steps } => simulate_lifted_discrete(schedule, &s.x0, *steps).map(|r| r.1),
            System::Continuous { schedule, horizon, dt, method } => {
                simulate_lifted_continuous(schedule, &s.x0, *method, *dt, *horizon).map(|r| r.1)
            }
        }
        .map_err(|e| e.to_string())?;
        worst = worst.max(report.antisymmetry_defect);
        ensure(report.antisymmetry_defect <= 1e-9, || {
            format!("{}: antisymmetry defect {:e}", s.name, report.antisymmetry_defect)
        })?;
        ensure(report.primal_deviation <= 1e-9, || {
            format!("{}: lifted and primal runs differ by {:e}", s.name, report.primal_deviation)
        })?;
        let n = s.x0.len();
        let d: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { -1.0 } else { 1.0 }).collect();
        ensure(gauge_matches(s, &d)?, || format!("{}: gauge-transformed trajectory differs", s.name))?;
    }
    Ok(format!("{} golden scenarios, max antisymmetry defect {worst:.1e}, gauge trajectories identical", suite.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("fixed P1 reproduction", criterion_1),
        ("P1/P2 switching reproduction", criterion_2),
        ("strongly connected polarization/neutralization suite", criterion_3),
        ("balance vs enlarged-graph components", criterion_4),
        ("closed-form lifted limit vs Q^2000", criterion_5),
        ("switching neutralization", criterion_6),
        ("continuous/discrete consistency", criterion_7),
        ("gauge and lifting invariants", criterion_8),
    ];
    let mut failed = 0;
    for (k, (title, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match result {
            Ok(detail) => println!("criterion {} PASS [{ms:.0} ms] {title}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL [{ms:.0} ms] {title}: {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
