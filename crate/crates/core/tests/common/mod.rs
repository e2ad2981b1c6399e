#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use safe_kernel::engine::{RunTolerances, ScenarioFile, StrategySpec, WeightKind};
use safe_kernel::geometry::{Point, PointSet, Polytope};
use safe_kernel::graph::{AttackModel, Network};
use safe_kernel::oracle::kernel_membership_bruteforce;

pub const PLANAR_SCENARIO: &str = include_str!("../../scenarios/five_agent_planar.json");

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random multiset of `m <= 8` points in dimension `d`. Half the time the
/// coordinates are small integers, which produces duplicates, collinear
/// triples and other degeneracies.
pub fn random_points(rng: &mut ChaCha8Rng, d: usize, m: usize) -> PointSet {
    let lattice = rng.random_bool(0.5);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..d)
                .map(|_| {
                    if lattice {
                        rng.random_range(0..=4) as f64
                    } else {
                        rng.random_range(-5.0..5.0)
                    }
                })
                .collect()
        })
        .collect();
    PointSet::from_rows(&rows).unwrap()
}

/// Largest halfspace violation at `y`; negative inside.
pub fn max_violation(k: &Polytope, y: &[f64]) -> f64 {
    k.halfspaces()
        .iter()
        .map(|h| h.violation(y))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct GridStats {
    pub checked: usize,
    pub banded: usize,
    pub mismatches: usize,
}

/// Compares `kernel` with the brute-force membership oracle on a uniform
/// grid of `per_axis` points per coordinate over the bounding box of `a`.
/// Grid points within `band` of the kernel boundary are skipped. For an
/// empty kernel every grid point must be rejected by the oracle.
pub fn grid_compare(
    a: &PointSet,
    n: usize,
    kernel: &Polytope,
    per_axis: usize,
    band: f64,
    lp_tol: f64,
) -> GridStats {
    let d = a.dim();
    let lo: Vec<f64> = (0..d)
        .map(|p| a.iter().map(|x| x.coords()[p]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..d)
        .map(|p| a.iter().map(|x| x.coords()[p]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let axis = |p: usize, i: usize| {
        if per_axis == 1 || hi[p] == lo[p] {
            lo[p]
        } else {
            lo[p] + (hi[p] - lo[p]) * i as f64 / (per_axis - 1) as f64
        }
    };
    let mut stats = GridStats::default();
    let total = per_axis.pow(d as u32);
    for idx in 0..total {
        let mut rest = idx;
        let y: Vec<f64> = (0..d)
            .map(|p| {
                let i = rest % per_axis;
                rest /= per_axis;
                axis(p, i)
            })
            .collect();
        let inside = if kernel.is_empty() {
            false
        } else {
            let v = max_violation(kernel, &y);
            if v.abs() <= band {
                stats.banded += 1;
                continue;
            }
            v < 0.0
        };
        let yp = Point::new(y).unwrap();
        let truth = kernel_membership_bruteforce(a.points(), n, &yp, lp_tol).unwrap();
        stats.checked += 1;
        if truth != inside {
            stats.mismatches += 1;
        }
    }
    stats
}

/// Every simple graph on `n` labeled nodes, by edge bitmask.
pub fn all_graphs(n: usize) -> impl Iterator<Item = Network> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let count = 1u64 << pairs.len();
    (0..count).map(move |mask| {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << b) != 0)
            .map(|(_, &e)| e)
            .collect();
        Network::new(n, &edges).unwrap()
    })
}

/// Nodes of `set` with at least `r` neighbors outside it, by plain set
/// arithmetic.
fn qualifying(g: &Network, set: &[usize], r: usize) -> usize {
    set.iter()
        .filter(|&&i| {
            g.neighbors(i)
                .unwrap()
                .iter()
                .filter(|j| !set.contains(j))
                .count()
                >= r
        })
        .count()
}

/// Every assignment of nodes to {neither, V1, V2} with both sides nonempty.
fn for_each_pair(g: &Network, mut f: impl FnMut(&[usize], &[usize]) -> bool) -> bool {
    let n = g.node_count();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let (mut v1, mut v2) = (Vec::new(), Vec::new());
        for i in 0..n {
            match c % 3 {
                1 => v1.push(i),
                2 => v2.push(i),
                _ => {}
            }
            c /= 3;
        }
        if !v1.is_empty() && !v2.is_empty() && !f(&v1, &v2) {
            return false;
        }
    }
    true
}

/// r-robustness straight from the definition, over ordered pairs.
pub fn oracle_r_robust(g: &Network, r: usize) -> bool {
    for_each_pair(g, |v1, v2| qualifying(g, v1, r) + qualifying(g, v2, r) >= 1)
}

pub fn oracle_rs_robust(g: &Network, r: usize, s: usize) -> bool {
    for_each_pair(g, |v1, v2| {
        let x1 = qualifying(g, v1, r);
        let x2 = qualifying(g, v2, r);
        x1 == v1.len() || x2 == v2.len() || x1 + x2 >= s
    })
}

/// Checks a claimed violating pair against the definition.
pub fn witness_is_sound(g: &Network, r: usize, v1: &[usize], v2: &[usize]) -> bool {
    !v1.is_empty()
        && !v2.is_empty()
        && v1.iter().all(|i| !v2.contains(i))
        && qualifying(g, v1, r) == 0
        && qualifying(g, v2, r) == 0
}

pub fn complete_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Random graph where every node in `benign` has at least `min_degree`
/// neighbors: start from `G(n, p)` and add random edges at deficient nodes.
pub fn random_graph(
    rng: &mut ChaCha8Rng,
    n: usize,
    p: f64,
    min_degree: usize,
    benign: &[usize],
) -> Vec<(usize, usize)> {
    let mut adj = vec![vec![false; n]; n];
    for (i, j) in complete_edges(n) {
        if rng.random_bool(p) {
            adj[i][j] = true;
            adj[j][i] = true;
        }
    }
    for &i in benign {
        loop {
            let deg = adj[i].iter().filter(|&&e| e).count();
            if deg >= min_degree {
                break;
            }
            let mut free: Vec<usize> = (0..n).filter(|&j| j != i && !adj[i][j]).collect();
            free.shuffle(rng);
            let j = free[0];
            adj[i][j] = true;
            adj[j][i] = true;
        }
    }
    complete_edges(n).into_iter().filter(|&(i, j)| adj[i][j]).collect()
}

fn num(v: f64) -> String {
    // Scripts accept plain decimals; negative values go through unary minus.
    format!("{v}")
}

/// A per-recipient adversary with values up to `scale` in magnitude:
/// either independent boxes per recipient or a distinct script per
/// recipient mixing constants, drift and oscillation.
pub fn byzantine_strategy(
    rng: &mut ChaCha8Rng,
    d: usize,
    recipients: &[usize],
    scale: f64,
) -> StrategySpec {
    if rng.random_bool(0.5) {
        let lo: Vec<f64> = (0..d).map(|_| -rng.random_range(0.0..scale)).collect();
        let hi: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..scale)).collect();
        StrategySpec::RandomBox {
            lo,
            hi,
            broadcast: false,
        }
    } else {
        let mut scripts = BTreeMap::new();
        for &r in recipients {
            let coords = (0..d)
                .map(|_| {
                    let a = rng.random_range(-scale..scale);
                    let b = rng.random_range(-10.0..10.0);
                    let w = rng.random_range(0.1..2.0);
                    match rng.random_range(0..3) {
                        0 => num(a),
                        1 => format!("{} + {} * k", num(a), num(b)),
                        _ => format!("{} * sin({} * k)", num(a), num(w)),
                    }
                })
                .collect();
            scripts.insert(r.to_string(), coords);
        }
        // An isolated faulty node still needs something to log.
        let default = scripts.is_empty().then(|| vec!["0".to_string(); d]);
        StrategySpec::PerRecipientScripted { scripts, default }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScenarioShape {
    pub nodes: usize,
    pub dim: usize,
    pub f: usize,
    pub model: AttackModel,
    pub faulty: usize,
    pub scale: f64,
    pub max_rounds: usize,
    pub edge_prob: f64,
}

/// Random valid scenario of the given shape. Faulty nodes are the first
/// `faulty` ids; for the local model the caller keeps `faulty <= f` so the
/// bound holds on any graph.
pub fn random_scenario(rng: &mut ChaCha8Rng, shape: ScenarioShape, seed: u64) -> ScenarioFile {
    let n = shape.nodes;
    let benign: Vec<usize> = (shape.faulty..n).collect();
    let need = (shape.dim + 1) * shape.f + 1;
    let edges = random_graph(rng, n, shape.edge_prob, need, &benign);
    let g = Network::new(n, &edges).unwrap();
    let mut faulty = BTreeMap::new();
    for node in 0..shape.faulty {
        let recipients: Vec<usize> = g.neighbors(node).unwrap().to_vec();
        faulty.insert(
            node.to_string(),
            byzantine_strategy(rng, shape.dim, &recipients, shape.scale),
        );
    }
    let initial = benign
        .iter()
        .map(|&i| {
            (
                i.to_string(),
                (0..shape.dim).map(|_| rng.random_range(-10.0..10.0)).collect(),
            )
        })
        .collect();
    ScenarioFile {
        nodes: n,
        edges,
        dim: shape.dim,
        f: shape.f,
        model: shape.model,
        faulty,
        initial,
        weights: WeightKind::Uniform,
        alpha: 1e-3,
        epsilon: 1e-6,
        max_rounds: shape.max_rounds,
        seed,
        tolerances: RunTolerances::default(),
    }
}
