//! Communication network, fault sets, and exhaustive robustness checks.
//!
//! Robustness is decided by brute force over every unordered pair of
//! disjoint nonempty node subsets, which is `O(3^N)`; the checkers refuse
//! graphs above a configurable node cap instead of approximating.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node {node} (network has {nodes} nodes)")]
    UnknownNode { node: usize, nodes: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("network with {nodes} nodes exceeds the exhaustive-check cap of {cap}")]
    UnsupportedSize { nodes: usize, cap: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Undirected simple graph on nodes `0..N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    adjacency: Vec<Vec<usize>>,
}

impl Network {
    pub fn new(node_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut sets = vec![BTreeSet::new(); node_count];
        for &(i, j) in edges {
            for node in [i, j] {
                if node >= node_count {
                    return Err(GraphError::UnknownNode {
                        node,
                        nodes: node_count,
                    });
                }
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            sets[i].insert(j);
            sets[j].insert(i);
        }
        Ok(Self {
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    pub fn complete(node_count: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..node_count)
            .flat_map(|i| (i + 1..node_count).map(move |j| (i, j)))
            .collect();
        Self::new(node_count, &edges).expect("complete graph edges are valid")
    }

    pub fn path(node_count: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..node_count).map(|i| (i - 1, i)).collect();
        Self::new(node_count, &edges).expect("path edges are valid")
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Edges as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }

    /// Adjacent nodes of `i`, sorted, never including `i`.
    pub fn neighbors(&self, i: usize) -> Result<&[usize], GraphError> {
        self.adjacency
            .get(i)
            .map(Vec::as_slice)
            .ok_or(GraphError::UnknownNode {
                node: i,
                nodes: self.node_count(),
            })
    }

    pub fn degree(&self, i: usize) -> Result<usize, GraphError> {
        self.neighbors(i).map(<[usize]>::len)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// JSON graph file: `{"nodes": N, "edges": [[i, j], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl TryFrom<&GraphFile> for Network {
    type Error = GraphError;

    fn try_from(f: &GraphFile) -> Result<Self, Self::Error> {
        Network::new(f.nodes, &f.edges)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackModel {
    /// At most `F` faulty nodes in the whole network.
    Total,
    /// At most `F` faulty nodes among the neighbors of any benign node.
    Local,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultSet {
    pub members: BTreeSet<usize>,
    pub bound: usize,
    pub model: AttackModel,
}

impl FaultSet {
    pub fn new(members: impl IntoIterator<Item = usize>, bound: usize, model: AttackModel) -> Self {
        Self {
            members: members.into_iter().collect(),
            bound,
            model,
        }
    }

    pub fn is_faulty(&self, node: usize) -> bool {
        self.members.contains(&node)
    }
}

/// Checks the fault-set bound for its attack model.
pub fn validate_fault_set(g: &Network, fs: &FaultSet) -> Result<bool, GraphError> {
    if let Some(&node) = fs.members.iter().find(|&&m| m >= g.node_count()) {
        return Err(GraphError::UnknownNode {
            node,
            nodes: g.node_count(),
        });
    }
    Ok(match fs.model {
        AttackModel::Total => fs.members.len() <= fs.bound,
        AttackModel::Local => (0..g.node_count())
            .filter(|i| !fs.is_faulty(*i))
            .all(|i| g.adjacency[i].iter().filter(|j| fs.is_faulty(**j)).count() <= fs.bound),
    })
}

/// Per node: does `|N_i| >= (d+1)F + 1` hold?
pub fn check_degree_assumption(g: &Network, d: usize, f: usize) -> Vec<bool> {
    let need = (d + 1) * f + 1;
    g.adjacency.iter().map(|ns| ns.len() >= need).collect()
}

/// Knobs for the exhaustive robustness checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RobustnessOptions {
    /// Read r-robustness literally as "more than one agent" with `r`
    /// outside neighbors, instead of the usual "at least one".
    pub strict: bool,
    /// Largest node count the exhaustive search accepts.
    pub max_nodes: usize,
}

impl Default for RobustnessOptions {
    fn default() -> Self {
        Self {
            strict: false,
            max_nodes: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RobustnessReport {
    pub r: usize,
    pub s: Option<usize>,
    pub verdict: bool,
    /// Violating pair `(V1, V2)` when the verdict is false.
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
}

fn masks(g: &Network) -> Vec<u64> {
    g.adjacency
        .iter()
        .map(|ns| ns.iter().fold(0u64, |m, &j| m | (1 << j)))
        .collect()
}

fn members(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask & (1 << i) != 0).collect()
}

/// Nodes of `set` with at least `r` neighbors outside `set`.
fn reachable_count(adj: &[u64], set: u64, r: usize) -> usize {
    let mut count = 0;
    let mut rest = set;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if (adj[v] & !set).count_ones() as usize >= r {
            count += 1;
        }
    }
    count
}

/// Visits every unordered pair of disjoint nonempty subsets, in a fixed
/// order, returning the first pair for which `violates` holds.
fn find_violation(
    g: &Network,
    opts: &RobustnessOptions,
    violates: impl Fn(&[u64], u64, u64) -> bool,
) -> Result<Option<(u64, u64)>, GraphError> {
    let n = g.node_count();
    if n < 2 {
        return Err(GraphError::InvalidArgument(
            "robustness needs at least two nodes".into(),
        ));
    }
    if n > opts.max_nodes || n > 63 {
        return Err(GraphError::UnsupportedSize {
            nodes: n,
            cap: opts.max_nodes.min(63),
        });
    }
    let adj = masks(g);
    let full: u64 = (1 << n) - 1;
    for v1 in 1..=full {
        let rest = full & !v1;
        let v1_low = v1.trailing_zeros();
        // Submasks of the complement in increasing order; keep V2 only when
        // its lowest node is above V1's so each unordered pair is seen once.
        let mut v2 = rest.wrapping_neg() & rest;
        while v2 != 0 {
            if v2.trailing_zeros() > v1_low && violates(&adj, v1, v2) {
                return Ok(Some((v1, v2)));
            }
            v2 = v2.wrapping_sub(rest) & rest;
        }
    }
    Ok(None)
}

fn report(r: usize, s: Option<usize>, found: Option<(u64, u64)>) -> RobustnessReport {
    RobustnessReport {
        r,
        s,
        verdict: found.is_none(),
        witness: found.map(|(a, b)| (members(a), members(b))),
    }
}

/// Exhaustive r-robustness check.
pub fn is_r_robust(
    g: &Network,
    r: usize,
    opts: &RobustnessOptions,
) -> Result<RobustnessReport, GraphError> {
    let need = if opts.strict { 2 } else { 1 };
    let found = find_violation(g, opts, |adj, v1, v2| {
        reachable_count(adj, v1, r) < need && reachable_count(adj, v2, r) < need
    })?;
    Ok(report(r, None, found))
}

/// Exhaustive (r, s)-robustness check. A pair passes if every node of `V1`
/// reaches `r` outside neighbors, or every node of `V2` does, or at least
/// `s` nodes across both do.
pub fn is_rs_robust(
    g: &Network,
    r: usize,
    s: usize,
    opts: &RobustnessOptions,
) -> Result<RobustnessReport, GraphError> {
    if s == 0 {
        return Err(GraphError::InvalidArgument("s must be at least 1".into()));
    }
    let found = find_violation(g, opts, |adj, v1, v2| {
        let x1 = reachable_count(adj, v1, r);
        let x2 = reachable_count(adj, v2, r);
        x1 < v1.count_ones() as usize && x2 < v2.count_ones() as usize && x1 + x2 < s
    })?;
    Ok(report(r, Some(s), found))
}
