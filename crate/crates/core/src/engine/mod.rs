//! Synchronous-round simulation of the safe-kernel consensus protocol.
//!
//! Every round, each benign node collects the values its neighbors sent,
//! computes the safe kernel of that multiset with `F` removals, and moves
//! to a convex combination of its own state and the kernel vertices.
//! Faulty nodes send whatever their strategy dictates, possibly a
//! different value to each neighbor.

pub mod adversary;
pub mod expr;
mod scenario;
mod trajectory;
mod weights;

use thiserror::Error;

use crate::geometry::{safe_kernel, GeometryError, Point, PointSet, Polytope, Tolerances};

pub use adversary::{AdversaryStrategy, StrategySpec};
pub use scenario::{RunTolerances, Scenario, ScenarioFile};
pub use trajectory::{
    plot_data, read_csv, summary, write_csv, Role, RoundRecord, Terminal, Trajectory,
    FORMAT_VERSION,
};
pub use weights::{WeightKind, WeightPolicy, DEFAULT_ALPHA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },
    #[error("script error: {0}")]
    Script(String),
    #[error("weight policy: {0}")]
    Weight(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate kernel: empty intersection from {neighbors} neighbor values with F = {f} ({detail})")]
    DegenerateKernel {
        neighbors: usize,
        f: usize,
        detail: String,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("node {node}, round {round}: {source}")]
    Round {
        node: usize,
        round: usize,
        source: Box<EngineError>,
    },
}

impl EngineError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        EngineError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Result of one benign update.
#[derive(Debug, Clone)]
pub struct Update {
    pub state: Point,
    pub kernel: Polytope,
}

/// One application of the update rule to a node holding `own` that
/// received `neighbor_values` (own state excluded).
pub fn benign_update(
    own: &Point,
    neighbor_values: &PointSet,
    f: usize,
    policy: &WeightPolicy,
    tol: &Tolerances,
) -> Result<Update, EngineError> {
    let d = own.dim();
    if neighbor_values.dim() != d {
        return Err(GeometryError::DimensionMismatch {
            expected: d,
            found: neighbor_values.dim(),
        }
        .into());
    }
    let m = neighbor_values.cardinality();
    let need = (d + 1) * f + 1;
    if m < need {
        return Err(EngineError::Precondition(format!(
            "{m} neighbor values, (d+1)F+1 = {need} required"
        )));
    }
    let kernel = safe_kernel(neighbor_values, f, tol)?;
    if kernel.is_empty() {
        let values: Vec<&[f64]> = neighbor_values.iter().map(Point::coords).collect();
        return Err(EngineError::DegenerateKernel {
            neighbors: m,
            f,
            detail: format!("values {values:?}, tol_geom {}, tol_vertex {}", tol.geom, tol.vertex),
        });
    }
    let (w_self, ws) = policy.weights(kernel.vertices().len())?;
    let mut x: Vec<f64> = own.coords().iter().map(|c| w_self * c).collect();
    for (w, v) in ws.iter().zip(kernel.vertices()) {
        for (xi, vi) in x.iter_mut().zip(v.coords()) {
            *xi += w * vi;
        }
    }
    let state = Point::new(x)?;
    Ok(Update { state, kernel })
}

/// Largest pairwise Euclidean distance; 0 for zero or one point.
pub fn diameter<'a>(states: impl IntoIterator<Item = &'a Point>) -> f64 {
    let pts: Vec<&Point> = states.into_iter().collect();
    let mut best = 0.0f64;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            best = best.max(a.distance(b));
        }
    }
    best
}

/// Output of [`run_round`].
#[derive(Debug, Clone)]
pub struct RoundStep {
    pub states: Vec<Point>,
    /// Kernel vertex count per node; `None` for faulty nodes.
    pub kernel_vertices: Vec<Option<usize>>,
}

/// Round `k` to `k + 1`. All messages are computed from the round-`k`
/// states before any node updates.
pub fn run_round(scenario: &Scenario, states: &[Point], k: usize) -> Result<RoundStep, EngineError> {
    let n = scenario.node_count();
    if states.len() != n {
        return Err(EngineError::Precondition(format!(
            "{} states for {n} nodes",
            states.len()
        )));
    }
    let tol = scenario.tolerances.geometry();
    let annotate = |node: usize, round: usize| {
        move |e: EngineError| EngineError::Round {
            node,
            round,
            source: Box::new(e),
        }
    };

    let mut next = Vec::with_capacity(n);
    let mut counts = Vec::with_capacity(n);
    for i in 0..n {
        if scenario.is_faulty(i) {
            next.push(scenario.logged_state(i, k + 1).map_err(annotate(i, k + 1))?);
            counts.push(None);
            continue;
        }
        let neighbors = scenario.network.neighbors(i).expect("node in range");
        let mut received = Vec::with_capacity(neighbors.len());
        for &j in neighbors {
            received.push(if scenario.is_faulty(j) {
                scenario.message(j, i, k).map_err(annotate(j, k))?
            } else {
                states[j].clone()
            });
        }
        let values = PointSet::with_dim(scenario.dim, received).map_err(|e| annotate(i, k)(e.into()))?;
        let up = benign_update(&states[i], &values, scenario.fault_set.bound, &scenario.weights, &tol)
            .map_err(annotate(i, k))?;
        counts.push(Some(up.kernel.vertices().len()));
        next.push(up.state);
    }
    Ok(RoundStep {
        states: next,
        kernel_vertices: counts,
    })
}

/// Round-0 states: configured initial values, or the faulty node's
/// logged round-0 emission where none is given.
pub fn initial_states(scenario: &Scenario) -> Result<Vec<Point>, EngineError> {
    (0..scenario.node_count())
        .map(|i| match &scenario.initial[i] {
            Some(p) => Ok(p.clone()),
            None => scenario.logged_state(i, 0),
        })
        .collect()
}

/// Runs until the benign diameter drops below `epsilon` or `max_rounds`
/// rounds have been executed.
pub fn simulate(scenario: &Scenario) -> Result<Trajectory, EngineError> {
    let benign = scenario.benign_nodes();
    let bdiam = |states: &[Point]| diameter(benign.iter().map(|&i| &states[i]));
    let states = initial_states(scenario)?;
    let mut rounds = vec![RoundRecord {
        k: 0,
        benign_diameter: bdiam(&states),
        kernel_vertices: vec![None; states.len()],
        states,
    }];
    loop {
        let last = rounds.last().expect("at least round 0");
        if last.benign_diameter < scenario.epsilon {
            return Ok(Trajectory::new(scenario, rounds, Terminal::Converged));
        }
        if last.k >= scenario.max_rounds {
            return Ok(Trajectory::new(scenario, rounds, Terminal::RoundLimit));
        }
        let k = last.k;
        let step = run_round(scenario, &last.states, k)?;
        rounds.push(RoundRecord {
            k: k + 1,
            benign_diameter: bdiam(&step.states),
            kernel_vertices: step.kernel_vertices,
            states: step.states,
        });
    }
}
