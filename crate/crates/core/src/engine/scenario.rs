use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adversary::{AdversaryStrategy, StrategySpec};
use super::weights::{WeightKind, WeightPolicy, DEFAULT_ALPHA};
use super::EngineError;
use crate::geometry::{Point, Tolerances};
use crate::graph::{validate_fault_set, AttackModel, FaultSet, Network};

fn default_model() -> AttackModel {
    AttackModel::Total
}
fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_epsilon() -> f64 {
    1e-6
}
fn default_max_rounds() -> usize {
    10_000
}

/// Every tolerance a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunTolerances {
    pub geom: f64,
    pub vertex: f64,
    /// Linear-feasibility residual for hull membership.
    pub lp: f64,
    /// Membership slack used by trajectory audits.
    pub audit: f64,
}

impl Default for RunTolerances {
    fn default() -> Self {
        let g = Tolerances::default();
        Self {
            geom: g.geom,
            vertex: g.vertex,
            lp: 1e-8,
            audit: 1e-6,
        }
    }
}

impl RunTolerances {
    pub fn geometry(&self) -> Tolerances {
        Tolerances {
            geom: self.geom,
            vertex: self.vertex,
        }
    }
}

/// Scenario JSON as written on disk. Node ids in `faulty` and `initial`
/// are JSON object keys, hence strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub dim: usize,
    #[serde(rename = "F")]
    pub f: usize,
    #[serde(default = "default_model")]
    pub model: AttackModel,
    #[serde(default)]
    pub faulty: BTreeMap<String, StrategySpec>,
    pub initial: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub weights: WeightKind,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: RunTolerances,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self, EngineError> {
        serde_json::from_str(text).map_err(|e| EngineError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EngineError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            EngineError::Parse(m) => EngineError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

fn parse_node(field: &str, key: &str, nodes: usize) -> Result<usize, EngineError> {
    match key.parse::<usize>() {
        Ok(i) if i < nodes => Ok(i),
        Ok(i) => Err(EngineError::invalid(
            format!("{field}.{key}"),
            format!("node {i} does not exist (network has {nodes} nodes)"),
        )),
        Err(_) => Err(EngineError::invalid(
            field,
            format!("key {key:?} is not a node id"),
        )),
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: Network,
    pub dim: usize,
    pub fault_set: FaultSet,
    pub strategies: BTreeMap<usize, AdversaryStrategy>,
    /// Indexed by node. Required for benign nodes, optional for faulty ones.
    pub initial: Vec<Option<Point>>,
    pub weights: WeightPolicy,
    pub epsilon: f64,
    pub max_rounds: usize,
    pub seed: u64,
    pub tolerances: RunTolerances,
    /// The file this was built from, echoed into outputs.
    pub source: ScenarioFile,
}

impl Scenario {
    pub fn from_file(file: ScenarioFile) -> Result<Self, EngineError> {
        if file.nodes == 0 {
            return Err(EngineError::invalid("nodes", "must be at least 1"));
        }
        if file.dim == 0 {
            return Err(EngineError::invalid("dim", "must be at least 1"));
        }
        if file.epsilon.is_nan() || file.epsilon <= 0.0 {
            return Err(EngineError::invalid("epsilon", format!("must be positive, got {}", file.epsilon)));
        }
        let t = &file.tolerances;
        for (name, v) in [("geom", t.geom), ("vertex", t.vertex), ("lp", t.lp), ("audit", t.audit)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(EngineError::invalid(
                    format!("tolerances.{name}"),
                    format!("must be positive, got {v}"),
                ));
            }
        }
        let network = Network::new(file.nodes, &file.edges)
            .map_err(|e| EngineError::invalid("edges", e.to_string()))?;
        let weights = WeightPolicy::new(file.weights, file.alpha)?;

        let mut faulty = BTreeMap::new();
        for (key, spec) in &file.faulty {
            faulty.insert(parse_node("faulty", key, file.nodes)?, spec);
        }
        let fault_set = FaultSet::new(faulty.keys().copied(), file.f, file.model);
        let model = match file.model {
            AttackModel::Total => "total",
            AttackModel::Local => "local",
        };
        if !validate_fault_set(&network, &fault_set).map_err(|e| EngineError::invalid("faulty", e.to_string()))? {
            return Err(EngineError::invalid(
                "faulty",
                format!(
                    "fault set {:?} exceeds F = {} under the {model} model",
                    fault_set.members, file.f
                ),
            ));
        }

        let mut initial = vec![None; file.nodes];
        for (key, coords) in &file.initial {
            let i = parse_node("initial", key, file.nodes)?;
            if coords.len() != file.dim {
                return Err(EngineError::invalid(
                    format!("initial.{key}"),
                    format!("has {} coordinates, scenario dimension is {}", coords.len(), file.dim),
                ));
            }
            let p = Point::new(coords.clone())
                .map_err(|e| EngineError::invalid(format!("initial.{key}"), e.to_string()))?;
            initial[i] = Some(p);
        }
        if let Some(i) = (0..file.nodes).find(|&i| !fault_set.is_faulty(i) && initial[i].is_none()) {
            return Err(EngineError::invalid(
                "initial",
                format!("benign node {i} has no initial state"),
            ));
        }

        let need = (file.dim + 1) * file.f + 1;
        for i in (0..file.nodes).filter(|&i| !fault_set.is_faulty(i)) {
            let deg = network.degree(i).expect("node in range");
            if deg < need {
                return Err(EngineError::invalid(
                    "edges",
                    format!(
                        "benign node {i} has {deg} neighbors; (d+1)F+1 = {need} required for d = {}, F = {}",
                        file.dim, file.f
                    ),
                ));
            }
        }

        let mut strategies = BTreeMap::new();
        for (&node, spec) in &faulty {
            let field = format!("faulty.{node}");
            let s = AdversaryStrategy::compile(spec, file.dim, &field)?;
            let recipients: Vec<usize> = network
                .neighbors(node)
                .expect("node in range")
                .iter()
                .copied()
                .filter(|&j| !fault_set.is_faulty(j))
                .collect();
            s.check_rounds(node, &recipients, file.max_rounds, &field)?;
            strategies.insert(node, s);
        }

        Ok(Self {
            network,
            dim: file.dim,
            fault_set,
            strategies,
            initial,
            weights,
            epsilon: file.epsilon,
            max_rounds: file.max_rounds,
            seed: file.seed,
            tolerances: file.tolerances,
            source: file,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, EngineError> {
        Self::from_file(ScenarioFile::from_json(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, EngineError> {
        Self::from_file(ScenarioFile::load(path)?)
    }

    pub fn node_count(&self) -> usize {
        self.network.node_count()
    }

    pub fn is_faulty(&self, node: usize) -> bool {
        self.fault_set.is_faulty(node)
    }

    pub fn benign_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| !self.is_faulty(i)).collect()
    }

    /// Message faulty `node` sends `recipient` in round `k`. In round 0 a
    /// faulty node with a configured initial state sends that state.
    pub fn message(&self, node: usize, recipient: usize, k: usize) -> Result<Point, EngineError> {
        if k == 0 {
            if let Some(p) = &self.initial[node] {
                return Ok(p.clone());
            }
        }
        self.strategies[&node].emit(k, node, recipient, self.seed)
    }

    /// State logged for faulty `node` at round `k`: the broadcast value, or
    /// the mean over its benign recipients for per-recipient strategies.
    /// Without benign recipients, the message to
    /// [`AdversaryStrategy::idle_recipient`].
    pub fn logged_state(&self, node: usize, k: usize) -> Result<Point, EngineError> {
        let strategy = &self.strategies[&node];
        let recipients: Vec<usize> = self
            .network
            .neighbors(node)
            .expect("node in range")
            .iter()
            .copied()
            .filter(|&j| !self.is_faulty(j))
            .collect();
        if (k == 0 && self.initial[node].is_some()) || strategy.is_broadcast() || recipients.is_empty() {
            let to = recipients
                .first()
                .copied()
                .unwrap_or_else(|| strategy.idle_recipient(node));
            return self.message(node, to, k);
        }
        let mut sum = vec![0.0; self.dim];
        for &r in &recipients {
            for (s, c) in sum.iter_mut().zip(self.message(node, r, k)?.coords()) {
                *s += c;
            }
        }
        let n = recipients.len() as f64;
        Point::new(sum.into_iter().map(|s| s / n).collect())
            .map_err(|e| EngineError::Script(format!("round {k}, node {node}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLANAR: &str = r#"{
        "nodes": 5,
        "edges": [[0,1],[0,2],[0,3],[0,4],[1,2],[1,3],[1,4],[2,3],[2,4],[3,4]],
        "dim": 2, "F": 1, "model": "total",
        "faulty": {"0": {"kind": "scripted", "coords": ["1.5*sin(k/5)", "k/25+1"]}},
        "initial": {"1": [1,2], "2": [2,0], "3": [1,3], "4": [2,4]},
        "weights": {"kind": "uniform"}
    }"#;

    fn with(edit: impl FnOnce(&mut serde_json::Value)) -> Result<Scenario, EngineError> {
        let mut v: serde_json::Value = serde_json::from_str(PLANAR).unwrap();
        edit(&mut v);
        Scenario::from_json(&v.to_string())
    }

    #[test]
    fn planar_scenario_loads_with_defaults() {
        let s = Scenario::from_json(PLANAR).unwrap();
        assert_eq!(s.benign_nodes(), vec![1, 2, 3, 4]);
        assert_eq!(s.epsilon, 1e-6);
        assert_eq!(s.max_rounds, 10_000);
        assert_eq!(s.tolerances, RunTolerances::default());
        assert_eq!(s.message(0, 1, 0).unwrap().coords(), &[0.0, 1.0]);
        assert_eq!(s.logged_state(0, 0).unwrap().coords(), &[0.0, 1.0]);
    }

    #[test]
    fn path_graph_fails_degree_check() {
        let err = with(|v| {
            v["nodes"] = 3.into();
            v["edges"] = serde_json::json!([[0, 1], [1, 2]]);
            v["faulty"] = serde_json::json!({});
            v["initial"] = serde_json::json!({"0": [0, 0], "1": [1, 0], "2": [0, 1]});
        })
        .unwrap_err();
        assert!(err.to_string().contains("benign node 0"), "{err}");
    }

    #[test]
    fn too_many_faults_rejected() {
        let err = with(|v| {
            v["faulty"]["1"] = serde_json::json!({"kind": "constant", "value": [0, 0]});
        })
        .unwrap_err();
        assert!(matches!(err, EngineError::Invalid { ref field, .. } if field == "faulty"));
    }

    #[test]
    fn local_model_rejects_surrounded_node() {
        // Node 0 has four neighbors, all faulty.
        let err = with(|v| {
            v["model"] = "local".into();
            v["faulty"] = serde_json::json!({
                "1": {"kind": "constant", "value": [0, 0]},
                "2": {"kind": "constant", "value": [0, 0]},
                "3": {"kind": "constant", "value": [0, 0]},
                "4": {"kind": "constant", "value": [0, 0]}
            });
            v["initial"] = serde_json::json!({"0": [0, 0]});
        })
        .unwrap_err();
        assert!(matches!(err, EngineError::Invalid { ref field, .. } if field == "faulty"));
    }

    #[test]
    fn initial_state_problems() {
        assert!(with(|v| v["initial"]["1"] = serde_json::json!([1])).is_err());
        assert!(with(|v| {
            v["initial"].as_object_mut().unwrap().remove("3");
        })
        .unwrap_err()
        .to_string()
        .contains("benign node 3"));
        assert!(with(|v| v["initial"]["9"] = serde_json::json!([0, 0])).is_err());
    }

    #[test]
    fn parse_errors_are_distinct() {
        assert!(matches!(Scenario::from_json("{"), Err(EngineError::Parse(_))));
        assert!(matches!(
            Scenario::from_json(r#"{"nodes": 1, "bogus": 2}"#),
            Err(EngineError::Parse(_))
        ));
        assert!(matches!(
            with(|v| v["faulty"]["0"]["coords"] = serde_json::json!(["k", "x"])),
            Err(EngineError::Invalid { .. })
        ));
    }

    #[test]
    fn per_recipient_logged_state_is_the_mean() {
        let s = with(|v| {
            v["faulty"]["0"] = serde_json::json!({
                "kind": "per-recipient-scripted",
                "scripts": {"1": ["4", "0"], "2": ["0", "4"]},
                "default": ["0", "0"]
            });
        })
        .unwrap();
        assert_eq!(s.logged_state(0, 1).unwrap().coords(), &[1.0, 1.0]);
    }

    #[test]
    fn isolated_faulty_node_logs_lowest_script() {
        let s = with(|v| {
            v["nodes"] = 6.into();
            v["faulty"] = serde_json::json!({"5": {
                "kind": "per-recipient-scripted",
                "scripts": {"3": ["7", "k"], "1": ["2", "2"]}
            }});
            v["initial"]["0"] = serde_json::json!([0, 0]);
        })
        .unwrap();
        assert_eq!(s.logged_state(5, 3).unwrap().coords(), &[2.0, 2.0]);
    }
}
