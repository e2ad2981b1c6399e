use std::io::{Read, Write};

use serde::Serialize;
use serde_json::{json, Value};

use super::{diameter, EngineError, Scenario};
use crate::geometry::{convex_hull, Point, PointSet};

/// Version stamp written into every JSON artifact.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Benign,
    Faulty,
}

impl Role {
    fn as_str(self) -> &'static str {
        match self {
            Role::Benign => "benign",
            Role::Faulty => "faulty",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Terminal {
    Converged,
    RoundLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub k: usize,
    /// Indexed by node.
    pub states: Vec<Point>,
    /// Per node; `None` for faulty nodes, for round 0, and after a CSV
    /// round trip.
    pub kernel_vertices: Vec<Option<usize>>,
    pub benign_diameter: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dim: usize,
    pub roles: Vec<Role>,
    pub rounds: Vec<RoundRecord>,
    pub terminal: Terminal,
}

impl Trajectory {
    pub(crate) fn new(scenario: &Scenario, rounds: Vec<RoundRecord>, terminal: Terminal) -> Self {
        Self {
            dim: scenario.dim,
            roles: roles(scenario),
            rounds,
            terminal,
        }
    }

    pub fn benign_nodes(&self) -> Vec<usize> {
        (0..self.roles.len()).filter(|&i| self.roles[i] == Role::Benign).collect()
    }

    /// Benign states of round index `r` (position in `rounds`).
    pub fn benign_states(&self, r: usize) -> Vec<Point> {
        self.benign_nodes()
            .into_iter()
            .map(|i| self.rounds[r].states[i].clone())
            .collect()
    }

    pub fn last(&self) -> &RoundRecord {
        self.rounds.last().expect("trajectory has round 0")
    }

    /// Mean of the final benign states.
    pub fn final_point(&self) -> Vec<f64> {
        let benign = self.benign_states(self.rounds.len() - 1);
        let mut mean = vec![0.0; self.dim];
        for p in &benign {
            for (m, c) in mean.iter_mut().zip(p.coords()) {
                *m += c;
            }
        }
        let n = benign.len().max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    pub fn diameters(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.benign_diameter).collect()
    }
}

fn roles(scenario: &Scenario) -> Vec<Role> {
    (0..scenario.node_count())
        .map(|i| if scenario.is_faulty(i) { Role::Faulty } else { Role::Benign })
        .collect()
}

fn csv_err(e: csv::Error) -> EngineError {
    match e.kind() {
        csv::ErrorKind::Io(_) => EngineError::Io(e.to_string()),
        _ => EngineError::Parse(e.to_string()),
    }
}

/// CSV with header `k,agent,role,x_0,...,x_{d-1}`, one row per node per
/// round. Coordinates use the shortest decimal form that parses back to
/// the same `f64`.
pub fn write_csv<W: Write>(traj: &Trajectory, out: W) -> Result<(), EngineError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k".to_string(), "agent".into(), "role".into()];
    header.extend((0..traj.dim).map(|p| format!("x_{p}")));
    w.write_record(&header).map_err(csv_err)?;
    for r in &traj.rounds {
        for (i, s) in r.states.iter().enumerate() {
            let mut row = vec![r.k.to_string(), i.to_string(), traj.roles[i].as_str().to_string()];
            row.extend(s.coords().iter().map(|c| c.to_string()));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| EngineError::Io(e.to_string()))
}

fn mismatch(message: String) -> EngineError {
    EngineError::invalid("trajectory", message)
}

/// Reads a CSV written by [`write_csv`] and checks it against `scenario`:
/// same dimension, same node set and roles, rounds `0, 1, ...` in order.
/// The terminal state is re-derived from the last benign diameter.
pub fn read_csv<R: Read>(input: R, scenario: &Scenario) -> Result<Trajectory, EngineError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let mut expected = vec!["k".to_string(), "agent".into(), "role".into()];
    expected.extend((0..scenario.dim).map(|p| format!("x_{p}")));
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(mismatch(format!(
            "header {:?} does not match dimension {} (expected {:?})",
            header.iter().collect::<Vec<_>>(),
            scenario.dim,
            expected
        )));
    }
    let n = scenario.node_count();
    let roles = roles(scenario);
    let benign = scenario.benign_nodes();
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut current: Vec<Point> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = line + 2;
        let num = |idx: usize| -> Result<&str, EngineError> {
            rec.get(idx).ok_or_else(|| EngineError::Parse(format!("row {row}: missing column {idx}")))
        };
        let k: usize = num(0)?
            .parse()
            .map_err(|_| EngineError::Parse(format!("row {row}: bad round index {:?}", &rec[0])))?;
        let agent: usize = num(1)?
            .parse()
            .map_err(|_| EngineError::Parse(format!("row {row}: bad agent id {:?}", &rec[1])))?;
        let want_k = rounds.len();
        if k != want_k || agent != current.len() {
            return Err(mismatch(format!(
                "row {row}: expected round {want_k} agent {}, found round {k} agent {agent}",
                current.len()
            )));
        }
        if agent >= n {
            return Err(mismatch(format!("row {row}: agent {agent} not in a {n}-node network")));
        }
        if num(2)? != roles[agent].as_str() {
            return Err(mismatch(format!(
                "row {row}: agent {agent} is {} in the scenario, {:?} in the file",
                roles[agent].as_str(),
                &rec[2]
            )));
        }
        let coords = (0..scenario.dim)
            .map(|p| {
                num(3 + p)?
                    .parse::<f64>()
                    .map_err(|_| EngineError::Parse(format!("row {row}: bad coordinate {:?}", &rec[3 + p])))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        current.push(Point::new(coords).map_err(|e| EngineError::Parse(format!("row {row}: {e}")))?);
        if current.len() == n {
            let states = std::mem::take(&mut current);
            rounds.push(RoundRecord {
                k,
                benign_diameter: diameter(benign.iter().map(|&i| &states[i])),
                kernel_vertices: vec![None; n],
                states,
            });
        }
    }
    if !current.is_empty() {
        return Err(mismatch(format!(
            "round {} has {} of {n} agents",
            rounds.len(),
            current.len()
        )));
    }
    let Some(last) = rounds.last() else {
        return Err(mismatch("no rows".into()));
    };
    let terminal = if last.benign_diameter < scenario.epsilon {
        Terminal::Converged
    } else {
        Terminal::RoundLimit
    };
    Ok(Trajectory {
        dim: scenario.dim,
        roles,
        rounds,
        terminal,
    })
}

/// Summary JSON: terminal state, final diameter and point, per-round
/// diameters, and the resolved configuration.
pub fn summary(traj: &Trajectory, scenario: &Scenario) -> Value {
    let counts: Vec<Vec<Option<usize>>> = traj
        .rounds
        .iter()
        .map(|r| traj.benign_nodes().iter().map(|&i| r.kernel_vertices[i]).collect())
        .collect();
    json!({
        "format_version": FORMAT_VERSION,
        "config": scenario.source,
        "terminal": traj.terminal,
        "rounds": traj.last().k,
        "final_diameter": traj.last().benign_diameter,
        "final_point": traj.final_point(),
        "diameters": traj.diameters(),
        "benign_nodes": traj.benign_nodes(),
        "kernel_vertex_counts": counts,
    })
}

/// Plot data: hull vertices of the benign initial states plus one
/// polyline per agent.
pub fn plot_data(traj: &Trajectory, scenario: &Scenario) -> Result<Value, EngineError> {
    let initial = PointSet::with_dim(traj.dim, traj.benign_states(0))?;
    let hull = convex_hull(&initial, &scenario.tolerances.geometry())?;
    let agents: Vec<Value> = (0..traj.roles.len())
        .map(|i| {
            let pts: Vec<&[f64]> = traj.rounds.iter().map(|r| r.states[i].coords()).collect();
            json!({ "agent": i, "role": traj.roles[i], "points": pts })
        })
        .collect();
    Ok(json!({
        "format_version": FORMAT_VERSION,
        "config": scenario.source,
        "omega0": hull.vertices(),
        "agents": agents,
    }))
}
