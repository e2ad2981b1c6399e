use std::collections::BTreeMap;

use serde::Serialize;

use super::{hull_membership, OracleError};
use crate::engine::{Scenario, Terminal, Trajectory, FORMAT_VERSION};
use crate::geometry::Point;

/// Largest window used for contraction ratios.
pub const CONTRACTION_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// A solver failure kept the check from reaching a verdict.
    Error,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub status: Status,
    /// First failing round, if any.
    pub round: Option<usize>,
    pub failed_rounds: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverIssue {
    pub check: &'static str,
    pub round: usize,
    pub node: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementResult {
    pub status: Status,
    pub final_diameter: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub format_version: u32,
    pub config: serde_json::Value,
    pub rounds: usize,
    pub terminal: Terminal,
    /// Every benign state inside the hull of the benign round-0 states.
    pub validity: CheckResult,
    /// Every round-(k+1) benign state inside the round-k benign hull.
    pub nesting: CheckResult,
    pub agreement: AgreementResult,
    /// Convex weights on benign initial states reproducing the final point.
    pub gamma: Option<BTreeMap<usize, f64>>,
    pub diameters: Vec<f64>,
    pub window: usize,
    /// `diameter((j+1)W) / diameter(jW)` for each full window with a
    /// nonzero starting diameter.
    pub contraction: Vec<f64>,
    pub rho: Option<f64>,
    pub solver_errors: Vec<SolverIssue>,
    pub passed: bool,
}

fn check<'a>(
    name: &'static str,
    items: impl Iterator<Item = (usize, usize, &'a [Point], &'a Point)>,
    tol: f64,
    issues: &mut Vec<SolverIssue>,
) -> CheckResult {
    let mut failed = Vec::new();
    let mut errored = false;
    for (round, node, hull, y) in items {
        match hull_membership(hull, y, tol) {
            Ok(Some(_)) => {}
            Ok(None) => {
                if failed.last() != Some(&round) {
                    failed.push(round);
                }
            }
            Err(e) => {
                errored = true;
                issues.push(SolverIssue {
                    check: name,
                    round,
                    node,
                    message: e.to_string(),
                });
            }
        }
    }
    let status = if !failed.is_empty() {
        Status::Fail
    } else if errored {
        Status::Error
    } else {
        Status::Pass
    };
    CheckResult {
        status,
        round: failed.first().copied(),
        failed_rounds: failed,
    }
}

/// Windowed contraction ratios of a diameter series.
pub fn contraction_ratios(diameters: &[f64], window: usize) -> Vec<f64> {
    if window == 0 {
        return Vec::new();
    }
    (0..)
        .map(|j| (j * window, (j + 1) * window))
        .take_while(|&(_, b)| b < diameters.len())
        .filter(|&(a, _)| diameters[a] > 0.0)
        .map(|(a, b)| diameters[b] / diameters[a])
        .collect()
}

/// Validity, nesting and agreement checks on a recorded trajectory, all
/// through linear feasibility. Solver failures land in `solver_errors` and
/// mark the check as errored; they never count as violations.
pub fn audit_trajectory(traj: &Trajectory, scenario: &Scenario) -> Result<AuditReport, OracleError> {
    if traj.roles.len() != scenario.node_count() || traj.dim != scenario.dim {
        return Err(OracleError::InvalidArgument(format!(
            "trajectory has {} nodes in dimension {}, scenario has {} in dimension {}",
            traj.roles.len(),
            traj.dim,
            scenario.node_count(),
            scenario.dim
        )));
    }
    let tol = scenario.tolerances.audit;
    let benign = traj.benign_nodes();
    if benign.is_empty() {
        return Err(OracleError::InvalidArgument("no benign nodes to audit".into()));
    }
    let per_round: Vec<Vec<Point>> = (0..traj.rounds.len()).map(|r| traj.benign_states(r)).collect();
    let mut issues = Vec::new();

    let omega0 = per_round[0].as_slice();
    let validity = check(
        "validity",
        per_round.iter().enumerate().flat_map(|(r, pts)| {
            pts.iter()
                .zip(&benign)
                .map(move |(y, &i)| (traj.rounds[r].k, i, omega0, y))
        }),
        tol,
        &mut issues,
    );

    let nesting = check(
        "nesting",
        (1..per_round.len()).flat_map(|r| {
            let hull = per_round[r - 1].as_slice();
            per_round[r]
                .iter()
                .zip(&benign)
                .map(move |(y, &i)| (traj.rounds[r].k, i, hull, y))
        }),
        tol,
        &mut issues,
    );

    let last = traj.last();
    let agreement = AgreementResult {
        status: if last.benign_diameter < scenario.epsilon {
            Status::Pass
        } else {
            Status::NotApplicable
        },
        final_diameter: last.benign_diameter,
        epsilon: scenario.epsilon,
    };

    let mut gamma = None;
    let mut gamma_ok = true;
    if agreement.status == Status::Pass {
        let y = Point::new(traj.final_point()).map_err(|e| OracleError::InvalidArgument(e.to_string()))?;
        match hull_membership(omega0, &y, tol) {
            Ok(Some(cert)) => {
                gamma = Some(
                    benign
                        .iter()
                        .enumerate()
                        .map(|(j, &node)| (node, cert.weight(j)))
                        .collect(),
                );
            }
            Ok(None) => gamma_ok = false,
            Err(e) => {
                gamma_ok = false;
                issues.push(SolverIssue {
                    check: "gamma",
                    round: last.k,
                    node: benign[0],
                    message: e.to_string(),
                });
            }
        }
    }

    let diameters = traj.diameters();
    let window = CONTRACTION_WINDOW.min(last.k);
    let contraction = contraction_ratios(&diameters, window);
    let rho = contraction.iter().copied().reduce(f64::max);

    let passed = validity.status == Status::Pass
        && matches!(nesting.status, Status::Pass | Status::NotApplicable)
        && gamma_ok
        && issues.is_empty();

    Ok(AuditReport {
        format_version: FORMAT_VERSION,
        config: serde_json::to_value(&scenario.source).expect("scenario serializes"),
        rounds: last.k,
        terminal: traj.terminal,
        validity,
        nesting,
        agreement,
        gamma,
        diameters,
        window,
        contraction,
        rho,
        solver_errors: issues,
        passed,
    })
}
