use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_safe-kernel");

fn scenario_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/five_agent_planar.json")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn simulate_bundled_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["simulate", scenario_path().to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["terminal"], "converged");
    assert!(summary["final_diameter"].as_f64().unwrap() < 1e-6);
    let plot: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("plot.json")).unwrap()).unwrap();
    assert!(plot.is_object());
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("k,agent,role,x_0,x_1"));
}

#[test]
fn simulate_rejects_sparse_graph() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(&fs::read_to_string(scenario_path()).unwrap()).unwrap();
    v["edges"] = serde_json::json!([[0, 1], [1, 2], [2, 3], [3, 4]]);
    let path = write(dir.path(), "path.json", &v.to_string());
    let out = run(&["simulate", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("neighbors"));
}

#[test]
fn simulate_round_limit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["simulate", scenario_path().to_str().unwrap(), "--out", d, "--max_rounds", "1"]);
    assert_eq!(code(&out), 3);
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let rounds: std::collections::BTreeSet<&str> =
        csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(rounds.into_iter().collect::<Vec<_>>(), vec!["0", "1"]);

    // A round-limited run still audits; agreement is not applicable.
    let traj = dir.path().join("trajectory.csv");
    let out = run(&["verify", traj.to_str().unwrap(), scenario_path().to_str().unwrap()]);
    let report = json(&out);
    assert_eq!(report["agreement"]["status"], "not_applicable");
    assert_eq!(report["validity"]["status"], "pass");
    assert_eq!(code(&out), 0);
}

#[test]
fn io_and_parse_errors() {
    assert_eq!(code(&run(&["simulate", "/nonexistent/scenario.json"])), 1);
    assert_eq!(code(&run(&["simulate"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(code(&run(&["simulate", &bad])), 1);
    let pts = write(dir.path(), "pts.txt", "1 2\n3 x\n");
    assert_eq!(code(&run(&["kernel", &pts, "--n", "1"])), 1);
}

#[test]
fn robustness_verdicts() {
    let k5 = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/five_agent_graph.json");
    let k5 = k5.to_str().unwrap();
    let out = run(&["robustness", k5, "--r", "3", "--s", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verdict"], true);
    assert_eq!(code(&run(&["robustness", k5, "--r", "3"])), 0);
    let out = run(&["robustness", k5, "--r", "4"]);
    assert_eq!(code(&out), 4);
    assert_eq!(json(&out)["verdict"], false);

    let dir = tempfile::tempdir().unwrap();
    let p3 = write(dir.path(), "p3.json", r#"{"nodes": 3, "edges": [[0, 1], [1, 2]]}"#);
    let out = run(&["robustness", &p3, "--r", "2"]);
    assert_eq!(code(&out), 4);
    let w = &json(&out)["witness"];
    assert_eq!(w[0], serde_json::json!([0]));
    assert_eq!(w[1], serde_json::json!([2]));

    let big = write(dir.path(), "big.json", r#"{"nodes": 13, "edges": []}"#);
    assert_eq!(code(&run(&["robustness", &big, "--r", "1"])), 2);
}

#[test]
fn kernel_examples() {
    let dir = tempfile::tempdir().unwrap();
    let sq = write(dir.path(), "sq.txt", "# square plus center\n0,0\n2,0\n0,2\n2,2\n1,1\n");
    let out = run(&["kernel", &sq, "--n", "1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["kernel"]["vertices"], serde_json::json!([[1.0, 1.0]]));
    assert_eq!(v["kernel"]["affine_dim"], 0);

    let line = write(dir.path(), "line.txt", "0\n1\n2\n3\n4\n");
    let v = json(&run(&["kernel", &line, "--n", "1"]));
    assert_eq!(v["kernel"]["vertices"], serde_json::json!([[1.0], [3.0]]));
    assert_eq!(v["trimmed_box"]["vertices"], serde_json::json!([[1.0], [3.0]]));

    // The three edges of a triangle share no point.
    let tri = write(dir.path(), "tri.txt", "0 0\n4 0\n0 4\n");
    let out = run(&["kernel", &tri, "--n", "1"]);
    assert_eq!(code(&out), 4);
    assert_eq!(json(&out)["kernel"]["empty"], true);

    assert_eq!(code(&run(&["kernel", &sq, "--n", "6"])), 2);
}

#[test]
fn verify_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let scenario = scenario_path();
    let scenario = scenario.to_str().unwrap();
    assert_eq!(code(&run(&["simulate", scenario, "--out", d])), 0);
    let traj = dir.path().join("trajectory.csv");
    let out = run(&["verify", traj.to_str().unwrap(), scenario]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report = json(&out);
    assert_eq!(report["passed"], true);
    assert_eq!(report["agreement"]["status"], "pass");

    // Move one benign state in round 1 far outside the initial hull.
    let text = fs::read_to_string(&traj).unwrap();
    let tampered: Vec<String> = text
        .lines()
        .map(|l| {
            if l.starts_with("1,2,benign,") {
                "1,2,benign,50,50".to_string()
            } else {
                l.to_string()
            }
        })
        .collect();
    assert_ne!(tampered.join("\n"), text.trim_end());
    let bad = write(dir.path(), "tampered.csv", &(tampered.join("\n") + "\n"));
    let out = run(&["verify", &bad, scenario]);
    assert_eq!(code(&out), 4);
    let report = json(&out);
    assert_eq!(report["validity"]["status"], "fail");
    assert_eq!(report["validity"]["round"], 1);

    // Rows that do not match the scenario are a validation error.
    let short = write(dir.path(), "short.csv", "k,agent,role,x_0,x_1\n0,0,faulty,0,1\n");
    assert_eq!(code(&run(&["verify", &short, scenario])), 2);
}
