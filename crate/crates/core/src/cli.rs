//! Command-line front end. Exit codes: 0 success, 1 I/O or parse error,
//! 2 validation error, 3 round limit reached, 4 verification failure
//! (failed audit, false robustness verdict, empty kernel).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

use crate::engine::{
    plot_data, read_csv, simulate, summary, write_csv, EngineError, Scenario, ScenarioFile,
    Terminal, FORMAT_VERSION,
};
use crate::geometry::{safe_kernel, trimmed_box, GeometryError, Point, PointSet, Tolerances};
use crate::graph::{is_r_robust, is_rs_robust, GraphError, GraphFile, Network, RobustnessOptions};
use crate::oracle::audit_trajectory;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_ROUND_LIMIT: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "safe-kernel", version, about = "Safe-kernel resilient consensus: simulate, analyze, verify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario; writes trajectory.csv, summary.json and plot.json.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long = "max-rounds", visible_alias = "max_rounds")]
        max_rounds: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol_geom: Option<f64>,
        #[arg(long)]
        tol_vertex: Option<f64>,
        #[arg(long)]
        tol_lp: Option<f64>,
        #[arg(long)]
        tol_audit: Option<f64>,
    },
    /// Exhaustive r-robustness, or (r, s)-robustness when --s is given.
    Robustness {
        graph: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        s: Option<usize>,
        /// Require two qualifying nodes instead of one.
        #[arg(long)]
        strict: bool,
        /// Largest node count to search.
        #[arg(long, default_value_t = 12)]
        cap: usize,
    },
    /// Safe kernel of a point file, with the trimmed box for comparison.
    Kernel {
        points: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        tol_geom: Option<f64>,
        #[arg(long)]
        tol_vertex: Option<f64>,
    },
    /// Audit a trajectory CSV against its scenario.
    Verify { trajectory: PathBuf, scenario: PathBuf },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Parse(_) => EXIT_IO,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Io(_) => CliError::Io(e.to_string()),
            EngineError::Parse(_) => CliError::Parse(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_IO } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Simulate {
            scenario,
            out,
            epsilon,
            max_rounds,
            seed,
            tol_geom,
            tol_vertex,
            tol_lp,
            tol_audit,
        } => {
            let mut file = ScenarioFile::load(&scenario)?;
            if let Some(v) = epsilon {
                file.epsilon = v;
            }
            if let Some(v) = max_rounds {
                file.max_rounds = v;
            }
            if let Some(v) = seed {
                file.seed = v;
            }
            let t = &mut file.tolerances;
            for (slot, v) in [
                (&mut t.geom, tol_geom),
                (&mut t.vertex, tol_vertex),
                (&mut t.lp, tol_lp),
                (&mut t.audit, tol_audit),
            ] {
                if let Some(v) = v {
                    *slot = v;
                }
            }
            cmd_simulate(Scenario::from_file(file)?, &out)
        }
        Command::Robustness { graph, r, s, strict, cap } => {
            cmd_robustness(&graph, r, s, RobustnessOptions { strict, max_nodes: cap })
        }
        Command::Kernel {
            points,
            n,
            tol_geom,
            tol_vertex,
        } => {
            let mut tol = Tolerances::default();
            tol.geom = tol_geom.unwrap_or(tol.geom);
            tol.vertex = tol_vertex.unwrap_or(tol.vertex);
            cmd_kernel(&points, n, &tol)
        }
        Command::Verify { trajectory, scenario } => cmd_verify(&trajectory, &scenario),
    }
}

fn cmd_simulate(scenario: Scenario, out: &Path) -> Result<i32, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    eprintln!(
        "simulating {} nodes ({} faulty), d = {}, up to {} rounds",
        scenario.node_count(),
        scenario.fault_set.members.len(),
        scenario.dim,
        scenario.max_rounds
    );
    let traj = simulate(&scenario)?;
    let mut csv = Vec::new();
    write_csv(&traj, &mut csv)?;
    write(&out.join("trajectory.csv"), &csv)?;
    write(&out.join("summary.json"), pretty(&summary(&traj, &scenario)).as_bytes())?;
    write(&out.join("plot.json"), pretty(&plot_data(&traj, &scenario)?).as_bytes())?;
    eprintln!(
        "{:?} after {} rounds, benign diameter {:e}",
        traj.terminal,
        traj.last().k,
        traj.last().benign_diameter
    );
    Ok(match traj.terminal {
        Terminal::Converged => EXIT_OK,
        Terminal::RoundLimit => EXIT_ROUND_LIMIT,
    })
}

fn cmd_robustness(path: &Path, r: usize, s: Option<usize>, opts: RobustnessOptions) -> Result<i32, CliError> {
    let file: GraphFile =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let g = Network::try_from(&file)?;
    let report = match s {
        Some(s) => is_rs_robust(&g, r, s, &opts)?,
        None => is_r_robust(&g, r, &opts)?,
    };
    let out = json!({
        "format_version": FORMAT_VERSION,
        "config": {"graph": file, "r": r, "s": s, "strict": opts.strict, "cap": opts.max_nodes},
        "r": report.r,
        "s": report.s,
        "verdict": report.verdict,
        "witness": report.witness,
    });
    print!("{}", pretty(&out));
    Ok(if report.verdict { EXIT_OK } else { EXIT_VERIFY })
}

/// One point per line; coordinates separated by commas or whitespace.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_points(text: &str) -> Result<PointSet, CliError> {
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| CliError::Parse(format!("line {}: bad number {t:?}", ln + 1)))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(Point::new(coords).map_err(|e| CliError::Parse(format!("line {}: {e}", ln + 1)))?);
    }
    PointSet::new(rows).map_err(|e| CliError::Parse(e.to_string()))
}

fn cmd_kernel(path: &Path, n: usize, tol: &Tolerances) -> Result<i32, CliError> {
    let points = parse_points(&read(path)?)?;
    let kernel = safe_kernel(&points, n, tol)?;
    let boxed = if points.cardinality() > 2 * n {
        Some(trimmed_box(&points, n, tol)?)
    } else {
        None
    };
    let out = json!({
        "format_version": FORMAT_VERSION,
        "config": {"n": n, "m": points.cardinality(), "dim": points.dim(), "tolerances": tol},
        "kernel": kernel,
        "trimmed_box": boxed,
    });
    print!("{}", pretty(&out));
    Ok(if kernel.is_empty() { EXIT_VERIFY } else { EXIT_OK })
}

fn cmd_verify(trajectory: &Path, scenario: &Path) -> Result<i32, CliError> {
    let scenario = Scenario::load(scenario)?;
    let file = fs::File::open(trajectory).map_err(|e| CliError::Io(format!("{}: {e}", trajectory.display())))?;
    let traj = read_csv(file, &scenario)?;
    let report = audit_trajectory(&traj, &scenario).map_err(|e| CliError::Validation(e.to_string()))?;
    print!("{}", pretty(&report));
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY })
}
