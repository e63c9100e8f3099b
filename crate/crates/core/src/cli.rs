//! The `dpp` command-line interface.
//!
//! Every command prints one JSON document (to stdout or `--out`). Errors are
//! printed to stderr as `{"error": ..., "message": ...}`. Exit codes: 0 on
//! success, 2 for input errors, 3 when the solver stops short of the known
//! number of solutions, 4 when verification fails.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::census::{solve_census, Component};
use crate::combinatorics::SetPartition;
use crate::decoupling::{assemble_decouplings, count_critical_points, MlDegreeTable, MonodromyBlockSolver};
use crate::hyperdet::{critical_rank_matrix, hyperdet, hyperdet_scale, support_and_singularity_screen, Tensor222};
use crate::io::{census_json, c64_json, graded_json, parse_data, parse_matrices, point_json, read_file};
use crate::model::{
    loglike_implicit, loglike_parametric, loglike_parametric_complex, partition_function, principal_minors, DataVector,
};
use crate::solver::{classify, distinctness_check, gradient_residual, mark_global_maxima, SolverOptions};
use crate::{DppError, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Largest relative gradient residual accepted by `verify`.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "dpp", version, about = "Critical points of the DPP log-likelihood")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for path tracking (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub dedup_tol: Option<f64>,
    #[arg(long)]
    pub residual_tol: Option<f64>,
    /// JSON file with solver options; flags take precedence.
    #[arg(long)]
    pub options: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the likelihood equations for a data vector.
    Solve {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "main")]
        component: String,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Generic number of critical points, by set partition.
    Count {
        #[arg(long)]
        n: usize,
    },
    /// Principal minors and partition function of a matrix.
    Minors {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Log-likelihood values and gradient residual at a matrix.
    Likelihood {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Critical points with the block structure of one set partition.
    Decouple {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        partition: String,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check that matrices (a matrix file, a point or a census) are critical points.
    Verify {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
}

/// A finished command: the JSON document and the process exit code.
#[derive(Debug)]
pub struct Outcome {
    pub output: Value,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(output: Value) -> Self {
        Outcome { output, exit_code: EXIT_OK }
    }
}

/// Exit code for an error.
pub fn exit_code_for(e: &DppError) -> i32 {
    match e {
        DppError::StallWithoutTarget { .. }
        | DppError::PathFailure(_)
        | DppError::MaxIterations { .. }
        | DppError::SingularJacobian => EXIT_INCOMPLETE,
        DppError::InconclusiveBall { .. } => EXIT_VERIFY,
        _ => EXIT_INPUT,
    }
}

/// Machine-readable error document.
pub fn error_json(e: &DppError) -> Value {
    let kind = format!("{e:?}");
    let kind = kind.split([' ', '(', '{']).next().unwrap_or("Error").to_string();
    json!({ "error": kind, "message": e.to_string() })
}

fn solver_options(args: &SolverArgs) -> Result<SolverOptions> {
    let mut opts: SolverOptions = match &args.options {
        Some(path) => serde_json::from_str(&read_file(path)?)?,
        None => SolverOptions::default(),
    };
    if let Some(s) = args.seed {
        opts.seed = s;
    }
    if let Some(t) = args.dedup_tol {
        opts.dedup_tol = t;
    }
    if let Some(t) = args.residual_tol {
        opts.residual_tol = t;
    }
    for (name, v) in [("dedup-tol", opts.dedup_tol), ("residual-tol", opts.residual_tol), ("imag_tol", opts.imag_tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(DppError::InvalidInput(format!("{name} must be positive")));
        }
    }
    Ok(opts)
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(0) => Err(DppError::InvalidInput("--workers must be positive".into())),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| DppError::InvalidInput(e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn load_data(path: &Path) -> Result<DataVector> {
    parse_data(&read_file(path)?)
}

fn cmd_solve(data: &Path, component: &str, args: &SolverArgs) -> Result<Outcome> {
    let u = load_data(data)?;
    let component: Component = component.parse()?;
    let opts = solver_options(args)?;
    let census = with_workers(args.workers, || solve_census(&u, component, &opts))??;
    let exit_code = if census.complete { EXIT_OK } else { EXIT_INCOMPLETE };
    Ok(Outcome { output: census_json(&census), exit_code })
}

fn cmd_count(n: usize) -> Result<Outcome> {
    let count = count_critical_points(n, &MlDegreeTable::default())?;
    Ok(Outcome::ok(serde_json::to_value(count)?))
}

fn cmd_minors(matrix: &Path) -> Result<Outcome> {
    let thetas = parse_matrices(&read_file(matrix)?)?;
    let out: Vec<Value> = thetas
        .iter()
        .map(|t| {
            let p = principal_minors(t);
            json!({ "n": t.n(), "p_graded": graded_json(&p.graded()), "partition_function": c64_json(partition_function(t)) })
        })
        .collect();
    Ok(Outcome::ok(if out.len() == 1 { out[0].clone() } else { Value::Array(out) }))
}

fn cmd_likelihood(matrix: &Path, data: &Path) -> Result<Outcome> {
    let u = load_data(data)?;
    let thetas = parse_matrices(&read_file(matrix)?)?;
    let mut out = Vec::new();
    for t in &thetas {
        let p = principal_minors(t);
        out.push(json!({
            "value": loglike_parametric(t, &u).ok(),
            "value_complex": loglike_parametric_complex(t, &u).ok().map(c64_json),
            "value_implicit": loglike_implicit(&p, &u).ok(),
            "gradient_residual": gradient_residual(t, &u)?,
        }));
    }
    Ok(Outcome::ok(if out.len() == 1 { out[0].clone() } else { Value::Array(out) }))
}

fn cmd_decouple(data: &Path, partition: &str, args: &SolverArgs) -> Result<Outcome> {
    let u = load_data(data)?;
    let pi = SetPartition::parse(partition, u.n())?;
    let opts = solver_options(args)?;
    let solver = MonodromyBlockSolver { opts: opts.clone() };
    let mut assembly = with_workers(args.workers, || assemble_decouplings(&u, &pi, &solver, &opts))??;
    mark_global_maxima(&mut assembly.points);
    crate::census::sort_points(&mut assembly.points)?;
    let incomplete = assembly.runs.iter().any(|(_, r)| r.is_incomplete());
    let runs: Vec<Value> = assembly.runs.iter().map(|(b, r)| json!({ "block": b.label(), "run": r })).collect();
    Ok(Outcome {
        output: json!({
            "n": u.n(),
            "partition": pi.to_string(),
            "runs": runs,
            "points": assembly.points.iter().map(point_json).collect::<Vec<_>>(),
        }),
        exit_code: if incomplete { EXIT_INCOMPLETE } else { EXIT_OK },
    })
}

fn cmd_verify(matrix: &Path, data: &Path) -> Result<Outcome> {
    let u = load_data(data)?;
    let thetas = parse_matrices(&read_file(matrix)?)?;
    let opts = SolverOptions::default();
    let mut all_ok = true;
    let mut reports = Vec::new();
    for t in &thetas {
        if t.n() != u.n() {
            return Err(DppError::InvalidInput(format!("matrix of size {} for data on {} elements", t.n(), u.n())));
        }
        let point = classify(t, &u, SetPartition::trivial(u.n()), &opts)?;
        let mut ok = point.residual <= VERIFY_TOL;
        let mut report = json!({
            "residual": point.residual,
            "critical": point.residual <= VERIFY_TOL,
            "value": point.value,
            "flags": point.flags,
        });
        if u.n() == 3 {
            let tensor = Tensor222::from(&principal_minors(t));
            let det = hyperdet(&tensor);
            let relative = det.norm() / hyperdet_scale(&tensor);
            let screen = support_and_singularity_screen(&tensor);
            report["hyperdet"] = json!({ "value": c64_json(det), "relative": relative, "vanishes": relative < 1e-10 });
            report["screen"] = serde_json::to_value(&screen)?;
            if screen.admissible {
                let rank = critical_rank_matrix(&tensor, &u)?;
                report["rank_condition"] = json!({
                    "singular_values": rank.singular_values,
                    "rank": rank.rank,
                    "holds": rank.rank <= 2,
                });
                ok &= rank.rank <= 2;
            }
            ok &= relative < 1e-10;
        }
        report["ok"] = json!(ok);
        all_ok &= ok;
        reports.push(report);
    }
    let mut output = json!({ "n": u.n(), "all_ok": all_ok, "points": reports });
    if thetas.len() > 1 {
        let cert = distinctness_check(&thetas, &u)?;
        output["distinctness"] = serde_json::to_value(&cert)?;
    }
    Ok(Outcome { output, exit_code: if all_ok { EXIT_OK } else { EXIT_VERIFY } })
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Solve { data, component, solver } => cmd_solve(data, component, solver),
        Command::Count { n } => cmd_count(*n),
        Command::Minors { matrix } => cmd_minors(matrix),
        Command::Likelihood { matrix, data } => cmd_likelihood(matrix, data),
        Command::Decouple { data, partition, solver } => cmd_decouple(data, partition, solver),
        Command::Verify { matrix, data } => cmd_verify(matrix, data),
    }
}

/// Parses arguments, runs the command and writes its output; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli).and_then(|outcome| {
        let text = serde_json::to_string_pretty(&outcome.output)? + "\n";
        match &cli.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code_for(&e)
        }
    }
}
