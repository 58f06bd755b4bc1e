use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use sparseq::driver::{practical_gamma, residual_practical};
use sparseq::io::{read_vector, write_vector};
use sparseq::{
    full_objective, lambda_from_scaling, parse_libsvm, solve_from, stationarity_report,
    write_trace, Dataset, Error, LossKind, LossModel, Problem, SolveResult, SolveStatus,
    SolverConfig, SolverKind, TraceFormat,
};

#[derive(Parser, Debug)]
#[command(
    name = "sparseq",
    version,
    about = "lq-regularized sparse regression solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one solver and print a summary
    Solve(SolveArgs),
    /// Run both solvers on the same instance
    Compare(CompareArgs),
    /// Report stationarity residuals of a saved iterate
    Check(CheckArgs),
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// LIBSVM file
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "ls")]
    loss: LossArg,
    /// λ is λ_c times the scaling base of the loss
    #[arg(long, value_parser = positive)]
    lambda_c: f64,
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    q: f64,
    /// Widen the feature count beyond the largest index in the file
    #[arg(long)]
    n_features: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// key=value file using the flag names; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Threshold on the practical residual
    #[arg(long, default_value_t = 1e-3, value_parser = nonnegative)]
    tol: f64,
    #[arg(long, default_value_t = 50_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_iters: u64,
    /// JSON array used as x⁰ instead of zero
    #[arg(long)]
    warm_start: Option<PathBuf>,
    /// Write zero elapsed times so traces are reproducible
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, default_value = "hpgsrn")]
    solver: SolverArg,
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Defaults to json for a .json path, csv otherwise
    #[arg(long, value_enum)]
    trace_format: Option<FormatArg>,
    /// Save the final iterate as a JSON array
    #[arg(long)]
    x_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    data: DataArgs,
    /// JSON array holding the iterate
    #[arg(long)]
    x: PathBuf,
    /// Step parameters to test; defaults to L/0.95
    #[arg(long, value_delimiter = ',', value_parser = positive)]
    gamma: Vec<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum LossArg {
    Ls,
    Logistic,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Ls => LossKind::LeastSquares,
            LossArg::Logistic => LossKind::Logistic,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SolverArg {
    Hpgsrn,
    Pgls,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Hpgsrn => SolverKind::Hpgsrn,
            SolverArg::Pgls => SolverKind::Pgls,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FormatArg {
    Csv,
    Json,
}

fn parse_real(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| e.to_string())
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not positive"))
    }
}

fn nonnegative(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} is negative"))
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

const EXIT_CONVERGED: u8 = 0;
const EXIT_FAILURE: u8 = 1;
const EXIT_MAX_ITERS: u8 = 2;

#[derive(Debug)]
enum CliError {
    Usage(clap::Error),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl From<clap::Error> for CliError {
    fn from(e: clap::Error) -> Self {
        CliError::Usage(e)
    }
}

fn config_error(msg: String) -> CliError {
    CliError::Usage(Cli::command().error(clap::error::ErrorKind::InvalidValue, msg))
}

fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            config_error(format!("{}:{}: expected key=value", path.display(), i + 1))
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn flag_value(argv: &[String], key: &str) -> Option<String> {
    let long = format!("--{key}");
    let prefix = format!("--{key}=");
    argv.iter().enumerate().find_map(|(i, a)| {
        if *a == long {
            argv.get(i + 1).cloned()
        } else {
            a.strip_prefix(&prefix).map(str::to_string)
        }
    })
}

fn flag_given(argv: &[String], key: &str) -> bool {
    let long = format!("--{key}");
    let prefix = format!("--{key}=");
    argv.iter().any(|a| *a == long || a.starts_with(&prefix))
}

/// Appends config-file entries for every flag the command line leaves unset,
/// then parses.
fn parse_cli(argv: Vec<String>) -> Result<Cli, CliError> {
    let Some(config) = flag_value(&argv, "config") else {
        return Ok(Cli::try_parse_from(&argv)?);
    };
    let command = Cli::command();
    let Some(sub_command) = argv
        .iter()
        .skip(1)
        .find_map(|a| command.get_subcommands().find(|c| c.get_name() == a))
    else {
        return Ok(Cli::try_parse_from(&argv)?);
    };
    let mut extended = argv.clone();
    for (key, value) in read_config(Path::new(&config))? {
        if key == "config" {
            return Err(config_error("config files cannot nest".into()));
        }
        let arg = sub_command
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| config_error(format!("unknown config key {key:?}")))?;
        if flag_given(&argv, &key) {
            continue;
        }
        if arg.get_action().takes_values() {
            extended.push(format!("--{key}={value}"));
        } else {
            match value.as_str() {
                "true" => extended.push(format!("--{key}")),
                "false" => {}
                other => {
                    return Err(config_error(format!(
                        "{key} expects true or false, got {other:?}"
                    )))
                }
            }
        }
    }
    Ok(Cli::try_parse_from(&extended)?)
}

struct Instance {
    problem: Problem,
    lam: f64,
    dataset_name: String,
}

fn load_instance(args: &DataArgs) -> Result<Instance, CliError> {
    let mut dataset: Dataset = parse_libsvm(&args.data, args.n_features)?;
    let kind = LossKind::from(args.loss);
    if kind == LossKind::Logistic {
        dataset.remap_binary_labels();
    }
    let lam = lambda_from_scaling(&dataset, kind, args.lambda_c)?;
    let loss = LossModel::new(kind, dataset.b)?;
    Ok(Instance {
        problem: Problem::new(dataset.a, loss, lam, args.q)?,
        lam,
        dataset_name: dataset.name,
    })
}

fn solver_config(kind: SolverKind, data: &DataArgs, run: &RunArgs) -> SolverConfig {
    SolverConfig {
        practical_tol: run.tol,
        max_iters: run.max_iters as usize,
        seed: data.seed,
        record_time: !run.no_timing,
        ..SolverConfig::for_kind(kind)
    }
}

fn starting_point(run: &RunArgs, n: usize) -> Result<Vec<f64>, CliError> {
    match &run.warm_start {
        Some(path) => {
            let x0 = read_vector(path)?;
            if x0.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: x0.len(),
                }
                .into());
            }
            Ok(x0)
        }
        None => Ok(vec![0.0; n]),
    }
}

fn exit_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Converged => EXIT_CONVERGED,
        SolveStatus::MaxIters => EXIT_MAX_ITERS,
        SolveStatus::Aborted => EXIT_FAILURE,
    }
}

/// Rows of the summary table: label and formatted value.
fn summary_rows(
    result: &SolveResult,
    problem: &Problem,
    gamma: f64,
) -> Result<Vec<(&'static str, String)>, CliError> {
    let f_check = full_objective(&result.x_final, problem)?;
    let residual = residual_practical(&result.x_final, problem, gamma)?;
    Ok(vec![
        ("Iter#", result.iteration_label()),
        ("Time", format!("{:.3e}", result.time_seconds)),
        ("Fval", format!("{f_check:.16e}")),
        ("Nnz", result.nnz().to_string()),
        ("Residual", format!("{residual:.3e}")),
        (
            "Status",
            match &result.error {
                Some(e) => format!("{} ({e})", result.status),
                None => result.status.to_string(),
            },
        ),
    ])
}

fn run_solve(args: SolveArgs) -> Result<u8, CliError> {
    let inst = load_instance(&args.data)?;
    let kind = SolverKind::from(args.solver);
    let config = solver_config(kind, &args.data, &args.run);
    let x0 = starting_point(&args.run, inst.problem.features())?;
    let result = solve_from(&inst.problem, &config, &x0)?;
    if let Some(path) = &args.trace_out {
        let format = match args.trace_format {
            Some(FormatArg::Json) => TraceFormat::Json,
            Some(FormatArg::Csv) => TraceFormat::Csv,
            None if path.extension().is_some_and(|e| e == "json") => TraceFormat::Json,
            None => TraceFormat::Csv,
        };
        write_trace(&result, path, format)?;
    }
    if let Some(path) = &args.x_out {
        write_vector(&result.x_final, path)?;
    }
    let gamma = practical_gamma(&inst.problem, args.data.seed)?;
    println!("{:<10}{}", "Data", inst.dataset_name);
    println!("{:<10}{}", "Solver", kind);
    println!("{:<10}{:.6e}", "Lambda", inst.lam);
    for (label, value) in summary_rows(&result, &inst.problem, gamma)? {
        println!("{label:<10}{value}");
    }
    Ok(exit_code(result.status))
}

fn thread_cap() -> usize {
    std::env::var("SPARSEQ_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

fn run_compare(args: CompareArgs) -> Result<u8, CliError> {
    let inst = load_instance(&args.data)?;
    let x0 = starting_point(&args.run, inst.problem.features())?;
    let kinds = [SolverKind::Hpgsrn, SolverKind::Pgls];
    let configs = kinds.map(|k| solver_config(k, &args.data, &args.run));
    let run = |c: &SolverConfig| solve_from(&inst.problem, c, &x0);
    let results = if thread_cap() >= 2 {
        std::thread::scope(|s| {
            let handles = configs.each_ref().map(|c| s.spawn(move || run(c)));
            handles.map(|h| h.join().expect("solver thread panicked"))
        })
    } else {
        configs.each_ref().map(run)
    };
    let [a, b] = results;
    let (a, b) = (a?, b?);
    let gamma = practical_gamma(&inst.problem, args.data.seed)?;
    let rows_a = summary_rows(&a, &inst.problem, gamma)?;
    let rows_b = summary_rows(&b, &inst.problem, gamma)?;
    println!("{:<10}{}", "Data", inst.dataset_name);
    println!("{:<10}{:<26}{}", "", kinds[0], kinds[1]);
    let lam = format!("{:.6e}", inst.lam);
    println!("{:<10}{:<26}{}", "Lambda", lam, lam);
    for ((label, va), (_, vb)) in rows_a.iter().zip(&rows_b) {
        println!("{label:<10}{va:<26}{vb}");
    }
    Ok(exit_code(a.status).max(exit_code(b.status)))
}

fn run_check(args: CheckArgs) -> Result<u8, CliError> {
    let inst = load_instance(&args.data)?;
    let x = read_vector(&args.x)?;
    let grid = if args.gamma.is_empty() {
        vec![practical_gamma(&inst.problem, args.data.seed)?]
    } else {
        args.gamma.clone()
    };
    let report = stationarity_report(&x, &inst.problem, &grid)?;
    println!("{:<24}residual", "gamma");
    for (g, r) in &report.residuals {
        println!("{:<24}{:.6e}", format!("{g:.6e}"), r);
    }
    println!("{:<24}{:.6e}", "min residual", report.min_residual);
    match report.subspace_gradient_norm {
        Some(v) => println!("{:<24}{:.6e}", "subspace gradient", v),
        None => println!("{:<24}-", "subspace gradient"),
    }
    println!("{:<24}{:.16e}", "Fval", full_objective(&x, &inst.problem)?);
    Ok(EXIT_CONVERGED)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let outcome = parse_cli(std::env::args().collect()).and_then(|cli| match cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Compare(a) => run_compare(a),
        Command::Check(a) => run_check(a),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            let code = if e.use_stderr() {
                EXIT_FAILURE
            } else {
                EXIT_CONVERGED
            };
            ExitCode::from(code)
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
