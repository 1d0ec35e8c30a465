//! Command-line front end: generate problems, run recoveries, measure
//! restricted-isometry constants, verify traces, and drive sweeps.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sparse_recover::checks::run_checks;
use sparse_recover::harness::{run_sweep, ExperimentPlan};
use sparse_recover::io;
use sparse_recover::linalg::norm2;
use sparse_recover::problem::{
    generate_matrix, generate_signal, Amplitude, MatrixKind, MeasurementEnsemble, Problem,
    ProblemDescriptor, SparseSignal,
};
use sparse_recover::rip::{self, RipConstants, RipEstimate, RipMethod};
use sparse_recover::solver::{
    recover, GammaSource, IterateTrace, IterationBudget, RecoveryConfig, TauSource,
};

#[derive(Parser)]
#[command(name = "sparse-recover", version, about = "Sparse signal recovery experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate signals, matrices, or full problem instances.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run the recovery iteration and write a trace.
    Recover(RecoverArgs),
    /// Measure restricted-isometry constants of a matrix.
    Rip(RipArgs),
    /// Re-verify the guarantees of a recorded run from its raw iterates.
    Verify(VerifyArgs),
    /// Run a multi-seed sweep from a plan file.
    Sweep(SweepArgs),
}

#[derive(Subcommand)]
enum GenCommand {
    /// Generate an s-sparse signal.
    Signal(GenSignalArgs),
    /// Generate a random measurement matrix.
    Matrix(GenMatrixArgs),
    /// Generate a signal, a matrix, and the measurements together.
    Problem(GenProblemArgs),
}

#[derive(Args)]
struct GenSignalArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    s: usize,
    /// unit, gaussian, or uniform:lo,hi
    #[arg(long, default_value = "unit")]
    amplitude: String,
    #[arg(long)]
    seed: u64,
    /// Output CSV (single row).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenMatrixArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    d: usize,
    /// gaussian or rademacher
    #[arg(long, default_value = "gaussian")]
    kind: String,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenProblemArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    s: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value = "gaussian")]
    kind: String,
    #[arg(long, default_value = "unit")]
    amplitude: String,
    #[arg(long)]
    seed: u64,
    /// Directory receiving matrix.csv, signal.csv, measurements.csv, problem.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RecoverArgs {
    /// Measurement matrix CSV. Alternative to --ensemble.
    #[arg(long, conflicts_with = "ensemble")]
    matrix: Option<PathBuf>,
    /// Measurements CSV (required with --matrix).
    #[arg(long, requires = "matrix")]
    y: Option<PathBuf>,
    /// Problem descriptor JSON; regenerates matrix, measurements, and truth.
    #[arg(long)]
    ensemble: Option<PathBuf>,
    /// Override the descriptor's seed before regenerating.
    #[arg(long)]
    seed: Option<u64>,
    /// Ground truth CSV; enables error columns in the trace.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Step parameter: a number, "quarter", or "oracle".
    #[arg(long, default_value = "quarter")]
    gamma: String,
    /// schedule | constant | file
    #[arg(long, default_value = "schedule")]
    tau_mode: String,
    /// Threshold value for --tau-mode constant.
    #[arg(long)]
    tau: Option<f64>,
    /// File with one threshold per line for --tau-mode file.
    #[arg(long)]
    tau_file: Option<PathBuf>,
    /// Schedule constants; default is the plug-in substitution theta = delta = gamma.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    s: usize,
    /// Norm bound R; defaults to ||truth||_2 when truth is available.
    #[arg(long = "R", alias = "r")]
    r: Option<f64>,
    /// Iteration count.
    #[arg(long = "T", alias = "t", conflicts_with = "eps")]
    t: Option<usize>,
    /// Target accuracy; derives the iteration count (needs gamma < 1/4).
    #[arg(long)]
    eps: Option<f64>,
    /// Summary trace CSV.
    #[arg(long)]
    out: PathBuf,
    /// Raw iterates CSV; defaults to <out>.iterates.csv.
    #[arg(long)]
    iterates: Option<PathBuf>,
}

#[derive(Args)]
struct RipArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    s: usize,
    /// exact | sampled
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = rip::DEFAULT_ENUM_BUDGET)]
    budget: u64,
    /// Output JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Raw iterates CSV (written by `recover` alongside the summary trace).
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    s: usize,
    /// Norm bound R; defaults to ||truth||_2.
    #[arg(long = "R", alias = "r")]
    r: Option<f64>,
    #[arg(long, requires = "theta")]
    delta: Option<f64>,
    #[arg(long, requires = "delta")]
    theta: Option<f64>,
    /// Measure theta and delta exactly instead of supplying them.
    #[arg(long, conflicts_with_all = ["delta", "theta"])]
    oracle: bool,
    #[arg(long, default_value_t = rip::DEFAULT_ENUM_BUDGET)]
    budget: u64,
    /// Output JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    plan: PathBuf,
    /// Override the plan's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(GenCommand::Signal(args)) => gen_signal(args),
        Command::Gen(GenCommand::Matrix(args)) => gen_matrix(args),
        Command::Gen(GenCommand::Problem(args)) => gen_problem(args),
        Command::Recover(args) => cmd_recover(args),
        Command::Rip(args) => cmd_rip(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn parse_amplitude(text: &str) -> Result<Amplitude> {
    text.parse::<Amplitude>().map_err(|e| anyhow!("{e}"))
}

fn gen_signal(args: GenSignalArgs) -> Result<()> {
    let amplitude = parse_amplitude(&args.amplitude)?;
    let signal = generate_signal(args.d, args.s, amplitude, args.seed)?;
    io::write_string(&args.out, &io::format_vector_csv(&signal.values))?;
    println!("wrote {} (d = {}, s = {}, R = {})", args.out.display(), args.d, args.s, signal.norm_bound);
    Ok(())
}

fn gen_matrix(args: GenMatrixArgs) -> Result<()> {
    let kind: MatrixKind = args.kind.parse()?;
    let matrix = generate_matrix(args.m, args.d, kind, args.seed)?;
    io::write_string(&args.out, &io::format_matrix_csv(&matrix))?;
    println!("wrote {} ({}x{})", args.out.display(), args.m, args.d);
    Ok(())
}

fn gen_problem(args: GenProblemArgs) -> Result<()> {
    let kind: MatrixKind = args.kind.parse()?;
    let amplitude = parse_amplitude(&args.amplitude)?;
    let problem = Problem::generate(args.d, args.s, args.m, kind, amplitude, args.seed)?;
    let dir = &args.out_dir;
    io::write_string(&dir.join("matrix.csv"), &io::format_matrix_csv(&problem.ensemble.matrix))?;
    io::write_string(&dir.join("signal.csv"), &io::format_vector_csv(&problem.signal.values))?;
    io::write_string(
        &dir.join("measurements.csv"),
        &io::format_vector_csv(&problem.ensemble.measurements),
    )?;
    io::write_string(
        &dir.join("problem.json"),
        &serde_json::to_string_pretty(&problem.descriptor())?,
    )?;
    println!("wrote problem into {}", dir.display());
    Ok(())
}

fn parse_gamma(text: &str, budget: u64) -> Result<GammaSource> {
    match text {
        "quarter" => Ok(GammaSource::Quarter),
        "oracle" => Ok(GammaSource::Oracle { budget }),
        number => number
            .parse::<f64>()
            .map(GammaSource::Explicit)
            .map_err(|_| anyhow!("--gamma must be a number, 'quarter', or 'oracle'")),
    }
}

fn load_truth(path: &Path) -> Result<SparseSignal> {
    let values = io::parse_vector_csv(&io::read_to_string(path)?)?;
    Ok(SparseSignal::from_values(values))
}

fn cmd_recover(args: RecoverArgs) -> Result<()> {
    let mut truth = match &args.truth {
        Some(path) => Some(load_truth(path)?),
        None => None,
    };

    let ensemble = if let Some(desc_path) = &args.ensemble {
        let mut desc: ProblemDescriptor =
            serde_json::from_str(&io::read_to_string(desc_path)?).context("reading descriptor")?;
        if let Some(seed) = args.seed {
            desc.seed = seed;
            let problem = Problem::generate(desc.d, desc.s, desc.m, desc.kind, desc.amplitude, seed)?;
            truth = truth.or(Some(problem.signal.clone()));
            problem.ensemble
        } else {
            let problem = Problem::from_descriptor(&desc)?;
            truth = truth.or(Some(problem.signal.clone()));
            problem.ensemble
        }
    } else {
        let matrix_path = args
            .matrix
            .as_ref()
            .ok_or_else(|| anyhow!("supply either --matrix with --y, or --ensemble"))?;
        let y_path = args.y.as_ref().ok_or_else(|| anyhow!("--matrix requires --y"))?;
        let matrix = io::parse_matrix_csv(&io::read_to_string(matrix_path)?)?;
        let y = io::parse_vector_csv(&io::read_to_string(y_path)?)?;
        MeasurementEnsemble::from_parts(matrix, y, MatrixKind::Explicit, None)?
    };

    let norm_bound = match (args.r, &truth) {
        (Some(r), _) => r,
        (None, Some(sig)) => sig.norm_bound,
        (None, None) => bail!("--r is required when no truth is available"),
    };

    let tau = match args.tau_mode.as_str() {
        "schedule" => match (args.theta, args.delta) {
            (Some(theta_ss), Some(delta_s)) => TauSource::ScheduleWith { theta_ss, delta_s },
            (None, None) => TauSource::Schedule,
            _ => bail!("--theta and --delta must be supplied together"),
        },
        "constant" => TauSource::Constant(args.tau.ok_or_else(|| anyhow!("--tau-mode constant requires --tau"))?),
        "file" => {
            let path = args.tau_file.as_ref().ok_or_else(|| anyhow!("--tau-mode file requires --tau-file"))?;
            let taus = io::read_to_string(path)?
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| l.trim().parse::<f64>().map_err(|_| anyhow!("bad tau line '{l}'")))
                .collect::<Result<Vec<f64>>>()?;
            TauSource::Explicit(taus)
        }
        other => bail!("unknown --tau-mode '{other}' (expected schedule, constant, or file)"),
    };

    let iterations = match (args.t, args.eps) {
        (Some(t), None) => IterationBudget::Fixed(t),
        (None, Some(eps)) => IterationBudget::TargetAccuracy(eps),
        (None, None) => bail!("supply --t or --eps"),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };

    let config = RecoveryConfig {
        s: args.s,
        norm_bound,
        gamma: parse_gamma(&args.gamma, rip::DEFAULT_ENUM_BUDGET)?,
        tau,
        iterations,
        stop_on_fixpoint: false,
    };
    let trace = recover(&ensemble, truth.as_ref(), &config)?;

    io::write_string(&args.out, &io::format_trace_csv(&trace, truth.as_ref(), None))?;
    let iterates_path = args.iterates.unwrap_or_else(|| {
        let mut os = args.out.clone().into_os_string();
        os.push(".iterates.csv");
        PathBuf::from(os)
    });
    io::write_string(&iterates_path, &io::format_iterates_csv(&trace))?;

    let last = trace.final_record();
    match last.err2 {
        Some(err2) => println!(
            "done: {} iterates, final err2 = {err2} ({} relative to R)",
            trace.records.len(),
            if norm_bound > 0.0 { err2 / norm_bound } else { err2 }
        ),
        None => println!("done: {} iterates (no truth supplied)", trace.records.len()),
    }
    println!("trace: {} | iterates: {}", args.out.display(), iterates_path.display());
    Ok(())
}

fn cmd_rip(args: RipArgs) -> Result<()> {
    let matrix = io::parse_matrix_csv(&io::read_to_string(&args.matrix)?)?;
    let estimate: RipEstimate = match args.mode.as_str() {
        "exact" => rip::estimate_exact(&matrix, args.s, args.budget)?,
        "sampled" => rip::estimate_sampled(&matrix, args.s, args.trials, args.seed)?,
        other => bail!("unknown --mode '{other}' (expected exact or sampled)"),
    };
    emit_json(&serde_json::to_string_pretty(&estimate)?, args.out.as_deref())?;
    if estimate.method == RipMethod::MonteCarlo {
        eprintln!("note: sampled values lower-bound the exact constants");
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let truth = load_truth(&args.truth)?;
    let matrix = io::parse_matrix_csv(&io::read_to_string(&args.matrix)?)?;
    let (xs, taus) = io::parse_iterates_csv(&io::read_to_string(&args.trace)?)?;
    let norm_bound = args.r.unwrap_or_else(|| norm2(&truth.values));
    let trace = IterateTrace::from_iterates(xs, taus, args.gamma, args.s, norm_bound, Some(&truth))?;

    let consts = if args.oracle {
        RipConstants {
            theta_ss: rip::theta_exact(&matrix, args.s, args.budget)?,
            delta_s: rip::delta_exact(&matrix, args.s, args.budget)?,
        }
    } else {
        match (args.theta, args.delta) {
            (Some(theta_ss), Some(delta_s)) => RipConstants { theta_ss, delta_s },
            _ => return Err(sparse_recover::Error::MissingRipConstants.into()),
        }
    };

    let report = run_checks(&trace, &truth, &matrix, &consts)?;
    emit_json(&serde_json::to_string_pretty(&report)?, args.out.as_deref())?;
    if report.passed() {
        eprintln!("all applicable verdicts hold");
        Ok(())
    } else {
        for failure in &report.failures {
            eprintln!("violation: {failure}");
        }
        std::process::exit(2);
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut plan: ExperimentPlan =
        serde_json::from_str(&io::read_to_string(&args.plan)?).context("reading plan")?;
    if let Some(dir) = args.out_dir {
        plan.out_dir = dir;
    }
    let sweep = run_sweep(&plan)?;
    for cell in &sweep.cells {
        println!(
            "d={} s={} m={}: success {}/{} ({:.3}), checks pass {:.3}",
            cell.d, cell.s, cell.m, cell.successes, cell.trials, cell.success_fraction,
            cell.checks_pass_fraction
        );
    }
    println!("artifacts in {}", plan.out_dir.display());
    Ok(())
}

fn emit_json(json: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            io::write_string(path, json)?;
            println!("wrote {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}
