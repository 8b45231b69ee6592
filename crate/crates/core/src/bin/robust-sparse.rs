use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use robust_sparse::acceptance::{default_suite, scaling_suite, Scale};
use robust_sparse::bench::{run_estimator, run_experiment, write_sweep, Estimator, ExperimentSpec, GridCell};
use robust_sparse::contamination::{
    gen_mean_task, gen_pca_task, gen_regression_task, AdversaryKind, ContaminationSpec, SparseVectorSpec, Task, Truth,
};
use robust_sparse::io::{read_dataset, write_dataset};
use robust_sparse::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_ACCEPTANCE: u8 = 3;

#[derive(Parser)]
#[command(name = "robust-sparse", version, about = "Robust sparse mean, PCA and regression under Huber contamination")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset (CSV, labels and truth files).
    Generate(GenerateArgs),
    /// Run one estimator on a dataset file and print a JSON report.
    Run(RunArgs),
    /// Run an experiment grid from a JSON spec file.
    Sweep(SweepArgs),
    /// Run the acceptance criteria.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    task: String,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Spike strength (pca).
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Noise level (regression).
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Norm of the planted mean or regressor.
    #[arg(long, default_value_t = 1.0)]
    norm: f64,
    #[arg(long, default_value = "none")]
    adversary: String,
    /// Adversary shift magnitude.
    #[arg(long)]
    shift: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV path; `.labels` and `.truth.json` siblings are written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Dataset CSV.
    dataset: PathBuf,
    #[arg(long)]
    task: String,
    #[arg(long, default_value = "paper")]
    estimator: String,
    /// Sparsity; defaults to the value recorded with the dataset.
    #[arg(long)]
    k: Option<usize>,
    /// Corruption rate; defaults to the value recorded with the dataset.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Estimator configuration overrides: inline JSON or a JSON file.
    #[arg(long)]
    config: Option<String>,
    /// Report file the JSON line is appended to.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment spec (JSON).
    spec: PathBuf,
    /// Output directory; overrides the spec's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Also run the scaling criteria at their stated sizes.
    #[arg(long)]
    full: bool,
    /// Run the scaling criteria at reduced sizes.
    #[arg(long, conflicts_with = "full")]
    reduced: bool,
}

enum Failure {
    Usage(String),
    Runtime(String),
    Acceptance,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn parse_config(raw: &str) -> Result<serde_json::Value, Failure> {
    let text = if raw.trim_start().starts_with('{') {
        raw.to_string()
    } else {
        std::fs::read_to_string(raw).map_err(|e| Failure::Usage(format!("cannot read config {raw}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("config is not valid JSON: {e}")))
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let task = Task::parse(&args.task)?;
    let adversary = AdversaryKind::parse(&args.adversary)?;
    let mut spec = ContaminationSpec::new(args.eps, adversary, args.seed);
    if let Some(shift) = args.shift {
        spec = spec.with_shift(shift);
    }
    let truth = SparseVectorSpec::Random { norm: args.norm };
    let ds = match task {
        Task::Mean => gen_mean_task(args.n, args.d, args.k, &truth, &spec)?,
        Task::Pca => gen_pca_task(args.n, args.d, args.k, args.rho, &SparseVectorSpec::Random { norm: 1.0 }, &spec)?,
        Task::Regression => gen_regression_task(args.n, args.d, args.k, &truth, args.sigma, &spec)?,
    };
    let paths = write_dataset(&ds, &args.out)?;
    info!("wrote {} samples ({} outliers)", ds.n(), ds.meta.outliers);
    println!("{}", paths.csv.display());
    if ds.labels.is_some() {
        println!("{}", paths.labels.display());
    }
    println!("{}", paths.truth.display());
    Ok(())
}

fn default_report_path(dataset: &Path) -> PathBuf {
    dataset.with_extension("reports.jsonl")
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let task = Task::parse(&args.task)?;
    let estimator = Estimator::parse(&args.estimator)?;
    let overrides = args.config.as_deref().map(parse_config).transpose()?;
    let ds = read_dataset(&args.dataset)?;
    if ds.meta.task != task {
        return usage(format!("dataset holds a {} task, not {}", ds.meta.task.tag(), task.tag()));
    }
    let k = match args.k.or((ds.meta.k > 0).then_some(ds.meta.k)) {
        Some(k) => k,
        None => return usage("the dataset does not record k; pass --k"),
    };
    let rho = args.rho.or(match &ds.truth {
        Some(Truth::Pca { rho, .. }) => Some(*rho),
        _ => None,
    });
    let sigma = args.sigma.or(match &ds.truth {
        Some(Truth::Regression { sigma, .. }) => Some(*sigma),
        _ => None,
    });
    let cell = GridCell { d: ds.d(), k, n: ds.n(), epsilon: args.eps.unwrap_or(ds.meta.epsilon), rho, sigma };
    let report = run_estimator(task, estimator, &ds, &cell, 0, args.seed, overrides, Default::default());
    let line = serde_json::to_string(&report).map_err(|e| Failure::Runtime(e.to_string()))?;
    println!("{line}");
    let out = args.out.unwrap_or_else(|| default_report_path(&args.dataset));
    let mut file = OpenOptions::new().create(true).append(true).open(&out)?;
    writeln!(file, "{line}")?;
    match report.failure {
        Some(msg) if msg.starts_with("invalid parameter") => Err(Failure::Usage(msg)),
        Some(msg) => Err(Failure::Runtime(msg)),
        None => Ok(()),
    }
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", args.spec.display())))?;
    let spec: ExperimentSpec = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid spec: {e}")))?;
    spec.validate()?;
    let dir = args.out.or_else(|| spec.output.clone()).unwrap_or_else(|| PathBuf::from("sweep-out"));
    let reports = run_experiment(&spec)?;
    let outputs = write_sweep(&dir, &spec, &reports)?;
    let failures = reports.iter().filter(|r| r.failure.is_some()).count();
    if failures > 0 {
        log::warn!("{failures} of {} runs failed; see {}", reports.len(), outputs.reports.display());
    }
    println!("{}", outputs.summary.display());
    for p in &outputs.plot_data {
        println!("{}", p.display());
    }
    println!("{}", outputs.plot_script.display());
    println!("{}", outputs.reports.display());
    Ok(())
}

fn selftest(args: SelftestArgs) -> Result<(), Failure> {
    let mut reports = default_suite();
    if args.full {
        reports.extend(scaling_suite(Scale::Full));
    } else if args.reduced {
        reports.extend(scaling_suite(Scale::Reduced));
    }
    reports.sort_by_key(|r| r.id);
    for r in &reports {
        println!("{r}");
    }
    if reports.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure::Acceptance)
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(raw) = std::env::var("ROBUST_SPARSE_THREADS") {
        let threads: usize = raw
            .parse()
            .map_err(|_| Failure::Usage(format!("ROBUST_SPARSE_THREADS={raw} is not a positive integer")))?;
        if threads == 0 {
            return usage("ROBUST_SPARSE_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Generate(a) => generate(a),
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Selftest(a) => selftest(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
        Err(Failure::Acceptance) => ExitCode::from(EXIT_ACCEPTANCE),
    }
}
