use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use drsub::harness::{execute, ExperimentConfig, ExperimentKind, Outcome, RowKind};
use drsub::instances::{generate, GeneratorSpec};
use drsub::Error;

/// Non-monotone DR-submodular maximization experiments.
#[derive(Parser)]
#[command(name = "drsub", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in the config.
    Run(RunArgs),
    /// Run the property suites and write a PASS/FAIL report.
    Verify(RunArgs),
    /// Time and cross-check the simplex projections.
    ProjectBench(RunArgs),
    /// Generate one instance from a generator spec (TOML).
    Gen {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Override `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Override the horizon `T`.
    #[arg(long = "T")]
    horizon: Option<usize>,
}

enum Failure {
    Usage(String),
    Check(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse { .. } => Failure::Usage(e.to_string()),
            Error::Verification(_) => Failure::Check(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load(args: &RunArgs, force: Option<ExperimentKind>) -> Result<ExperimentConfig, Failure> {
    // unreadable or malformed configs are usage errors
    let mut cfg = ExperimentConfig::load(&args.config).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(kind) = force {
        cfg.experiment = kind;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    if let Some(r) = args.repeats {
        cfg.repeats = r;
    }
    if let Some(t) = args.horizon {
        cfg.algorithm.horizon = t;
    }
    Ok(cfg)
}

fn report(outcome: Outcome) -> Result<(), Failure> {
    match outcome {
        Outcome::Run(out) => {
            for r in out.rows.iter().filter(|r| r.kind == RowKind::Aggregate) {
                let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6}"));
                println!(
                    "{} {}: mean value {} mean ratio {}",
                    r.experiment,
                    r.algorithm,
                    fmt(r.value),
                    fmt(r.ratio_vs_oracle)
                );
            }
            println!("wrote {} and {}", out.csv_path.display(), out.timing_path.display());
            Ok(())
        }
        Outcome::Verify { report, path } => {
            print!("{}", report.to_text());
            println!("wrote {}", path.display());
            if report.passed() {
                Ok(())
            } else {
                let names: Vec<_> = report.failures().map(|s| s.name.clone()).collect();
                Err(Failure::Check(format!("failing suites: {}", names.join(", "))))
            }
        }
        Outcome::Bench(out) => {
            for (r, t) in out.rows.iter().zip(&out.timings) {
                println!(
                    "n={} trials={} sorted {:.4}s iterative {:.4}s dykstra {:.4}s max diff {:.2e}",
                    r.n,
                    r.trials,
                    t.sorted_seconds,
                    t.iterative_seconds,
                    t.dykstra_seconds,
                    r.max_diff_iterative.max(r.max_diff_dykstra)
                );
            }
            println!("wrote {} and {}", out.csv_path.display(), out.timing_path.display());
            Ok(())
        }
    }
}

fn gen(spec: &Path, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(spec).map_err(|e| Failure::Usage(format!("{}: {e}", spec.display())))?;
    let mut spec = GeneratorSpec::from_toml(&text).map_err(|e| Failure::Usage(format!("{}: {e}", spec.display())))?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    // generation only fails on a bad spec
    let instance = generate(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    std::fs::write(out, instance.to_text()).map_err(|e| Failure::Runtime(e.to_string()))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => load(args, None).and_then(|cfg| report(execute(&cfg)?)),
        Command::Verify(args) => load(args, Some(ExperimentKind::Verify)).and_then(|cfg| report(execute(&cfg)?)),
        Command::ProjectBench(args) => {
            load(args, Some(ExperimentKind::ProjectBench)).and_then(|cfg| report(execute(&cfg)?))
        }
        Command::Gen { spec, out, seed } => gen(spec, out, *seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) | Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
