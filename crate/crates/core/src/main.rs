use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hybrid_gibbs::cli::{
    analyze, demo_config, list_demos, parse_config, run_suite, simulate_config, FunctionSpec, KernelChoice,
    ModelConfig, RunReport, Suite,
};
use hybrid_gibbs::Result;

/// Exact spectral certification of Gibbs-type samplers on finite spaces.
///
/// The state-space cap (default 1000000 states) can be changed with the
/// HGIBBS_MAX_STATES environment variable.
#[derive(Parser)]
#[command(name = "hgibbs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral summaries and approximation constants for a model.
    Analyze {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the comparison checks requested by the config (or by --suite).
    Check {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Simulate a kernel and cross-validate the asymptotic variance.
    Simulate {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        kernel: KernelChoice,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `coord:<i>` or `vector:<v0,v1,...>`.
        #[arg(long, default_value = "coord:0")]
        f: String,
        /// Batch size; defaults to floor(sqrt(steps)).
        #[arg(long)]
        batch: Option<usize>,
        /// Write the trajectory as text (one state per line).
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a built-in demo config, or run it with --run.
    Demo {
        name: String,
        #[arg(long)]
        run: bool,
        #[command(flatten)]
        args: RunArgs,
    },
    /// List the built-in demos.
    ListDemos,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum, value_delimiter = ',')]
    suite: Vec<Suite>,
    #[arg(long, value_delimiter = ',')]
    t: Vec<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the reports as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Leave the timing field out of the JSON report.
    #[arg(long)]
    no_timing: bool,
}

impl RunArgs {
    fn apply(&self, mut config: ModelConfig) -> Result<ModelConfig> {
        if !self.suite.is_empty() {
            config.run.suites = self.suite.clone();
        }
        if !self.t.is_empty() {
            config.run.t = self.t.clone();
        }
        if let Some(tol) = self.tol {
            config.run.tol = tol;
        }
        config.validate()?;
        Ok(config.canonicalize())
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn emit_run(report: &RunReport, args: &RunArgs) -> Result<u8> {
    let json = if args.no_timing { report.canonical_json()? } else { report.to_json()? };
    emit(&json, args.out.as_deref())?;
    if let Some(path) = &args.csv {
        std::fs::write(path, report.to_csv())?;
    }
    for r in report.failures() {
        eprintln!("FAIL {}: lhs {} rhs {} slack {}", r.name, r.lhs, r.rhs, r.slack);
    }
    Ok(report.exit_code() as u8)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze { config, out } => {
            let report = analyze(&parse_config(config)?)?;
            emit(&report.to_json()?, out.as_deref())?;
            Ok(0)
        }
        Command::Check { config, run } => {
            let config = run.apply(parse_config(config)?)?;
            emit_run(&run_suite(&config)?, &run)
        }
        Command::Simulate { config, kernel, steps, seed, f, batch, trajectory, out } => {
            let config = parse_config(config)?;
            let f: FunctionSpec = f.parse()?;
            let (report, traj) = simulate_config(&config, kernel, steps, seed, &f, batch)?;
            if let Some(path) = trajectory {
                std::fs::write(path, traj.to_text())?;
            }
            emit(&serde_json::to_string_pretty(&report)?, out.as_deref())?;
            Ok(if report.cross_validation.acceptable() { 0 } else { 1 })
        }
        Command::Demo { name, run, args } => {
            let config = args.apply(demo_config(&name)?)?;
            if run {
                emit_run(&run_suite(&config)?, &args)
            } else {
                emit(&config.to_toml()?, args.out.as_deref())?;
                Ok(0)
            }
        }
        Command::ListDemos => {
            for name in list_demos() {
                println!("{name}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
