use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use magrobin::harness::{run_experiment, summary, Budget, ExperimentKind, RunConfig};

#[derive(Parser)]
#[command(version, about = "Band functions, semiclassical limits and eigenvalue sums of magnetic Robin Laplacians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; its `kind` must match the subcommand
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the report and data files
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    budget: Option<Budget>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Tabulate band functions
    Band,
    /// Evaluate the semiclassical energy and counting limits
    Limits,
    /// Torus Landau level and Dirichlet square counts
    Models,
    /// Convergence of scaled eigenvalue sums on the disk
    DiskConverge,
    /// Eigenvalue counting on the Neumann square
    SquareCount,
    /// Lieb-Thirring check on the half-strip
    LtCheck,
    /// Run the acceptance suite
    Validate,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Band => ExperimentKind::Band,
            Command::Limits => ExperimentKind::Limits,
            Command::Models => ExperimentKind::Models,
            Command::DiskConverge => ExperimentKind::DiskConverge,
            Command::SquareCount => ExperimentKind::SquareCount,
            Command::LtCheck => ExperimentKind::LtCheck,
            Command::Validate => ExperimentKind::Validate,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let kind = cli.command.kind();
    let mut config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) if c.kind == kind => c,
            Ok(c) => {
                eprintln!("error: config is for {:?}, not {kind:?}", c.kind);
                return ExitCode::from(2);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => RunConfig::new(kind),
    };
    if let Some(out) = cli.out {
        config.out = Some(out);
    }
    if let Some(b) = cli.budget {
        config.budget = b;
    }
    match run_experiment(&config) {
        Ok(report) => {
            print!("{}", summary(&report));
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
