use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use quench_cli::config::KEYS;
use quench_cli::error::{CliError, CliResult};
use quench_cli::run::{self, check_oracle_request, merits_dir, prepare, resume_dir};
use quench_cli::stats::summarize_runs;
use quench_cli::{configure_threads, ExperimentConfig, THREADS_ENV};

#[derive(Parser)]
#[command(name = "quench", version, about = "Neural-network quantum state quench dynamics of the tilted Ising chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file of `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set sites=8`; repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Only this replicate (0-based); all replicates otherwise.
    #[arg(short, long)]
    replicate: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Create replicate directories and fit the initial product state.
    Prepare(ConfigArgs),
    /// Prepare if needed, evolve to t_final and compute merits when enabled.
    Evolve(ConfigArgs),
    /// Exact-reference merits for existing run directories (at most 14 sites).
    Merits {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
    },
    /// Trimmed mean and 10th/90th percentiles of one table over replicates.
    Stats {
        /// Replicate directories (at least three).
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Table file name inside each run directory.
        #[arg(short, long, default_value = run::OBSERVABLES_TABLE)]
        table: String,
        /// Output path; defaults to `summary_<table>` next to the runs.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Continue an interrupted run from its latest checkpoint.
    Resume { run: PathBuf },
    /// Print every configuration key with its default.
    Keys,
}

fn load_config(args: &ConfigArgs) -> CliResult<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    for o in &args.overrides {
        cfg.apply_override(o)?;
    }
    cfg.validate()?;
    if let Some(r) = args.replicate {
        if r >= cfg.replicates {
            return Err(CliError::Config(format!("replicate {r} outside 0..{}", cfg.replicates)));
        }
    }
    Ok(cfg)
}

fn replicates(cfg: &ExperimentConfig, only: Option<usize>) -> Vec<usize> {
    match only {
        Some(r) => vec![r],
        None => (0..cfg.replicates).collect(),
    }
}

fn report_merits(m: &run::Merits) {
    if let (Some(t), Some(i)) = (m.times.last(), m.integrated_exact_infidelity.last()) {
        println!("  integrated exact infidelity at t = {t}: {}", quench_cli::io::format_float(*i));
    }
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Prepare(args) => {
            let cfg = load_config(&args)?;
            for rep in replicates(&cfg, args.replicate) {
                let p = prepare(&cfg, rep)?;
                let what = if p.reused { "exists" } else { "prepared" };
                println!(
                    "{what} {} (fit: {} steps, infidelity {})",
                    p.dir.display(),
                    p.fit_steps,
                    quench_cli::io::format_float(p.fit_infidelity)
                );
            }
        }
        Command::Evolve(args) => {
            let cfg = load_config(&args)?;
            check_oracle_request(&cfg)?;
            for rep in replicates(&cfg, args.replicate) {
                let (p, e, m) = run::run_replicate(&cfg, rep)?;
                println!(
                    "evolved {} to step {} ({} unconverged blocks, R = {})",
                    p.dir.display(),
                    e.final_step,
                    e.unconverged_blocks,
                    quench_cli::io::format_float(e.accumulated_error)
                );
                if let Some(m) = m {
                    report_merits(&m);
                }
            }
        }
        Command::Merits { runs } => {
            for dir in runs {
                let m = merits_dir(&dir)?;
                println!("merits for {}", dir.display());
                report_merits(&m);
            }
        }
        Command::Stats { runs, table, output } => {
            let output = output.unwrap_or_else(|| {
                let parent = runs[0].parent().unwrap_or(Path::new("."));
                parent.join(format!("summary_{table}"))
            });
            let summary = summarize_runs(&runs, &table, &output)?;
            println!("wrote {} ({} rows over {} runs)", output.display(), summary.rows.len(), runs.len());
        }
        Command::Resume { run } => {
            let (e, m) = resume_dir(&run)?;
            println!("resumed {} to step {}", run.display(), e.final_step);
            if let Some(m) = m {
                report_merits(&m);
            }
        }
        Command::Keys => {
            for (k, v, doc) in KEYS {
                println!("{k:<14} {v:<12} {doc}");
            }
            println!("\nThe worker-thread count is read from {THREADS_ENV}.");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| execute(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
