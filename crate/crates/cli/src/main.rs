use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gaugelab_cli::{list_kinds, run, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "gaugelab",
    version,
    about = "Verify gauge and modular-space properties numerically"
)]
struct Cli {
    /// Print a per-suite summary to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites of a TOML config and write a TOML report.
    Run {
        config: PathBuf,
        /// Report path; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// List the gauge kinds, Orlicz function kinds and suites.
    ListKinds,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListKinds => {
            print!("{}", list_kinds());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            out,
            seed,
            trials,
            tol,
            depth,
        } => {
            let result = ExperimentConfig::load(&config).and_then(|mut c| {
                c.params.seed = seed.unwrap_or(c.params.seed);
                c.params.trials = trials.unwrap_or(c.params.trials);
                c.params.tol = tol.unwrap_or(c.params.tol);
                c.params.depth = depth.unwrap_or(c.params.depth);
                run(&c)
            });
            let report = match result {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if cli.verbose {
                for (name, s) in &report.suites {
                    let ms = report.meta.runtime_ms.get(name).copied().unwrap_or(0);
                    eprintln!(
                        "{:<16} {} ({ms} ms)",
                        name,
                        if s.passed { "PASS" } else { "FAIL" }
                    );
                }
            }
            let text = report.to_toml();
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                for name in report.failed_suites() {
                    eprintln!("failed: {name}");
                }
                ExitCode::FAILURE
            }
        }
    }
}
