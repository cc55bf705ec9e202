use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rmopt::harness::montecarlo::RunResult;
use rmopt::harness::{parse_config, run_lemma_suite, run_monte_carlo, run_subproblem_suite, summary_csv};
use rmopt::Error;

#[derive(Parser)]
#[command(name = "rmopt", about = "Optimization with probabilistically accurate random models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single seeded realization and emit its trace as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Monte Carlo (p, eps) grid and emit the summary CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the per-realization lemma suite and the cubic-subproblem checks.
    Verify {
        /// Seeded realizations per (problem, algorithm, p) cell.
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        /// Random cubic subproblems per dimension.
        #[arg(long, default_value_t = 100)]
        subproblems: usize,
    },
}

fn emit(out: Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(&path, content)
            .map_err(|e| Error::RunAborted(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn read_config(path: &PathBuf) -> Result<rmopt::harness::HarnessConfig, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn real_main() -> Result<bool, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => {
            let cfg = read_config(&config)?;
            cfg.spec.validate()?;
            let run = cfg.spec.run_realization(cfg.run_p, cfg.run_eps, 0, 0)?;
            let trace = match &run {
                RunResult::Ls(t) => t,
                RunResult::Arc(r) => &r.trace,
            };
            emit(out, &trace.to_csv())?;
            match trace.hit {
                Some(n) => eprintln!("hit at iteration {n}"),
                None => eprintln!("no hit within the iteration cap"),
            }
            Ok(true)
        }
        Command::Sweep { config, out } => {
            let cfg = read_config(&config)?;
            let stats = run_monte_carlo(&cfg.spec)?;
            emit(out, &summary_csv(&stats))?;
            Ok(true)
        }
        Command::Verify { seeds, subproblems } => {
            let lemma = run_lemma_suite(seeds)?;
            println!(
                "lemma suite: {} runs, {} violations",
                lemma.runs,
                lemma.violations.len()
            );
            let sub = run_subproblem_suite(subproblems, &[2, 5, 20], 1)?;
            println!(
                "subproblem suite: {} instances, {} violations",
                sub.runs,
                sub.violations.len()
            );
            for v in lemma.violations.iter().chain(&sub.violations) {
                eprintln!("violation: {v}");
            }
            Ok(lemma.is_clean() && sub.is_clean())
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
