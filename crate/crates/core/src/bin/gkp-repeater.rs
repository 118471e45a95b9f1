use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gkp_repeater::app::{exit_code, load_config, run, Overrides};

#[derive(Parser, Debug)]
#[command(name = "gkp-repeater", version, about = "GKP one-way quantum repeater simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (also holds the estimate cache).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Decimal digits for the coefficient solver.
    #[arg(long, global = true)]
    precision: Option<u32>,

    /// Largest number of trials per estimate.
    #[arg(long, global = true)]
    budget: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Achievable distance of GKP-only chains from the closed-form model.
    Analytic,
    /// Monte-Carlo estimate of logical flip rates for one chain.
    Simulate,
    /// Logical error of a single lossy link for the four encodings.
    SingleLink,
    /// Cheapest layout per distance for hybrid and type-A-only chains.
    Cost,
    /// Monte-Carlo estimates over a grid of physical parameters and layouts.
    Sweep,
}

impl Command {
    fn kind(self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::Simulate => "simulate",
            Command::SingleLink => "single-link",
            Command::Cost => "cost",
            Command::Sweep => "sweep",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        precision: cli.precision,
        budget: cli.budget,
    };
    let result = load_config(cli.command.kind(), cli.config.as_deref()).and_then(|c| run(&c, &overrides));
    match result {
        Ok(summary) => {
            for f in &summary.files {
                println!("{}", f.display());
            }
            if summary.cache_hits > 0 {
                eprintln!("{} estimate(s) served from cache", summary.cache_hits);
            }
            if summary.budget_exceeded {
                eprintln!("warning: sample budget reached before convergence");
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
