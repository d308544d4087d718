use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use umaf::gen::GenSpec;
use umaf::{BranchStrategy, PricingVariant, SolverConfig};
use umaf_cli::pipeline::{self, SolveOptions};
use umaf_cli::SolveReport;

/// Exact unrooted maximum agreement forests by branch-and-price.
#[derive(Parser, Debug)]
#[command(name = "umaf", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a tree pair exactly.
    Solve {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        solver: SolverArgs,
        /// Print the JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Generate a random tree pair with k TBR moves.
    Gen {
        #[arg(long)]
        taxa: usize,
        /// Path bias in percent (50 balanced-ish, 90 path-like).
        #[arg(long)]
        skew: u32,
        #[arg(long)]
        tbr: usize,
        #[arg(long)]
        seed: u64,
        /// Output prefix: writes <out>.t1.nwk, <out>.t2.nwk and <out>.manifest.
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply the subtree and chain reduction rules.
    Reduce {
        #[command(flatten)]
        pair: Pair,
        /// Output prefix: writes <out>.t1.nwk, <out>.t2.nwk and <out>.trace.
        #[arg(long)]
        out: PathBuf,
    },
    /// Brute-force uMAF for small pairs (at most 8 taxa).
    Oracle {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        zero_times: bool,
    },
    /// Solve every instance of a manifest, one JSON line each.
    Bench {
        /// One "t s k seed" line per instance.
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Args, Debug)]
struct Pair {
    #[arg(long)]
    tree1: PathBuf,
    #[arg(long)]
    tree2: PathBuf,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Reduce first, then lift the forest back.
    #[arg(long)]
    reduce: bool,
    #[arg(long, default_value = "ratio")]
    strategy: BranchStrategy,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Seconds; 0 disables the limit.
    #[arg(long, default_value_t = 300.0)]
    time_limit: f64,
    #[arg(long, default_value = "pinned")]
    variant: PricingVariant,
    /// Report all timings as 0 so repeated runs are byte-identical.
    #[arg(long)]
    zero_times: bool,
}

impl SolverArgs {
    fn options(&self) -> Result<SolveOptions> {
        anyhow::ensure!(self.epsilon >= 0.0 && self.epsilon.is_finite(), "epsilon must be a finite non-negative number");
        anyhow::ensure!(self.time_limit >= 0.0 && self.time_limit.is_finite(), "time limit must be a finite non-negative number");
        let config = SolverConfig {
            strategy: self.strategy,
            epsilon: self.epsilon,
            time_limit: (self.time_limit > 0.0).then(|| Duration::from_secs_f64(self.time_limit)),
            variant: self.variant,
            ..SolverConfig::default()
        };
        Ok(SolveOptions { config, reduce: self.reduce, zero_times: self.zero_times })
    }
}

const EXIT_TIME_LIMIT: u8 = 3;

fn emit(report: &SolveReport, json: bool) -> Result<()> {
    let mut out = io::stdout().lock();
    if json {
        writeln!(out, "{}", serde_json::to_string(report)?)?;
    } else {
        write!(out, "{report}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { pair, solver, json } => {
            let (t1, t2) = (pipeline::read_tree(&pair.tree1)?, pipeline::read_tree(&pair.tree2)?);
            let report = pipeline::solve_pair(&t1, &t2, &solver.options()?)?;
            emit(&report, json)?;
            Ok(if report.optimal { ExitCode::SUCCESS } else { ExitCode::from(EXIT_TIME_LIMIT) })
        }
        Command::Gen { taxa, skew, tbr, seed, out } => {
            let spec = GenSpec { t: taxa, s: skew, k: tbr, seed };
            for p in pipeline::write_generated(&spec, &out)? {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Reduce { pair, out } => {
            let (t1, t2) = (pipeline::read_tree(&pair.tree1)?, pipeline::read_tree(&pair.tree2)?);
            let r = umaf::reduce::reduce(&t1, &t2)?;
            pipeline::write_reduced(&r, &out)?;
            println!("{} -> {} taxa in {} steps", t1.num_taxa(), r.t1.num_taxa(), r.trace.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { pair, json, zero_times } => {
            let (t1, t2) = (pipeline::read_tree(&pair.tree1)?, pipeline::read_tree(&pair.tree2)?);
            emit(&pipeline::oracle_pair(&t1, &t2, zero_times)?, json)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { manifest, out, jobs, solver } => {
            let text = fs::read_to_string(&manifest).with_context(|| format!("reading {}", manifest.display()))?;
            let specs = pipeline::parse_manifest(&text)?;
            let mut file = io::BufWriter::new(fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?);
            let all_optimal = pipeline::bench(&specs, &solver.options()?, jobs, &mut file)?;
            Ok(if all_optimal { ExitCode::SUCCESS } else { ExitCode::from(EXIT_TIME_LIMIT) })
        }
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
