//! `tritronquee`: series tables, line and sector solves, the Stokes difference
//! fit, coefficient asymptotics, model-curve points and a self-check.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 invalid configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tritronquee::{Error, Result};

use config::{CoeffAsymArgs, CurveArgs, FileConfig, Job, LineArgs, Overlay, SectorArgs, SeriesArgs, StokesArgs, OUT_ENV};
use run::{diagnostic, exit_code, job_from_manifest, Context, Run};

#[derive(Parser, Debug)]
#[command(name = "tritronquee", version, about = "Tritronquée solutions of the second Painlevé-I equation")]
struct Cli {
    /// TOML file supplying any flag; flags given here win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root [env: TRITRONQUEE_OUT] [default: tritronquee-out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Recompute instead of reusing cached solutions
    #[arg(long, global = true)]
    no_cache: bool,
    /// Worker threads for sector rays [default: all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficients a_n of the series in x^{-1/3}
    Series(SeriesArgs),
    /// Solve the boundary value problem on a line
    SolveLine(LineArgs),
    /// Field of a tritronquée solution over a sector
    Sector(SectorArgs),
    /// Exponentially small difference between U0 and the series along arg x = 3π
    StokesDiff(StokesArgs),
    /// Coefficients against their large-N asymptotics
    CoeffAsym(CoeffAsymArgs),
    /// Branch points and phase values of the model curve at (x, t)
    Curve(CurveArgs),
    /// Run the invariant suite; nonzero exit on any failure
    Check,
    /// Re-run the job recorded in a manifest
    Replay {
        manifest: PathBuf,
    },
}

fn resolve(cli: &Cli, file: FileConfig) -> Result<(Context, Option<usize>, Job)> {
    let root = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("tritronquee-out"));
    let ctx = Context { root, cache: !cli.no_cache && file.cache.unwrap_or(true) };
    let threads = cli.threads.or(file.threads);
    let job = match &cli.command {
        Command::Series(a) => Job::Series(a.clone().over(file.series).resolve()?),
        Command::SolveLine(a) => Job::SolveLine(a.clone().over(file.solve_line).resolve()?),
        Command::Sector(a) => Job::Sector(a.clone().over(file.sector).resolve()?),
        Command::StokesDiff(a) => Job::StokesDiff(a.clone().over(file.stokes_diff).resolve()?),
        Command::CoeffAsym(a) => Job::CoeffAsym(a.clone().over(file.coeff_asym).resolve()?),
        Command::Curve(a) => Job::Curve(a.clone().over(file.curve).resolve()?),
        Command::Check => Job::Check,
        Command::Replay { manifest } => job_from_manifest(manifest)?,
    };
    Ok((ctx, threads, job))
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("{}", diagnostic(err));
    ExitCode::from(exit_code(err) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(p) => match FileConfig::load(p) {
            Ok(f) => f,
            Err(e) => return fail(&e),
        },
        None => FileConfig::default(),
    };
    let (ctx, threads, job) = match resolve(&cli, file) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if let Some(n) = threads {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            return fail(&Error::InvalidArgument(format!("cannot start {n} worker threads")));
        }
    }
    let mut run = Run::new(&ctx, job);
    match commands::execute(&mut run) {
        Ok(report) => {
            print!("{}", report.stdout);
            let ok = report.ok;
            match run.finish(report.summary) {
                Ok(dir) => eprintln!("wrote {}", dir.display()),
                Err(e) => return fail(&e),
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            run.fail(&e);
            fail(&e)
        }
    }
}
