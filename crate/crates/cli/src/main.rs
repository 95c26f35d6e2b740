//! `gowers-lab`: uniformity norms of sets in R^d, their symmetrization and
//! near-ellipsoid stability sweeps from the command line.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod commands;
mod failure;
mod input;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::{chain, norm, rearrange, stability};
use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "gowers-lab", version, about, long_about = None)]
#[command(
    after_help = "Exit codes: 0 success, 2 invalid configuration or input, \
3 cost budget exceeded, 4 assertion failed."
)]
struct Cli {
    /// Cap on worker threads; all cores when unset.
    #[arg(long, global = true, env = "GWRS_THREADS", value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gowers uniformity norm ||E||_{U_k} of a set or grid function.
    ///
    /// The 2^k-th power is the integral of prod_w f(x + w.h) over x in R^d
    /// and h in (R^d)^k, w ranging over {0,1}^k; ||f||_{U_1} = |integral f|.
    /// It is evaluated recursively through
    /// ||f||_{U_k}^{2^k} = integral ||f f(. + s)||_{U_{k-1}}^{2^{k-1}} ds,
    /// or for k = 2 as the L^4 norm of the Fourier transform.
    Norm(norm::NormArgs),

    /// Chain of integrals comparing a set with its symmetric rearrangement.
    ///
    /// With f_* the nonincreasing rearrangement of s -> |E cap (E + s)| and g
    /// the same profile for the rearranged set E*, reports
    /// c_j = integral f_*^{k-j} g^j for j = 0..k, which must be nondecreasing,
    /// together with the sandwich
    /// ||E||_{U_k}^{2^k} <= gamma_{k-1} c_0 and ||E*||_{U_k}^{2^k} <= gamma_{k-1} c_k,
    /// where gamma_{k-1} is the extremal U_{k-1} constant of the unit ball.
    Chain(chain::ChainArgs),

    /// Rearrangement profiles: f*, f_* and the cumulative bathtub function F.
    ///
    /// f* is the symmetric decreasing rearrangement on the grid, f_* the
    /// nonincreasing rearrangement on [0, inf) and F(t) = integral_0^t f_*,
    /// which equals the largest integral of f over sets of measure t.
    Rearrange(rearrange::RearrangeArgs),

    /// Stability sweep over randomly perturbed ellipses or ellipsoids.
    ///
    /// For each (amplitude, seed) records the deficit
    /// delta = 1 - ||E||_{U_k}^{2^k} / (gamma_k |E|^{k+1}) and the distance
    /// epsilon = |E sym-diff ellipsoid| / |E| to the moment-fit ellipsoid.
    Stability(stability::StabilityArgs),
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Norm(a) => norm::run(&a),
        Command::Chain(a) => chain::run(&a),
        Command::Rearrange(a) => rearrange::run(&a),
        Command::Stability(a) => stability::run(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(cli);
    log::info!("finished in {:.2?}", start.elapsed());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
