use clap::{Args, ValueEnum};
use gowers_lab::gowers::{
    gowers_norm, u2_via_fourier, GowersOptions, GowersResult, DEFAULT_BUDGET,
};
use gowers_lab::grid_core::{GridFunction, GridSpec};
use gowers_lab::rearrange::radial_rearrangement;
use serde::Serialize;

use crate::failure::Failure;
use crate::input::{InputArgs, Source};
use crate::output::{emit, OutputArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    /// Recursion over lattice shifts, any k.
    Recursive,
    /// Fourier L^4 identity, k = 2 only.
    Fourier,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Order k >= 1.
    #[arg(long, default_value_t = 2)]
    pub k: usize,

    #[arg(long, value_enum, default_value_t = NormMethod::Recursive)]
    pub method: NormMethod,

    /// Also evaluate the symmetric decreasing rearrangement E* and the ratio ||E||/||E*||.
    #[arg(long)]
    pub compare_star: bool,

    /// Cost budget in floating-point operations; exceeding it exits with code 3.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: f64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct StarRecord {
    power_value: f64,
    norm_value: f64,
    /// `power / power_star`.
    ratio: f64,
    /// `1 - ratio`.
    deficit: f64,
    /// `1 - ratio^{2^-k}`.
    deficit_norm: f64,
}

#[derive(Debug, Serialize)]
struct NormRecord {
    command: &'static str,
    source: Source,
    grid: GridSpec,
    k: usize,
    method: NormMethod,
    measure: f64,
    power_value: f64,
    norm_value: f64,
    star: Option<StarRecord>,
}

fn evaluate(f: &GridFunction, args: &NormArgs) -> Result<GowersResult, Failure> {
    match args.method {
        NormMethod::Recursive => {
            let opts = GowersOptions {
                budget: args.budget,
                ..Default::default()
            };
            Ok(gowers_norm(f, args.k, &opts)?)
        }
        NormMethod::Fourier => Ok(u2_via_fourier(f)?),
    }
}

pub fn run(args: &NormArgs) -> Result<(), Failure> {
    if args.k == 0 {
        return Err(Failure::Config("--k must be at least 1".into()));
    }
    if args.method == NormMethod::Fourier && args.k != 2 {
        return Err(Failure::Config(format!(
            "--method fourier needs --k 2, got {}",
            args.k
        )));
    }
    if !(args.budget > 0.0) {
        return Err(Failure::Config("--budget must be positive".into()));
    }
    let loaded = args.input.load()?;
    let f = &loaded.function;
    let result = evaluate(f, args)?;
    let star = if args.compare_star {
        let s = evaluate(&radial_rearrangement(f), args)?;
        let ratio = if s.power_value > 0.0 {
            result.power_value / s.power_value
        } else {
            1.0
        };
        Some(StarRecord {
            power_value: s.power_value,
            norm_value: s.norm_value,
            ratio,
            deficit: 1.0 - ratio,
            deficit_norm: 1.0 - ratio.powf(1.0 / (1u64 << args.k) as f64),
        })
    } else {
        None
    };
    let record = NormRecord {
        command: "norm",
        source: loaded.source,
        grid: *f.spec(),
        k: args.k,
        method: args.method,
        measure: f.measure(),
        power_value: result.power_value,
        norm_value: result.norm_value,
        star,
    };
    emit(&args.output, &record)
}
