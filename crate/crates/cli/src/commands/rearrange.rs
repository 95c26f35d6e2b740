use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gowers_lab::autocorr::autocorrelation;
use gowers_lab::grid_core::{write_grid, GridSpec};
use gowers_lab::numeric::relative_difference;
use gowers_lab::rearrange::{bathtub_oracle, cumulative_f, radial_rearrangement, rearrangement_1d};
use serde::Serialize;

use crate::failure::Failure;
use crate::input::{InputArgs, Source};
use crate::output::{emit, require_dir, write_file, OutputArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// The autocorrelation s -> integral e(x) e(x + s) dx, i.e. |E cap (E + s)| for sets.
    Autocorrelation,
    /// The input function itself.
    Input,
}

#[derive(Debug, Args)]
pub struct RearrangeArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Function whose rearrangements are written.
    #[arg(long, value_enum, default_value_t = Target::Autocorrelation)]
    pub of: Target,

    /// Existing directory receiving rearranged.gwrs (f*), decreasing.tsv (f_*)
    /// and cumulative.tsv (F).
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,

    /// Compare F with the greedy maximum of integral f over sets of measure t
    /// at --bathtub-points values of t; exit with code 4 on disagreement.
    #[arg(long)]
    pub bathtub_check: bool,

    #[arg(long, default_value_t = 64)]
    pub bathtub_points: usize,

    /// Relative tolerance of the bathtub check.
    #[arg(long, default_value_t = 1e-12)]
    pub bathtub_tol: f64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct BathtubRecord {
    points: usize,
    max_relative_gap: f64,
    tol: f64,
}

#[derive(Debug, Serialize)]
struct RearrangeRecord {
    command: &'static str,
    source: Source,
    of: Target,
    grid: GridSpec,
    /// Integral of the profiled function.
    integral: f64,
    /// Length of the support of f_*.
    support: f64,
    /// File name to SHA-256 of its contents.
    files: BTreeMap<String, String>,
    bathtub: Option<BathtubRecord>,
}

pub fn run(args: &RearrangeArgs) -> Result<(), Failure> {
    require_dir(&args.out_dir)?;
    if args.bathtub_check && args.bathtub_points < 2 {
        return Err(Failure::Config(
            "--bathtub-points must be at least 2".into(),
        ));
    }
    let loaded = args.input.load()?;
    let f = match args.of {
        Target::Autocorrelation => autocorrelation(&loaded.function)?.values,
        Target::Input => loaded.function,
    };
    let star = radial_rearrangement(&f);
    let decreasing = rearrangement_1d(&f);
    let cumulative = cumulative_f(&decreasing)?;

    let mut grid_bytes = Vec::new();
    write_grid(&mut grid_bytes, &star)?;
    let mut files = BTreeMap::new();
    for (name, bytes) in [
        ("rearranged.gwrs", grid_bytes),
        ("decreasing.tsv", decreasing.to_table().into_bytes()),
        ("cumulative.tsv", cumulative.to_table().into_bytes()),
    ] {
        files.insert(
            name.to_string(),
            write_file(&args.out_dir.join(name), &bytes)?,
        );
    }

    let support = decreasing.last_breakpoint();
    let bathtub = if args.bathtub_check {
        let mut gap = 0.0f64;
        for i in 0..args.bathtub_points {
            let t = support * i as f64 / (args.bathtub_points - 1) as f64;
            let greedy = bathtub_oracle(&f, t)?;
            gap = gap.max(relative_difference(greedy, cumulative.eval(t)));
        }
        Some(BathtubRecord {
            points: args.bathtub_points,
            max_relative_gap: gap,
            tol: args.bathtub_tol,
        })
    } else {
        None
    };
    let record = RearrangeRecord {
        command: "rearrange",
        source: loaded.source,
        of: args.of,
        grid: *f.spec(),
        integral: f.measure(),
        support,
        files,
        bathtub,
    };
    emit(&args.output, &record)?;
    if let Some(b) = &record.bathtub {
        if !(b.max_relative_gap <= b.tol) {
            return Err(Failure::Assertion(format!(
                "bathtub maximum and F differ by {:.3e} relative (tolerance {:.1e})",
                b.max_relative_gap, b.tol
            )));
        }
    }
    Ok(())
}
