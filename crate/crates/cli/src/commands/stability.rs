use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use gowers_lab::gowers::{GowersOptions, DEFAULT_BUDGET};
use gowers_lab::stability::{
    binned_curve_is_monotone, binned_means, stability_sweep, sweep_spearman, write_plot_table,
    FitOptions, SweepConfig,
};
use serde::Serialize;

use crate::failure::Failure;
use crate::output::{canonical_line, emit, require_dir, write_file, OutputArgs};

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,

    /// Cells per axis.
    #[arg(long, default_value_t = 256)]
    pub n: usize,

    /// Half-width L of the grid [-L, L]^d.
    #[arg(long, default_value_t = 1.0)]
    pub extent: f64,

    /// Order k >= 2.
    #[arg(long, default_value_t = 2)]
    pub k: usize,

    /// Radial perturbation amplitudes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.2, 0.4])]
    pub amplitudes: Vec<f64>,

    /// Random seeds, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = 0..10)]
    pub seeds: Vec<u64>,

    /// Extremal constant gamma_{k,d}; looked up or estimated when unset.
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Refine each moment-fit ellipsoid by coordinate descent on the symmetric difference.
    #[arg(long)]
    pub refine: bool,

    /// Cost budget in floating-point operations per norm; exceeding it exits with code 3.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: f64,

    /// Existing directory receiving records.jsonl and plot.tsv.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,

    /// Exit with code 4 unless the binned mean epsilon is nondecreasing in delta.
    #[arg(long)]
    pub assert_monotone: bool,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    command: &'static str,
    config: SweepConfig,
    records: usize,
    spearman: f64,
    /// Quintile means `(delta, epsilon)`.
    binned: Vec<(f64, f64)>,
    binned_monotone: bool,
    files: BTreeMap<String, String>,
}

pub fn run(args: &StabilityArgs) -> Result<(), Failure> {
    require_dir(&args.out_dir)?;
    if args.amplitudes.is_empty() || args.seeds.is_empty() {
        return Err(Failure::Config(
            "--amplitudes and --seeds must be nonempty".into(),
        ));
    }
    let config = SweepConfig {
        d: args.d,
        n: args.n,
        extent: args.extent,
        k: args.k,
        amplitudes: args.amplitudes.clone(),
        seeds: args.seeds.clone(),
        gamma: args.gamma,
        fit: FitOptions {
            refine: args.refine,
            ..Default::default()
        },
        gowers: GowersOptions {
            budget: args.budget,
            ..Default::default()
        },
    };
    let records = stability_sweep(&config)?;

    let mut lines = String::new();
    for r in &records {
        lines.push_str(&canonical_line(r)?);
    }
    let mut plot = Vec::new();
    write_plot_table(&records, &mut plot)?;
    let mut files = BTreeMap::new();
    files.insert(
        "records.jsonl".to_string(),
        write_file(&args.out_dir.join("records.jsonl"), lines.as_bytes())?,
    );
    files.insert(
        "plot.tsv".to_string(),
        write_file(&args.out_dir.join("plot.tsv"), &plot)?,
    );

    let (x, y): (Vec<f64>, Vec<f64>) = records.iter().map(|r| (r.deficit.delta, r.epsilon)).unzip();
    let summary = SweepSummary {
        command: "stability",
        config,
        records: records.len(),
        spearman: sweep_spearman(&records),
        binned: binned_means(&x, &y, 5),
        binned_monotone: binned_curve_is_monotone(&records),
        files,
    };
    emit(&args.output, &summary)?;
    if args.assert_monotone && !summary.binned_monotone {
        return Err(Failure::Assertion(format!(
            "binned epsilon is not nondecreasing in delta: {:?}",
            summary.binned
        )));
    }
    Ok(())
}
