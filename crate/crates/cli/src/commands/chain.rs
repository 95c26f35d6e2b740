use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use gowers_lab::gowers::{
    chain_report, chain_report_for_profile, chain_report_for_shape, ChainOptions, ChainReport,
    GowersOptions, Reference, DEFAULT_BUDGET,
};
use gowers_lab::grid_core::rasterize;
use gowers_lab::rearrange::Profile1D;
use serde::Serialize;

use crate::failure::Failure;
use crate::input::{read_bytes, source, InputArgs, Source};
use crate::output::{emit, OutputArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReferenceArg {
    /// Autocorrelation of the rasterized rearrangement on the same grid.
    Rasterized,
    /// Lens volumes of the ball of equal measure.
    ClosedForm,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Stored rearranged autocorrelation f_* (two-column profile table, as
    /// written by `rearrange`) instead of a set; needs --d and uses the
    /// closed-form reference.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["shape", "grid"])]
    pub profile: Option<PathBuf>,

    /// Order k >= 2.
    #[arg(long, default_value_t = 2)]
    pub k: usize,

    #[arg(long, value_enum, default_value_t = ReferenceArg::Rasterized)]
    pub reference: ReferenceArg,

    /// Skip the norms of E and E*, and with them the sandwich checks.
    #[arg(long)]
    pub no_norms: bool,

    /// Extremal constant gamma_{k-1,d}; looked up or estimated when unset.
    #[arg(long)]
    pub gamma_prev: Option<f64>,

    /// Relative tolerance of the sandwich checks [default: 10 (k + 1) / n].
    #[arg(long)]
    pub tol_disc: Option<f64>,

    /// Relative decrease tolerated between consecutive chain terms
    /// [default: 1e-8 with the rasterized reference; the discretization
    /// tolerance with the closed-form one, whose continuum profile differs
    /// from a grid profile by that order].
    #[arg(long)]
    pub slack: Option<f64>,

    /// Exit with code 4 if the chain decreases beyond --slack, a sandwich
    /// inequality fails, or the profile is not a valid rearrangement.
    #[arg(long)]
    pub assert_monotone: bool,

    /// Cost budget in floating-point operations; exceeding it exits with code 3.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: f64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct ChainRecord {
    command: &'static str,
    source: Source,
    #[serde(flatten)]
    report: ChainReport,
    spread: f64,
    slack: f64,
    monotone: bool,
    violations: Vec<String>,
}

impl ChainArgs {
    fn options(&self) -> ChainOptions {
        ChainOptions {
            reference: match self.reference {
                ReferenceArg::Rasterized => Reference::Rasterized,
                ReferenceArg::ClosedForm => Reference::ClosedForm,
            },
            with_norms: !self.no_norms,
            gamma_prev: self.gamma_prev,
            gowers: GowersOptions {
                budget: self.budget,
                ..Default::default()
            },
            tol_disc: self.tol_disc,
        }
    }

    fn validate(&self) -> Result<(), Failure> {
        if self.k < 2 {
            return Err(Failure::Config(format!(
                "--k must be at least 2, got {}",
                self.k
            )));
        }
        if self.slack.is_some_and(|s| !(s >= 0.0)) {
            return Err(Failure::Config("--slack must be nonnegative".into()));
        }
        if self.profile.is_none() && !self.input.is_given() {
            return Err(Failure::Config(
                "give one of --shape, --grid or --profile".into(),
            ));
        }
        if self.profile.is_some() && self.input.d.is_none() {
            return Err(Failure::Config("--profile needs --d".into()));
        }
        Ok(())
    }
}

/// Under `--assert-monotone` a profile that is not a valid rearrangement is
/// an assertion failure; otherwise it is an input error.
fn profile_report(args: &ChainArgs, path: &Path) -> Result<(ChainReport, Source), Failure> {
    let bytes = read_bytes(path)?;
    let src = source("profile", path, &bytes);
    let invalid = |m: String| {
        let m = format!("{}: {m}", path.display());
        if args.assert_monotone {
            Failure::Assertion(m)
        } else {
            Failure::Config(m)
        }
    };
    let profile = Profile1D::read_table(&bytes[..]).map_err(|e| invalid(e.to_string()))?;
    if !profile.is_nonincreasing() {
        return Err(invalid("profile is not nonincreasing".into()));
    }
    let d = args.input.d.expect("validated");
    let report = chain_report_for_profile(&profile, d, args.input.n, args.k, &args.options())
        .map_err(|e| match e {
            gowers_lab::Error::BudgetExceeded { .. } => Failure::from(e),
            other => invalid(other.to_string()),
        })?;
    Ok((report, src))
}

pub fn run(args: &ChainArgs) -> Result<(), Failure> {
    args.validate()?;
    let (report, src) = if let Some(path) = &args.profile {
        profile_report(args, path)?
    } else if let Some(path) = &args.input.shape {
        let (shape, grid, src) = args.input.shape_and_grid(path)?;
        // ellipsoids go through the equal-measure ball; others use --raster
        let report = if shape.as_ellipsoid().is_some() {
            chain_report_for_shape(&shape, &grid, args.k, &args.options())?
        } else {
            let e = rasterize(&shape, &grid, &args.input.raster_options())?;
            chain_report(&e, args.k, &args.options())?
        };
        (report, src)
    } else {
        let loaded = args.input.load()?;
        (
            chain_report(&loaded.function, args.k, &args.options())?,
            loaded.source,
        )
    };
    let slack = args.slack.unwrap_or(match report.reference {
        Reference::Rasterized => 1e-8,
        Reference::ClosedForm => report.tol_disc,
    });
    let violations = report.violations(slack);
    let record = ChainRecord {
        command: "chain",
        source: src,
        spread: report.spread(),
        slack,
        monotone: report.is_monotone(slack),
        violations: violations.clone(),
        report,
    };
    emit(&args.output, &record)?;
    if args.assert_monotone && !violations.is_empty() {
        return Err(Failure::Assertion(violations.join("; ")));
    }
    Ok(())
}
