use serde::{Deserialize, Serialize};

use super::{gamma_estimate, gowers_norm, known_gamma, tol_disc, GowersOptions};
use crate::autocorr::{autocorrelation, TildeProfile};
use crate::error::{Error, Result};
use crate::grid_core::{rasterize, GridFunction, GridSpec, RasterOptions, ShapeSpec};
use crate::numeric::{gauss_legendre, pairwise_sum};
use crate::rearrange::{radial_rearrangement, rearrangement_1d, Profile1D, ProfileKind};

/// Where the rearranged autocorrelation profile of `E*` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Autocorrelation of the rasterized rearrangement `E*` on the same grid.
    /// Both profiles then carry the same discretization, so a set that is its
    /// own rearrangement gives an exactly flat chain.
    #[default]
    Rasterized,
    /// Lens volumes of the ball of measure `|E|`.
    ClosedForm,
}

/// Profile standing in for the rearranged autocorrelation of the ball.
#[derive(Debug, Clone)]
pub enum ChainReference {
    Profile(Profile1D),
    Analytic(TildeProfile),
}

impl ChainReference {
    fn end(&self) -> f64 {
        match self {
            ChainReference::Profile(p) => p.last_breakpoint(),
            ChainReference::Analytic(t) => t.support_end(),
        }
    }

    fn value(&self, t: f64) -> f64 {
        match self {
            ChainReference::Profile(p) => p.eval(t),
            ChainReference::Analytic(a) => a.value(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    pub reference: Reference,
    /// Also evaluate `||E||` and `||E*||` recursively for the sandwich checks.
    pub with_norms: bool,
    /// `gamma_{k-1,d}`; looked up or estimated when absent.
    pub gamma_prev: Option<f64>,
    pub gowers: GowersOptions,
    /// Overrides `10 (k + 1) / n`.
    pub tol_disc: Option<f64>,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            reference: Reference::Rasterized,
            with_norms: true,
            gamma_prev: None,
            gowers: GowersOptions::default(),
            tol_disc: None,
        }
    }
}

/// The integrals `c_j = integral f_*^{k-j} g^j`, `j = 0..=k`, where `f_*` is the
/// rearranged autocorrelation of `E` and `g` that of `E*`, together with the
/// norm values they sandwich.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub reference: Reference,
    pub terms: Vec<f64>,
    pub gamma_prev: f64,
    /// `||E||_{U_k}^{2^k}`.
    pub power: Option<f64>,
    /// `||E*||_{U_k}^{2^k}`.
    pub power_star: Option<f64>,
    /// `power / gamma_prev`.
    pub lhs: Option<f64>,
    /// `power_star / gamma_prev`.
    pub rhs: Option<f64>,
    pub tol_disc: f64,
    /// Fraction of the measure carried by cells strictly between 0 and 1.
    pub boundary_fraction: f64,
    /// Computed on the centred ball of equal measure instead of an ellipsoid input.
    pub affine_reduced: bool,
}

impl ChainReport {
    /// `(max c_j - min c_j) / max c_j`.
    pub fn spread(&self) -> f64 {
        let max = self.terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.terms.iter().copied().fold(f64::INFINITY, f64::min);
        if max > 0.0 {
            (max - min) / max
        } else {
            0.0
        }
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.terms
            .windows(2)
            .all(|w| w[0] <= w[1] * (1.0 + slack) + f64::MIN_POSITIVE)
    }

    /// Violated inequalities, empty when every check passes.
    ///
    /// The upper end is an equality `gamma_{k-1} c_k = ||E*||^{2^k}` only when
    /// the sets `E* cap (E* + s)` are themselves ellipsoids, i.e. for d = 1 or
    /// k = 2. Otherwise only `<=` holds and that is what is checked.
    pub fn violations(&self, slack: f64) -> Vec<String> {
        let mut out = Vec::new();
        if !self.is_monotone(slack) {
            out.push(format!("chain not nondecreasing: {:?}", self.terms));
        }
        let tol = self.tol_disc;
        let g = self.gamma_prev;
        if let Some(p) = self.power {
            if p > g * self.terms[0] * (1.0 + tol) {
                out.push(format!(
                    "norm power {p:.6e} exceeds gamma * c_0 = {:.6e} beyond tolerance {tol:.3e}",
                    g * self.terms[0]
                ));
            }
        }
        if let Some(ps) = self.power_star {
            let top = g * self.terms[self.k];
            if ps > top * (1.0 + tol) {
                out.push(format!(
                    "rearranged power {ps:.6e} exceeds gamma * c_k = {top:.6e} beyond tolerance"
                ));
            }
            if (self.d == 1 || self.k == 2) && ps < top * (1.0 - tol) {
                out.push(format!(
                    "rearranged power {ps:.6e} differs from gamma * c_k = {top:.6e} beyond tolerance"
                ));
            }
        }
        out
    }
}

/// `c_j = integral a^{k-j} b^j` over `[0, inf)` for `j = 0..=k`.
///
/// Integrated piece by piece between the breakpoints of both profiles with a
/// Gauss-Legendre rule of high enough order that step and linear pieces are
/// exact; the analytic reference is smooth inside each piece.
pub fn chain_terms(a: &Profile1D, b: &ChainReference, k: usize) -> Result<Vec<f64>> {
    if a.final_value() != 0.0 {
        return Err(Error::arg("profile must vanish beyond its last breakpoint"));
    }
    if let ChainReference::Profile(p) = b {
        if p.final_value() != 0.0 {
            return Err(Error::arg(
                "reference profile must vanish beyond its last breakpoint",
            ));
        }
    }
    let mut cuts: Vec<f64> = a.breakpoints().to_vec();
    if let ChainReference::Profile(p) = b {
        cuts.extend_from_slice(p.breakpoints());
    }
    cuts.push(0.0);
    cuts.push(b.end());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let both_steps = a.kind() == ProfileKind::Step
        && matches!(b, ChainReference::Profile(p) if p.kind() == ProfileKind::Step);
    let (nodes, weights) = gauss_legendre(k + 4);
    let mut parts: Vec<Vec<f64>> = vec![Vec::with_capacity(cuts.len()); k + 1];
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let len = hi - lo;
        if len <= 0.0 {
            continue;
        }
        if both_steps {
            let (x, y) = (a.eval(lo), b.value(lo));
            for (j, part) in parts.iter_mut().enumerate() {
                part.push(len * x.powi((k - j) as i32) * y.powi(j as i32));
            }
        } else {
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * len;
            let mut acc = vec![0.0; k + 1];
            for (z, wt) in nodes.iter().zip(&weights) {
                let t = mid + half * z;
                let (x, y) = (a.eval(t), b.value(t));
                for (j, s) in acc.iter_mut().enumerate() {
                    *s += wt * x.powi((k - j) as i32) * y.powi(j as i32);
                }
            }
            for (part, s) in parts.iter_mut().zip(acc) {
                part.push(s * half);
            }
        }
    }
    Ok(parts.iter().map(|p| pairwise_sum(p)).collect())
}

fn gamma_previous(k: usize, d: usize, opts: &ChainOptions) -> Result<f64> {
    if let Some(g) = opts.gamma_prev {
        return Ok(g);
    }
    match known_gamma(k - 1, d) {
        Some(g) => Ok(g),
        None => Ok(gamma_estimate(k - 1, d, opts.gowers.budget)?.value),
    }
}

pub fn chain_report(e: &GridFunction, k: usize, opts: &ChainOptions) -> Result<ChainReport> {
    if k < 2 {
        return Err(Error::arg(format!("chain needs k >= 2, got {k}")));
    }
    let spec = *e.spec();
    let m = e.measure();
    if !(m > 0.0) {
        return Err(Error::ZeroMeasure);
    }
    if !e.is_indicator() {
        return Err(Error::arg(
            "chain is defined for indicators (values in [0, 1])",
        ));
    }
    let fractional: f64 = e
        .values()
        .iter()
        .filter(|&&v| v > 0.0 && v < 1.0)
        .fold(0.0, |a, v| a + v);
    let boundary_fraction = fractional * spec.cell_volume() / m;
    if boundary_fraction > 0.05 {
        log::warn!(
            "{:.1}% of the measure sits in fractional boundary cells; refine the grid",
            100.0 * boundary_fraction
        );
    }

    let f_star = rearrangement_1d(&autocorrelation(e)?.values);
    let star = radial_rearrangement(e);
    let reference = match opts.reference {
        Reference::Rasterized => {
            ChainReference::Profile(rearrangement_1d(&autocorrelation(&star)?.values))
        }
        Reference::ClosedForm => ChainReference::Analytic(TildeProfile::new(spec.dim(), m)?),
    };
    let terms = chain_terms(&f_star, &reference, k)?;
    let gamma_prev = gamma_previous(k, spec.dim(), opts)?;
    let (power, power_star) = if opts.with_norms {
        (
            Some(gowers_norm(e, k, &opts.gowers)?.power_value),
            Some(gowers_norm(&star, k, &opts.gowers)?.power_value),
        )
    } else {
        (None, None)
    };
    Ok(ChainReport {
        k,
        d: spec.dim(),
        n: spec.n(),
        reference: opts.reference,
        terms,
        gamma_prev,
        power,
        power_star,
        lhs: power.map(|p| p / gamma_prev),
        rhs: power_star.map(|p| p / gamma_prev),
        tol_disc: opts.tol_disc.unwrap_or_else(|| tol_disc(k, spec.n())),
        boundary_fraction,
        affine_reduced: false,
    })
}

/// Chain report for an analytic shape. An ellipsoid is replaced by the centred
/// ball of equal measure: the unimodular map between them leaves every `c_j`
/// and both norms unchanged, and a binary ball raster is exactly its own
/// rearrangement, so the flat chain is not blurred by the grid.
pub fn chain_report_for_shape(
    shape: &ShapeSpec,
    grid: &GridSpec,
    k: usize,
    opts: &ChainOptions,
) -> Result<ChainReport> {
    match (shape.as_ellipsoid(), shape.exact_measure()) {
        (Some(_), Some(m)) => {
            let ball = ShapeSpec::centered_ball(grid.dim(), m);
            let e = rasterize(&ball, grid, &RasterOptions::binary())?;
            let mut report = chain_report(&e, k, opts)?;
            report.affine_reduced = true;
            Ok(report)
        }
        _ => chain_report(&rasterize(shape, grid, &RasterOptions::default())?, k, opts),
    }
}

/// Chain report from a stored rearranged autocorrelation profile `f_*` of a
/// set in dimension `d`, sampled on a grid with `n` cells per axis. The set
/// itself is unavailable, so the reference is the closed-form profile of the
/// ball of measure `f_*(0) = |E|` and no norms are evaluated.
pub fn chain_report_for_profile(
    f_star: &Profile1D,
    d: usize,
    n: usize,
    k: usize,
    opts: &ChainOptions,
) -> Result<ChainReport> {
    if k < 2 {
        return Err(Error::arg(format!("chain needs k >= 2, got {k}")));
    }
    if !f_star.is_nonincreasing() {
        return Err(Error::arg(
            "profile is not nonincreasing, so it is not a rearrangement",
        ));
    }
    let m = f_star.eval(0.0);
    if !(m > 0.0) {
        return Err(Error::ZeroMeasure);
    }
    let reference = ChainReference::Analytic(TildeProfile::new(d, m)?);
    Ok(ChainReport {
        k,
        d,
        n,
        reference: Reference::ClosedForm,
        terms: chain_terms(f_star, &reference, k)?,
        gamma_prev: gamma_previous(k, d, opts)?,
        power: None,
        power_star: None,
        lhs: None,
        rhs: None,
        tol_disc: opts.tol_disc.unwrap_or_else(|| tol_disc(k, n)),
        boundary_fraction: 0.0,
        affine_reduced: false,
    })
}
