//! Gowers uniformity norms on `R^d` by the inductive definition
//! `||f||_{U_{k+1}}^{2^{k+1}} = integral ||f f(. + s)||_{U_k}^{2^k} ds`
//! with the base case `||f||_{U_1} = |integral f|`, a Fourier evaluation of
//! `U_2`, the extremal constants for ellipsoids and the chain of integrals
//! comparing a set with its rearrangement.

mod chain;

pub use chain::{
    chain_report, chain_report_for_profile, chain_report_for_shape, chain_terms, ChainOptions,
    ChainReference, ChainReport, Reference,
};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_core::{rasterize, GridFunction, GridSpec, RasterOptions, ShapeSpec, MAX_DIM};
use crate::numeric::{fft_nd, next_fast_len, pairwise_sum, par_map};

/// Default cost budget, in rough floating-point operations.
pub const DEFAULT_BUDGET: f64 = 2e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Level2 {
    /// Direct sums for small supports, FFT otherwise.
    #[default]
    Auto,
    Direct,
    Fft,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GowersOptions {
    pub budget: f64,
    /// How the innermost autocorrelation (the `U_2` level) is evaluated.
    pub level2: Level2,
}

impl Default for GowersOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            level2: Level2::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Recursive,
    FourierU2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GowersResult {
    pub k: usize,
    /// `||f||_{U_k}^{2^k}`.
    pub power_value: f64,
    pub norm_value: f64,
    pub grid: GridSpec,
    pub method: Method,
}

impl GowersResult {
    fn new(k: usize, power_value: f64, grid: GridSpec, method: Method) -> Self {
        let norm_value = power_value.powf(1.0 / (1u64 << k) as f64);
        Self {
            k,
            power_value,
            norm_value,
            grid,
            method,
        }
    }
}

/// Dense row-major block of values, padded to three axes.
#[derive(Debug, Clone)]
struct Block {
    shape: [usize; MAX_DIM],
    values: Vec<f64>,
}

impl Block {
    fn from_grid(f: &GridFunction) -> Option<Block> {
        let (lo, hi) = f.support_bounds()?;
        let spec = f.spec();
        let mut shape = [1; MAX_DIM];
        for a in 0..spec.dim() {
            shape[a] = hi[a] - lo[a] + 1;
        }
        let mut values = Vec::with_capacity(shape.iter().product());
        for i in 0..shape[0] {
            for j in 0..shape[1] {
                for k in 0..shape[2] {
                    values.push(f.get(&[lo[0] + i, lo[1] + j, lo[2] + k]));
                }
            }
        }
        Some(Block { shape, values })
    }

    fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.shape[1] + j) * self.shape[2] + k]
    }

    fn sum(&self) -> f64 {
        pairwise_sum(&self.values)
    }

    /// Number of lattice shifts with possibly nonempty overlap.
    fn shift_count(&self) -> f64 {
        self.shape.iter().map(|&w| (2 * w - 1) as f64).product()
    }

    /// `x -> f(x) f(x + s)`, trimmed to its nonzero box. `None` when identically zero.
    fn shifted_product(&self, s: [i64; MAX_DIM]) -> Option<Block> {
        let mut lo = [0usize; MAX_DIM];
        let mut hi = [0usize; MAX_DIM];
        for a in 0..MAX_DIM {
            let w = self.shape[a] as i64;
            let l = (-s[a]).max(0);
            let h = (w - s[a]).min(w);
            if l >= h {
                return None;
            }
            lo[a] = l as usize;
            hi[a] = h as usize;
        }
        // first pass: nonzero bounds
        let mut nlo = [usize::MAX; MAX_DIM];
        let mut nhi = [0usize; MAX_DIM];
        let mut any = false;
        for i in lo[0]..hi[0] {
            for j in lo[1]..hi[1] {
                for k in lo[2]..hi[2] {
                    let v = self.at(i, j, k);
                    if v == 0.0 {
                        continue;
                    }
                    let t = self.at(
                        (i as i64 + s[0]) as usize,
                        (j as i64 + s[1]) as usize,
                        (k as i64 + s[2]) as usize,
                    );
                    if t != 0.0 {
                        any = true;
                        for (a, x) in [i, j, k].into_iter().enumerate() {
                            nlo[a] = nlo[a].min(x);
                            nhi[a] = nhi[a].max(x);
                        }
                    }
                }
            }
        }
        if !any {
            return None;
        }
        let mut shape = [1; MAX_DIM];
        for a in 0..MAX_DIM {
            shape[a] = nhi[a] - nlo[a] + 1;
        }
        let mut values = Vec::with_capacity(shape.iter().product());
        for i in nlo[0]..=nhi[0] {
            for j in nlo[1]..=nhi[1] {
                for k in nlo[2]..=nhi[2] {
                    let t = self.at(
                        (i as i64 + s[0]) as usize,
                        (j as i64 + s[1]) as usize,
                        (k as i64 + s[2]) as usize,
                    );
                    values.push(self.at(i, j, k) * t);
                }
            }
        }
        Some(Block { shape, values })
    }

    /// Shifts `s` with `s > 0` lexicographically. `P(f f(. + s)) = P(f f(. - s))`
    /// because the two products are translates, so these count twice.
    fn half_shifts(&self) -> Vec<[i64; MAX_DIM]> {
        let r: Vec<i64> = self.shape.iter().map(|&w| w as i64 - 1).collect();
        let mut out = Vec::new();
        for a in -r[0]..=r[0] {
            for b in -r[1]..=r[1] {
                for c in -r[2]..=r[2] {
                    if (a, b, c) > (0, 0, 0) {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }

    fn padded_shape(&self) -> [usize; MAX_DIM] {
        let mut p = [1; MAX_DIM];
        for a in 0..MAX_DIM {
            if self.shape[a] > 1 {
                p[a] = next_fast_len(2 * self.shape[a] - 1);
            }
        }
        p
    }

    fn spectrum(&self) -> (Vec<Complex64>, [usize; MAX_DIM]) {
        let p = self.padded_shape();
        let mut buf = vec![Complex64::new(0.0, 0.0); p.iter().product()];
        let mut idx = 0;
        for i in 0..self.shape[0] {
            for j in 0..self.shape[1] {
                for k in 0..self.shape[2] {
                    buf[(i * p[1] + j) * p[2] + k] = Complex64::new(self.values[idx], 0.0);
                    idx += 1;
                }
            }
        }
        fft_nd(&mut buf, &p, false);
        (buf, p)
    }

    fn direct_cost(&self) -> f64 {
        self.values.len() as f64 * self.shift_count() / 2.0
    }

    fn dim_factor(&self) -> f64 {
        (1 << self.shape.iter().filter(|&&n| n > 1).count()) as f64
    }

    fn fft_cost(&self) -> f64 {
        let total: usize = self.padded_shape().iter().product();
        3.0 * total as f64 * (total as f64).log2().max(1.0) * 5.0
    }
}

/// Sum over all shifts of the squared raw autocorrelation `sum_x f(x) f(x + s)`.
fn sum_squared_autocorrelation(b: &Block, level2: Level2) -> f64 {
    let direct = match level2 {
        Level2::Direct => true,
        Level2::Fft => false,
        Level2::Auto => b.direct_cost() <= b.fft_cost(),
    };
    if direct {
        let zero = autocorrelation_raw(b, [0, 0, 0]);
        let parts: Vec<f64> = b
            .half_shifts()
            .iter()
            .map(|&s| {
                let a = autocorrelation_raw(b, s);
                a * a
            })
            .collect();
        zero * zero + 2.0 * pairwise_sum(&parts)
    } else {
        let (mut spec, p) = b.spectrum();
        for z in spec.iter_mut() {
            *z = Complex64::new(z.norm_sqr(), 0.0);
        }
        fft_nd(&mut spec, &p, true);
        let norm = 1.0 / spec.len() as f64;
        let squares: Vec<f64> = spec
            .iter()
            .map(|z| {
                let a = z.re * norm;
                a * a
            })
            .collect();
        pairwise_sum(&squares)
    }
}

fn autocorrelation_raw(b: &Block, s: [i64; MAX_DIM]) -> f64 {
    let mut lo = [0usize; MAX_DIM];
    let mut hi = [0usize; MAX_DIM];
    for a in 0..MAX_DIM {
        let w = b.shape[a] as i64;
        let l = (-s[a]).max(0);
        let h = (w - s[a]).min(w);
        if l >= h {
            return 0.0;
        }
        lo[a] = l as usize;
        hi[a] = h as usize;
    }
    let mut acc = 0.0;
    for i in lo[0]..hi[0] {
        let ti = (i as i64 + s[0]) as usize;
        for j in lo[1]..hi[1] {
            let tj = (j as i64 + s[1]) as usize;
            for k in lo[2]..hi[2] {
                acc += b.at(i, j, k) * b.at(ti, tj, (k as i64 + s[2]) as usize);
            }
        }
    }
    acc
}

/// `P_k(f) / cv^{k+1}` on a block.
fn power_raw(b: &Block, k: usize, level2: Level2, top: bool) -> f64 {
    match k {
        1 => {
            let s = b.sum();
            s * s
        }
        2 => sum_squared_autocorrelation(b, level2),
        _ => {
            let zero = b
                .shifted_product([0; MAX_DIM])
                .map_or(0.0, |p| power_raw(&p, k - 1, level2, false));
            let shifts = b.half_shifts();
            let eval = |i: usize| {
                b.shifted_product(shifts[i])
                    .map_or(0.0, |p| power_raw(&p, k - 1, level2, false))
            };
            let parts: Vec<f64> = if top {
                par_map(shifts.len(), eval)
            } else {
                (0..shifts.len()).map(eval).collect()
            };
            zero + 2.0 * pairwise_sum(&parts)
        }
    }
}

/// Rough operation count of [`gowers_norm`] for a support block.
fn cost_estimate(b: &Block, k: usize, level2: Level2) -> f64 {
    let level2_cost = match level2 {
        Level2::Direct => b.direct_cost(),
        Level2::Fft => b.fft_cost(),
        Level2::Auto => b.direct_cost().min(b.fft_cost()),
    };
    match k {
        1 => b.values.len() as f64,
        // a shifted product keeps on average about 2^-d of the support
        _ => (b.shift_count() / 2.0 / b.dim_factor()).powi(k as i32 - 2) * level2_cost,
    }
}

/// Predicted cost of `gowers_norm(f, k)`; zero for the zero function.
pub fn gowers_cost(f: &GridFunction, k: usize, level2: Level2) -> f64 {
    Block::from_grid(f).map_or(0.0, |b| cost_estimate(&b, k, level2))
}

/// `||f||_{U_k}^{2^k}` by the inductive definition over lattice shifts.
pub fn gowers_norm(f: &GridFunction, k: usize, opts: &GowersOptions) -> Result<GowersResult> {
    if k == 0 {
        return Err(Error::arg("order k must be at least 1"));
    }
    let spec = *f.spec();
    let Some(block) = Block::from_grid(f) else {
        return Ok(GowersResult::new(k, 0.0, spec, Method::Recursive));
    };
    let cost = cost_estimate(&block, k, opts.level2);
    if cost > opts.budget {
        return Err(Error::BudgetExceeded {
            cost,
            budget: opts.budget,
        });
    }
    let raw = power_raw(&block, k, opts.level2, true);
    let power = raw * spec.cell_volume().powi(k as i32 + 1);
    Ok(GowersResult::new(
        k,
        power.max(0.0),
        spec,
        Method::Recursive,
    ))
}

/// `||f||_{U_2}^4 = cv^3 / N sum |f^|^4` over a zero-padded frequency lattice of size `N`.
pub fn u2_via_fourier(f: &GridFunction) -> Result<GowersResult> {
    let spec = *f.spec();
    let Some(block) = Block::from_grid(f) else {
        return Ok(GowersResult::new(2, 0.0, spec, Method::FourierU2));
    };
    let (fhat, _) = block.spectrum();
    let quartic: Vec<f64> = fhat.iter().map(|z| z.norm_sqr() * z.norm_sqr()).collect();
    let power = pairwise_sum(&quartic) / fhat.len() as f64 * spec.cell_volume().powi(3);
    Ok(GowersResult::new(2, power, spec, Method::FourierU2))
}

/// `||f||_{U_k} / |f|^{(k+1)/2^k}`, invariant under affine maps.
pub fn normalized_ratio(f: &GridFunction, k: usize, opts: &GowersOptions) -> Result<f64> {
    let m = f.measure();
    if !(m > 0.0) {
        return Err(Error::ZeroMeasure);
    }
    let r = gowers_norm(f, k, opts)?;
    Ok(r.norm_value / m.powf((k + 1) as f64 / (1u64 << k) as f64))
}

/// Default discretization tolerance `10 (k + 1) / n`.
pub fn tol_disc(k: usize, n: usize) -> f64 {
    10.0 * (k + 1) as f64 / n as f64
}

/// Closed-form or high-precision values of the extremal constant where known:
/// all orders in d = 1, where `gamma_k = gamma_{k-1} 2 / (k + 1)`, and `k = 2`
/// in d = 2, 3 (the integral of the squared lens volume of a unit-measure ball).
pub fn known_gamma(k: usize, d: usize) -> Option<f64> {
    match (k, d) {
        (0, _) => None,
        (1, _) => Some(1.0),
        (_, 1) => Some((2..=k).fold(1.0, |g, j| g * 2.0 / (j + 1) as f64)),
        (2, 2) => Some(0.459_620_353_907_531_9),
        (2, 3) => Some(34.0 / 105.0),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub k: usize,
    pub d: usize,
    pub value: f64,
    /// Cells across the ball diameter at each resolution used.
    pub grid_sizes: Vec<usize>,
    /// Normalized values `P_k / |raster|^{k+1}` at those resolutions.
    pub raw_values: Vec<f64>,
    pub extrapolated: bool,
}

fn default_resolution(k: usize, d: usize) -> usize {
    match (d, k) {
        (1, 2) => 1024,
        (1, 3) => 256,
        (1, 4) => 64,
        (1, _) => 32,
        (2, 2) => 256,
        (2, 3) => 64,
        (2, _) => 16,
        (_, 2) => 64,
        _ => 16,
    }
}

/// Unit-measure ball with `cells` cells across its diameter and a margin of
/// four cells on each side. In d = 1 the interval edges fall on cell faces.
fn ball_raster(d: usize, cells: usize) -> Result<GridFunction> {
    let ball = ShapeSpec::centered_ball(d, 1.0);
    let r = match &ball {
        ShapeSpec::Ball { radius, .. } => *radius,
        _ => unreachable!(),
    };
    let n = cells + 8;
    let h = 2.0 * r / cells as f64;
    let grid = GridSpec::new(d, n as f64 * h / 2.0, n)?;
    rasterize(&ball, &grid, &RasterOptions::default())
}

/// `gamma_{k,d} = ||B||_{U_k}^{2^k}` for a unit-measure ball, from two
/// resolutions `m` and `m / 2` combined by Richardson extrapolation
/// (second order; the interval in d = 1 has error exactly `c / m^2` for k = 2).
pub fn gamma_estimate(k: usize, d: usize, budget: f64) -> Result<GammaEstimate> {
    if k == 0 {
        return Err(Error::arg("order k must be at least 1"));
    }
    if !(1..=3).contains(&d) {
        return Err(Error::arg(format!("dimension {d} not in 1..=3")));
    }
    if k == 1 {
        return Ok(GammaEstimate {
            k,
            d,
            value: 1.0,
            grid_sizes: vec![],
            raw_values: vec![],
            extrapolated: false,
        });
    }
    let opts = GowersOptions {
        budget,
        level2: Level2::Auto,
    };
    let mut m = default_resolution(k, d);
    let fine = loop {
        let e = ball_raster(d, m)?;
        let cost = gowers_cost(&e, k, opts.level2) * 1.25;
        if cost <= budget {
            break e;
        }
        if m <= 8 {
            return Err(Error::BudgetExceeded { cost, budget });
        }
        m /= 2;
    };
    let coarse = ball_raster(d, m / 2)?;
    let normalized = |e: &GridFunction| -> Result<f64> {
        let p = gowers_norm(e, k, &opts)?.power_value;
        Ok(p / e.measure().powi(k as i32 + 1))
    };
    let vf = normalized(&fine)?;
    let vc = normalized(&coarse)?;
    let value = (4.0 * vf - vc) / 3.0;
    Ok(GammaEstimate {
        k,
        d,
        value,
        grid_sizes: vec![m, m / 2],
        raw_values: vec![vf, vc],
        extrapolated: true,
    })
}
