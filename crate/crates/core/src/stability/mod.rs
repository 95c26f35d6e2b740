//! Distance to ellipsoids for near-maximizers: moment-based ellipsoid fits,
//! perturbation sweeps recording `(delta, epsilon)`, and the measure of shifts
//! where the cumulative autocorrelation profile falls well below the ball's.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::autocorr::{autocorrelation, mu_density, TildeProfile};
use crate::error::{Error, Result};
use crate::gowers::{gamma_estimate, gowers_norm, known_gamma, tol_disc, GowersOptions, Reference};
use crate::grid_core::{
    random_set, rasterize, symmetric_difference, GridFunction, GridSpec, RandomModel,
    RasterOptions, ShapeSpec,
};
use crate::numeric::{pairwise_sum, par_map, spearman, unit_ball_volume};
use crate::rearrange::{cumulative_f, radial_rearrangement, rearrangement_1d, Profile1D};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidFit {
    pub center: Vec<f64>,
    /// `A` in `{x : (x - c)^T A (x - c) <= 1}`.
    pub matrix: Vec<Vec<f64>>,
    /// Symmetric difference with the input divided by its measure.
    pub epsilon: f64,
    pub refined: bool,
}

impl EllipsoidFit {
    pub fn shape(&self) -> ShapeSpec {
        ShapeSpec::ellipsoid(&self.center, self.matrix.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Follow the moment fit by coordinate descent on the symmetric difference.
    pub refine: bool,
    pub max_rounds: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            refine: false,
            max_rounds: 40,
        }
    }
}

/// Moment fit: the centroid and `A = Sigma^{-1} / (d + 2)` (the covariance of
/// a uniform ellipsoid is `A^{-1} / (d + 2)`), rescaled to the measure of `e`.
pub fn fit_ellipsoid(e: &GridFunction) -> Result<ShapeSpec> {
    Ok(fit_ellipsoid_with(e, &FitOptions::default())?.shape())
}

pub fn fit_ellipsoid_with(e: &GridFunction, opts: &FitOptions) -> Result<EllipsoidFit> {
    let spec = e.spec();
    let d = spec.dim();
    let m = e.measure();
    if !(m > 0.0) {
        return Err(Error::ZeroMeasure);
    }
    let cv = spec.cell_volume();
    let cells: Vec<(usize, f64)> = e
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, &v)| (i, v))
        .collect();
    let weighted = |f: &dyn Fn(&[f64; 3]) -> f64| -> f64 {
        let parts: Vec<f64> = cells
            .iter()
            .map(|&(i, v)| v * f(&spec.cell_center(i)))
            .collect();
        pairwise_sum(&parts) * cv / m
    };
    let center: Vec<f64> = (0..d).map(|a| weighted(&|x| x[a])).collect();
    let mut cov = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            let v = weighted(&|x| (x[a] - center[a]) * (x[b] - center[b]));
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    let eig = cov.clone().symmetric_eigen();
    let top = eig.eigenvalues.max();
    if !(eig.eigenvalues.min() > 1e-12 * top) {
        return Err(Error::Degenerate(
            "second-moment matrix has rank below the dimension".into(),
        ));
    }
    // each cell spreads its mass uniformly over a cube of side h
    let h = spec.cell_width();
    for a in 0..d {
        cov[(a, a)] += h * h / 12.0;
    }
    let inv = cov
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("singular second-moment matrix".into()))?;
    let mut a = inv / (d as f64 + 2.0);
    let volume = unit_ball_volume(d) / a.determinant().sqrt();
    a *= (volume / m).powf(2.0 / d as f64);

    let mut fit = EllipsoidFit {
        center,
        matrix: rows(&a),
        epsilon: 0.0,
        refined: false,
    };
    fit.epsilon = epsilon_of(e, &fit.shape())?;
    if opts.refine {
        fit = refine(e, fit, opts.max_rounds)?;
    }
    Ok(fit)
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// `|E Delta S| / |E|` with `S` rasterized on the grid of `e` (clipped to it).
pub fn epsilon_of(e: &GridFunction, shape: &ShapeSpec) -> Result<f64> {
    let opts = RasterOptions {
        strict: false,
        ..RasterOptions::default()
    };
    let s = rasterize(shape, e.spec(), &opts)?;
    Ok(symmetric_difference(e, &s)? / e.measure())
}

/// Coordinate descent over the centre and the Cholesky factor of `A`.
fn refine(e: &GridFunction, start: EllipsoidFit, max_rounds: usize) -> Result<EllipsoidFit> {
    let d = start.center.len();
    let a = DMatrix::from_fn(d, d, |i, j| start.matrix[i][j]);
    let l = a
        .cholesky()
        .ok_or_else(|| Error::Degenerate("fitted matrix is not positive definite".into()))?
        .l();
    let mut params: Vec<f64> = start.center.clone();
    for i in 0..d {
        for j in 0..=i {
            params.push(l[(i, j)]);
        }
    }
    let unpack = |p: &[f64]| -> ShapeSpec {
        let mut l = DMatrix::zeros(d, d);
        let mut idx = d;
        for i in 0..d {
            for j in 0..=i {
                l[(i, j)] = p[idx];
                idx += 1;
            }
        }
        ShapeSpec::ellipsoid(&p[..d], rows(&(&l * l.transpose())))
    };
    let radius = (e.measure() / unit_ball_volume(d)).powf(1.0 / d as f64);
    let mut steps: Vec<f64> = (0..params.len())
        .map(|i| {
            if i < d {
                0.05 * radius
            } else {
                0.05 * params[i].abs().max(1e-3 / radius)
            }
        })
        .collect();
    let mut best = start.epsilon;
    for _ in 0..max_rounds {
        let mut improved = false;
        for i in 0..params.len() {
            for sign in [1.0, -1.0] {
                let mut trial = params.clone();
                trial[i] += sign * steps[i];
                let shape = unpack(&trial);
                if shape.validate().is_err() {
                    continue;
                }
                let eps = epsilon_of(e, &shape)?;
                if eps < best {
                    best = eps;
                    params = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            steps.iter_mut().for_each(|s| *s /= 2.0);
            if steps[0] < 1e-3 * e.spec().cell_width() {
                break;
            }
        }
    }
    let shape = unpack(&params);
    let (center, a) = shape.as_ellipsoid().expect("ellipsoid shape");
    Ok(EllipsoidFit {
        center,
        matrix: rows(&a),
        epsilon: best,
        refined: true,
    })
}

/// Deficits of `P = ||E||_{U_k}^{2^k}` relative to the ellipsoid value
/// `gamma m^{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deficit {
    /// `1 - P / (gamma m^{k+1})` clamped to `[0, 1]`.
    pub delta: f64,
    /// The same before clamping.
    pub delta_raw: f64,
    /// `1 - (P / (gamma m^{k+1}))^{2^-k}`, the deficit on the norm scale.
    pub delta_norm: f64,
    /// `1 - P / P(E*)` with `E*` rasterized on the same grid.
    pub delta_discrete: f64,
    pub power_value: f64,
    pub measure: f64,
}

pub fn deficit(e: &GridFunction, k: usize, gamma: f64, opts: &GowersOptions) -> Result<Deficit> {
    let m = e.measure();
    if !(m > 0.0) {
        return Err(Error::ZeroMeasure);
    }
    let p = gowers_norm(e, k, opts)?.power_value;
    let p_star = gowers_norm(&radial_rearrangement(e), k, opts)?.power_value;
    let ratio = p / (gamma * m.powi(k as i32 + 1));
    Ok(Deficit {
        delta: (1.0 - ratio).clamp(0.0, 1.0),
        delta_raw: 1.0 - ratio,
        delta_norm: 1.0 - ratio.max(0.0).powf(1.0 / (1u64 << k) as f64),
        delta_discrete: 1.0 - p / p_star,
        power_value: p,
        measure: m,
    })
}

/// `gamma_{k,d}` from the closed forms when available, otherwise estimated.
pub fn gamma_for(k: usize, d: usize, budget: f64) -> Result<f64> {
    match known_gamma(k, d) {
        Some(g) => Ok(g),
        None => Ok(gamma_estimate(k, d, budget)?.value),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub seed: u64,
    pub amplitude: f64,
    pub k: usize,
    pub d: usize,
    pub n: usize,
    #[serde(flatten)]
    pub deficit: Deficit,
    pub gamma: f64,
    pub tol_disc: f64,
    pub epsilon: f64,
    pub center: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub d: usize,
    pub n: usize,
    pub extent: f64,
    pub k: usize,
    pub amplitudes: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Overrides the closed-form or estimated constant.
    pub gamma: Option<f64>,
    pub fit: FitOptions,
    pub gowers: GowersOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            d: 2,
            n: 256,
            extent: 1.0,
            k: 2,
            amplitudes: vec![0.05, 0.1, 0.2, 0.4],
            seeds: (0..10).collect(),
            gamma: None,
            fit: FitOptions::default(),
            gowers: GowersOptions::default(),
        }
    }
}

/// One record per `(amplitude, seed)`, ordered by amplitude then seed.
pub fn stability_sweep(cfg: &SweepConfig) -> Result<Vec<StabilityRecord>> {
    if cfg.k < 2 {
        return Err(Error::arg(format!(
            "order k = {} must be at least 2",
            cfg.k
        )));
    }
    if let Some(a) = cfg.amplitudes.iter().find(|a| !(**a >= 0.0)) {
        return Err(Error::arg(format!("amplitude {a} must be nonnegative")));
    }
    let grid = GridSpec::new(cfg.d, cfg.extent, cfg.n)?;
    let gamma = match cfg.gamma {
        Some(g) => g,
        None => gamma_for(cfg.k, cfg.d, cfg.gowers.budget)?,
    };
    let mut jobs: Vec<(f64, u64)> = cfg
        .amplitudes
        .iter()
        .flat_map(|&a| cfg.seeds.iter().map(move |&s| (a, s)))
        .collect();
    jobs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    jobs.dedup();
    let records = par_map(jobs.len(), |i| -> Result<StabilityRecord> {
        let (amplitude, seed) = jobs[i];
        let set = random_set(&grid, seed, RandomModel::PerturbedEllipsoid { amplitude })?;
        let def = deficit(&set.raster, cfg.k, gamma, &cfg.gowers)?;
        let fit = fit_ellipsoid_with(&set.raster, &cfg.fit)?;
        Ok(StabilityRecord {
            seed,
            amplitude,
            k: cfg.k,
            d: cfg.d,
            n: cfg.n,
            deficit: def,
            gamma,
            tol_disc: tol_disc(cfg.k, cfg.n),
            epsilon: fit.epsilon,
            center: fit.center,
            matrix: fit.matrix,
        })
    });
    records.into_iter().collect()
}

/// Two-column `delta epsilon` table for external plotting.
pub fn write_plot_table<W: Write>(records: &[StabilityRecord], mut w: W) -> Result<()> {
    writeln!(w, "# delta epsilon")?;
    for r in records {
        writeln!(w, "{:.16e} {:.16e}", r.deficit.delta, r.epsilon)?;
    }
    Ok(())
}

/// Sorts by `x`, splits into `bins` groups of near-equal size and returns the
/// mean `(x, y)` of each group.
pub fn binned_means(xs: &[f64], ys: &[f64], bins: usize) -> Vec<(f64, f64)> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
    let bins = bins.min(xs.len());
    (0..bins)
        .map(|b| {
            let group = &order[b * xs.len() / bins..(b + 1) * xs.len() / bins];
            let n = group.len() as f64;
            (
                group.iter().map(|&i| xs[i]).sum::<f64>() / n,
                group.iter().map(|&i| ys[i]).sum::<f64>() / n,
            )
        })
        .collect()
}

/// Rank correlation of `delta` and `epsilon` over the records.
pub fn sweep_spearman(records: &[StabilityRecord]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = records.iter().map(|r| (r.deficit.delta, r.epsilon)).unzip();
    spearman(&x, &y)
}

/// Whether quintile-binned mean epsilon never decreases as delta grows.
pub fn binned_curve_is_monotone(records: &[StabilityRecord]) -> bool {
    let (x, y): (Vec<f64>, Vec<f64>) = records.iter().map(|r| (r.deficit.delta, r.epsilon)).unzip();
    binned_means(&x, &y, 5).windows(2).all(|w| w[1].1 >= w[0].1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalSetReport {
    pub k: usize,
    /// Subinterval of `(0, 2^d)` in the variable of the unit-measure dilate.
    pub j: (f64, f64),
    pub delta: f64,
    /// `mu` of `{s in J : F(s) <= (1 - delta^{1/2}) F~(s)}`.
    pub mu_bad: f64,
    pub mu_j: f64,
    /// `mu_bad / delta^{1/2}`.
    pub ratio: f64,
    pub subintervals: usize,
}

const EXCEPTIONAL_SUBINTERVALS: usize = 2000;

/// Cumulative profile of the dilate of `e` to unit measure:
/// `t -> F(|E| t) / |E|^2`.
fn normalized_cumulative(e: &GridFunction) -> Result<(Profile1D, f64)> {
    let f = cumulative_f(&rearrangement_1d(&autocorrelation(e)?.values))?;
    Ok((f, e.measure()))
}

/// Measures the shifts in `J` where the cumulative profile `F` of `e` falls to
/// `(1 - delta^{1/2})` times the ball's `F~`, after dilating `e` to unit
/// measure. With [`Reference::Rasterized`], `F~` comes from the rasterized
/// rearrangement on the same grid; `mu` always uses the closed-form lens.
pub fn exceptional_measure(
    e: &GridFunction,
    k: usize,
    j: (f64, f64),
    delta: f64,
    reference: Reference,
) -> Result<ExceptionalSetReport> {
    let d = e.spec().dim();
    let end = (1u32 << d) as f64;
    if !(0.0 < j.0 && j.0 < j.1 && j.1 < end) {
        return Err(Error::arg(format!(
            "J = [{}, {}] must lie inside (0, {end})",
            j.0, j.1
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::arg(format!("delta = {delta} must lie in (0, 1]")));
    }
    if !e.is_indicator() {
        return Err(Error::arg("exceptional set is defined for indicators"));
    }
    let (f, m) = normalized_cumulative(e)?;
    if !(m > 0.0) {
        return Err(Error::ZeroMeasure);
    }
    let big_f = |t: f64| f.eval(m * t) / (m * m);
    let tilde: Box<dyn Fn(f64) -> f64 + Sync + Send> = match reference {
        Reference::Rasterized => {
            let (g, ms) = normalized_cumulative(&radial_rearrangement(e))?;
            Box::new(move |t| g.eval(ms * t) / (ms * ms))
        }
        Reference::ClosedForm => {
            let p = TildeProfile::new(d, 1.0)?;
            Box::new(move |t| p.cumulative(t))
        }
    };
    let mu = mu_density(d, k, 1.0)?;
    let factor = 1.0 - delta.sqrt();
    let width = (j.1 - j.0) / EXCEPTIONAL_SUBINTERVALS as f64;
    let masses: Vec<f64> = par_map(EXCEPTIONAL_SUBINTERVALS, |i| {
        let a = j.0 + i as f64 * width;
        let b = if i + 1 == EXCEPTIONAL_SUBINTERVALS {
            j.1
        } else {
            a + width
        };
        let mid = 0.5 * (a + b);
        if big_f(mid) <= factor * tilde(mid) {
            mu.mass(a, b)
        } else {
            0.0
        }
    });
    let mu_bad = pairwise_sum(&masses);
    let mu_j = mu.mass(j.0, j.1);
    Ok(ExceptionalSetReport {
        k,
        j,
        delta,
        mu_bad: mu_bad.min(mu_j),
        mu_j,
        ratio: mu_bad.min(mu_j) / delta.sqrt(),
        subintervals: EXCEPTIONAL_SUBINTERVALS,
    })
}

/// Operator-norm distance `||A - B||_2 / ||B||_2` of two square matrices.
pub fn relative_operator_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let d = b.len();
    let ma = DMatrix::from_fn(d, d, |i, j| a[i][j]);
    let mb = DMatrix::from_fn(d, d, |i, j| b[i][j]);
    (ma - &mb).singular_values().max() / mb.singular_values().max()
}

/// Euclidean distance between two centres.
pub fn center_distance(a: &[f64], b: &[f64]) -> f64 {
    (DVector::from_column_slice(a) - DVector::from_column_slice(b)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_core::{apply_affine, AffineMap};

    fn raster(shape: &ShapeSpec, g: &GridSpec) -> GridFunction {
        rasterize(shape, g, &RasterOptions::default()).unwrap()
    }

    #[test]
    fn ball_fit_is_tight() {
        let g = GridSpec::new(2, 1.0, 512).unwrap();
        let e = raster(&ShapeSpec::ball(&[0.1, -0.05], 0.6), &g);
        let fit = fit_ellipsoid_with(&e, &FitOptions::default()).unwrap();
        assert!(fit.epsilon < 0.02, "{}", fit.epsilon);
        assert!(center_distance(&fit.center, &[0.1, -0.05]) < 1e-3);
    }

    #[test]
    fn sheared_ellipse_is_recovered() {
        let g = GridSpec::new(2, 1.0, 256).unwrap();
        let matrix = vec![vec![6.0, 2.5], vec![2.5, 4.0]];
        let e = raster(&ShapeSpec::ellipsoid(&[0.0, 0.1], matrix.clone()), &g);
        let fit = fit_ellipsoid_with(&e, &FitOptions::default()).unwrap();
        assert!(relative_operator_distance(&fit.matrix, &matrix) < 0.02);
    }

    #[test]
    fn two_blobs_fit_badly() {
        let g = GridSpec::new(2, 1.0, 256).unwrap();
        let e = raster(
            &ShapeSpec::union(vec![
                ShapeSpec::ball(&[-0.6, 0.0], 0.25),
                ShapeSpec::ball(&[0.6, 0.0], 0.25),
            ]),
            &g,
        );
        let fit = fit_ellipsoid_with(&e, &FitOptions::default()).unwrap();
        assert!(fit.epsilon > 0.5, "{}", fit.epsilon);
    }

    #[test]
    fn thin_sets_are_degenerate() {
        let g = GridSpec::new(2, 1.0, 15).unwrap();
        let e = GridFunction::from_fn(g, |x| {
            if x[1].abs() < 0.05 && x[0].abs() < 0.5 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(matches!(fit_ellipsoid(&e), Err(Error::Degenerate(_))));
        assert!(matches!(
            fit_ellipsoid(&GridFunction::zeros(g)),
            Err(Error::ZeroMeasure)
        ));
    }

    #[test]
    fn fit_commutes_with_unimodular_maps() {
        let g = GridSpec::new(2, 1.0, 256).unwrap();
        let l_shape = ShapeSpec::union(vec![
            ShapeSpec::cuboid(&[-0.4, -0.4], &[0.3, -0.1]),
            ShapeSpec::cuboid(&[-0.4, -0.1], &[-0.1, 0.4]),
        ]);
        let base = fit_ellipsoid_with(&raster(&l_shape, &g), &FitOptions::default()).unwrap();
        let map = AffineMap::new(vec![vec![1.0, 0.4], vec![0.0, 1.0]], vec![0.05, -0.02]).unwrap();
        let image = apply_affine(&map, &l_shape).unwrap();
        let fit = fit_ellipsoid_with(&raster(&image, &g), &FitOptions::default()).unwrap();
        let expected = apply_affine(&map, &base.shape()).unwrap();
        let (c, a) = expected.as_ellipsoid().unwrap();
        assert!(relative_operator_distance(&fit.matrix, &rows(&a)) < 0.02);
        assert!(center_distance(&fit.center, &c) < 0.02);
    }

    #[test]
    fn refinement_never_increases_epsilon() {
        let g = GridSpec::new(2, 1.0, 96).unwrap();
        let e = raster(&ShapeSpec::cuboid(&[-0.5, -0.3], &[0.4, 0.3]), &g);
        let plain = fit_ellipsoid_with(&e, &FitOptions::default()).unwrap();
        let refined = fit_ellipsoid_with(
            &e,
            &FitOptions {
                refine: true,
                max_rounds: 10,
            },
        )
        .unwrap();
        assert!(refined.refined && refined.epsilon <= plain.epsilon);
    }

    #[test]
    fn interval_deficits() {
        let g = GridSpec::new(1, 1.0, 1024).unwrap();
        let e = raster(&ShapeSpec::interval(-0.5, 0.5), &g);
        let def = deficit(&e, 2, 2.0 / 3.0, &GowersOptions::default()).unwrap();
        assert!(def.delta <= 5.0 * tol_disc(2, 1024));
        assert!(def.delta_discrete.abs() < 1e-12);
        // two far-apart halves: power 1/2 against 2/3
        let g = GridSpec::new(1, 4.0, 2048).unwrap();
        let two = raster(
            &ShapeSpec::union(vec![
                ShapeSpec::interval(-3.0, -2.5),
                ShapeSpec::interval(2.5, 3.0),
            ]),
            &g,
        );
        let def = deficit(&two, 2, 2.0 / 3.0, &GowersOptions::default()).unwrap();
        assert!((def.delta - 0.25).abs() < 5e-3, "{}", def.delta);
        assert!((def.delta_norm - (1.0 - 0.75f64.powf(0.25))).abs() < 5e-3);
    }

    #[test]
    fn zero_amplitude_sweep() {
        let cfg = SweepConfig {
            n: 128,
            amplitudes: vec![0.0],
            seeds: vec![1, 2],
            ..SweepConfig::default()
        };
        let recs = stability_sweep(&cfg).unwrap();
        assert_eq!(recs.len(), 2);
        for r in &recs {
            assert!(r.deficit.delta <= 5.0 * r.tol_disc);
            assert!(r.epsilon < 0.05);
        }
        let mut buf = Vec::new();
        write_plot_table(&recs, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
        assert!(stability_sweep(&SweepConfig {
            amplitudes: vec![-0.1],
            ..cfg
        })
        .is_err());
    }

    #[test]
    fn binning() {
        let xs = [5.0, 1.0, 3.0, 2.0, 4.0];
        let ys = [50.0, 10.0, 30.0, 20.0, 40.0];
        let b = binned_means(&xs, &ys, 5);
        assert_eq!(
            b,
            vec![
                (1.0, 10.0),
                (2.0, 20.0),
                (3.0, 30.0),
                (4.0, 40.0),
                (5.0, 50.0)
            ]
        );
        assert_eq!(binned_means(&xs, &ys, 2), vec![(1.5, 15.0), (4.0, 40.0)]);
    }

    #[test]
    fn ball_has_no_exceptional_shifts() {
        let g = GridSpec::new(2, 1.0, 128).unwrap();
        let ball = rasterize(
            &ShapeSpec::ball(&[0.0, 0.0], 0.6),
            &g,
            &RasterOptions::binary(),
        )
        .unwrap();
        for delta in [1e-12, 1e-4, 0.5, 1.0] {
            let r =
                exceptional_measure(&ball, 2, (0.1, 3.5), delta, Reference::Rasterized).unwrap();
            assert_eq!(r.mu_bad, 0.0);
        }
    }

    #[test]
    fn exceptional_bounds_and_errors() {
        let g = GridSpec::new(1, 4.0, 1024).unwrap();
        let two = raster(
            &ShapeSpec::union(vec![
                ShapeSpec::interval(-3.0, -2.5),
                ShapeSpec::interval(2.5, 3.0),
            ]),
            &g,
        );
        let r = exceptional_measure(&two, 2, (0.2, 1.8), 0.01, Reference::ClosedForm).unwrap();
        assert!(r.mu_bad > 0.0 && r.mu_bad <= r.mu_j);
        let all = exceptional_measure(&two, 2, (0.2, 1.8), 1.0, Reference::ClosedForm).unwrap();
        assert!(all.mu_bad <= all.mu_j);
        assert!(exceptional_measure(&two, 2, (0.0, 1.0), 0.1, Reference::ClosedForm).is_err());
        assert!(exceptional_measure(&two, 2, (0.5, 2.5), 0.1, Reference::ClosedForm).is_err());
        assert!(exceptional_measure(&two, 2, (0.5, 1.0), 0.0, Reference::ClosedForm).is_err());
    }
}
