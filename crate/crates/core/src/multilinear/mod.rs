//! The `2^k`-linear form
//! `T_k(f) = integral prod_alpha f_alpha(x_0 + alpha . x) dx dx_0`
//! on lattice functions, its comparison with the rearranged tuple, and the
//! volumes `L(y)` of slices of the convex body
//! `K = {(x_0, x) : x_0 + alpha . x in B for all alpha != 0}`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autocorr::{ball_autocorrelation_closed_form, cross_correlation};
use crate::error::{Error, Result};
use crate::grid_core::{rasterize, GridFunction, GridSpec, RasterOptions, ShapeSpec, MAX_DIM};
use crate::numeric::{pairwise_sum, par_map};
use crate::rearrange::radial_rearrangement;

/// Functions indexed by the vertices of `{0, 1}^k`. Vertex `alpha` is stored
/// at index `sum_i alpha_i 2^(i-1)`.
#[derive(Debug, Clone)]
pub struct SetTuple {
    k: usize,
    entries: Vec<GridFunction>,
}

impl SetTuple {
    pub fn new(k: usize, entries: Vec<GridFunction>) -> Result<Self> {
        if !(1..=3).contains(&k) {
            return Err(Error::arg(format!("order k = {k} not in 1..=3")));
        }
        if entries.len() != 1 << k {
            return Err(Error::arg(format!(
                "expected {} entries, got {}",
                1 << k,
                entries.len()
            )));
        }
        for e in &entries[1..] {
            entries[0].spec().ensure_same(e.spec())?;
        }
        Ok(Self { k, entries })
    }

    /// Every vertex carries `f`.
    pub fn constant(k: usize, f: &GridFunction) -> Result<Self> {
        Self::new(k, vec![f.clone(); 1 << k])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[GridFunction] {
        &self.entries
    }

    pub fn spec(&self) -> &GridSpec {
        self.entries[0].spec()
    }

    /// Each entry replaced by its symmetric decreasing rearrangement.
    pub fn starred(&self) -> SetTuple {
        SetTuple {
            k: self.k,
            entries: self.entries.iter().map(radial_rearrangement).collect(),
        }
    }
}

/// Values on an axis-aligned box of lattice cells, in global cell coordinates.
#[derive(Debug, Clone)]
struct Boxed {
    lo: [i64; MAX_DIM],
    shape: [usize; MAX_DIM],
    values: Vec<f64>,
}

impl Boxed {
    fn from_grid(f: &GridFunction) -> Option<Boxed> {
        let (lo, hi) = f.support_bounds()?;
        let mut shape = [1; MAX_DIM];
        for a in 0..f.spec().dim() {
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
        Some(Boxed {
            lo: lo.map(|x| x as i64),
            shape,
            values,
        })
    }

    fn hi(&self, a: usize) -> i64 {
        self.lo[a] + self.shape[a] as i64 - 1
    }

    fn at_global(&self, p: [i64; MAX_DIM]) -> f64 {
        let mut idx = 0usize;
        for a in 0..MAX_DIM {
            let r = p[a] - self.lo[a];
            if r < 0 || r >= self.shape[a] as i64 {
                return 0.0;
            }
            idx = idx * self.shape[a] + r as usize;
        }
        self.values[idx]
    }

    fn sum(&self) -> f64 {
        pairwise_sum(&self.values)
    }

    /// `x -> a(x) b(x + s)` on the overlap box; `None` if the boxes miss.
    fn product_shifted(&self, other: &Boxed, s: [i64; MAX_DIM]) -> Option<Boxed> {
        let mut lo = [0i64; MAX_DIM];
        let mut shape = [1usize; MAX_DIM];
        for a in 0..MAX_DIM {
            let l = self.lo[a].max(other.lo[a] - s[a]);
            let h = self.hi(a).min(other.hi(a) - s[a]);
            if l > h {
                return None;
            }
            lo[a] = l;
            shape[a] = (h - l + 1) as usize;
        }
        let mut values = Vec::with_capacity(shape.iter().product());
        for i in 0..shape[0] as i64 {
            for j in 0..shape[1] as i64 {
                for k in 0..shape[2] as i64 {
                    let x = [lo[0] + i, lo[1] + j, lo[2] + k];
                    let y = [x[0] + s[0], x[1] + s[1], x[2] + s[2]];
                    values.push(self.at_global(x) * other.at_global(y));
                }
            }
        }
        Some(Boxed { lo, shape, values })
    }
}

/// Shifts `s` for which every pair `(a, b)` can overlap: `a(x) b(x + s) != 0` somewhere.
fn feasible_shifts(pairs: &[(&Boxed, &Boxed)]) -> Vec<[i64; MAX_DIM]> {
    let mut lo = [i64::MIN; MAX_DIM];
    let mut hi = [i64::MAX; MAX_DIM];
    for (a, b) in pairs {
        for ax in 0..MAX_DIM {
            lo[ax] = lo[ax].max(b.lo[ax] - a.hi(ax));
            hi[ax] = hi[ax].min(b.hi(ax) - a.lo[ax]);
        }
    }
    let mut out = Vec::new();
    if (0..MAX_DIM).any(|ax| lo[ax] > hi[ax]) {
        return out;
    }
    for x in lo[0]..=hi[0] {
        for y in lo[1]..=hi[1] {
            for z in lo[2]..=hi[2] {
                out.push([x, y, z]);
            }
        }
    }
    out
}

/// Raw lattice sum without the `cv^{k+1}` weight. Splits on the last
/// coordinate `x_k`: entries `alpha` and `alpha + e_k` merge into `f_alpha f_{alpha + e_k}(. + x_k)`.
fn t_raw(entries: &[Boxed], top: bool) -> f64 {
    if entries.len() == 2 {
        return entries[0].sum() * entries[1].sum();
    }
    let half = entries.len() / 2;
    let pairs: Vec<(&Boxed, &Boxed)> = (0..half)
        .map(|i| (&entries[i], &entries[i + half]))
        .collect();
    let shifts = feasible_shifts(&pairs);
    let eval = |i: usize| -> f64 {
        let s = shifts[i];
        let mut next = Vec::with_capacity(half);
        for (a, b) in &pairs {
            match a.product_shifted(b, s) {
                Some(p) => next.push(p),
                None => return 0.0,
            }
        }
        t_raw(&next, false)
    };
    let parts: Vec<f64> = if top {
        par_map(shifts.len(), eval)
    } else {
        (0..shifts.len()).map(eval).collect()
    };
    pairwise_sum(&parts)
}

fn t_cost(entries: &[Boxed]) -> f64 {
    let cells = entries.iter().map(|b| b.values.len()).max().unwrap_or(0) as f64;
    let shifts: f64 = (0..MAX_DIM)
        .map(|a| {
            entries
                .iter()
                .map(|b| 2 * b.shape[a] - 1)
                .max()
                .unwrap_or(1) as f64
        })
        .product();
    let levels = (entries.len() as f64).log2() as i32 - 1;
    shifts.powi(levels) * cells * entries.len() as f64
}

/// `T_k` of the tuple by nested lattice sums over the supports.
pub fn t_form(tuple: &SetTuple, budget: f64) -> Result<f64> {
    let spec = tuple.spec();
    let boxes: Option<Vec<Boxed>> = tuple.entries.iter().map(Boxed::from_grid).collect();
    let Some(boxes) = boxes else {
        return Ok(0.0);
    };
    let cost = t_cost(&boxes);
    if cost > budget {
        return Err(Error::BudgetExceeded { cost, budget });
    }
    Ok(t_raw(&boxes, true) * spec.cell_volume().powi(tuple.k as i32 + 1))
}

/// `T_2` evaluated by splitting on `x_1` instead:
/// `integral C(f_00, f_10)(s) C(f_01, f_11)(s) ds` with FFT cross-correlations.
pub fn t_form_u2_unrolled(tuple: &SetTuple) -> Result<f64> {
    if tuple.k != 2 {
        return Err(Error::arg("the unrolled evaluation is specific to k = 2"));
    }
    let e = &tuple.entries;
    let c1 = cross_correlation(&e[0], &e[1])?;
    let c2 = cross_correlation(&e[2], &e[3])?;
    let products: Vec<f64> = c1
        .values()
        .iter()
        .zip(c2.values())
        .map(|(a, b)| a * b)
        .collect();
    Ok(pairwise_sum(&products) * tuple.spec().cell_volume())
}

/// `(T_k(tuple), T_k(tuple*))`; the first never exceeds the second.
pub fn bll_compare(tuple: &SetTuple, budget: f64) -> Result<(f64, f64)> {
    Ok((t_form(tuple, budget)?, t_form(&tuple.starred(), budget)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SliceEstimator {
    /// k = 2 only: `L(y) = integral_B |B cap (B + y - u)| du` as a lattice sum
    /// over `u` with the closed-form lens volume inside. The reported error is
    /// the change from halving the resolution.
    Lattice { cells_per_radius: usize },
    /// Uniform samples of `(u_1, .., u_k)` in `([-r, r]^d)^k`, where
    /// `u_i = y + x_i`; blocks of samples use independent streams of one seed.
    MonteCarlo { seed: u64, samples: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceProfile {
    pub k: usize,
    pub d: usize,
    pub radius: f64,
    pub radii: Vec<f64>,
    pub volumes: Vec<f64>,
    pub stderr: Vec<f64>,
    pub estimator: SliceEstimator,
}

impl SliceProfile {
    /// Three-column text table `radius volume stderr`.
    pub fn write_table<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# radius volume stderr")?;
        for ((r, v), s) in self.radii.iter().zip(&self.volumes).zip(&self.stderr) {
            writeln!(w, "{r:.16e} {v:.16e} {s:.16e}")?;
        }
        Ok(())
    }

    /// Consecutive samples with `|y| < radius` that fail to drop by more than
    /// `n_se` combined standard errors.
    pub fn decrease_violations(&self, n_se: f64) -> Vec<usize> {
        (1..self.radii.len())
            .filter(|&i| self.radii[i] < self.radius)
            .filter(|&i| {
                let se = (self.stderr[i].powi(2) + self.stderr[i - 1].powi(2)).sqrt();
                !(self.volumes[i - 1] - self.volumes[i] > n_se * se)
            })
            .collect()
    }

    /// Interior indices `i` of equally spaced samples where
    /// `L(r_i)^2 < L(r_{i-1}) L(r_{i+1}) (1 - tol)`.
    pub fn log_concavity_violations(&self, tol: f64) -> Vec<usize> {
        (1..self.radii.len().saturating_sub(1))
            .filter(|&i| {
                let (a, b, c) = (self.volumes[i - 1], self.volumes[i], self.volumes[i + 1]);
                b * b < a * c * (1.0 - tol)
            })
            .collect()
    }
}

/// `|y|` beyond which `K_y` is empty: `(k + 1) r / (k - 1)`.
pub fn slice_support_radius(k: usize, radius: f64) -> f64 {
    (k + 1) as f64 * radius / (k - 1) as f64
}

pub fn slice_volume_profile(
    k: usize,
    d: usize,
    radius: f64,
    radii: &[f64],
    estimator: SliceEstimator,
) -> Result<SliceProfile> {
    if !(1..=3).contains(&d) {
        return Err(Error::arg(format!("dimension {d} not in 1..=3")));
    }
    if k < 2 {
        return Err(Error::arg(format!("order k = {k} must be at least 2")));
    }
    if !(radius > 0.0) {
        return Err(Error::arg(format!("radius {radius} must be positive")));
    }
    if let Some(r) = radii.iter().find(|r| !(**r >= 0.0)) {
        return Err(Error::arg(format!("sample radius {r} must be nonnegative")));
    }
    let (volumes, stderr) = match estimator {
        SliceEstimator::Lattice { cells_per_radius } => {
            if k != 2 {
                return Err(Error::arg(
                    "the lattice estimator covers k = 2; use Monte Carlo",
                ));
            }
            if cells_per_radius < 4 {
                return Err(Error::arg("need at least 4 cells per radius"));
            }
            let cost = (2 * cells_per_radius) as f64 * 2.0;
            if cost.powi(d as i32) * radii.len() as f64 > 1e10 {
                return Err(Error::BudgetExceeded {
                    cost: cost.powi(d as i32),
                    budget: 1e10,
                });
            }
            let fine = LatticeSlices::new(d, radius, cells_per_radius)?;
            let coarse = LatticeSlices::new(d, radius, cells_per_radius / 2)?;
            radii
                .iter()
                .map(|&r| {
                    let v = fine.volume(r);
                    (v, (v - coarse.volume(r)).abs())
                })
                .unzip()
        }
        SliceEstimator::MonteCarlo { seed, samples } => {
            if samples == 0 {
                return Err(Error::arg("need at least one sample"));
            }
            radii
                .iter()
                .map(|&r| monte_carlo_slice(k, d, radius, r, seed, samples))
                .unzip()
        }
    };
    Ok(SliceProfile {
        k,
        d,
        radius,
        radii: radii.to_vec(),
        volumes,
        stderr,
        estimator,
    })
}

/// Fractional raster of `B` on `[-r, r]^d` for the k = 2 lattice estimator.
struct LatticeSlices {
    d: usize,
    radius: f64,
    cells: Vec<([f64; MAX_DIM], f64)>,
    cell_volume: f64,
}

impl LatticeSlices {
    fn new(d: usize, radius: f64, cells_per_radius: usize) -> Result<Self> {
        // two extra cells on each side keep the raster strictly inside the grid
        let n = 2 * cells_per_radius + 4;
        let h = radius / cells_per_radius as f64;
        let grid = GridSpec::new(d, n as f64 * h / 2.0, n)?;
        let opts = RasterOptions {
            subsamples: 8,
            ..RasterOptions::default()
        };
        let b = rasterize(&ShapeSpec::ball(&vec![0.0; d], radius), &grid, &opts)?;
        let cells = b
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(i, &v)| (grid.cell_center(i), v))
            .collect();
        Ok(Self {
            d,
            radius,
            cells,
            cell_volume: grid.cell_volume(),
        })
    }

    fn volume(&self, y: f64) -> f64 {
        let parts: Vec<f64> = self
            .cells
            .iter()
            .map(|(u, w)| {
                let dist = ((u[0] - y).powi(2) + u[1] * u[1] + u[2] * u[2]).sqrt();
                w * ball_autocorrelation_closed_form(self.d, self.radius, dist).expect("valid")
            })
            .collect();
        pairwise_sum(&parts) * self.cell_volume
    }
}

const MC_BLOCK: usize = 1 << 16;

fn monte_carlo_slice(
    k: usize,
    d: usize,
    radius: f64,
    y: f64,
    seed: u64,
    samples: usize,
) -> (f64, f64) {
    let blocks = samples.div_ceil(MC_BLOCK);
    let r2 = radius * radius;
    let hits: Vec<u64> = par_map(blocks, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let count = MC_BLOCK.min(samples - b * MC_BLOCK);
        let mut u = vec![[0.0; MAX_DIM]; k];
        let mut hits = 0u64;
        'sample: for _ in 0..count {
            for ui in u.iter_mut() {
                for x in ui.iter_mut().take(d) {
                    *x = rng.gen_range(-radius..radius);
                }
            }
            for alpha in 1usize..(1 << k) {
                let size = alpha.count_ones() as f64;
                let mut p = [0.0; MAX_DIM];
                for (i, ui) in u.iter().enumerate() {
                    if alpha >> i & 1 == 1 {
                        for a in 0..d {
                            p[a] += ui[a];
                        }
                    }
                }
                p[0] -= (size - 1.0) * y;
                if p.iter().map(|x| x * x).sum::<f64>() > r2 {
                    continue 'sample;
                }
            }
            hits += 1;
        }
        hits
    });
    let total: u64 = hits.iter().sum();
    let p = total as f64 / samples as f64;
    let volume = (2.0 * radius).powi((k * d) as i32);
    (volume * p, volume * (p * (1.0 - p) / samples as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gowers::{gowers_norm, GowersOptions};
    use crate::numeric::relative_difference;

    const BUDGET: f64 = 1e11;

    fn raster(shape: &ShapeSpec, g: &GridSpec) -> GridFunction {
        rasterize(shape, g, &RasterOptions::default()).unwrap()
    }

    #[test]
    fn constant_tuple_matches_norm() {
        let g = GridSpec::new(1, 1.0, 128).unwrap();
        let f = raster(&ShapeSpec::interval(-0.5, 0.5), &g);
        let t = t_form(&SetTuple::constant(2, &f).unwrap(), BUDGET).unwrap();
        assert!((t - 2.0 / 3.0).abs() < 5e-3);
        let p = gowers_norm(&f, 2, &GowersOptions::default())
            .unwrap()
            .power_value;
        assert!(relative_difference(t, p) < 1e-6);
        let g2 = GridSpec::new(2, 1.0, 20).unwrap();
        let blob = raster(&ShapeSpec::ball(&[0.1, 0.0], 0.5), &g2);
        let t3 = t_form(&SetTuple::constant(2, &blob).unwrap(), BUDGET).unwrap();
        let p3 = gowers_norm(&blob, 2, &GowersOptions::default())
            .unwrap()
            .power_value;
        assert!(relative_difference(t3, p3) < 1e-6);
    }

    #[test]
    fn zero_entry_and_scaling() {
        let g = GridSpec::new(1, 1.0, 32).unwrap();
        let f = raster(&ShapeSpec::interval(-0.5, 0.4), &g);
        let mut entries = vec![f.clone(); 4];
        entries[2] = GridFunction::zeros(g);
        assert_eq!(
            t_form(&SetTuple::new(2, entries).unwrap(), BUDGET).unwrap(),
            0.0
        );
        let base = t_form(&SetTuple::constant(2, &f).unwrap(), BUDGET).unwrap();
        let mut entries = vec![f.clone(); 4];
        entries[1] = f.scaled(3.0).unwrap();
        let scaled = t_form(&SetTuple::new(2, entries).unwrap(), BUDGET).unwrap();
        assert!(relative_difference(scaled, 3.0 * base) < 1e-12);
    }

    #[test]
    fn unrolled_evaluation_agrees() {
        let g = GridSpec::new(1, 2.0, 64).unwrap();
        let entries = vec![
            raster(&ShapeSpec::interval(-1.0, 0.2), &g),
            raster(&ShapeSpec::interval(-0.3, 0.9), &g),
            raster(
                &ShapeSpec::union(vec![
                    ShapeSpec::interval(-1.5, -1.0),
                    ShapeSpec::interval(0.0, 0.5),
                ]),
                &g,
            ),
            raster(&ShapeSpec::interval(0.1, 1.7), &g),
        ];
        let tuple = SetTuple::new(2, entries).unwrap();
        let a = t_form(&tuple, BUDGET).unwrap();
        let b = t_form_u2_unrolled(&tuple).unwrap();
        assert!(relative_difference(a, b) < 1e-6, "{a} vs {b}");
        let (t, t_star) = bll_compare(&tuple, BUDGET).unwrap();
        assert!(t <= t_star * (1.0 + 1e-8));
    }

    #[test]
    fn rejects_bad_tuples() {
        let g = GridSpec::new(1, 1.0, 8).unwrap();
        let other = GridSpec::new(1, 1.0, 16).unwrap();
        assert!(SetTuple::new(2, vec![GridFunction::zeros(g); 3]).is_err());
        let mut mixed = vec![GridFunction::zeros(g); 4];
        mixed[3] = GridFunction::zeros(other);
        assert!(SetTuple::new(2, mixed).is_err());
    }

    #[test]
    fn interval_slices() {
        let radii = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0];
        let p = slice_volume_profile(
            2,
            1,
            0.5,
            &radii,
            SliceEstimator::Lattice {
                cells_per_radius: 500,
            },
        )
        .unwrap();
        assert!((p.volumes[0] - 0.75).abs() < 2e-3);
        assert!((p.volumes[1] - (0.75 - 0.0625)).abs() < 2e-3);
        // K_y stays nonempty up to |y| = 3r for k = 2
        assert!((p.volumes[3] - 0.125).abs() < 2e-3);
        assert!(p.volumes[4].abs() < 1e-12 && p.volumes[5] == 0.0);
        let mut buf = Vec::new();
        p.write_table(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().lines().count(),
            radii.len() + 1
        );
    }

    #[test]
    fn monte_carlo_agrees_with_lattice() {
        let radii = [0.0, 0.3];
        let lattice = slice_volume_profile(
            2,
            1,
            0.5,
            &radii,
            SliceEstimator::Lattice {
                cells_per_radius: 400,
            },
        )
        .unwrap();
        let mc = slice_volume_profile(
            2,
            1,
            0.5,
            &radii,
            SliceEstimator::MonteCarlo {
                seed: 9,
                samples: 400_000,
            },
        )
        .unwrap();
        for i in 0..radii.len() {
            assert!(
                (lattice.volumes[i] - mc.volumes[i]).abs() < 3.0 * mc.stderr[i],
                "{i}"
            );
        }
        let again = slice_volume_profile(
            2,
            1,
            0.5,
            &radii,
            SliceEstimator::MonteCarlo {
                seed: 9,
                samples: 400_000,
            },
        )
        .unwrap();
        assert_eq!(mc, again);
    }

    #[test]
    fn third_order_support() {
        assert_eq!(slice_support_radius(3, 0.5), 1.0);
        let p = slice_volume_profile(
            3,
            1,
            0.5,
            &[1.0, 1.2],
            SliceEstimator::MonteCarlo {
                seed: 1,
                samples: 100_000,
            },
        )
        .unwrap();
        assert_eq!(p.volumes, vec![0.0, 0.0]);
    }
}
