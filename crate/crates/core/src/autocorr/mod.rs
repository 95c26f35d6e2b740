//! Correlations `(a * b)(s) = integral a(x) b(x + s) dx` on the lattice of
//! grid shifts, computed by zero-padded FFT over the support boxes, plus the
//! closed-form autocorrelation of balls and the profiles derived from it.

mod ball;

pub use ball::{
    ball_autocorrelation_closed_form, mu_density, tilde_f_star, MuMeasure, TildeProfile,
};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_core::{GridFunction, GridSpec, Index, MAX_DIM};
use crate::numeric::{fft_nd, next_fast_len};

/// Autocorrelation of a grid function, sampled on [`GridSpec::shift_grid`].
#[derive(Debug, Clone)]
pub struct Autocorrelation {
    pub values: GridFunction,
    pub source_measure: f64,
}

impl Autocorrelation {
    pub fn grid(&self) -> &GridSpec {
        self.values.spec()
    }

    /// Value at the lattice shift `j` (in cells, each component in `-(n-1)..=n-1`).
    pub fn at_shift(&self, j: &[i64]) -> f64 {
        let shift = self.values.spec();
        let half = (shift.n() as i64 - 1) / 2;
        let mut ix: Index = [0; MAX_DIM];
        for (a, &c) in j.iter().enumerate().take(shift.dim()) {
            let v = c + half;
            if v < 0 || v >= shift.n() as i64 {
                return 0.0;
            }
            ix[a] = v as usize;
        }
        self.values.get(&ix)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    #[default]
    Fft,
    Direct,
}

/// `|E cap (E + s)|` for indicators; `integral e(x) e(x + s) dx` in general.
/// Fails when the support touches the outermost cells of the grid.
pub fn autocorrelation(e: &GridFunction) -> Result<Autocorrelation> {
    autocorrelation_with(e, CorrelationMethod::Fft, true)
}

pub fn autocorrelation_with(
    e: &GridFunction,
    method: CorrelationMethod,
    strict: bool,
) -> Result<Autocorrelation> {
    if strict && e.touches_boundary() {
        return Err(Error::OutOfExtent(
            "support touches the edge of the grid; enlarge the extent".into(),
        ));
    }
    let values = match method {
        CorrelationMethod::Fft => cross_correlation(e, e)?,
        CorrelationMethod::Direct => cross_correlation_direct(e, e)?,
    };
    Ok(Autocorrelation {
        values,
        source_measure: e.measure(),
    })
}

/// O(N^2) reference summation of [`cross_correlation`].
pub fn autocorrelation_direct(e: &GridFunction) -> Result<Autocorrelation> {
    autocorrelation_with(e, CorrelationMethod::Direct, false)
}

/// Dense sub-array of a grid function covering its support.
#[derive(Debug, Clone)]
pub(crate) struct Patch {
    pub lo: Index,
    pub shape: Index,
    pub values: Vec<f64>,
}

impl Patch {
    pub fn of(g: &GridFunction) -> Option<Patch> {
        let (lo, hi) = g.support_bounds()?;
        let spec = g.spec();
        let mut shape = [1; MAX_DIM];
        for a in 0..spec.dim() {
            shape[a] = hi[a] - lo[a] + 1;
        }
        let mut values = Vec::with_capacity(shape.iter().product());
        for i in 0..shape[0] {
            for j in 0..shape[1] {
                for k in 0..shape[2] {
                    values.push(g.get(&[lo[0] + i, lo[1] + j, lo[2] + k]));
                }
            }
        }
        Some(Patch { lo, shape, values })
    }
}

/// `cell_volume * sum_x a(x) b(x + s)` on the shift grid.
pub fn cross_correlation(a: &GridFunction, b: &GridFunction) -> Result<GridFunction> {
    a.spec().ensure_same(b.spec())?;
    let spec = *a.spec();
    let shift = spec.shift_grid();
    let (Some(pa), Some(pb)) = (Patch::of(a), Patch::of(b)) else {
        return Ok(GridFunction::zeros(shift));
    };
    let cv = spec.cell_volume();
    let slack = 1e-9 * a.measure().max(b.measure()) * a.max_value().max(b.max_value());
    let n = spec.n();
    let mut out = vec![0.0; shift.len()];
    let (offset, shape, vals) = correlate_patches(&pa, &pb);
    let mut idx = 0;
    for i in 0..shape[0] {
        for j in 0..shape[1] {
            for k in 0..shape[2] {
                let v = vals[idx] * cv;
                idx += 1;
                let v = if v < 0.0 {
                    if -v > slack {
                        return Err(Error::RoundOff { value: v, slack });
                    }
                    0.0
                } else {
                    v
                };
                let s = [
                    offset[0] + i as i64,
                    offset[1] + j as i64,
                    offset[2] + k as i64,
                ];
                let mut pos: Index = [0; MAX_DIM];
                for ax in 0..spec.dim() {
                    pos[ax] = (s[ax] + n as i64 - 1) as usize;
                }
                out[shift.ravel(&pos)] = v;
            }
        }
    }
    Ok(GridFunction::from_parts_unchecked(shift, out))
}

/// Raw correlation `sum_x a(x) b(x + s)` of two patches, returned as
/// `(first shift, shape, row-major values)` over the shifts where it can be nonzero.
fn correlate_patches(pa: &Patch, pb: &Patch) -> ([i64; MAX_DIM], Index, Vec<f64>) {
    let mut padded = [1usize; MAX_DIM];
    let mut out_shape = [1usize; MAX_DIM];
    let mut first = [0i64; MAX_DIM];
    for ax in 0..MAX_DIM {
        let len = pa.shape[ax] + pb.shape[ax] - 1;
        out_shape[ax] = len;
        padded[ax] = if len > 1 { next_fast_len(len) } else { 1 };
        // shift s = (lo_b + j) - (lo_a + i); smallest at j = 0, i = w_a - 1
        first[ax] = pb.lo[ax] as i64 - pa.lo[ax] as i64 - (pa.shape[ax] as i64 - 1);
    }
    let total: usize = padded.iter().product();
    let embed = |p: &Patch| {
        let mut buf = vec![Complex64::new(0.0, 0.0); total];
        let mut idx = 0;
        for i in 0..p.shape[0] {
            for j in 0..p.shape[1] {
                for k in 0..p.shape[2] {
                    buf[(i * padded[1] + j) * padded[2] + k] = Complex64::new(p.values[idx], 0.0);
                    idx += 1;
                }
            }
        }
        buf
    };
    let mut fa = embed(pa);
    let mut fb = embed(pb);
    fft_nd(&mut fa, &padded, false);
    fft_nd(&mut fb, &padded, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = x.conj() * y;
    }
    fft_nd(&mut fa, &padded, true);
    let norm = 1.0 / total as f64;
    // raw index r = (lo_b - lo_a) + m with m = j - i in -(w_a - 1)..=(w_b - 1), stored at m mod P
    let mut vals = Vec::with_capacity(out_shape.iter().product());
    for i in 0..out_shape[0] {
        for j in 0..out_shape[1] {
            for k in 0..out_shape[2] {
                let m = [
                    i as i64 - (pa.shape[0] as i64 - 1),
                    j as i64 - (pa.shape[1] as i64 - 1),
                    k as i64 - (pa.shape[2] as i64 - 1),
                ];
                let wrap = |ax: usize| m[ax].rem_euclid(padded[ax] as i64) as usize;
                vals.push(fa[(wrap(0) * padded[1] + wrap(1)) * padded[2] + wrap(2)].re * norm);
            }
        }
    }
    (first, out_shape, vals)
}

/// Direct-summation counterpart of [`cross_correlation`].
pub fn cross_correlation_direct(a: &GridFunction, b: &GridFunction) -> Result<GridFunction> {
    a.spec().ensure_same(b.spec())?;
    let spec = *a.spec();
    let shift = spec.shift_grid();
    let n = spec.n() as i64;
    let d = spec.dim();
    let cv = spec.cell_volume();
    let nonzero: Vec<(usize, Index, f64)> = a
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, &v)| (i, spec.unravel(i), v))
        .collect();
    let values = crate::numeric::par_map(shift.len(), |sidx| {
        let sx = shift.unravel(sidx);
        let s: Vec<i64> = (0..d).map(|ax| sx[ax] as i64 - (n - 1)).collect();
        let mut acc = 0.0;
        'cells: for &(_, ix, va) in &nonzero {
            let mut target: Index = [0; MAX_DIM];
            for ax in 0..d {
                let t = ix[ax] as i64 + s[ax];
                if t < 0 || t >= n {
                    continue 'cells;
                }
                target[ax] = t as usize;
            }
            acc += va * b.get(&target);
        }
        acc * cv
    });
    Ok(GridFunction::from_parts_unchecked(shift, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_core::{rasterize, RasterOptions, ShapeSpec};
    use crate::numeric::relative_difference;

    fn interval_grid(n: usize) -> (GridSpec, GridFunction) {
        let g = GridSpec::new(1, 2.0, n).unwrap();
        let e = rasterize(
            &ShapeSpec::interval(0.0, 1.0),
            &g,
            &RasterOptions::default(),
        )
        .unwrap();
        (g, e)
    }

    #[test]
    fn interval_overlap() {
        let (g, e) = interval_grid(400);
        let f = autocorrelation(&e).unwrap();
        let shift = f.grid();
        let mut err: f64 = 0.0;
        for (i, &v) in f.values.values().iter().enumerate() {
            let s = shift.coordinate(i);
            err = err.max((v - (1.0 - s.abs()).max(0.0)).abs());
        }
        assert!(err <= 2.0 / g.n() as f64, "sup error {err}");
        assert!((f.at_shift(&[0]) - 1.0).abs() < 1e-12);
        // s = 0.5 is 50 cells of width 0.01
        assert!((f.at_shift(&[50]) - 0.5).abs() < 1e-12);
        assert_eq!(f.at_shift(&[1000]), 0.0);
    }

    #[test]
    fn fft_matches_direct_2d() {
        let g = GridSpec::new(2, 1.0, 16).unwrap();
        let e = rasterize(
            &ShapeSpec::union(vec![
                ShapeSpec::ball(&[0.2, -0.1], 0.4),
                ShapeSpec::cuboid(&[-0.8, -0.8], &[-0.3, 0.1]),
            ]),
            &g,
            &RasterOptions::default(),
        )
        .unwrap();
        let fast = autocorrelation(&e).unwrap();
        let slow = autocorrelation_direct(&e).unwrap();
        let scale = fast.values.max_value();
        for (a, b) in fast.values.values().iter().zip(slow.values.values()) {
            assert!((a - b).abs() <= 1e-10 * scale);
        }
        // f(0) = integral of e^2, which is below |E| for fractional rasters
        let l2 = e.values().iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        assert!(relative_difference(fast.at_shift(&[0, 0]), l2) < 1e-12);
    }

    #[test]
    fn boundary_support_is_rejected() {
        let g = GridSpec::new(1, 1.0, 10).unwrap();
        let e = rasterize(
            &ShapeSpec::interval(-1.0, 0.0),
            &g,
            &RasterOptions::default(),
        )
        .unwrap();
        assert!(matches!(autocorrelation(&e), Err(Error::OutOfExtent(_))));
        assert!(autocorrelation_with(&e, CorrelationMethod::Fft, false).is_ok());
    }

    #[test]
    fn zero_function() {
        let g = GridSpec::new(3, 1.0, 6).unwrap();
        let f = autocorrelation(&GridFunction::zeros(g)).unwrap();
        assert_eq!(f.values.max_value(), 0.0);
        assert_eq!(f.grid().n(), 11);
    }

    #[test]
    fn cross_correlation_of_shifted_intervals() {
        let (g, a) = interval_grid(200);
        let b = rasterize(
            &ShapeSpec::interval(0.5, 1.5),
            &g,
            &RasterOptions::default(),
        )
        .unwrap();
        let c = cross_correlation(&a, &b).unwrap();
        let d = cross_correlation_direct(&a, &b).unwrap();
        for (x, y) in c.values().iter().zip(d.values()) {
            assert!((x - y).abs() < 1e-12);
        }
        // b(x + s) overlaps a most at s = 0.5
        let shift = c.spec();
        let best = (0..shift.len())
            .max_by(|&i, &j| c.values()[i].total_cmp(&c.values()[j]))
            .unwrap();
        assert!((shift.coordinate(best) - 0.5).abs() < 1e-9);
    }
}
