use serde::{Deserialize, Serialize};

use super::{GridFunction, GridSpec, Point, Region, ShapeSpec, MAX_DIM};
use crate::error::{Error, Result};
use crate::numeric::par_map;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RasterMode {
    /// Cell-centre membership, values in {0, 1}.
    Binary,
    /// Subsampled occupancy of boundary cells, values in [0, 1].
    #[default]
    Fractional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterOptions {
    pub mode: RasterMode,
    /// Subsamples per axis inside each boundary cell (fractional mode).
    pub subsamples: usize,
    /// Reject shapes leaving `[-L, L]^d` instead of clipping them.
    pub strict: bool,
}

impl Default for RasterOptions {
    fn default() -> Self {
        Self {
            mode: RasterMode::Fractional,
            subsamples: 4,
            strict: true,
        }
    }
}

impl RasterOptions {
    pub fn binary() -> Self {
        Self {
            mode: RasterMode::Binary,
            ..Self::default()
        }
    }
}

pub fn rasterize(shape: &ShapeSpec, grid: &GridSpec, opts: &RasterOptions) -> Result<GridFunction> {
    let compiled = shape.compile()?;
    if let Some(d) = shape.dim() {
        if d != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "shape of dimension {d} on a {}-dimensional grid",
                grid.dim()
            )));
        }
    } else {
        return Ok(GridFunction::zeros(*grid));
    }
    rasterize_region(&compiled, grid, opts)
}

pub fn rasterize_region(
    region: &dyn Region,
    grid: &GridSpec,
    opts: &RasterOptions,
) -> Result<GridFunction> {
    let d = grid.dim();
    if region.dim() != d {
        return Err(Error::GridMismatch(format!(
            "region of dimension {} on a {d}-dimensional grid",
            region.dim()
        )));
    }
    if opts.subsamples == 0 {
        return Err(Error::arg("subsamples must be positive"));
    }
    let Some((lo, hi)) = region.bounding_box() else {
        return Ok(GridFunction::zeros(*grid));
    };
    let (l, h) = (grid.extent(), grid.cell_width());
    for a in 0..d {
        if lo[a] < -l || hi[a] > l {
            let msg = format!(
                "axis {a}: [{:.6}, {:.6}] not inside [-{l}, {l}]",
                lo[a], hi[a]
            );
            if opts.strict {
                return Err(Error::OutOfExtent(msg));
            }
            log::warn!("clipping shape, {msg}");
        } else if lo[a] < -l + h || hi[a] > l - h {
            log::warn!("shape within one cell of the grid edge on axis {a}");
        }
    }

    // index range of cells meeting the bounding box
    let mut first = [0usize; MAX_DIM];
    let mut last = [0usize; MAX_DIM];
    for a in 0..d {
        let f = ((lo[a] + l) / h).floor().max(0.0) as usize;
        let t = ((hi[a] + l) / h).ceil().min(grid.n() as f64) as usize;
        first[a] = f.min(grid.n());
        last[a] = t.max(first[a]);
    }

    let s = opts.subsamples;
    let values = par_map(grid.len(), |idx| {
        let ix = grid.unravel(idx);
        if (0..d).any(|a| ix[a] < first[a] || ix[a] >= last[a]) {
            return 0.0;
        }
        let centre = grid.cell_center(idx);
        match opts.mode {
            RasterMode::Binary => f64::from(u8::from(region.contains(&centre))),
            RasterMode::Fractional => cell_occupancy(region, d, &centre, h, s),
        }
    });
    Ok(GridFunction::from_parts_unchecked(*grid, values))
}

fn cell_occupancy(region: &dyn Region, d: usize, centre: &Point, h: f64, s: usize) -> f64 {
    let inside = region.contains(centre);
    let mut uniform = true;
    for corner in 0..(1usize << d) {
        let mut p = *centre;
        for (a, x) in p.iter_mut().enumerate().take(d) {
            *x += if corner >> a & 1 == 1 {
                0.5 * h
            } else {
                -0.5 * h
            };
        }
        if region.contains(&p) != inside {
            uniform = false;
            break;
        }
    }
    if uniform {
        return f64::from(u8::from(inside));
    }
    let total = s.pow(d as u32);
    let mut hits = 0usize;
    for k in 0..total {
        let mut p = *centre;
        let mut rem = k;
        for x in p.iter_mut().take(d) {
            let j = rem % s;
            rem /= s;
            *x += ((j as f64 + 0.5) / s as f64 - 0.5) * h;
        }
        if region.contains(&p) {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_core::{measure, symmetric_difference, AffineMap};
    use std::f64::consts::PI;

    #[test]
    fn interval_measure_fractional() {
        let g = GridSpec::new(1, 2.0, 1000).unwrap();
        let f = rasterize(&ShapeSpec::ball(&[0.0], 0.5), &g, &RasterOptions::default()).unwrap();
        assert!((measure(&f) - 1.0).abs() < 2e-3);
        let aligned = rasterize(
            &ShapeSpec::interval(0.0, 1.0),
            &g,
            &RasterOptions::default(),
        )
        .unwrap();
        assert!((measure(&aligned) - 1.0).abs() < 1e-12);
        assert!(aligned.is_binary());
    }

    #[test]
    fn disk_of_unit_area() {
        let g = GridSpec::new(2, 1.0, 512).unwrap();
        let f = rasterize(
            &ShapeSpec::ball(&[0.0, 0.0], PI.powf(-0.5)),
            &g,
            &RasterOptions::default(),
        )
        .unwrap();
        assert!((measure(&f) - 1.0).abs() < 5e-3);
        assert!(f.is_indicator());
    }

    #[test]
    fn disjoint_union_and_slivers() {
        let g = GridSpec::new(1, 4.0, 800).unwrap();
        let opts = RasterOptions::default();
        let u = ShapeSpec::union(vec![
            ShapeSpec::interval(0.0, 1.0),
            ShapeSpec::interval(2.0, 2.5),
        ]);
        assert!((measure(&rasterize(&u, &g, &opts).unwrap()) - 1.5).abs() < 1e-12);
        let a = rasterize(&ShapeSpec::interval(0.0, 1.0), &g, &opts).unwrap();
        let b = rasterize(&ShapeSpec::interval(0.25, 1.25), &g, &opts).unwrap();
        assert!((symmetric_difference(&a, &b).unwrap() - 0.5).abs() < 1e-12);
        let c = rasterize(
            &ShapeSpec::union(vec![
                ShapeSpec::interval(0.0, 1.0),
                ShapeSpec::interval(2.0, 2.2),
            ]),
            &g,
            &opts,
        )
        .unwrap();
        assert!((symmetric_difference(&a, &c).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn strict_mode_rejects_overflow() {
        let g = GridSpec::new(1, 1.0, 64).unwrap();
        let too_big = ShapeSpec::interval(-2.0, 0.0);
        assert!(matches!(
            rasterize(&too_big, &g, &RasterOptions::default()),
            Err(Error::OutOfExtent(_))
        ));
        let lenient = RasterOptions {
            strict: false,
            ..RasterOptions::default()
        };
        let f = rasterize(&too_big, &g, &lenient).unwrap();
        assert!((measure(&f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binary_mode_and_affine_image() {
        let g = GridSpec::new(2, 2.0, 256).unwrap();
        let disk = ShapeSpec::ball(&[0.0, 0.0], PI.powf(-0.5));
        let b = rasterize(&disk, &g, &RasterOptions::binary()).unwrap();
        assert!(b.is_binary());
        assert!((measure(&b) - 1.0).abs() < 2e-2);
        let shear = AffineMap::new(vec![vec![1.0, 1.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap();
        let img = crate::grid_core::apply_affine(&shear, &disk).unwrap();
        let f = rasterize(&img, &g, &RasterOptions::default()).unwrap();
        assert!((measure(&f) - 1.0).abs() < 5e-3);
    }
}
