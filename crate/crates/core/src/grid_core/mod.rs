//! Regular cell-centred grids on `[-L, L]^d`, nonnegative grid functions,
//! analytic shape descriptions and their rasterization.

mod io;
mod random;
mod raster;
mod shape;

pub use io::{read_grid, read_shape, write_grid, GRID_MAGIC, GRID_VERSION};
pub use random::{random_set, RadialField, RandomModel, RandomSet, StarBody};
pub use raster::{rasterize, rasterize_region, RasterMode, RasterOptions};
pub use shape::{apply_affine, AffineMap, Region, ShapeSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

/// Point or index padded to three components; unused trailing axes are zero.
pub type Point = [f64; MAX_DIM];
pub type Index = [usize; MAX_DIM];

/// `n^d` cells of width `2L/n` covering `[-L, L]^d`, row-major with axis 0 slowest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    extent: f64,
    n: usize,
}

impl GridSpec {
    pub fn new(dim: usize, extent: f64, n: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 cells per axis, got {n}"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "extent must be positive, got {extent}"
            )));
        }
        Ok(Self { dim, extent, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_width().powi(self.dim as i32)
    }

    pub fn total_volume(&self) -> f64 {
        (2.0 * self.extent).powi(self.dim as i32)
    }

    /// Per-axis shape, padded with 1 for unused axes.
    pub fn shape(&self) -> Index {
        let mut s = [1; MAX_DIM];
        for a in s.iter_mut().take(self.dim) {
            *a = self.n;
        }
        s
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.extent + (i as f64 + 0.5) * self.cell_width()
    }

    pub fn unravel(&self, mut idx: usize) -> Index {
        let mut out = [0; MAX_DIM];
        for axis in (0..self.dim).rev() {
            out[axis] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    pub fn ravel(&self, index: &Index) -> usize {
        index[..self.dim].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn cell_center(&self, idx: usize) -> Point {
        let ix = self.unravel(idx);
        let mut p = [0.0; MAX_DIM];
        for a in 0..self.dim {
            p[a] = self.coordinate(ix[a]);
        }
        p
    }

    /// Squared distance of a cell centre from the origin in units of half a
    /// cell width. Integer valued, so equidistant cells tie exactly.
    pub fn doubled_radius_sq(&self, idx: usize) -> u64 {
        let ix = self.unravel(idx);
        ix[..self.dim]
            .iter()
            .map(|&i| {
                let c = 2 * i as i64 - (self.n as i64 - 1);
                (c * c) as u64
            })
            .sum()
    }

    /// Grid of lattice shifts `s = j h`, `|j_i| <= n - 1`, used for correlations.
    /// Same cell width, `2n - 1` cells per axis, centred on the zero shift.
    pub fn shift_grid(&self) -> GridSpec {
        let n = 2 * self.n - 1;
        GridSpec {
            dim: self.dim,
            n,
            extent: n as f64 * self.cell_width() / 2.0,
        }
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Nonnegative function sampled at the cells of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::NegativeValue { index, value });
        }
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            values: vec![0.0; spec.len()],
            spec,
        }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = (0..spec.len()).map(|i| f(spec.cell_center(i))).collect();
        Self::new(spec, values)
    }

    pub(crate) fn from_parts_unchecked(spec: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        Self { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, index: &Index) -> f64 {
        self.values[self.spec.ravel(index)]
    }

    pub fn measure(&self) -> f64 {
        self.spec.cell_volume() * pairwise_sum(&self.values)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_indicator(&self) -> bool {
        self.values.iter().all(|&v| v <= 1.0)
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.spec, self.values.iter().map(|v| v * c).collect())
    }

    /// Inclusive per-axis index bounds of the nonzero cells, `None` if identically zero.
    pub fn support_bounds(&self) -> Option<(Index, Index)> {
        let mut lo = [usize::MAX; MAX_DIM];
        let mut hi = [0; MAX_DIM];
        let mut any = false;
        for (i, &v) in self.values.iter().enumerate() {
            if v != 0.0 {
                any = true;
                let ix = self.spec.unravel(i);
                for a in 0..self.spec.dim {
                    lo[a] = lo[a].min(ix[a]);
                    hi[a] = hi[a].max(ix[a]);
                }
            }
        }
        if !any {
            return None;
        }
        for a in self.spec.dim..MAX_DIM {
            lo[a] = 0;
            hi[a] = 0;
        }
        Some((lo, hi))
    }

    /// True when some nonzero value sits in the outermost layer of cells.
    pub fn touches_boundary(&self) -> bool {
        match self.support_bounds() {
            None => false,
            Some((lo, hi)) => (0..self.spec.dim).any(|a| lo[a] == 0 || hi[a] == self.spec.n - 1),
        }
    }
}

/// `cell_volume * sum(values)`.
pub fn measure(g: &GridFunction) -> f64 {
    g.measure()
}

/// L1 distance `cell_volume * sum |a - b|`; equals `|A Δ B|` for binary indicators.
pub fn symmetric_difference(a: &GridFunction, b: &GridFunction) -> Result<f64> {
    a.spec.ensure_same(&b.spec)?;
    let diffs: Vec<f64> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .collect();
    Ok(a.spec.cell_volume() * pairwise_sum(&diffs))
}
