//! Rearrangements of grid functions: the symmetric decreasing rearrangement
//! `f*` on the grid, the one-dimensional nonincreasing rearrangement `f_*` as
//! a step profile, its running integral `F`, the greedy bathtub maximizer and
//! superlevel sets.
//!
//! On a grid the right-continuity normalizations of the continuum definitions
//! are automatic: every profile produced here is a finite step function.

mod profile;

pub use profile::{Profile1D, ProfileKind};

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::grid_core::GridFunction;
use crate::numeric::pairwise_sum;

/// Symmetric decreasing rearrangement about the origin: the cell values sorted
/// in decreasing order are placed on cells of increasing distance from the
/// origin. Equidistant cells are filled in increasing index order.
pub fn radial_rearrangement(g: &GridFunction) -> GridFunction {
    let spec = *g.spec();
    let mut cells: Vec<(u64, usize)> = (0..spec.len())
        .map(|i| (spec.doubled_radius_sq(i), i))
        .collect();
    cells.sort_unstable();
    let sorted = sorted_descending(g.values());
    let mut out = vec![0.0; spec.len()];
    for (&(_, idx), v) in cells.iter().zip(sorted) {
        out[idx] = v;
    }
    GridFunction::from_parts_unchecked(spec, out)
}

fn sorted_descending(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    v
}

/// Nonincreasing rearrangement on `[0, inf)` as a step profile: the `i`-th
/// largest cell value occupies `[i h^d, (i + 1) h^d)`. Runs of equal values are
/// merged, and the profile drops to zero after the last positive value.
pub fn rearrangement_1d(g: &GridFunction) -> Profile1D {
    step_profile_from_values(g.values(), g.spec().cell_volume())
}

pub(crate) fn step_profile_from_values(values: &[f64], cell_volume: f64) -> Profile1D {
    let sorted = sorted_descending(values);
    let positive = sorted.partition_point(|&v| v > 0.0);
    if positive == 0 {
        return Profile1D::zero();
    }
    let mut t = Vec::new();
    let mut vals = Vec::new();
    let mut i = 0;
    while i < positive {
        t.push(i as f64 * cell_volume);
        vals.push(sorted[i]);
        let v = sorted[i];
        while i < positive && sorted[i] == v {
            i += 1;
        }
    }
    t.push(positive as f64 * cell_volume);
    vals.push(0.0);
    Profile1D::from_parts_unchecked(ProfileKind::Step, t, vals)
}

/// Node count per linear segment when integrating a piecewise-linear profile.
const LINEAR_SUBDIVISIONS: usize = 16;

/// `F(t) = integral of p over [0, t]` as a linear profile. Exact at every
/// breakpoint; exact everywhere for step input.
pub fn cumulative_f(p: &Profile1D) -> Result<Profile1D> {
    if p.final_value() != 0.0 {
        return Err(Error::arg(
            "profile is not compactly supported; its integral diverges",
        ));
    }
    let (ts, vs) = (p.breakpoints(), p.values());
    let mut t = Vec::with_capacity(ts.len() + 1);
    let mut f = Vec::with_capacity(ts.len() + 1);
    if ts[0] > 0.0 {
        t.push(0.0);
        f.push(0.0);
    }
    t.push(ts[0]);
    f.push(vs[0] * ts[0]);
    let mut acc = vs[0] * ts[0];
    for i in 0..ts.len() - 1 {
        let (a, b) = (ts[i], ts[i + 1]);
        match p.kind() {
            ProfileKind::Step => {
                acc += vs[i] * (b - a);
                t.push(b);
                f.push(acc);
            }
            ProfileKind::Linear => {
                let base = acc;
                let slope = (vs[i + 1] - vs[i]) / (b - a);
                for j in 1..=LINEAR_SUBDIVISIONS {
                    let x = if j == LINEAR_SUBDIVISIONS {
                        b
                    } else {
                        a + (b - a) * j as f64 / LINEAR_SUBDIVISIONS as f64
                    };
                    if x <= *t.last().expect("nonempty") {
                        continue;
                    }
                    let dx = x - a;
                    acc = base + vs[i] * dx + 0.5 * slope * dx * dx;
                    t.push(x);
                    f.push(acc);
                }
                acc = *f.last().expect("nonempty");
            }
        }
    }
    Ok(Profile1D::from_parts_unchecked(ProfileKind::Linear, t, f))
}

#[derive(PartialEq)]
struct Cell(f64);

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Maximum of `integral over A of g` over sets `A` of measure `t`, built
/// greedily from the largest cells with one fractional cell at the end.
/// Independent of the sorting path used by [`rearrangement_1d`].
pub fn bathtub_oracle(g: &GridFunction, t: f64) -> Result<f64> {
    let spec = g.spec();
    if !(t >= 0.0) {
        return Err(Error::arg(format!("measure {t} must be nonnegative")));
    }
    if t > spec.total_volume() {
        return Err(Error::arg(format!(
            "measure {t} exceeds the grid volume {}",
            spec.total_volume()
        )));
    }
    let cv = spec.cell_volume();
    let mut heap: BinaryHeap<Cell> = g.values().iter().map(|&v| Cell(v)).collect();
    let mut remaining = t;
    let mut parts = Vec::new();
    while remaining > 0.0 {
        let Some(Cell(v)) = heap.pop() else { break };
        if v == 0.0 {
            break;
        }
        let take = remaining.min(cv);
        parts.push(v * take);
        remaining -= take;
    }
    Ok(pairwise_sum(&parts))
}

/// Indicator of `{g > t}`.
pub fn superlevel_set(g: &GridFunction, t: f64) -> Result<GridFunction> {
    if !(t >= 0.0) {
        return Err(Error::arg(format!("level {t} must be nonnegative")));
    }
    let values = g
        .values()
        .iter()
        .map(|&v| if v > t { 1.0 } else { 0.0 })
        .collect();
    Ok(GridFunction::from_parts_unchecked(*g.spec(), values))
}

/// `|{g > alpha}|`.
pub fn superlevel_measure(g: &GridFunction, alpha: f64) -> f64 {
    g.values().iter().filter(|&&v| v > alpha).count() as f64 * g.spec().cell_volume()
}

/// Superlevel sets of one function at increasing thresholds.
#[derive(Debug, Clone)]
pub struct LayerCake {
    pub thresholds: Vec<f64>,
    pub sets: Vec<GridFunction>,
}

impl LayerCake {
    pub fn new(g: &GridFunction, thresholds: &[f64]) -> Result<Self> {
        if thresholds.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::arg("thresholds must increase strictly"));
        }
        if thresholds.first().is_some_and(|&t| !(t > 0.0)) {
            return Err(Error::arg("thresholds must be positive"));
        }
        let sets = thresholds
            .iter()
            .map(|&t| superlevel_set(g, t))
            .collect::<Result<_>>()?;
        Ok(Self {
            thresholds: thresholds.to_vec(),
            sets,
        })
    }

    pub fn measures(&self) -> Vec<f64> {
        self.sets.iter().map(|s| s.measure()).collect()
    }

    /// Every set contains all later (higher-threshold) ones.
    pub fn is_nested(&self) -> bool {
        self.sets.windows(2).all(|w| {
            w[0].values()
                .iter()
                .zip(w[1].values())
                .all(|(outer, inner)| inner <= outer)
        })
    }
}
