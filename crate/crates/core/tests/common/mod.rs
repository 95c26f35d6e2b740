#![allow(dead_code)]

use gowers_lab::grid_core::{GridFunction, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
pub struct Fixtures {
    pub gamma: GammaFixture,
    pub equality: EqualityFixture,
    pub stability: StabilityFixture,
    pub exceptional: ExceptionalFixture,
}

#[derive(Debug, Deserialize)]
pub struct GammaFixture {
    pub k3_d2: f64,
    pub k3_d2_tol: f64,
}

#[derive(Debug, Deserialize)]
pub struct EqualityFixture {
    pub floor: f64,
    pub n: usize,
    pub deltas: std::collections::BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
pub struct StabilityFixture {
    pub spearman_min: f64,
    pub spearman_measured: f64,
}

#[derive(Debug, Deserialize)]
pub struct ExceptionalFixture {
    pub c_frozen: f64,
    pub j_lo: f64,
    pub j_hi: f64,
}

pub fn fixtures() -> Fixtures {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/regression.toml");
    toml::from_str(&std::fs::read_to_string(path).expect("fixture file")).expect("fixture schema")
}

/// Nonnegative values on a random sub-box of the grid, with some cells zeroed.
pub fn random_function(grid: GridSpec, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    let d = grid.dim();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..d {
        let x = rng.gen_range(0..n / 2);
        let y = rng.gen_range(n / 2..n);
        lo[a] = x;
        hi[a] = y;
    }
    let values = (0..grid.len())
        .map(|i| {
            let idx = grid.unravel(i);
            let inside = (0..d).all(|a| idx[a] >= lo[a] && idx[a] <= hi[a]);
            if inside && rng.gen_bool(0.8) {
                rng.gen_range(0.0..1.0)
            } else {
                0.0
            }
        })
        .collect();
    GridFunction::new(grid, values).unwrap()
}
