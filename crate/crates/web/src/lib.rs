//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The page paints a binary set on an `n x n` canvas covering `[-1, 1]^2`
//! (row-major, row 0 at the top) and calls the exported functions below. The
//! plain Rust functions return `Result<_, String>` so they can be tested
//! natively; the `#[wasm_bindgen]` wrappers turn errors into JS exceptions.

use gowers_lab::autocorr::autocorrelation;
use gowers_lab::gowers::{gowers_norm, GowersOptions};
use gowers_lab::grid_core::{GridFunction, GridSpec};
use gowers_lab::rearrange::{bathtub_oracle, cumulative_f, radial_rearrangement, rearrangement_1d};
use gowers_lab::stability::{deficit, fit_ellipsoid_with, gamma_for, FitOptions};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Cost budget per call; a few seconds of single-threaded work.
const BUDGET: f64 = 5e9;

fn grid_function(cells: &[f64], n: usize) -> Result<GridFunction, String> {
    if cells.len() != n * n {
        return Err(format!(
            "expected {} cells for a {n} x {n} canvas, got {}",
            n * n,
            cells.len()
        ));
    }
    let spec = GridSpec::new(2, 1.0, n).map_err(|e| e.to_string())?;
    GridFunction::new(spec, cells.to_vec()).map_err(|e| e.to_string())
}

/// Symmetric decreasing rearrangement of the painted set, same layout.
pub fn symmetrize_cells(cells: &[f64], n: usize) -> Result<Vec<f64>, String> {
    Ok(radial_rearrangement(&grid_function(cells, n)?).into_values())
}

#[derive(Debug, Serialize)]
pub struct Comparison {
    pub k: usize,
    pub measure: f64,
    /// `||E||_{U_k}^{2^k}`.
    pub power: f64,
    /// `||E*||_{U_k}^{2^k}`.
    pub power_star: f64,
    /// `1 - power / power_star`.
    pub deficit: f64,
    /// `1 - power / (gamma |E|^{k+1})`, against the continuum ellipsoid value.
    pub deficit_continuum: f64,
    /// Moment-fit ellipse `(x - c)^T A (x - c) <= 1`.
    pub center: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    /// `|E sym-diff ellipse| / |E|`.
    pub epsilon: f64,
}

/// Norms of the set and of its rearrangement, the deficit and the best-fit ellipse.
pub fn compare_cells(cells: &[f64], n: usize, k: usize) -> Result<Comparison, String> {
    if !(2..=3).contains(&k) {
        return Err(format!("order k = {k}; the demo supports 2 and 3"));
    }
    let e = grid_function(cells, n)?;
    let opts = GowersOptions {
        budget: BUDGET,
        ..Default::default()
    };
    let gamma = gamma_for(k, 2, BUDGET).map_err(|e| e.to_string())?;
    let def = deficit(&e, k, gamma, &opts).map_err(|e| e.to_string())?;
    let power_star = gowers_norm(&radial_rearrangement(&e), k, &opts).map_err(|e| e.to_string())?;
    let fit = fit_ellipsoid_with(&e, &FitOptions::default()).map_err(|e| e.to_string())?;
    Ok(Comparison {
        k,
        measure: def.measure,
        power: def.power_value,
        power_star: power_star.power_value,
        deficit: def.delta_discrete,
        deficit_continuum: def.delta_raw,
        center: fit.center,
        matrix: fit.matrix,
        epsilon: fit.epsilon,
    })
}

#[derive(Debug, Serialize)]
pub struct Profiles {
    /// Breakpoints and values of the rearranged autocorrelation `f_*` (step).
    pub t: Vec<f64>,
    pub f_star: Vec<f64>,
    /// The cumulative integral `F` at the same breakpoints.
    pub cumulative: Vec<f64>,
    /// Largest relative gap between `F` and the greedy bathtub maximum.
    pub bathtub_gap: f64,
}

/// Profiles of the autocorrelation `s -> |E cap (E + s)|`.
pub fn profiles_of_cells(cells: &[f64], n: usize) -> Result<Profiles, String> {
    let e = grid_function(cells, n)?;
    let f = autocorrelation(&e).map_err(|e| e.to_string())?.values;
    let p = rearrangement_1d(&f);
    let big_f = cumulative_f(&p).map_err(|e| e.to_string())?;
    let t = p.breakpoints().to_vec();
    let cumulative: Vec<f64> = t.iter().map(|&x| big_f.eval(x)).collect();
    let mut gap = 0.0f64;
    for (&x, &c) in t.iter().zip(&cumulative) {
        let greedy = bathtub_oracle(&f, x).map_err(|e| e.to_string())?;
        if c > 0.0 {
            gap = gap.max((greedy - c).abs() / c);
        }
    }
    Ok(Profiles {
        t,
        f_star: p.values().to_vec(),
        cumulative,
        bathtub_gap: gap,
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn symmetrize(cells: &[f64], n: usize) -> Result<Vec<f64>, JsError> {
    symmetrize_cells(cells, n).map_err(|e| JsError::new(&e))
}

/// JSON-encoded [`Comparison`].
#[wasm_bindgen]
pub fn compare(cells: &[f64], n: usize, k: usize) -> Result<String, JsError> {
    to_json(compare_cells(cells, n, k))
}

/// JSON-encoded [`Profiles`].
#[wasm_bindgen]
pub fn profiles(cells: &[f64], n: usize) -> Result<String, JsError> {
    to_json(profiles_of_cells(cells, n))
}
