use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    rasterize, rasterize_region, GridFunction, GridSpec, Point, RasterOptions, Region, ShapeSpec,
    MAX_DIM,
};
use crate::error::{Error, Result};

/// Smooth function on the unit sphere with sup norm 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RadialField {
    /// d = 1: independent values at the two directions -1 and +1.
    Endpoints { left: f64, right: f64 },
    /// d = 2: trigonometric polynomial in the polar angle.
    Fourier {
        first_mode: usize,
        cos: Vec<f64>,
        sin: Vec<f64>,
        scale: f64,
    },
    /// d = 3: sum of Chebyshev polynomials of `u . axis`.
    Zonal {
        axes: Vec<[f64; 3]>,
        degrees: Vec<u32>,
        weights: Vec<f64>,
        scale: f64,
    },
}

impl RadialField {
    fn raw(&self, u: &Point) -> f64 {
        match self {
            RadialField::Endpoints { left, right } => {
                if u[0] < 0.0 {
                    *left
                } else {
                    *right
                }
            }
            RadialField::Fourier {
                first_mode,
                cos,
                sin,
                ..
            } => {
                let theta = u[1].atan2(u[0]);
                cos.iter()
                    .zip(sin)
                    .enumerate()
                    .map(|(i, (a, b))| {
                        let m = (first_mode + i) as f64;
                        a * (m * theta).cos() + b * (m * theta).sin()
                    })
                    .sum()
            }
            RadialField::Zonal {
                axes,
                degrees,
                weights,
                ..
            } => axes
                .iter()
                .zip(degrees)
                .zip(weights)
                .map(|((v, &deg), w)| {
                    let t = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).clamp(-1.0, 1.0);
                    w * (deg as f64 * t.acos()).cos()
                })
                .sum(),
        }
    }

    pub fn value(&self, u: &Point) -> f64 {
        match self {
            RadialField::Endpoints { .. } => self.raw(u),
            RadialField::Fourier { scale, .. } | RadialField::Zonal { scale, .. } => {
                self.raw(u) / scale
            }
        }
    }
}

/// Ball of radius `radius` deformed radially: `r(u) = radius (1 + amplitude g(u))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarBody {
    pub dim: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    pub amplitude: f64,
    pub field: RadialField,
}

impl StarBody {
    pub fn radius_at(&self, u: &Point) -> f64 {
        self.radius * (1.0 + self.amplitude * self.field.value(u))
    }
}

impl Region for StarBody {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, p: &Point) -> bool {
        let mut v = [0.0; MAX_DIM];
        for a in 0..self.dim {
            v[a] = p[a] - self.center[a];
        }
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 {
            return true;
        }
        let u = v.map(|x| x / r);
        r <= self.radius_at(&u)
    }

    fn bounding_box(&self) -> Option<(Point, Point)> {
        let reach = self.radius * (1.0 + self.amplitude);
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        for a in 0..self.dim {
            lo[a] = self.center[a] - reach;
            hi[a] = self.center[a] + reach;
        }
        Some((lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RandomModel {
    /// Union of one to four random axis-aligned boxes.
    RandomBoxes,
    /// Centred ball of radius `L/2` with a random radial deformation of the
    /// given relative amplitude (modes 3..=6 in the plane).
    PerturbedEllipsoid { amplitude: f64 },
}

#[derive(Debug, Clone)]
pub struct RandomSet {
    /// Analytic description, when the generated set is expressible as a [`ShapeSpec`].
    pub spec: Option<ShapeSpec>,
    pub star: Option<StarBody>,
    pub raster: GridFunction,
}

pub fn random_set(grid: &GridSpec, seed: u64, model: RandomModel) -> Result<RandomSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let l = grid.extent();
    let opts = RasterOptions::default();
    match model {
        RandomModel::RandomBoxes => {
            let count = rng.gen_range(1..=4);
            let parts: Vec<ShapeSpec> = (0..count)
                .map(|_| {
                    let mut lo = vec![0.0; d];
                    let mut hi = vec![0.0; d];
                    for a in 0..d {
                        let c = rng.gen_range(-0.5 * l..0.5 * l);
                        let w = rng.gen_range(0.05 * l..0.3 * l);
                        lo[a] = c - w;
                        hi[a] = c + w;
                    }
                    ShapeSpec::Box { lo, hi }
                })
                .collect();
            let spec = ShapeSpec::union(parts);
            let raster = rasterize(&spec, grid, &opts)?;
            Ok(RandomSet {
                spec: Some(spec),
                star: None,
                raster,
            })
        }
        RandomModel::PerturbedEllipsoid { amplitude } => {
            if !(0.0..0.8).contains(&amplitude) {
                return Err(Error::arg(format!("amplitude {amplitude} not in [0, 0.8)")));
            }
            let radius = 0.5 * l;
            let field = random_field(d, &mut rng);
            let star = StarBody {
                dim: d,
                center: vec![0.0; d],
                radius,
                amplitude,
                field,
            };
            if amplitude == 0.0 {
                let spec = ShapeSpec::ball(&vec![0.0; d], radius);
                let raster = rasterize(&spec, grid, &opts)?;
                return Ok(RandomSet {
                    spec: Some(spec),
                    star: Some(star),
                    raster,
                });
            }
            let raster = rasterize_region(&star, grid, &opts)?;
            Ok(RandomSet {
                spec: None,
                star: Some(star),
                raster,
            })
        }
    }
}

fn random_field(d: usize, rng: &mut ChaCha8Rng) -> RadialField {
    match d {
        1 => RadialField::Endpoints {
            left: rng.gen_range(-1.0..1.0),
            right: rng.gen_range(-1.0..1.0),
        },
        2 => {
            let modes = 4;
            let cos: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let sin: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut f = RadialField::Fourier {
                first_mode: 3,
                cos,
                sin,
                scale: 1.0,
            };
            let samples = 2048;
            let sup = (0..samples)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
                    f.raw(&[t.cos(), t.sin(), 0.0]).abs()
                })
                .fold(0.0, f64::max);
            if let RadialField::Fourier { scale, .. } = &mut f {
                *scale = sup.max(f64::MIN_POSITIVE);
            }
            f
        }
        _ => {
            let count = 6;
            let axes: Vec<[f64; 3]> = (0..count)
                .map(|_| {
                    let z: f64 = rng.gen_range(-1.0..1.0);
                    let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                    let s = (1.0 - z * z).sqrt();
                    [s * phi.cos(), s * phi.sin(), z]
                })
                .collect();
            let degrees = (0..count).map(|_| rng.gen_range(3..=4)).collect();
            let weights = (0..count).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut f = RadialField::Zonal {
                axes,
                degrees,
                weights,
                scale: 1.0,
            };
            // Fibonacci sphere
            let samples = 4096;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            let sup = (0..samples)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / samples as f64;
                    let s = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    f.raw(&[s * phi.cos(), s * phi.sin(), z]).abs()
                })
                .fold(0.0, f64::max);
            if let RadialField::Zonal { scale, .. } = &mut f {
                *scale = sup.max(f64::MIN_POSITIVE);
            }
            f
        }
    }
}
