use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::{unit_ball_volume, Quadrature};
use crate::rearrange::{Profile1D, ProfileKind};

/// `|B cap (B + s)|` for a ball `B` of radius `r` in dimension `d`, `|s| = s`.
pub fn ball_autocorrelation_closed_form(d: usize, r: f64, s: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::arg(format!("radius {r} must be positive")));
    }
    lens(d, r, s.abs())
}

fn lens(d: usize, r: f64, s: f64) -> Result<f64> {
    if s >= 2.0 * r {
        return match d {
            1..=3 => Ok(0.0),
            _ => Err(Error::arg(format!(
                "closed form available for d = 1, 2, 3, not {d}"
            ))),
        };
    }
    Ok(match d {
        1 => 2.0 * r - s,
        2 => 2.0 * r * r * (s / (2.0 * r)).acos() - 0.5 * s * (4.0 * r * r - s * s).sqrt(),
        3 => PI * (2.0 * r - s).powi(2) * (4.0 * r + s) / 12.0,
        _ => {
            return Err(Error::arg(format!(
                "closed form available for d = 1, 2, 3, not {d}"
            )))
        }
    })
}

fn lens_derivative(d: usize, r: f64, s: f64) -> f64 {
    if s >= 2.0 * r {
        return 0.0;
    }
    match d {
        1 => -1.0,
        2 => -(4.0 * r * r - s * s).sqrt(),
        _ => -PI * (4.0 * r * r - s * s) / 4.0,
    }
}

/// Nonincreasing rearrangement of `s -> |B cap (B + s)|` for the centred ball
/// `B` of a given measure, evaluated analytically.
///
/// The autocorrelation is radial and decreasing, so the rearrangement is
/// `t -> g(u(t))` where `g` is the lens volume as a function of `|s|` and
/// `u(t)` is the radius of the ball of volume `t`.
#[derive(Debug, Clone)]
pub struct TildeProfile {
    d: usize,
    measure: f64,
    radius: f64,
    omega: f64,
    quad: Quadrature,
}

/// Builds the analytic profile for dimension `d` and ball measure `measure`.
pub fn tilde_f_star(d: usize, measure: f64) -> Result<TildeProfile> {
    TildeProfile::new(d, measure)
}

impl TildeProfile {
    pub fn new(d: usize, measure: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::arg(format!(
                "closed form available for d = 1, 2, 3, not {d}"
            )));
        }
        if !(measure > 0.0 && measure.is_finite()) {
            return Err(Error::ZeroMeasure);
        }
        let omega = unit_ball_volume(d);
        let radius = (measure / omega).powf(1.0 / d as f64);
        Ok(Self {
            d,
            measure,
            radius,
            omega,
            quad: Quadrature::new(10, 32),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// Radius of the ball `B`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `2^d |B|`, the length of the support.
    pub fn support_end(&self) -> f64 {
        (1u32 << self.d) as f64 * self.measure
    }

    /// Radius of the ball of volume `t`.
    pub fn radius_of_volume(&self, t: f64) -> f64 {
        (t.max(0.0) / self.omega).powf(1.0 / self.d as f64)
    }

    pub fn value(&self, t: f64) -> f64 {
        if t >= self.support_end() {
            return 0.0;
        }
        lens(self.d, self.radius, self.radius_of_volume(t)).expect("dimension checked")
    }

    /// Derivative in `t`; diverges like `t^{1/d - 1}` at `t = 0` when `d >= 2`.
    pub fn derivative(&self, t: f64) -> f64 {
        if t >= self.support_end() {
            return 0.0;
        }
        let u = self.radius_of_volume(t);
        if self.d == 1 {
            return -0.5;
        }
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        lens_derivative(self.d, self.radius, u) * u / (self.d as f64 * t)
    }

    /// `integral of the profile over [0, t]`. Computed in the angle variable
    /// `u = 2r sin(theta)`, which turns the square-root endpoint behaviour into
    /// an analytic integrand.
    pub fn cumulative(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let (d, r) = (self.d, self.radius);
        let u = self.radius_of_volume(t.min(self.support_end()));
        let theta = (u / (2.0 * r)).min(1.0).asin();
        let surface = d as f64 * self.omega;
        self.quad.integrate(0.0, theta, |th| {
            let (s, c) = th.sin_cos();
            let u = 2.0 * r * s;
            lens(d, r, u).expect("dimension checked") * surface * u.powi(d as i32 - 1) * 2.0 * r * c
        })
    }

    /// Samples on a partition uniform in the ball radius, as a linear profile.
    pub fn to_profile(&self, intervals: usize) -> Profile1D {
        let t = self.partition(intervals.max(1));
        let values = t.iter().map(|&x| self.value(x)).collect();
        Profile1D::from_parts_unchecked(ProfileKind::Linear, t, values)
    }

    /// `t_i = |ball of radius 2r i / m|`, `i = 0..=m`.
    pub fn partition(&self, m: usize) -> Vec<f64> {
        let end = self.support_end();
        (0..=m)
            .map(|i| {
                if i == m {
                    end
                } else {
                    self.omega * (2.0 * self.radius * i as f64 / m as f64).powi(self.d as i32)
                }
            })
            .collect()
    }
}

/// The measure with density `-(k - 1) p^{k-2} p'` on `(0, 2^d |E|)`, where
/// `p` is the analytic profile of the ball autocorrelation.
#[derive(Debug, Clone)]
pub struct MuMeasure {
    pub k: usize,
    pub tilde: TildeProfile,
    /// Cell averages on a partition uniform in the ball radius.
    pub density: Profile1D,
    pub total_mass: f64,
}

const DENSITY_CELLS: usize = 512;

pub fn mu_density(d: usize, k: usize, measure: f64) -> Result<MuMeasure> {
    if k < 2 {
        return Err(Error::arg(format!("order k = {k} must be at least 2")));
    }
    let tilde = TildeProfile::new(d, measure)?;
    let t = tilde.partition(DENSITY_CELLS);
    let j = k as i32 - 2;
    let mut values: Vec<f64> = t
        .windows(2)
        .map(|w| {
            let (pa, pb) = (tilde.value(w[0]), tilde.value(w[1]));
            if d == 1 {
                // p is linear with slope -1/2: the average of (k - 1) p^j / 2
                // has a closed form and is exactly 1/2 for k = 2
                let mean = if j == 0 {
                    1.0
                } else {
                    (pa.powi(j + 1) - pb.powi(j + 1)) / ((j + 1) as f64 * (pa - pb))
                };
                return 0.5 * (k - 1) as f64 * mean;
            }
            (pa.powi(j + 1) - pb.powi(j + 1)).max(0.0) / (w[1] - w[0])
        })
        .collect();
    values.push(0.0);
    let density = Profile1D::from_parts_unchecked(ProfileKind::Step, t, values);
    let total_mass = tilde.value(0.0).powi(k as i32 - 1);
    Ok(MuMeasure {
        k,
        tilde,
        density,
        total_mass,
    })
}

impl MuMeasure {
    /// `mu([a, b])`, exact: the density integrates to a difference of powers.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let p = |t: f64| self.tilde.value(t.max(0.0)).powi(self.k as i32 - 1);
        (p(a) - p(b)).max(0.0)
    }

    /// Pointwise density.
    pub fn density_at(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.tilde.support_end() {
            return 0.0;
        }
        let p = self.tilde.value(t);
        -(self.k as f64 - 1.0) * p.powi(self.k as i32 - 2) * self.tilde.derivative(t)
    }
}
