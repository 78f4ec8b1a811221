//! Analytic spherically symmetric models used as ground truth.
//!
//! A model is a 3-D density `ρ(x₁² + x₂² + x₃²)`. From it follow the squared
//! radius law (`f(z) = 2π√z ρ(z)`, distribution `F`), the projected squared
//! radius law (density `g`, distribution `G`), and `V(y) = π² ∫_y^∞ ρ`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::error::{invalid, Error, Result};
use crate::estimators::EstimatorKind;
use crate::sample::SquaredRadiusSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    /// Uniform density on the ball of radius `scale`.
    UniformBall,
    /// Isotropic normal with standard deviation `scale` per coordinate.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialModel {
    family: ModelFamily,
    scale: f64,
}

pub fn uniform_ball(radius: f64) -> Result<RadialModel> {
    RadialModel::new(ModelFamily::UniformBall, radius)
}

pub fn gaussian3d(sigma: f64) -> Result<RadialModel> {
    RadialModel::new(ModelFamily::Gaussian, sigma)
}

impl RadialModel {
    pub fn new(family: ModelFamily, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return invalid(format!("model scale must be positive, got {scale}"));
        }
        Ok(Self { family, scale })
    }

    pub fn family(&self) -> ModelFamily {
        self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            ModelFamily::UniformBall => "ball",
            ModelFamily::Gaussian => "gaussian",
        }
    }

    fn s2(&self) -> f64 {
        self.scale * self.scale
    }

    /// Right end of the support of `Z` and `Y`.
    pub fn support_end(&self) -> f64 {
        match self.family {
            ModelFamily::UniformBall => self.s2(),
            ModelFamily::Gaussian => f64::INFINITY,
        }
    }

    /// 3-D density as a function of the squared radius.
    pub fn rho(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        match self.family {
            ModelFamily::UniformBall => {
                if s <= self.s2() {
                    3.0 / (4.0 * PI * self.scale.powi(3))
                } else {
                    0.0
                }
            }
            ModelFamily::Gaussian => (2.0 * PI * self.s2()).powf(-1.5) * (-s / (2.0 * self.s2())).exp(),
        }
    }

    /// Density of the squared radius `Z`.
    pub fn f(&self, z: f64) -> f64 {
        if z < 0.0 {
            return 0.0;
        }
        2.0 * PI * z.sqrt() * self.rho(z)
    }

    /// Distribution function of `Z`.
    pub fn cdf_z(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        match self.family {
            ModelFamily::UniformBall => (z / self.s2()).min(1.0).powf(1.5),
            ModelFamily::Gaussian => gamma_lr(1.5, z / (2.0 * self.s2())),
        }
    }

    /// Density of the projected squared radius `Y`.
    pub fn g(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        match self.family {
            ModelFamily::UniformBall => 1.5 / self.scale.powi(3) * (self.s2() - y).max(0.0).sqrt(),
            ModelFamily::Gaussian => (-y / (2.0 * self.s2())).exp() / (2.0 * self.s2()),
        }
    }

    /// Distribution function of `Y`.
    pub fn cdf_y(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        match self.family {
            ModelFamily::UniformBall => 1.0 - (1.0 - y / self.s2()).max(0.0).powf(1.5),
            ModelFamily::Gaussian => -(-y / (2.0 * self.s2())).exp_m1(),
        }
    }

    /// `V(y) = π² ∫_y^∞ ρ`.
    pub fn v(&self, y: f64) -> f64 {
        let y = y.max(0.0);
        match self.family {
            ModelFamily::UniformBall => 0.75 * PI / self.scale.powi(3) * (self.s2() - y).max(0.0),
            ModelFamily::Gaussian => (PI / 2.0).sqrt() / self.scale * (-y / (2.0 * self.s2())).exp(),
        }
    }

    /// `U(x) = ∫_0^x V`.
    pub fn u(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self.family {
            ModelFamily::UniformBall => {
                let x = x.min(self.s2());
                0.75 * PI / self.scale.powi(3) * (self.s2() * x - 0.5 * x * x)
            }
            ModelFamily::Gaussian => {
                (PI / 2.0).sqrt() / self.scale * 2.0 * self.s2() * -(-x / (2.0 * self.s2())).exp_m1()
            }
        }
    }

    /// Inverse of [`cdf_z`](Self::cdf_z) on `(0, 1)`.
    pub fn quantile_z(&self, p: f64) -> f64 {
        match self.family {
            ModelFamily::UniformBall => self.s2() * p.powf(2.0 / 3.0),
            ModelFamily::Gaussian => 2.0 * self.s2() * half_chi3_quantile(p),
        }
    }

    pub fn sample_z<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile_z(rng.sample(Open01))
    }

    /// One projected squared radius: `Y = Z(1 − U²)` with `U` uniform on
    /// `(−1, 1)`, the cosine of a uniformly distributed direction.
    pub fn sample_one_y<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z = self.sample_z(rng);
        let u = 2.0 * rng.sample::<f64, _>(Open01) - 1.0;
        z * (1.0 - u * u)
    }

    /// `n` i.i.d. squared projected radii.
    pub fn sample_y<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SquaredRadiusSample> {
        if n == 0 {
            return invalid("sample size must be at least 1");
        }
        SquaredRadiusSample::new(self.draw_y(n, rng))
    }

    /// Draws in generation order, unsorted.
    pub fn draw_y<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample_one_y(rng)).collect()
    }

    /// Analytic value targeted by `kind` at `x0`: `V(x0)` or `F(x0)`.
    pub fn truth(&self, kind: EstimatorKind, x0: f64) -> f64 {
        if kind.targets_v() {
            self.v(x0)
        } else {
            self.cdf_z(x0)
        }
    }
}

/// Solves `P(3/2, t) = p` for `t` by safeguarded Newton iteration.
fn half_chi3_quantile(p: f64) -> f64 {
    // density of t = Z/(2σ²) under Gamma(3/2, 1)
    let density = |t: f64| 2.0 / PI.sqrt() * t.sqrt() * (-t).exp();
    let (mut lo, mut hi) = (0.0, 1.0);
    while gamma_lr(1.5, hi) < p {
        lo = hi;
        hi *= 2.0;
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let err = gamma_lr(1.5, t) - p;
        if err > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let newton = t - err / density(t);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - t).abs() <= 1e-12 * t.max(1e-300) {
            return next;
        }
        t = next;
    }
    t
}

impl fmt::Display for RadialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name(), self.scale)
    }
}

impl FromStr for RadialModel {
    type Err = Error;

    /// `ball`, `ball:2.5`, `gaussian`, `gaussian:0.3`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, scale) = match s.split_once(':') {
            Some((n, v)) => {
                let v: f64 = v.trim().parse().map_err(|_| Error::InvalidInput(format!("bad model scale in '{s}'")))?;
                (n.trim(), v)
            }
            None => (s.trim(), 1.0),
        };
        match name {
            "ball" | "uniform-ball" => uniform_ball(scale),
            "gaussian" | "gaussian3d" => gaussian3d(scale),
            _ => invalid(format!("unknown model '{name}'")),
        }
    }
}
