//! Estimation of the distribution function of the squared 3-D radius of a
//! spherically symmetric point cloud from its 2-D projection.
//!
//! Start from a [`SquaredRadiusSample`] of `Y = X1² + X2²` values and use the
//! [`estimators`] module for point estimates, [`bootstrap`] for pointwise
//! intervals, and [`asymptotics`] for Monte Carlo checks against the
//! analytic [`models`].

pub mod asymptotics;
pub mod bootstrap;
mod error;
pub mod estimators;
pub mod geometry;
pub mod models;
pub mod rng;
mod sample;

pub use asymptotics::{limit_variance, CoverageReport, McReport};
pub use bootstrap::{BootstrapPlan, CiResult, IntervalStyle};
pub use error::{Error, Result};
pub use estimators::{EstimatorKind, EstimatorOptions};
pub use geometry::{KnotCurve, Monotone, StepFunction};
pub use models::RadialModel;
pub use sample::SquaredRadiusSample;
