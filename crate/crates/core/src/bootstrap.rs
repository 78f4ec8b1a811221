//! Conventional bootstrap from the empirical distribution of the squared radii.
//!
//! A root is `est*(x0) − est(x0)` for a resample drawn with replacement. The
//! normalization `ε_n = √(log n / n)` cancels between roots and intervals, so
//! it is only carried along for diagnostics.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimators::{fit, EstimatorKind, EstimatorOptions};
use crate::rng::substream;
use crate::sample::SquaredRadiusSample;

/// `F̌` grid refinement used inside resampling loops.
pub const BOOTSTRAP_GCM_REFINEMENT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalStyle {
    /// `[est − q(1−α/2), est − q(α/2)]`
    #[default]
    RootBasic,
    /// `[est + q(α/2), est + q(1−α/2)]`
    Percentile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapPlan {
    pub replicates: usize,
    pub alpha: f64,
    pub kind: EstimatorKind,
    pub x0: f64,
    pub seed: u64,
    pub style: IntervalStyle,
    pub options: EstimatorOptions,
}

impl BootstrapPlan {
    pub fn new(kind: EstimatorKind, x0: f64, replicates: usize, alpha: f64, seed: u64) -> Result<Self> {
        let plan = Self {
            replicates,
            alpha,
            kind,
            x0,
            seed,
            style: IntervalStyle::default(),
            options: EstimatorOptions { gcm_refinement: BOOTSTRAP_GCM_REFINEMENT, clamp: false },
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_style(mut self, style: IntervalStyle) -> Self {
        self.style = style;
        self
    }

    pub fn with_options(mut self, options: EstimatorOptions) -> Self {
        self.options = options;
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate_common(self.replicates, self.alpha)?;
        if !(self.x0.is_finite() && self.x0 > 0.0) {
            return invalid(format!("x0 must be positive, got {}", self.x0));
        }
        Ok(())
    }
}

fn validate_common(replicates: usize, alpha: f64) -> Result<()> {
    if replicates == 0 {
        return invalid("bootstrap needs at least one replicate");
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie strictly inside (0, 1), got {alpha}"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiResult {
    pub point_estimate: f64,
    pub lower: f64,
    pub upper: f64,
    /// `est*(x0) − est(x0)` per replicate, in replicate order.
    pub roots: Vec<f64>,
    /// `√(ln n / n)`; absent for `n < 2`.
    pub epsilon_n: Option<f64>,
    /// Evaluations moved off a colliding observation.
    pub perturbations: usize,
}

impl CiResult {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `n` draws with replacement, re-sorted.
pub fn resample<R: Rng + ?Sized>(sample: &SquaredRadiusSample, rng: &mut R) -> Result<SquaredRadiusSample> {
    let values = sample.values();
    if values.is_empty() {
        return invalid("cannot resample an empty sample");
    }
    let n = values.len();
    SquaredRadiusSample::new((0..n).map(|_| values[rng.random_range(0..n)]).collect())
}

/// `ε_n = √(ln n / n)`.
pub fn epsilon_n(n: usize) -> Result<f64> {
    if n < 2 {
        return invalid(format!("epsilon_n needs n >= 2, got {n}"));
    }
    let n = n as f64;
    Ok((n.ln() / n).sqrt())
}

/// Roots plus the point estimate they are centred on.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapRoots {
    pub point_estimate: f64,
    pub roots: Vec<f64>,
    pub perturbations: usize,
}

pub fn bootstrap_roots(sample: &SquaredRadiusSample, plan: &BootstrapPlan) -> Result<BootstrapRoots> {
    plan.validate()?;
    let (point_estimate, moved) = fit(plan.kind, sample, &plan.options)?.eval_perturbed(plan.x0)?;
    let draws: Vec<(f64, bool)> = (0..plan.replicates)
        .into_par_iter()
        .map(|b| {
            let boot = resample(sample, &mut substream(plan.seed, b as u64))?;
            fit(plan.kind, &boot, &plan.options)?.eval_perturbed(plan.x0)
        })
        .collect::<Result<_>>()?;
    let perturbations = usize::from(moved) + draws.iter().filter(|(_, m)| *m).count();
    Ok(BootstrapRoots {
        point_estimate,
        roots: draws.into_iter().map(|(v, _)| v - point_estimate).collect(),
        perturbations,
    })
}

/// Order statistic `⌈pB⌉` (1-based) of the sorted roots, no interpolation.
/// Products within 1e-9 of an integer are treated as that integer.
pub fn root_quantile(sorted: &[f64], p: f64) -> f64 {
    let b = sorted.len();
    let rank = ((p * b as f64) - 1e-9).ceil().clamp(1.0, b as f64) as usize;
    sorted[rank - 1]
}

pub fn build_ci(point_estimate: f64, roots: Vec<f64>, alpha: f64, style: IntervalStyle) -> Result<CiResult> {
    if roots.is_empty() {
        return invalid("no bootstrap roots");
    }
    validate_common(roots.len(), alpha)?;
    let mut sorted = roots.clone();
    sorted.sort_by(f64::total_cmp);
    let lo_q = root_quantile(&sorted, alpha / 2.0);
    let hi_q = root_quantile(&sorted, 1.0 - alpha / 2.0);
    let (lower, upper) = match style {
        IntervalStyle::RootBasic => (point_estimate - hi_q, point_estimate - lo_q),
        IntervalStyle::Percentile => (point_estimate + lo_q, point_estimate + hi_q),
    };
    Ok(CiResult { point_estimate, lower, upper, roots, epsilon_n: None, perturbations: 0 })
}

/// Pointwise interval at `plan.x0`.
pub fn bootstrap_ci(sample: &SquaredRadiusSample, plan: &BootstrapPlan) -> Result<CiResult> {
    let run = bootstrap_roots(sample, plan)?;
    let mut ci = build_ci(run.point_estimate, run.roots, plan.alpha, plan.style)?;
    ci.epsilon_n = epsilon_n(sample.len()).ok();
    ci.perturbations = run.perturbations;
    Ok(ci)
}

/// Settings for a pointwise band over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePlan {
    pub kind: EstimatorKind,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    pub style: IntervalStyle,
    pub options: EstimatorOptions,
}

impl CurvePlan {
    pub fn new(kind: EstimatorKind, replicates: usize, alpha: f64, seed: u64) -> Result<Self> {
        validate_common(replicates, alpha)?;
        Ok(Self {
            kind,
            replicates,
            alpha,
            seed,
            style: IntervalStyle::default(),
            options: EstimatorOptions { gcm_refinement: BOOTSTRAP_GCM_REFINEMENT, clamp: false },
        })
    }

    /// The single-point plan this curve plan reduces to at `x0`.
    pub fn at(&self, x0: f64) -> BootstrapPlan {
        BootstrapPlan {
            replicates: self.replicates,
            alpha: self.alpha,
            kind: self.kind,
            x0,
            seed: self.seed,
            style: self.style,
            options: self.options,
        }
    }
}

/// Pointwise intervals on `grid`. Each replicate's resample yields a whole
/// curve, so replicate `b` uses the same resample at every grid point.
pub fn ci_curve(sample: &SquaredRadiusSample, plan: &CurvePlan, grid: &[f64]) -> Result<Vec<CiResult>> {
    validate_common(plan.replicates, plan.alpha)?;
    if grid.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return invalid("grid points must be positive");
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return invalid("grid must be sorted");
    }
    let eval_curve = |s: &SquaredRadiusSample| -> Result<Vec<(f64, bool)>> {
        let fitted = fit(plan.kind, s, &plan.options)?;
        grid.iter().map(|&x| fitted.eval_perturbed(x)).collect()
    };
    let point = eval_curve(sample)?;
    let curves: Vec<Vec<(f64, bool)>> = (0..plan.replicates)
        .into_par_iter()
        .map(|b| eval_curve(&resample(sample, &mut substream(plan.seed, b as u64))?))
        .collect::<Result<_>>()?;
    let eps = epsilon_n(sample.len()).ok();
    point
        .iter()
        .enumerate()
        .map(|(j, &(est, moved))| {
            let roots = curves.iter().map(|c| c[j].0 - est).collect();
            let mut ci = build_ci(est, roots, plan.alpha, plan.style)?;
            ci.epsilon_n = eps;
            ci.perturbations = usize::from(moved) + curves.iter().filter(|c| c[j].1).count();
            Ok(ci)
        })
        .collect()
}
