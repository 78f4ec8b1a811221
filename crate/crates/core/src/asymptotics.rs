//! Limiting variances of the estimators at rate `√(n / log n)` and Monte Carlo
//! studies that check them, plus bootstrap coverage studies.
//!
//! At a point `x0` with `g(x0) > 0`, `(est(x0) − truth(x0)) / ε_n` is
//! asymptotically centred normal with variance
//!
//! | kind      | variance          |
//! |-----------|-------------------|
//! | `NaiveV`  | `g(x0)`           |
//! | `IsoV`    | `g(x0) / 2`       |
//! | `NaiveF`  | `4 x0 g(x0) / π²` |
//! | `IsoF`    | `2 x0 g(x0) / π²` |
//! | `GcmF`    | `2 x0 g(x0) / π²` |
//!
//! The log-rate means finite-sample variances approach these slowly; the
//! study outputs are diagnostics, not proofs.
//!
//! The naive estimators have infinite variance at every finite `n`, since
//! `E[1{Y > y} / (Y − y)]` diverges when `g(y) > 0`. Their sample variance
//! over replicates is dominated by the few datasets with an observation
//! just above `x0` and does not settle at the limit. Reports therefore also
//! carry a quartile-based variance, `(IQR / (2 z₀.₇₅))²`, which estimates the
//! limiting normal variance without using the tails.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bootstrap::{bootstrap_ci, epsilon_n, BootstrapPlan, IntervalStyle};
use crate::error::{invalid, Result};
use crate::estimators::{fit, EstimatorKind, EstimatorOptions};
use crate::models::RadialModel;
use crate::rng::{derive_seed, substream};

pub fn limit_variance(kind: EstimatorKind, x0: f64, model: &RadialModel) -> Result<f64> {
    let g = model.g(x0);
    if g.is_nan() || g <= 0.0 {
        return invalid(format!("g({x0}) = {g}; the limit law needs g(x0) > 0"));
    }
    Ok(match kind {
        EstimatorKind::NaiveV => g,
        EstimatorKind::IsoV => 0.5 * g,
        EstimatorKind::NaiveF => 4.0 * x0 * g / (PI * PI),
        EstimatorKind::IsoF | EstimatorKind::GcmF => 2.0 * x0 * g / (PI * PI),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub kind: EstimatorKind,
    pub model: RadialModel,
    pub n: usize,
    pub reps: usize,
    pub x0: f64,
    pub seed: u64,
    pub standardized_mean: f64,
    pub standardized_variance: f64,
    pub theoretical_variance: f64,
    /// Variance of this kind over that of its naive counterpart on the same
    /// datasets; set for isotonized kinds when the counterpart was studied.
    pub variance_ratio_iso_over_naive: Option<f64>,
    pub ks_distance_to_normal: f64,
    /// `(IQR / (2 z₀.₇₅))²` of the standardized errors.
    pub robust_variance: f64,
    /// Same ratio as `variance_ratio_iso_over_naive`, from robust variances.
    pub robust_ratio_iso_over_naive: Option<f64>,
    pub perturbations: usize,
}

impl McReport {
    pub fn variance_over_limit(&self) -> f64 {
        self.standardized_variance / self.theoretical_variance
    }

    pub fn robust_variance_over_limit(&self) -> f64 {
        self.robust_variance / self.theoretical_variance
    }
}

/// Upper quartile of the standard normal.
const NORMAL_Q3: f64 = 0.674_489_750_196_081_7;

/// Linearly interpolated sample quantile of sorted data.
fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Normal-consistent variance from the interquartile range.
pub fn iqr_variance(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = sorted_quantile(&sorted, 0.75) - sorted_quantile(&sorted, 0.25);
    (iqr / (2.0 * NORMAL_Q3)).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub kind: EstimatorKind,
    pub model: RadialModel,
    pub n: usize,
    pub replicates: usize,
    pub alpha: f64,
    pub x0: f64,
    pub reps: usize,
    pub seed: u64,
    pub style: IntervalStyle,
    pub nominal: f64,
    pub empirical: f64,
    pub covered: usize,
    pub mean_interval_width: f64,
}

/// Design of a Monte Carlo sampling-distribution study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McDesign {
    pub model: RadialModel,
    pub n: usize,
    pub x0: f64,
    pub reps: usize,
    pub seed: u64,
    pub options: EstimatorOptions,
}

impl McDesign {
    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return invalid("Monte Carlo studies need n >= 2");
        }
        if self.reps < 2 {
            return invalid("Monte Carlo studies need at least two replicates");
        }
        if !(self.x0.is_finite() && self.x0 > 0.0) {
            return invalid(format!("x0 must be positive, got {}", self.x0));
        }
        Ok(())
    }
}

/// `(est(x0) − truth(x0)) / ε_n` for every kind, on `reps` datasets shared by
/// all kinds. Returns one row per replicate and the number of perturbed
/// evaluations.
pub fn standardized_errors(design: &McDesign, kinds: &[EstimatorKind]) -> Result<(Vec<Vec<f64>>, usize)> {
    design.validate()?;
    let eps = epsilon_n(design.n)?;
    let rows: Vec<(Vec<f64>, usize)> = (0..design.reps)
        .into_par_iter()
        .map(|r| {
            let sample = design.model.sample_y(design.n, &mut substream(design.seed, r as u64))?;
            let mut row = Vec::with_capacity(kinds.len());
            let mut moved = 0;
            for &kind in kinds {
                let (est, m) = fit(kind, &sample, &design.options)?.eval_perturbed(design.x0)?;
                moved += usize::from(m);
                row.push((est - design.model.truth(kind, design.x0)) / eps);
            }
            Ok((row, moved))
        })
        .collect::<Result<_>>()?;
    let moved = rows.iter().map(|(_, m)| m).sum();
    Ok((rows.into_iter().map(|(r, _)| r).collect(), moved))
}

/// Paired study: all `kinds` evaluated on the same simulated datasets.
pub fn mc_study(design: &McDesign, kinds: &[EstimatorKind]) -> Result<Vec<McReport>> {
    if kinds.is_empty() {
        return invalid("no estimator kinds requested");
    }
    let (rows, perturbations) = standardized_errors(design, kinds)?;
    let mut reports: Vec<McReport> = kinds
        .iter()
        .enumerate()
        .map(|(j, &kind)| {
            let column: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            let (mean, var) = mean_variance(&column);
            let theoretical = limit_variance(kind, design.x0, &design.model)?;
            Ok(McReport {
                kind,
                model: design.model,
                n: design.n,
                reps: design.reps,
                x0: design.x0,
                seed: design.seed,
                standardized_mean: mean,
                standardized_variance: var,
                theoretical_variance: theoretical,
                variance_ratio_iso_over_naive: None,
                ks_distance_to_normal: ks_to_centred_normal(&column, theoretical),
                robust_variance: iqr_variance(&column),
                robust_ratio_iso_over_naive: None,
                perturbations,
            })
        })
        .collect::<Result<_>>()?;
    let snapshot = reports.clone();
    for report in reports.iter_mut().filter(|r| !r.kind.is_naive()) {
        let naive = report.kind.naive_counterpart();
        if let Some(base) = snapshot.iter().find(|r| r.kind == naive) {
            report.variance_ratio_iso_over_naive = Some(report.standardized_variance / base.standardized_variance);
            report.robust_ratio_iso_over_naive = Some(report.robust_variance / base.robust_variance);
        }
    }
    Ok(reports)
}

pub fn mc_sampling_distribution(design: &McDesign, kind: EstimatorKind) -> Result<McReport> {
    Ok(mc_study(design, &[kind])?.remove(0))
}

/// Design of a bootstrap coverage study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageDesign {
    pub model: RadialModel,
    pub kind: EstimatorKind,
    pub n: usize,
    pub x0: f64,
    pub replicates: usize,
    pub alpha: f64,
    pub reps: usize,
    pub seed: u64,
    pub style: IntervalStyle,
    pub options: EstimatorOptions,
}

/// Fraction of simulated datasets whose bootstrap interval covers the truth.
/// Dataset `r` comes from substream `r` of `seed`; its bootstrap uses a seed
/// derived from `(seed, r)`.
pub fn coverage_study(design: &CoverageDesign) -> Result<CoverageReport> {
    if design.reps == 0 {
        return invalid("coverage study needs at least one replicate");
    }
    if design.n == 0 {
        return invalid("sample size must be at least 1");
    }
    let truth = design.model.truth(design.kind, design.x0);
    let outcomes: Vec<(bool, f64)> = (0..design.reps)
        .into_par_iter()
        .map(|r| {
            let sample = design.model.sample_y(design.n, &mut substream(design.seed, r as u64))?;
            let plan = BootstrapPlan::new(
                design.kind,
                design.x0,
                design.replicates,
                design.alpha,
                derive_seed(design.seed, r as u64),
            )?
            .with_style(design.style)
            .with_options(design.options);
            let ci = bootstrap_ci(&sample, &plan)?;
            Ok((ci.contains(truth), ci.width()))
        })
        .collect::<Result<_>>()?;
    let covered = outcomes.iter().filter(|(c, _)| *c).count();
    let width = outcomes.iter().map(|(_, w)| w).sum::<f64>() / design.reps as f64;
    Ok(CoverageReport {
        kind: design.kind,
        model: design.model,
        n: design.n,
        replicates: design.replicates,
        alpha: design.alpha,
        x0: design.x0,
        reps: design.reps,
        seed: design.seed,
        style: design.style,
        nominal: 1.0 - design.alpha,
        empirical: covered as f64 / design.reps as f64,
        covered,
        mean_interval_width: width,
    })
}

/// Mean Kolmogorov distance between bootstrap roots scaled by `1/ε_n` and the
/// limiting normal, over `outer` independent datasets.
pub fn bootstrap_root_ks(design: &McDesign, kind: EstimatorKind, replicates: usize) -> Result<f64> {
    design.validate()?;
    let eps = epsilon_n(design.n)?;
    let variance = limit_variance(kind, design.x0, &design.model)?;
    let distances: Vec<f64> = (0..design.reps)
        .into_par_iter()
        .map(|r| {
            let sample = design.model.sample_y(design.n, &mut substream(design.seed, r as u64))?;
            let plan = BootstrapPlan::new(kind, design.x0, replicates, 0.05, derive_seed(design.seed, r as u64))?
                .with_options(design.options);
            let run = crate::bootstrap::bootstrap_roots(&sample, &plan)?;
            let scaled: Vec<f64> = run.roots.iter().map(|v| v / eps).collect();
            Ok(ks_to_centred_normal(&scaled, variance))
        })
        .collect::<Result<_>>()?;
    Ok(distances.iter().sum::<f64>() / distances.len() as f64)
}

fn mean_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, ss / (n - 1.0))
}

/// Kolmogorov distance between the empirical law of `xs` and `N(0, variance)`.
pub fn ks_to_centred_normal(xs: &[f64], variance: f64) -> f64 {
    let normal = Normal::new(0.0, variance.sqrt()).expect("positive variance");
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = normal.cdf(x);
            ((i as f64 + 1.0) / n - c).max(c - i as f64 / n)
        })
        .fold(0.0, f64::max)
}
