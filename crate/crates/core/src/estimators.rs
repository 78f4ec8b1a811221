//! Naive and isotonized estimators of `V` and `F` from a squared-radius sample.
//!
//! `V(y) = ∫_y^∞ g(u)/√(u−y) du` is the Abel transform of the projected
//! density and `F(x) = 1 + (2/π) ∫_x^∞ √z dV(z)` recovers the law of the
//! squared 3-D radius. The naive estimators plug the empirical distribution
//! into these integrals; the isotonized ones project onto monotone functions
//! through hulls of the integrated naive estimators:
//!
//! * `Ṽ` is the right derivative of the least concave majorant of
//!   `U_n(x) = (2/n) Σ {√Yᵢ − √(Yᵢ − x)₊}`;
//! * `F̃` substitutes `Ṽ` for `V` in the formula for `F`;
//! * `F̌` is the right derivative of the greatest convex minorant of
//!   `H_n(x) = ∫_0^x F_n(z) dz`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{
    gcm_lower_hull, lcm_upper_hull, right_derivative, right_derivative_with_tail, KnotCurve, StepFunction,
};
use crate::sample::SquaredRadiusSample;

/// Interior grid points per inter-knot gap for `F̌` outside bootstrap loops.
pub const DEFAULT_GCM_REFINEMENT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    NaiveV,
    IsoV,
    NaiveF,
    IsoF,
    GcmF,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [Self::NaiveV, Self::IsoV, Self::NaiveF, Self::IsoF, Self::GcmF];

    pub fn name(self) -> &'static str {
        match self {
            Self::NaiveV => "naive-v",
            Self::IsoV => "iso-v",
            Self::NaiveF => "naive-f",
            Self::IsoF => "iso-f",
            Self::GcmF => "gcm-f",
        }
    }

    /// Estimates `V` (as opposed to `F`).
    pub fn targets_v(self) -> bool {
        matches!(self, Self::NaiveV | Self::IsoV)
    }

    pub fn is_naive(self) -> bool {
        matches!(self, Self::NaiveV | Self::NaiveF)
    }

    /// The naive estimator a shape-constrained kind improves on.
    pub fn naive_counterpart(self) -> Self {
        if self.targets_v() {
            Self::NaiveV
        } else {
            Self::NaiveF
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::InvalidInput(format!("unknown estimator kind '{s}'")))
    }
}

/// Options shared by the step-function estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    pub gcm_refinement: usize,
    /// Clamp `F̃` to `[0, ∞)` and `F̌` to `[0, 1]`.
    pub clamp: bool,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self { gcm_refinement: DEFAULT_GCM_REFINEMENT, clamp: false }
    }
}

fn check_nonnegative(x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return invalid(format!("evaluation point must be finite and nonnegative, got {x}"));
    }
    Ok(())
}

/// `V_n(y) = (1/n) Σ 1{Yᵢ > y} / √(Yᵢ − y)`.
pub fn naive_v(sample: &SquaredRadiusSample, y: f64) -> Result<f64> {
    check_nonnegative(y)?;
    if sample.contains(y) {
        return Err(Error::SingularEvaluation { x: y });
    }
    let start = sample.distinct().partition_point(|&v| v <= y);
    let sum: f64 = sample.distinct()[start..]
        .iter()
        .zip(&sample.counts()[start..])
        .map(|(&v, &c)| c as f64 / (v - y).sqrt())
        .sum();
    Ok(sum / sample.len() as f64)
}

/// `U_n(x) = (2/n) Σ {√Yᵢ − √(Yᵢ − x)₊}`, an unbiased estimate of `∫_0^x V`.
pub fn u_sharp(sample: &SquaredRadiusSample, x: f64) -> Result<f64> {
    check_nonnegative(x)?;
    let sum: f64 = sample.iter_weighted().map(|(v, c)| c * (v.sqrt() - (v - x).max(0.0).sqrt())).sum();
    Ok(2.0 * sum / sample.len() as f64)
}

/// `U_n` at `0` and at every distinct observation.
///
/// Each summand of `U_n` is convex up to its observation and flat after it,
/// so `U_n` is convex between consecutive knots and its concave majorant is
/// determined by these values alone.
pub fn u_sharp_knots(sample: &SquaredRadiusSample) -> KnotCurve {
    let ys = sample.distinct();
    let weights: Vec<f64> = sample.counts().iter().map(|&c| c as f64).collect();
    let scale = 2.0 / sample.len() as f64;
    let total_root: f64 = sample.iter_weighted().map(|(v, c)| c * v.sqrt()).sum();
    let mut knots = Vec::with_capacity(ys.len() + 1);
    let mut heights = Vec::with_capacity(ys.len() + 1);
    knots.push(0.0);
    heights.push(0.0);
    for (k, &x) in ys.iter().enumerate() {
        let still_rising = weighted_root_sum(&ys[k + 1..], &weights[k + 1..], x);
        knots.push(x);
        heights.push(scale * (total_root - still_rising));
    }
    KnotCurve::new(knots, heights).expect("distinct positive observations give increasing knots")
}

/// `Σ wᵢ √(yᵢ − x)`, in independent lanes so the loop vectorizes.
fn weighted_root_sum(ys: &[f64], weights: &[f64], x: f64) -> f64 {
    let mut lanes = [0.0f64; 4];
    let mut y_chunks = ys.chunks_exact(4);
    let mut w_chunks = weights.chunks_exact(4);
    for (yc, wc) in (&mut y_chunks).zip(&mut w_chunks) {
        for l in 0..4 {
            lanes[l] += wc[l] * (yc[l] - x).sqrt();
        }
    }
    let tail: f64 = y_chunks.remainder().iter().zip(w_chunks.remainder()).map(|(&y, &w)| w * (y - x).sqrt()).sum();
    (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail
}

/// Least concave majorant of `U_n`.
pub fn u_tilde(sample: &SquaredRadiusSample) -> KnotCurve {
    lcm_upper_hull(&u_sharp_knots(sample)).expect("curve has at least two knots")
}

/// `Ṽ`, the nonincreasing minimizer of `∫W² − 2∫W V_n`.
pub fn isotonic_v(sample: &SquaredRadiusSample) -> Result<StepFunction> {
    if sample.is_empty() {
        return invalid("sample is empty");
    }
    Ok(right_derivative(&u_tilde(sample)))
}

/// `F_n(x) = (2/π)[(1/n) Σ arcsin √(1 ∧ x/Yᵢ) − √x V_n(x)]`.
///
/// Not monotone, and `→ −∞` at every observation.
pub fn naive_f(sample: &SquaredRadiusSample, x: f64) -> Result<f64> {
    let v = naive_v(sample, x)?;
    let arcs: f64 =
        sample.iter_weighted().map(|(y, c)| if x >= y { c * FRAC_PI_2 } else { c * (x / y).sqrt().asin() }).sum();
    Ok((2.0 / PI) * (arcs / sample.len() as f64 - x.sqrt() * v))
}

/// `F̃(x) = 1 + (2/π) Σ_{zⱼ > x} √zⱼ ΔṼ(zⱼ)`, jumps strictly above `x`.
pub fn isotonic_f(sample: &SquaredRadiusSample, clamp: bool) -> Result<StepFunction> {
    let v = isotonic_v(sample)?;
    let f = transform_v_to_f(&v);
    Ok(if clamp { f.clamped(0.0, f64::INFINITY) } else { f })
}

/// Pure-jump image of a nonincreasing step function under the `V → F` map.
fn transform_v_to_f(v: &StepFunction) -> StepFunction {
    let knots = v.knots();
    let jumps: Vec<f64> = v.jumps().map(|(z, d)| z.sqrt() * d).collect();
    let mut values = vec![1.0; knots.len()];
    let mut above = 0.0;
    for j in (0..knots.len()).rev() {
        values[j] = 1.0 + (2.0 / PI) * above;
        above += jumps[j];
    }
    let left = values.first().copied().unwrap_or(1.0);
    StepFunction::new(knots.to_vec(), values, left, v.domain_start())
        .expect("knots inherited from a valid step function")
}

/// `H_n(x) = ∫_0^x F_n(z) dz`, from per-observation antiderivatives.
///
/// For `x < Y`: `(x − 3Y/2) arcsin√(x/Y) + (3/2)√(x(Y − x))`;
/// for `x ≥ Y`: `(π/2)(x − Y) − πY/4`; the sum is scaled by `2/(πn)`.
pub fn h_sharp(sample: &SquaredRadiusSample, x: f64) -> Result<f64> {
    check_nonnegative(x)?;
    Ok(HSharp::new(sample).eval(x))
}

/// Prefix sums for evaluating `H_n` on many points.
struct HSharp<'a> {
    sample: &'a SquaredRadiusSample,
    prefix_count: Vec<f64>,
    prefix_sum: Vec<f64>,
}

impl<'a> HSharp<'a> {
    fn new(sample: &'a SquaredRadiusSample) -> Self {
        let mut prefix_count = vec![0.0];
        let mut prefix_sum = vec![0.0];
        for (y, c) in sample.iter_weighted() {
            prefix_count.push(prefix_count.last().unwrap() + c);
            prefix_sum.push(prefix_sum.last().unwrap() + c * y);
        }
        Self { sample, prefix_count, prefix_sum }
    }

    fn eval(&self, x: f64) -> f64 {
        let ys = self.sample.distinct();
        let split = ys.partition_point(|&y| y <= x);
        let passed = FRAC_PI_2 * x * self.prefix_count[split] - 0.75 * PI * self.prefix_sum[split];
        let pending: f64 = ys[split..]
            .iter()
            .zip(&self.sample.counts()[split..])
            .map(|(&y, &c)| {
                let phi = (x / y).sqrt().asin();
                c as f64 * ((x - 1.5 * y) * phi + 1.5 * (x * (y - x)).sqrt())
            })
            .sum();
        2.0 * (passed + pending) / (PI * self.sample.len() as f64)
    }
}

/// Evaluation grid for `H_n`: `{0} ∪ {Yᵢ}` plus `refinement` equally spaced
/// interior points in every gap.
pub fn h_sharp_grid(sample: &SquaredRadiusSample, refinement: usize) -> Vec<f64> {
    let mut grid = Vec::with_capacity((sample.distinct().len() + 1) * (refinement + 1));
    grid.push(0.0);
    let mut lo = 0.0;
    for &hi in sample.distinct() {
        for i in 1..=refinement {
            let p = lo + (hi - lo) * (i as f64) / (refinement as f64 + 1.0);
            if p > *grid.last().unwrap() && p < hi {
                grid.push(p);
            }
        }
        grid.push(hi);
        lo = hi;
    }
    grid
}

/// `H_n` sampled on [`h_sharp_grid`].
pub fn h_sharp_curve(sample: &SquaredRadiusSample, refinement: usize) -> KnotCurve {
    let h = HSharp::new(sample);
    let grid = h_sharp_grid(sample, refinement);
    let heights = grid.iter().map(|&x| h.eval(x)).collect();
    KnotCurve::new(grid, heights).expect("grid is strictly increasing")
}

/// `F̌`, the right derivative of the greatest convex minorant of `H_n`.
///
/// `H_n` has slope 1 past the largest observation, so the minorant on
/// `[0, ∞)` leaves the sampled hull at its last vertex reached with slope
/// at most 1 and continues with slope 1.
pub fn gcm_f(sample: &SquaredRadiusSample, refinement: usize, clamp: bool) -> Result<StepFunction> {
    if sample.is_empty() {
        return invalid("sample is empty");
    }
    if refinement == 0 {
        return invalid("grid refinement must be at least 1");
    }
    let hull = gcm_lower_hull(&h_sharp_curve(sample, refinement))?;
    let slopes = hull.slopes();
    let keep = slopes.iter().take_while(|&&s| s <= 1.0).count() + 1;
    let knots = hull.knots()[..keep].to_vec();
    let heights = hull.heights()[..keep].to_vec();
    let f = if keep == 1 {
        StepFunction::new(vec![0.0], vec![1.0], 1.0, 0.0)?
    } else {
        right_derivative_with_tail(&KnotCurve::new(knots, heights)?, 1.0)
    };
    Ok(if clamp { f.clamped(0.0, 1.0) } else { f })
}

/// An estimator fitted to a sample, ready for evaluation at many points.
#[derive(Debug, Clone)]
pub enum Fitted<'a> {
    Naive { kind: EstimatorKind, sample: &'a SquaredRadiusSample },
    Step(StepFunction),
}

impl<'a> Fitted<'a> {
    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            Fitted::Naive { kind: EstimatorKind::NaiveV, sample } => naive_v(sample, x),
            Fitted::Naive { sample, .. } => naive_f(sample, x),
            Fitted::Step(f) => {
                check_nonnegative(x)?;
                Ok(f.eval(x))
            }
        }
    }

    pub fn step(&self) -> Option<&StepFunction> {
        match self {
            Fitted::Step(f) => Some(f),
            Fitted::Naive { .. } => None,
        }
    }

    /// Evaluates at `x`, moving `x` up one representable value at a time
    /// while it collides with an observation. Returns the value and whether
    /// `x` was moved.
    pub fn eval_perturbed(&self, x: f64) -> Result<(f64, bool)> {
        let mut at = x;
        for _ in 0..64 {
            match self.eval(at) {
                Ok(v) => {
                    if at != x {
                        log::debug!("evaluation point {x} collided with an observation, used {at}");
                    }
                    return Ok((v, at != x));
                }
                Err(Error::SingularEvaluation { .. }) => at = at.next_up(),
                Err(e) => return Err(e),
            }
        }
        Err(Error::SingularEvaluation { x })
    }
}

pub fn fit<'a>(kind: EstimatorKind, sample: &'a SquaredRadiusSample, options: &EstimatorOptions) -> Result<Fitted<'a>> {
    Ok(match kind {
        EstimatorKind::NaiveV | EstimatorKind::NaiveF => Fitted::Naive { kind, sample },
        EstimatorKind::IsoV => Fitted::Step(isotonic_v(sample)?),
        EstimatorKind::IsoF => Fitted::Step(isotonic_f(sample, options.clamp)?),
        EstimatorKind::GcmF => Fitted::Step(gcm_f(sample, options.gcm_refinement, options.clamp)?),
    })
}

/// Value of the `kind` estimator at `x0 > 0`, default options.
pub fn eval_estimator(kind: EstimatorKind, sample: &SquaredRadiusSample, x0: f64) -> Result<f64> {
    eval_estimator_with(kind, sample, x0, &EstimatorOptions::default())
}

pub fn eval_estimator_with(
    kind: EstimatorKind,
    sample: &SquaredRadiusSample,
    x0: f64,
    options: &EstimatorOptions,
) -> Result<f64> {
    if !(x0.is_finite() && x0 > 0.0) {
        return invalid(format!("evaluation point must be positive, got {x0}"));
    }
    fit(kind, sample, options)?.eval(x0)
}
