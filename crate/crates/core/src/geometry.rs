//! Step functions, piecewise-linear knot curves and their concave/convex hulls.
//!
//! Every isotonic estimator in this crate is the slope sequence of a hull of
//! some integrated naive estimator (the cumulative-sum-diagram view of
//! isotonic regression), so the hull routines here are exact and tolerance
//! free: a point is dropped from the hull when it lies on or beyond the chord
//! of its neighbours, which also merges equal-slope segments.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Monotonicity of a [`StepFunction`], established by scanning its values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotone {
    None,
    Nonincreasing,
    Nondecreasing,
    /// All values equal.
    Constant,
}

impl Monotone {
    fn scan(values: &[f64]) -> Self {
        let inc = values.windows(2).all(|w| w[0] <= w[1]);
        let dec = values.windows(2).all(|w| w[0] >= w[1]);
        match (inc, dec) {
            (true, true) => Monotone::Constant,
            (true, false) => Monotone::Nondecreasing,
            (false, true) => Monotone::Nonincreasing,
            (false, false) => Monotone::None,
        }
    }

    pub fn is_nonincreasing(self) -> bool {
        matches!(self, Monotone::Nonincreasing | Monotone::Constant)
    }

    pub fn is_nondecreasing(self) -> bool {
        matches!(self, Monotone::Nondecreasing | Monotone::Constant)
    }
}

/// Right-continuous piecewise-constant function.
///
/// `values[j]` holds on `[knots[j], knots[j + 1])`, the last value holds on
/// `[knots[last], ∞)` and `left_value` holds below the first knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
    left_value: f64,
    domain_start: f64,
    monotone: Monotone,
}

impl StepFunction {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, left_value: f64, domain_start: f64) -> Result<Self> {
        if knots.len() != values.len() {
            return invalid(format!("step function has {} knots but {} values", knots.len(), values.len()));
        }
        check_strictly_increasing(&knots)?;
        if values.iter().chain([&left_value, &domain_start]).any(|v| !v.is_finite()) {
            return invalid("step function values must be finite");
        }
        if domain_start < 0.0 {
            return invalid("domain start must be nonnegative");
        }
        let monotone = Monotone::scan(&values);
        Ok(Self { knots, values, left_value, domain_start, monotone })
    }

    /// Constant function on `[domain_start, ∞)`.
    pub fn constant(value: f64, domain_start: f64) -> Result<Self> {
        Self::new(Vec::new(), Vec::new(), value, domain_start)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_value(&self) -> f64 {
        self.left_value
    }

    pub fn domain_start(&self) -> f64 {
        self.domain_start
    }

    pub fn monotone(&self) -> Monotone {
        self.monotone
    }

    /// Value at `x`; right-continuous, so `eval(knots[j]) == values[j]`.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.knots.partition_point(|&k| k <= x);
        if idx == 0 {
            self.left_value
        } else {
            self.values[idx - 1]
        }
    }

    /// Value on the last piece, i.e. for all `x ≥ knots[last]`.
    pub fn terminal_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.left_value)
    }

    /// Jumps `(knot, value_at_knot - value_just_below)` at every knot.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let previous = std::iter::once(self.left_value).chain(self.values.iter().copied());
        self.knots.iter().zip(self.values.iter()).zip(previous).map(|((&k, &v), p)| (k, v - p))
    }

    /// `max(f, lo)` followed by `min(f, hi)`, applied to every piece.
    pub fn clamped(&self, lo: f64, hi: f64) -> Self {
        let clamp = |v: f64| v.max(lo).min(hi);
        let values: Vec<f64> = self.values.iter().map(|&v| clamp(v)).collect();
        let monotone = Monotone::scan(&values);
        Self {
            knots: self.knots.clone(),
            values,
            left_value: clamp(self.left_value),
            domain_start: self.domain_start,
            monotone,
        }
    }
}

/// Exact Riemann integral of a step function over `[a, b]`.
pub fn step_integral(f: &StepFunction, a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return invalid("integration bounds must be finite");
    }
    if a > b {
        return invalid(format!("integration bounds out of order: {a} > {b}"));
    }
    if a < f.domain_start {
        return invalid(format!("lower bound {a} precedes domain start {}", f.domain_start));
    }
    let mut total = 0.0;
    let mut cursor = a;
    let mut value = f.eval(a);
    let start = f.knots.partition_point(|&k| k <= a);
    for j in start..f.knots.len() {
        let k = f.knots[j];
        if k >= b {
            break;
        }
        total += value * (k - cursor);
        cursor = k;
        value = f.values[j];
    }
    total += value * (b - cursor);
    Ok(total)
}

/// Piecewise-linear interpolant through `(knots[j], heights[j])`, constant
/// beyond either end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotCurve {
    knots: Vec<f64>,
    heights: Vec<f64>,
}

impl KnotCurve {
    pub fn new(knots: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if knots.len() != heights.len() {
            return invalid(format!("knot curve has {} knots but {} heights", knots.len(), heights.len()));
        }
        if knots.is_empty() {
            return invalid("knot curve needs at least one knot");
        }
        check_strictly_increasing(&knots)?;
        if heights.iter().any(|h| !h.is_finite()) {
            return invalid("knot curve heights must be finite");
        }
        Ok(Self { knots, heights })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// Slope of segment `j`, between knots `j` and `j + 1`.
    pub fn slope(&self, j: usize) -> f64 {
        (self.heights[j + 1] - self.heights[j]) / (self.knots[j + 1] - self.knots[j])
    }

    pub fn slopes(&self) -> Vec<f64> {
        (0..self.knots.len().saturating_sub(1)).map(|j| self.slope(j)).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let last = self.knots.len() - 1;
        if x <= self.knots[0] {
            return self.heights[0];
        }
        if x >= self.knots[last] {
            return self.heights[last];
        }
        let j = self.knots.partition_point(|&k| k <= x) - 1;
        let t = (x - self.knots[j]) / (self.knots[j + 1] - self.knots[j]);
        self.heights[j] + t * (self.heights[j + 1] - self.heights[j])
    }

    pub fn negated(&self) -> Self {
        Self { knots: self.knots.clone(), heights: self.heights.iter().map(|h| -h).collect() }
    }
}

fn check_strictly_increasing(knots: &[f64]) -> Result<()> {
    if knots.iter().any(|k| !k.is_finite()) {
        return invalid("knots must be finite");
    }
    if let Some(w) = knots.windows(2).find(|w| w[0] >= w[1]) {
        return invalid(format!("knots must be strictly increasing, found {} then {}", w[0], w[1]));
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum HullSide {
    Upper,
    Lower,
}

/// Monotone-chain hull. `turn` is the cross product of `(b - a)` and `(c - a)`;
/// for the upper hull `b` is dropped when `c` lies on or above the chord `a–b`
/// extended, i.e. when `b` is on or below the chord `a–c`.
fn hull(curve: &KnotCurve, side: HullSide) -> Result<KnotCurve> {
    if curve.len() < 2 {
        return invalid("hull needs at least two knots");
    }
    let mut xs: Vec<f64> = Vec::with_capacity(curve.len());
    let mut ys: Vec<f64> = Vec::with_capacity(curve.len());
    for (&x, &y) in curve.knots.iter().zip(curve.heights.iter()) {
        while xs.len() >= 2 {
            let m = xs.len();
            let (ax, ay, bx, by) = (xs[m - 2], ys[m - 2], xs[m - 1], ys[m - 1]);
            let turn = (bx - ax) * (y - ay) - (by - ay) * (x - ax);
            let drop = match side {
                HullSide::Upper => turn >= 0.0,
                HullSide::Lower => turn <= 0.0,
            };
            if !drop {
                break;
            }
            xs.pop();
            ys.pop();
        }
        xs.push(x);
        ys.push(y);
    }
    Ok(KnotCurve { knots: xs, heights: ys })
}

/// Least concave majorant of the points of `curve`.
pub fn lcm_upper_hull(curve: &KnotCurve) -> Result<KnotCurve> {
    hull(curve, HullSide::Upper)
}

/// Greatest convex minorant of the points of `curve`.
pub fn gcm_lower_hull(curve: &KnotCurve) -> Result<KnotCurve> {
    hull(curve, HullSide::Lower)
}

/// Right derivative of a hull, with value 0 past the last knot.
pub fn right_derivative(hull: &KnotCurve) -> StepFunction {
    right_derivative_with_tail(hull, 0.0)
}

/// Right derivative of a hull whose extension past the last knot has slope
/// `tail`.
pub fn right_derivative_with_tail(hull: &KnotCurve, tail: f64) -> StepFunction {
    let mut values = hull.slopes();
    values.push(tail);
    let left = values[0];
    let monotone = Monotone::scan(&values);
    StepFunction { knots: hull.knots.clone(), values, left_value: left, domain_start: hull.knots[0].max(0.0), monotone }
}
