//! Naive estimators evaluated from their defining integrals.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::quad::tanh_sinh_split;

const TOL: f64 = 1e-13;

/// `(1/n) Σ 1{Y > y} / √(Y - y)`, straight from the definition.
pub fn naive_v(ys: &[f64], y: f64) -> f64 {
    ys.iter().filter(|&&v| v > y).map(|&v| 1.0 / (v - y).sqrt()).sum::<f64>() / ys.len() as f64
}

/// Naive V at `u` inside `(lo, hi)`, using the exact distance `to_hi` for
/// observations sitting on the right endpoint. Observations at or below `lo`
/// contribute nothing on the open interval.
fn naive_v_inside(ys: &[f64], u: f64, hi: f64, to_hi: f64) -> f64 {
    ys.iter()
        .filter(|&&v| v >= hi)
        .map(|&v| if v == hi { 1.0 / to_hi.sqrt() } else { 1.0 / (v - u).sqrt() })
        .sum::<f64>()
        / ys.len() as f64
}

/// `1 + (2/π) ∫_x^∞ √z dV_n(z)`, integrated by parts into
/// `1 - (2/π)[√x V_n(x) + ∫_x^∞ V_n(u) / (2√u) du]` and evaluated by
/// quadrature split at the observations.
pub fn naive_f_by_quadrature(ys: &[f64], x: f64) -> f64 {
    let top = ys.iter().copied().fold(0.0, f64::max);
    if x >= top {
        return 1.0;
    }
    let tail = tanh_sinh_split(
        |u, lo, hi, to_lo, to_hi| {
            let root_u = if lo == 0.0 { to_lo.sqrt() } else { u.sqrt() };
            naive_v_inside(ys, u, hi, to_hi) / (2.0 * root_u)
        },
        x,
        top,
        ys,
        TOL,
    );
    1.0 - (2.0 / PI) * (x.sqrt() * naive_v(ys, x) + tail)
}

/// `∫_0^x F_n(z) dz` with `F_n` in its arcsine form, by split quadrature.
pub fn h_sharp_by_quadrature(ys: &[f64], x: f64) -> f64 {
    let n = ys.len() as f64;
    let f = |z: f64, hi: f64, to_hi: f64| -> f64 {
        let arcs: f64 = ys.iter().map(|&v| if z >= v { FRAC_PI_2 } else { (z / v).sqrt().asin() }).sum::<f64>() / n;
        (2.0 / PI) * (arcs - z.sqrt() * naive_v_inside(ys, z, hi, to_hi))
    };
    tanh_sinh_split(|z, _lo, hi, _to_lo, to_hi| f(z, hi, to_hi), 0.0, x, ys, TOL)
}
