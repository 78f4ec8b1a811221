//! Exhaustive-search hulls: try every knot subset that contains both
//! endpoints, keep the concave polygons that majorize every point, and take
//! the pointwise smallest.

fn polygon_at(xs: &[f64], ys: &[f64], subset: &[usize], x: f64) -> f64 {
    for w in subset.windows(2) {
        let (i, j) = (w[0], w[1]);
        if x >= xs[i] && x <= xs[j] {
            let t = (x - xs[i]) / (xs[j] - xs[i]);
            return ys[i] + t * (ys[j] - ys[i]);
        }
    }
    unreachable!("x outside the polygon's span")
}

/// Values of the least concave majorant at every input knot.
pub fn brute_lcm(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let k = xs.len();
    assert!((2..=20).contains(&k));
    let interior = k - 2;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << interior) {
        let mut subset = vec![0];
        subset.extend((0..interior).filter(|b| mask & (1 << b) != 0).map(|b| b + 1));
        subset.push(k - 1);
        let slopes: Vec<f64> = subset.windows(2).map(|w| (ys[w[1]] - ys[w[0]]) / (xs[w[1]] - xs[w[0]])).collect();
        if slopes.windows(2).any(|s| s[1] > s[0] + 1e-12) {
            continue;
        }
        let vals: Vec<f64> = xs.iter().map(|&x| polygon_at(xs, ys, &subset, x)).collect();
        if vals.iter().zip(ys).any(|(v, y)| *v < y - 1e-12) {
            continue;
        }
        let total: f64 = vals.iter().sum();
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, vals));
        }
    }
    best.expect("the full knot set's upper hull always exists").1
}

/// Values of the greatest convex minorant at every input knot.
pub fn brute_gcm(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let neg: Vec<f64> = ys.iter().map(|y| -y).collect();
    brute_lcm(xs, &neg).into_iter().map(|v| -v).collect()
}
