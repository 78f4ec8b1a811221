use proptest::prelude::*;
use stereoboot_core::geometry::{gcm_lower_hull, lcm_upper_hull, right_derivative, KnotCurve};
use stereoboot_oracles::hull::{brute_gcm, brute_lcm};

fn knot_curve() -> impl Strategy<Value = KnotCurve> {
    (2usize..=12)
        .prop_flat_map(|k| (prop::collection::vec(0.01f64..3.0, k), prop::collection::vec(-5.0f64..5.0, k)))
        .prop_map(|(gaps, heights)| {
            let knots: Vec<f64> = gaps
                .iter()
                .scan(0.0, |acc, g| {
                    *acc += g;
                    Some(*acc)
                })
                .collect();
            KnotCurve::new(knots, heights).unwrap()
        })
}

proptest! {
    #[test]
    fn lcm_matches_exhaustive_search(c in knot_curve()) {
        let hull = lcm_upper_hull(&c).unwrap();
        let oracle = brute_lcm(c.knots(), c.heights());
        for (&x, &want) in c.knots().iter().zip(&oracle) {
            prop_assert!((hull.eval(x) - want).abs() <= 1e-12);
        }
        let slopes = hull.slopes();
        prop_assert!(slopes.windows(2).all(|s| s[1] < s[0]));
        prop_assert!(hull.knots().iter().all(|k| c.knots().contains(k)));
    }

    #[test]
    fn gcm_matches_exhaustive_search(c in knot_curve()) {
        let hull = gcm_lower_hull(&c).unwrap();
        let oracle = brute_gcm(c.knots(), c.heights());
        for (&x, &want) in c.knots().iter().zip(&oracle) {
            prop_assert!((hull.eval(x) - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn hulls_bound_the_points(c in knot_curve()) {
        let upper = lcm_upper_hull(&c).unwrap();
        let lower = gcm_lower_hull(&c).unwrap();
        for (&x, &y) in c.knots().iter().zip(c.heights()) {
            prop_assert!(upper.eval(x) >= y - 1e-12);
            prop_assert!(lower.eval(x) <= y + 1e-12);
        }
    }

    #[test]
    fn hulls_are_idempotent(c in knot_curve()) {
        let once = lcm_upper_hull(&c).unwrap();
        prop_assert_eq!(lcm_upper_hull(&once).unwrap(), once);
        let once = gcm_lower_hull(&c).unwrap();
        prop_assert_eq!(gcm_lower_hull(&once).unwrap(), once);
    }

    #[test]
    fn gcm_is_negated_lcm_of_negation(c in knot_curve()) {
        prop_assert_eq!(gcm_lower_hull(&c).unwrap(), lcm_upper_hull(&c.negated()).unwrap().negated());
    }

    #[test]
    fn derivative_monotonicity_follows_hull(c in knot_curve()) {
        let up = lcm_upper_hull(&c).unwrap();
        let d = right_derivative(&up);
        let s = up.slopes();
        prop_assert!(s.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(&d.values()[..s.len()], &s[..]);
        let low = gcm_lower_hull(&c).unwrap();
        let s = low.slopes();
        prop_assert!(s.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn minimality_removing_a_vertex_breaks_majorization() {
    let c = KnotCurve::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.0, 1.5, 2.2, 2.4, 2.0]).unwrap();
    let hull = lcm_upper_hull(&c).unwrap();
    for drop in 1..hull.len() - 1 {
        let (knots, heights): (Vec<f64>, Vec<f64>) = hull
            .knots()
            .iter()
            .zip(hull.heights())
            .enumerate()
            .filter(|(i, _)| *i != drop)
            .map(|(_, (&k, &h))| (k, h))
            .unzip();
        let thinner = KnotCurve::new(knots, heights).unwrap();
        let broken = c.knots().iter().zip(c.heights()).any(|(&x, &y)| thinner.eval(x) < y);
        assert!(broken, "vertex {drop} was redundant");
    }
}
