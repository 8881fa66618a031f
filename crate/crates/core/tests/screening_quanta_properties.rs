use proptest::prelude::*;
use testgauge_core::quanta::{entropy_coefficient, expected_score_range, quanta_count, ErrorDistribution};
use testgauge_core::screening::{
    correlation_confidence_interval, fisher_inverse, fisher_transform, screen_item, Verdict,
};
use testgauge_core::simulation::experiment_ci_coverage;

fn verdict_rank(v: Verdict) -> u8 {
    match v {
        Verdict::Reject => 0,
        Verdict::Indeterminate => 1,
        Verdict::AcceptConfident => 2,
    }
}

proptest! {
    #[test]
    fn fisher_is_odd_increasing_and_invertible(r in -0.999f64..0.999, dr in 1e-6f64..0.5) {
        let z = fisher_transform(r).unwrap();
        prop_assert_eq!(fisher_transform(-r).unwrap(), -z);
        prop_assert!((fisher_inverse(z) - r).abs() < 1e-12);
        let s = (r + dr).min(0.9999);
        if s > r {
            prop_assert!(fisher_transform(s).unwrap() > z);
        }
    }

    #[test]
    fn interval_contains_estimate(r in -0.99f64..0.99, n in 4usize..5000, c in 0.5f64..0.999) {
        let ci = correlation_confidence_interval(r, n, c).unwrap();
        prop_assert!(ci.lower_r <= r && r <= ci.upper_r);
    }

    #[test]
    fn width_shrinks_with_n_and_grows_with_confidence(r in -0.9f64..0.9, n in 4usize..5000, c in 0.5f64..0.99) {
        let w = |n, c| {
            let ci = correlation_confidence_interval(r, n, c).unwrap();
            ci.upper_r - ci.lower_r
        };
        prop_assert!(w(n + 1, c) < w(n, c));
        prop_assert!(w(n, c + 0.005) > w(n, c));
    }

    #[test]
    fn verdict_is_monotone_in_r(r in -0.95f64..0.9, dr in 0.0f64..0.09, n in 4usize..3000, t in 0.0f64..0.6) {
        let low = screen_item(r, n, t, 0.95).unwrap().verdict;
        let high = screen_item(r + dr, n, t, 0.95).unwrap().verdict;
        prop_assert!(verdict_rank(high) >= verdict_rank(low));
    }

    #[test]
    fn quanta_monotone(r in 0.0f64..0.98, dr in 1e-4f64..0.01, range in 0.5f64..10.0) {
        let base = quanta_count(r, range, ErrorDistribution::Normal).unwrap();
        prop_assert!(quanta_count(r + dr, range, ErrorDistribution::Normal).unwrap() > base);
        prop_assert!(quanta_count(r, range * 1.01, ErrorDistribution::Normal).unwrap() > base);
        // Larger entropy coefficient, fewer quanta.
        prop_assert!(quanta_count(r, range, ErrorDistribution::Uniform).unwrap() > base);
        prop_assert!(entropy_coefficient(ErrorDistribution::Normal) > entropy_coefficient(ErrorDistribution::Uniform));
    }

    #[test]
    fn range_grows_by_fixed_step_per_doubling(n in 2u64..1_000_000_000) {
        let step = expected_score_range(Some(2 * n)) - expected_score_range(Some(n));
        prop_assert!((step - 0.4).abs() < 1e-12);
    }

    // The 1.69 shorthand is a two-digit rounding of 7 / (2 sqrt(pi e / 2)) = 1.6938;
    // the 0.01 slack only covers reliabilities up to about 0.85.
    #[test]
    fn shorthand_constant_within_slack(r in 0.0f64..0.85) {
        let q = quanta_count(r, 7.0, ErrorDistribution::Normal).unwrap();
        prop_assert!((q - 1.69 / (1.0 - r).sqrt()).abs() < 0.01);
    }
}

#[test]
fn coverage_at_n_100_is_nominal() {
    let res = experiment_ci_coverage(0.3, 100, 0.95, 10_000, 2024).unwrap();
    assert!((res.estimate - 0.95).abs() <= 0.01, "{}", res.estimate);
}
