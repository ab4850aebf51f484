use backstep_core::diagnostics::{
    aggregate_smoothing, check_denominator_bound, denominator_bound_region, inverse_identity_residual,
    operator_equality_residual, q_family, quadratic_closeness, riesz_frame_bounds, smoothing_sums, tb_eq_b_residual,
};
use backstep_core::gains::{GainProfile, PotentialSpec, TransformPair};
use backstep_core::spectral::{Parity, SpectralFunction};
use backstep_core::Error;
use proptest::prelude::*;

fn constant(n: usize) -> PotentialSpec {
    PotentialSpec::constant(n, 1.0).unwrap()
}

/// `min |p^2 + lambda - n^2| / |p^2 - n^2|` over `p != n` by direct enumeration.
fn denominator_oracle(lambda: f64, n_max: usize, keep: impl Fn(usize, usize) -> bool) -> f64 {
    let mut best = f64::INFINITY;
    for n in 0..=n_max {
        for p in 0..=n_max {
            if p != n && keep(p, n) {
                let d = ((p * p) as f64 + lambda - (n * n) as f64).abs();
                best = best.min(d / ((p * p) as f64 - (n * n) as f64).abs());
            }
        }
    }
    best
}

#[test]
fn denominator_bounds_match_enumeration() {
    for lambda in [6.0, 10.0, 7.5] {
        for n_max in [4usize, 9, 30] {
            let global = check_denominator_bound(lambda, n_max).unwrap();
            assert!((global - denominator_oracle(lambda, n_max, |_, _| true)).abs() < 1e-15);
            let region = denominator_bound_region(lambda, n_max, lambda).unwrap();
            let oracle = denominator_oracle(lambda, n_max, |p, n| p < n && n as f64 > lambda);
            assert!(region == oracle || (region.is_infinite() && oracle.is_infinite()), "{region} {oracle}");
        }
    }
    // (p, n) = (3, 4) globally and (6, 7) on the region
    assert_eq!(check_denominator_bound(6.0, 16).unwrap(), 1.0 / 7.0);
    assert_eq!(denominator_bound_region(6.0, 16, 6.0).unwrap(), 7.0 / 13.0);
}

#[test]
fn closeness_ratio_halves_with_truncation() {
    let ratios: Vec<f64> = [16usize, 32, 64, 128]
        .iter()
        .map(|&n| quadratic_closeness(6.0, &constant(n), 0.0, Parity::Odd).unwrap().cauchy_ratio)
        .collect();
    for w in ratios.windows(2) {
        assert!(w[1] < 0.6 * w[0], "{ratios:?}");
    }
    let report = quadratic_closeness(6.0, &constant(128), 0.0, Parity::Odd).unwrap();
    assert!(report.verdict);
    assert!(report.to_csv().starts_with("J,S_J\n"));
    assert_eq!(report.partial_sums.len(), 128);
}

#[test]
fn closeness_index_out_of_range() {
    for s in [-1.5, 1.5, 2.0] {
        match quadratic_closeness(6.0, &constant(8), s, Parity::Odd) {
            Err(Error::OutOfRange { what, .. }) => assert_eq!(what, "s"),
            other => panic!("{s}: {other:?}"),
        }
    }
    assert!(smoothing_sums(6.0, &constant(8), 0.5, Parity::Odd).is_err());
    assert!(smoothing_sums(6.0, &constant(8), -0.1, Parity::Odd).is_err());
}

#[test]
fn smoothing_near_half_still_decreasing() {
    let ratios: Vec<f64> = [16usize, 32, 64, 128, 256]
        .iter()
        .map(|&n| smoothing_sums(6.0, &constant(n), 0.49, Parity::Odd).unwrap().plain.cauchy_ratio)
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}

#[test]
fn aggregate_smoothing_stabilizes() {
    let a128 = aggregate_smoothing(6.0, &constant(128), 0.0).unwrap();
    let a256 = aggregate_smoothing(6.0, &constant(256), 0.0).unwrap();
    assert!((a256 - a128).abs() / a256 < 0.01, "{a128} {a256}");
    let powered = PotentialSpec::power_law(16, 1.0, 1.0).unwrap();
    assert!(aggregate_smoothing(6.0, &powered, 0.0).is_err());
}

#[test]
fn riesz_bounds_are_stable() {
    let bounds = |n: usize| {
        let family = q_family(6.0, &constant(n), 0.0, Parity::Odd).unwrap();
        riesz_frame_bounds(&family, 0.0).unwrap()
    };
    let (lo32, hi32) = bounds(32);
    let (lo64, hi64) = bounds(64);
    assert!(lo32 > 0.0 && lo64 > 0.0);
    assert!((lo64 - lo32).abs() / lo64 < 0.05);
    assert!((hi64 - hi32).abs() / hi64 < 0.01);
}

#[test]
fn riesz_detects_dependence() {
    let a = SpectralFunction::basis(4, Parity::Odd, 1).unwrap();
    let b = SpectralFunction::basis(4, Parity::Odd, 2).unwrap();
    let c = a.add(&b.scaled(2.0));
    match riesz_frame_bounds(&[a, b, c], 0.0) {
        Err(Error::RankDeficient { index }) => assert_eq!(index, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn residual_reports() {
    let pot = constant(32);
    let gains = GainProfile::synthesize(6.0, &pot).unwrap();
    let t = TransformPair::assemble(&gains, &pot).unwrap();

    let tb = tb_eq_b_residual(&t, &gains, &pot, -1.0).unwrap();
    assert_eq!(tb.verdict, Some(true));
    let tb0 = tb_eq_b_residual(&t, &gains, &pot, 0.0).unwrap();
    assert_eq!(tb0.verdict, None);
    assert!(tb0.relative.unwrap() > 0.5);

    let op = operator_equality_residual(&t, &gains, &pot, 0.0).unwrap();
    assert!(op.interior_max < 1e-8, "{}", op.interior_max);
    assert!(op.to_csv().starts_with("parity,mode,residual\n"));
    assert!(operator_equality_residual(&t, &gains, &pot, 0.5).is_err());

    let inv = inverse_identity_residual(&t);
    assert!(inv.total < 1e-10);
}

proptest! {
    #[test]
    fn denominator_bound_non_increasing(m in 1u64..20, n in 2usize..60) {
        let lambda = (4 * m + 2) as f64;
        let a = check_denominator_bound(lambda, n).unwrap();
        let b = check_denominator_bound(lambda, n + 1).unwrap();
        prop_assert!(b <= a);
        prop_assert!(b > 0.0);
    }

    #[test]
    fn closeness_partial_sums_monotone(n in 4usize..40, s in -1.4f64..1.4) {
        let report = quadratic_closeness(6.0, &constant(n), s, Parity::Even).unwrap();
        prop_assert!(report.partial_sums.windows(2).all(|w| w[1].1 >= w[0].1));
        prop_assert!((0.0..=1.0).contains(&report.cauchy_ratio));
    }
}
