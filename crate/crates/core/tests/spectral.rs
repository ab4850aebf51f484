use std::f64::consts::PI;

use backstep_core::spectral::{
    evaluate_on_grid, inner_product_hs, laplacian_apply, parity_project, project_to_spectrum, sobolev_norm,
    GridTransform, Parity, SobolevIndex, SpectralFunction,
};
use proptest::prelude::*;

fn spectral(n_max: usize) -> impl Strategy<Value = SpectralFunction> {
    (
        prop::collection::vec(-1.0f64..1.0, n_max),
        prop::collection::vec(-1.0f64..1.0, n_max + 1),
    )
        .prop_map(|(o, e)| SpectralFunction::new(o, e).unwrap())
}

fn pair() -> impl Strategy<Value = (SpectralFunction, SpectralFunction)> {
    (1usize..24).prop_flat_map(|n| (spectral(n), spectral(n)))
}

/// Direct evaluation of the orthonormal expansion at `x`.
fn evaluate_at(f: &SpectralFunction, x: f64) -> f64 {
    let mut v = f.even()[0] / (2.0 * PI).sqrt();
    for n in 1..=f.n_max() {
        v += (f.get(Parity::Odd, n) * (n as f64 * x).sin() + f.get(Parity::Even, n) * (n as f64 * x).cos()) / PI.sqrt();
    }
    v
}

proptest! {
    #[test]
    fn grid_matches_direct_sum(f in (1usize..16).prop_flat_map(spectral)) {
        let n_grid = 3 * f.n_max() + 2;
        let samples = evaluate_on_grid(&f, n_grid).unwrap();
        for (j, v) in samples.iter().enumerate() {
            let x = 2.0 * PI * j as f64 / n_grid as f64;
            prop_assert!((v - evaluate_at(&f, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval_on_grid(f in (1usize..32).prop_flat_map(spectral)) {
        let n_grid = 3 * f.n_max() + 2;
        let samples = evaluate_on_grid(&f, n_grid).unwrap();
        let quad = samples.iter().map(|v| v * v).sum::<f64>() * 2.0 * PI / n_grid as f64;
        let norm = sobolev_norm(&f, SobolevIndex::L2);
        prop_assert!((quad - norm * norm).abs() <= 1e-12 * (1.0 + norm * norm));
    }

    #[test]
    fn projection_inverts_evaluation(f in (1usize..32).prop_flat_map(spectral)) {
        let samples = evaluate_on_grid(&f, 2 * f.n_max() + 2).unwrap();
        let back = project_to_spectrum(&samples, f.n_max()).unwrap();
        prop_assert!(sobolev_norm(&back.sub(&f), SobolevIndex::L2) < 1e-12);
    }

    #[test]
    fn laplacian_is_symmetric((f, g) in pair()) {
        let l2 = SobolevIndex::L2;
        let lhs = inner_product_hs(&laplacian_apply(&f), &g, l2);
        let rhs = inner_product_hs(&f, &laplacian_apply(&g), l2);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        prop_assert!(inner_product_hs(&laplacian_apply(&f), &f, l2) <= 1e-12);
    }

    #[test]
    fn duality_bound((f, g) in pair(), s in -1.5f64..1.5) {
        let pairing = inner_product_hs(&f, &g, SobolevIndex::L2).abs();
        let bound = sobolev_norm(&f, SobolevIndex::from(s + 1.0)) * sobolev_norm(&g, SobolevIndex::from(-s - 1.0));
        prop_assert!(pairing <= bound * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn parity_projection_is_idempotent(f in (1usize..24).prop_flat_map(spectral)) {
        for parity in Parity::BOTH {
            let once = parity_project(&f, parity);
            prop_assert_eq!(parity_project(&once, parity).clone(), once.clone());
            prop_assert!(parity_project(&once, parity.opposite()).is_zero());
        }
        let sum = parity_project(&f, Parity::Odd).add(&parity_project(&f, Parity::Even));
        prop_assert_eq!(sum, f);
    }

    #[test]
    fn sobolev_norm_monotone_in_index(f in (1usize..24).prop_flat_map(spectral), s in -2.0f64..2.0, ds in 0.0f64..1.0) {
        let lo = sobolev_norm(&f, SobolevIndex::from(s));
        let hi = sobolev_norm(&f, SobolevIndex::from(s + ds));
        prop_assert!(lo <= hi * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn flat_round_trip(f in (1usize..24).prop_flat_map(spectral)) {
        let flat = f.to_flat();
        prop_assert_eq!(flat.len(), 2 * f.n_max() + 1);
        prop_assert_eq!(SpectralFunction::from_flat(f.n_max(), &flat).unwrap(), f);
    }
}

#[test]
fn product_of_modes() {
    // sin x * sin x / pi = (1 - cos 2x) / (2 pi)
    let n = 4;
    let s1 = SpectralFunction::basis(n, Parity::Odd, 1).unwrap();
    let grid = GridTransform::with_default_grid(n).unwrap();
    let p = grid.product(&s1, &s1).unwrap();
    let sqrt_pi = PI.sqrt();
    assert!((p.get(Parity::Even, 0) - (2.0 * PI).sqrt() / (2.0 * PI)).abs() < 1e-14);
    assert!((p.get(Parity::Even, 2) + sqrt_pi / (2.0 * PI)).abs() < 1e-14);
    let rest = p.to_flat().iter().map(|c| c.abs()).sum::<f64>() - p.get(Parity::Even, 0) - p.get(Parity::Even, 2).abs();
    assert!(rest < 1e-14);
}

#[test]
fn burgers_flux_of_single_mode() {
    // (y^2 / 2)_x with y = cos(x) / sqrt(pi): (cos^2 x / (2 pi))_x = -sin(2x) / (2 pi)
    let n = 5;
    let y = SpectralFunction::basis(n, Parity::Even, 1).unwrap();
    let flux = GridTransform::with_default_grid(n).unwrap().burgers_flux(&y).unwrap();
    let expected = -PI.sqrt() / (2.0 * PI);
    assert!((flux.get(Parity::Odd, 2) - expected).abs() < 1e-14);
    assert!((sobolev_norm(&flux, SobolevIndex::L2) - expected.abs()).abs() < 1e-14);
}

#[test]
fn grid_below_minimum_is_rejected() {
    assert!(GridTransform::new(8, 17).is_err());
    assert!(GridTransform::new(8, 18).is_ok());
}
