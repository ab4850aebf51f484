//! Resonance check for the decay rate: `lambda` must avoid `{ i^2 - j^2 : i, j >= 0 }`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum distance to the resonant set required for non-integer rates.
pub const RESONANCE_TOLERANCE: f64 = 1e-9;

/// Outcome of the exhaustive resonance search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub lambda: f64,
    pub admissible: bool,
    /// Distance from `lambda` to the nearest `i^2 - j^2` found.
    pub distance: f64,
    /// A representation `(i, j)` of the nearest resonant value.
    pub nearest: (u64, u64),
    /// Largest `i` enumerated.
    pub radius: u64,
}

/// Search radius that provably contains every representation of values within
/// `|lambda| + 2`: `i^2 - j^2 = (i - j)(i + j)` forces `i + j <= |v|` when `i > j`.
pub fn certified_radius(lambda: f64) -> u64 {
    ((lambda.abs() + 3.0) / 2.0).ceil() as u64 + 1
}

/// Search `i^2 - j^2` for `0 <= j <= i <= max(bound, certified radius)`. For fixed `i`
/// the closest value comes from one of the two `j` adjacent to `sqrt(i^2 - |lambda|)`.
pub fn admissibility(lambda: f64, bound: u64) -> Admissibility {
    let radius = bound.max(certified_radius(lambda));
    let target = lambda.abs();
    let mut best = (f64::INFINITY, (0u64, 0u64));
    for i in 0..=radius {
        let sq = (i * i) as f64;
        let j0 = (sq - target).max(0.0).sqrt().floor() as u64;
        for j in [j0.saturating_sub(1), j0, j0 + 1, j0 + 2] {
            if j > i {
                continue;
            }
            let d = ((i * i - j * j) as f64 - target).abs();
            if d < best.0 {
                best = (d, (i, j));
            }
        }
    }
    // negative lambda is represented by swapping i and j
    let nearest = if lambda < 0.0 { (best.1 .1, best.1 .0) } else { best.1 };
    Admissibility {
        lambda,
        admissible: lambda.is_finite() && best.0 > RESONANCE_TOLERANCE,
        distance: best.0,
        nearest,
        radius,
    }
}

/// `true` iff `lambda` differs from every `i^2 - j^2`.
pub fn is_admissible_lambda(lambda: f64, bound: u64) -> bool {
    admissibility(lambda, bound).admissible
}

/// Nearest members of the canonical admissible family `4M + 2`, `M >= 1`.
pub fn nearest_canonical(lambda: f64) -> Vec<f64> {
    let m = ((lambda - 2.0) / 4.0).floor();
    let below = 4.0 * m + 2.0;
    let above = below + 4.0;
    let mut out = Vec::new();
    if below >= 6.0 && below != lambda {
        out.push(below);
    }
    out.push(above.max(6.0));
    out.dedup();
    out
}

/// Error if `lambda` is resonant.
pub fn ensure_admissible(lambda: f64) -> Result<Admissibility> {
    let adm = admissibility(lambda, 0);
    if adm.admissible {
        Ok(adm)
    } else {
        let (i, j) = adm.nearest;
        Err(Error::InadmissibleLambda {
            lambda,
            witness: format!("{i}^2 - {j}^2 = {}", i as i64 * i as i64 - j as i64 * j as i64),
            suggestions: nearest_canonical(lambda),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent brute force over a generous fixed square.
    fn resonant_brute(v: i64) -> bool {
        (0i64..200).any(|i| (0i64..200).any(|j| i * i - j * j == v))
    }

    #[test]
    fn canonical_family_is_admissible() {
        for m in 1..40 {
            assert!(is_admissible_lambda((4 * m + 2) as f64, 100));
        }
        assert!(is_admissible_lambda(6.0, 100));
    }

    #[test]
    fn resonant_values() {
        assert!(!is_admissible_lambda(3.0, 100));
        assert!(!is_admissible_lambda(0.0, 100));
        assert!(!is_admissible_lambda(-5.0, 0));
        let adm = admissibility(3.0, 0);
        assert_eq!(adm.nearest, (2, 1));
    }

    #[test]
    fn integer_search_agrees_with_brute_force() {
        for v in -150i64..=150 {
            assert_eq!(is_admissible_lambda(v as f64, 0), !resonant_brute(v), "lambda = {v}");
        }
    }

    #[test]
    fn non_integer_reports_distance() {
        let adm = admissibility(2.5, 0);
        assert!(adm.admissible);
        assert!((adm.distance - 0.5).abs() < 1e-15);
        assert!(!is_admissible_lambda(3.0 + 1e-12, 0));
        assert!(!is_admissible_lambda(f64::NAN, 0));
    }

    #[test]
    fn suggestions() {
        assert_eq!(nearest_canonical(3.0), vec![6.0]);
        assert_eq!(nearest_canonical(8.0), vec![6.0, 10.0]);
        match ensure_admissible(3.0) {
            Err(Error::InadmissibleLambda { suggestions, .. }) => assert_eq!(suggestions, vec![6.0]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(ensure_admissible(10.0).is_ok());
    }
}
