use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gains::{denominator, ensure_admissible, PotentialSpec};
use crate::spectral::{mode_weight, Parity};

/// Relative change between `J = N/2` and `J = N` accepted as convergence.
pub const CAUCHY_THRESHOLD: f64 = 0.01;

/// `min |p^2 + lambda - n^2| / |p^2 - n^2|` over `p != n`, both in `0..=n_max`.
pub fn check_denominator_bound(lambda: f64, n_max: usize) -> Result<f64> {
    denominator_bound_where(lambda, n_max, |_, _| true)
}

/// Same minimum restricted to `p < n` and `n > n_min`.
pub fn denominator_bound_region(lambda: f64, n_max: usize, n_min: f64) -> Result<f64> {
    denominator_bound_where(lambda, n_max, |p, n| p < n && n as f64 > n_min)
}

fn denominator_bound_where(lambda: f64, n_max: usize, keep: impl Fn(usize, usize) -> bool) -> Result<f64> {
    ensure_admissible(lambda)?;
    let mut best = f64::INFINITY;
    for n in 0..=n_max {
        for p in 0..=n_max {
            if p == n || !keep(p, n) {
                continue;
            }
            let d = denominator(p, n, lambda);
            if d == 0.0 {
                return Err(Error::ZeroDenominator { p, n });
            }
            let gap = (p as f64).powi(2) - (n as f64).powi(2);
            best = best.min(d.abs() / gap.abs());
        }
    }
    Ok(best)
}

/// Partial sums of a non-negative series with a Cauchy verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosenessReport {
    pub kind: String,
    pub parity: Parity,
    pub lambda: f64,
    pub s: f64,
    pub n_max: usize,
    /// `(J, S_J)` for every mode `J` of the parity.
    pub partial_sums: Vec<(usize, f64)>,
    /// `(S_N - S_{N/2}) / S_N`.
    pub cauchy_ratio: f64,
    /// Same ratio between `N/4` and `N/2`.
    pub previous_ratio: f64,
    pub verdict: bool,
}

impl ClosenessReport {
    fn from_terms(kind: &str, parity: Parity, lambda: f64, s: f64, n_max: usize, terms: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let partial_sums: Vec<(usize, f64)> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                acc += t;
                (parity.mode(i), acc)
            })
            .collect();
        let at = |j: usize| {
            partial_sums
                .iter()
                .take_while(|(n, _)| *n <= j)
                .last()
                .map_or(0.0, |(_, v)| *v)
        };
        let ratio = |hi: usize| {
            let top = at(hi);
            if top > 0.0 {
                (top - at(hi / 2)) / top
            } else {
                0.0
            }
        };
        let cauchy_ratio = ratio(n_max);
        ClosenessReport {
            kind: kind.to_string(),
            parity,
            lambda,
            s,
            n_max,
            previous_ratio: ratio(n_max / 2),
            verdict: cauchy_ratio < CAUCHY_THRESHOLD,
            cauchy_ratio,
            partial_sums,
        }
    }

    pub fn total(&self) -> f64 {
        self.partial_sums.last().map_or(0.0, |(_, v)| *v)
    }

    /// Two-column CSV `J,S_J`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("J,S_J\n");
        for (j, v) in &self.partial_sums {
            out.push_str(&format!("{j},{v:.16e}\n"));
        }
        out
    }
}

/// `sum_{p != n, p <= N} w_p a_p^2 / (p^2 + lambda - n^2)^2`: squared distance of `q_n` from `a_n f_n / lambda`.
fn off_diagonal_energy(lambda: f64, potentials: &PotentialSpec, parity: Parity, n: usize, index: f64) -> f64 {
    parity
        .modes(potentials.n_max())
        .zip(potentials.amplitudes(parity))
        .filter(|(p, _)| *p != n)
        .map(|(p, a)| {
            let d = denominator(p, n, lambda);
            mode_weight(p, index) * (a / d).powi(2)
        })
        .sum()
}

/// Partial sums of `||n^{-s} q_n - n^{-s} a_n f_n / lambda||^2_{H^{m+s}}`.
pub fn quadratic_closeness(lambda: f64, potentials: &PotentialSpec, s: f64, parity: Parity) -> Result<ClosenessReport> {
    if !(s > -1.5 && s < 1.5) {
        return Err(Error::OutOfRange {
            what: "s",
            value: s,
            range: "(-3/2, 3/2)",
        });
    }
    ensure_admissible(lambda)?;
    let index = potentials.m + s;
    let terms = parity
        .modes(potentials.n_max())
        .map(|n| mode_weight(n, -s) * off_diagonal_energy(lambda, potentials, parity, n, index))
        .collect();
    Ok(ClosenessReport::from_terms(
        "quadratic_closeness",
        parity,
        lambda,
        s,
        potentials.n_max(),
        terms,
    ))
}

/// Both smoothing series for the same `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    /// `sum ||q_n - a_n f_n / lambda||^2_{H^{m+r}}`.
    pub plain: ClosenessReport,
    /// `sum ||n (q_n - a_n f_n / lambda)||^2_{H^{m+r-1}}`.
    pub weighted: ClosenessReport,
}

fn check_r(r: f64) -> Result<()> {
    if !(r >= 0.0 && r < 0.5) {
        return Err(Error::OutOfRange {
            what: "r",
            value: r,
            range: "[0, 1/2)",
        });
    }
    Ok(())
}

pub fn smoothing_sums(lambda: f64, potentials: &PotentialSpec, r: f64, parity: Parity) -> Result<SmoothingReport> {
    check_r(r)?;
    ensure_admissible(lambda)?;
    let n_max = potentials.n_max();
    let m = potentials.m;
    let plain = parity
        .modes(n_max)
        .map(|n| off_diagonal_energy(lambda, potentials, parity, n, m + r))
        .collect();
    let weighted = parity
        .modes(n_max)
        .map(|n| (n as f64).powi(2) * off_diagonal_energy(lambda, potentials, parity, n, m + r - 1.0))
        .collect();
    Ok(SmoothingReport {
        plain: ClosenessReport::from_terms("smoothing", parity, lambda, r, n_max, plain),
        weighted: ClosenessReport::from_terms("smoothing_weighted", parity, lambda, r, n_max, weighted),
    })
}

/// `||sum_{n <= N} (q_n - a_n f_n / lambda)||_{H^r}` on the odd parity; requires `m = 0`.
pub fn aggregate_smoothing(lambda: f64, potentials: &PotentialSpec, r: f64) -> Result<f64> {
    check_r(r)?;
    if potentials.m != 0.0 {
        return Err(Error::InvalidInput(format!(
            "aggregate smoothing is defined for m = 0, got m = {}",
            potentials.m
        )));
    }
    ensure_admissible(lambda)?;
    let parity = Parity::Odd;
    let n_max = potentials.n_max();
    let a = potentials.amplitudes(parity);
    let mut sq = 0.0;
    for (i, p) in parity.modes(n_max).enumerate() {
        let row: f64 = parity
            .modes(n_max)
            .filter(|&n| n != p)
            .map(|n| 1.0 / denominator(p, n, lambda))
            .sum();
        sq += mode_weight(p, r) * (a[i] * row).powi(2);
    }
    Ok(sq.sqrt())
}
