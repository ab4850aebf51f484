use log::debug;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::admissible::ensure_admissible;
use super::potential::PotentialSpec;
use crate::error::{Error, Result};
use crate::linalg::{DenseLu, ILL_CONDITIONED};
use crate::spectral::{Parity, SpectralFunction};

/// `p^2 + lambda - n^2`, the resonant denominator.
#[inline]
pub fn denominator(p: usize, n: usize, lambda: f64) -> f64 {
    let (p, n) = (p as f64, n as f64);
    p * p + lambda - n * n
}

/// Kernel vector `q_n` with `<q_n, f_p> = a_p / (p^2 + lambda - n^2)` on the given parity.
pub fn build_q_vector(n: usize, lambda: f64, potentials: &PotentialSpec, parity: Parity) -> Result<SpectralFunction> {
    let n_max = potentials.n_max();
    if parity.slot(n).is_none() || n > n_max {
        return Err(Error::InvalidInput(format!(
            "mode {n} is outside the {parity} range {:?}",
            parity.modes(n_max)
        )));
    }
    let mut coeffs = Vec::with_capacity(parity.len(n_max));
    for (p, &a) in parity.modes(n_max).zip(potentials.amplitudes(parity)) {
        let d = denominator(p, n, lambda);
        if d == 0.0 {
            return Err(Error::ZeroDenominator { p, n });
        }
        coeffs.push(a / d);
    }
    let mut f = SpectralFunction::zeros(n_max);
    f.coeffs_mut(parity).copy_from_slice(&coeffs);
    Ok(f)
}

/// Matrix `M_{p,n} = a_n / (p^2 + lambda - n^2)` of the truncated TB = B system.
pub fn gain_system_matrix(lambda: f64, potentials: &PotentialSpec, parity: Parity) -> Result<DMatrix<f64>> {
    let n_max = potentials.n_max();
    let modes: Vec<usize> = parity.modes(n_max).collect();
    let a = potentials.amplitudes(parity);
    let mut m = DMatrix::zeros(modes.len(), modes.len());
    for (j, &n) in modes.iter().enumerate() {
        for (i, &p) in modes.iter().enumerate() {
            let d = denominator(p, n, lambda);
            if d == 0.0 {
                return Err(Error::ZeroDenominator { p, n });
            }
            m[(i, j)] = a[j] / d;
        }
    }
    Ok(m)
}

/// Empirical constants with `lower * n^m <= |K_n| <= upper * n^m` on the interior modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainBounds {
    pub lower: f64,
    pub upper: f64,
    pub interior_cutoff: usize,
}

/// One parity of the gain solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityGains {
    pub parity: Parity,
    pub gains: Vec<f64>,
    pub corrections: Vec<f64>,
    /// `max_p |sum_n a_n K_n / (p^2 + lambda - n^2) + 1|`.
    pub residual: f64,
    pub cond_estimate: f64,
    pub bounds: GainBounds,
}

/// Interior modes are those with `n <= n_max / 2`.
pub fn interior_cutoff(n_max: usize) -> usize {
    (n_max / 2).max(1)
}

/// Solve `M K = -1` for one parity.
pub fn solve_gains(lambda: f64, potentials: &PotentialSpec, parity: Parity) -> Result<ParityGains> {
    ensure_admissible(lambda)?;
    let m = gain_system_matrix(lambda, potentials, parity)?;
    let lu = DenseLu::new(&m)?;
    let cond = lu.cond1_estimate();
    if !(cond <= ILL_CONDITIONED) {
        return Err(Error::IllConditioned {
            what: "gain system",
            cond,
            threshold: ILL_CONDITIONED,
        });
    }
    let rhs = DVector::from_element(m.nrows(), -1.0);
    let k = lu.solve(&rhs).ok_or(Error::IllConditioned {
        what: "gain system",
        cond: f64::INFINITY,
        threshold: ILL_CONDITIONED,
    })?;
    let residual = (&m * &k - &rhs).amax();
    let gains: Vec<f64> = k.iter().copied().collect();
    if let Some(i) = gains.iter().position(|&g| g == 0.0 || !g.is_finite()) {
        return Err(Error::ZeroGain {
            parity,
            mode: parity.mode(i),
        });
    }
    let a = potentials.amplitudes(parity);
    let corrections = gains.iter().zip(a).map(|(k, a)| -a * k - lambda).collect();
    let bounds = gain_bounds(&gains, parity, potentials.m, potentials.n_max());
    debug!("{parity} gains: cond {cond:.3e}, residual {residual:.3e}");
    Ok(ParityGains {
        parity,
        gains,
        corrections,
        residual,
        cond_estimate: cond,
        bounds,
    })
}

fn gain_bounds(gains: &[f64], parity: Parity, m: f64, n_max: usize) -> GainBounds {
    let cutoff = interior_cutoff(n_max);
    let mut lower = f64::INFINITY;
    let mut upper = 0.0f64;
    for (i, k) in gains.iter().enumerate() {
        let n = parity.mode(i);
        if n == 0 || n > cutoff {
            continue;
        }
        let scaled = k.abs() / (n as f64).powf(m);
        lower = lower.min(scaled);
        upper = upper.max(scaled);
    }
    GainBounds {
        lower,
        upper,
        interior_cutoff: cutoff,
    }
}

/// Gains and corrections for both parities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainProfile {
    pub lambda: f64,
    pub m: f64,
    pub n_max: usize,
    pub odd_gains: Vec<f64>,
    pub even_gains: Vec<f64>,
    pub odd_corrections: Vec<f64>,
    pub even_corrections: Vec<f64>,
    pub stats: Vec<GainStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainStats {
    pub parity: Parity,
    pub residual: f64,
    pub cond_estimate: f64,
    pub bounds: GainBounds,
}

impl GainProfile {
    /// Solve both parities.
    pub fn synthesize(lambda: f64, potentials: &PotentialSpec) -> Result<Self> {
        let odd = solve_gains(lambda, potentials, Parity::Odd)?;
        let even = solve_gains(lambda, potentials, Parity::Even)?;
        if even.gains[0] == 0.0 {
            return Err(Error::ZeroGain {
                parity: Parity::Even,
                mode: 0,
            });
        }
        let stats = [&odd, &even]
            .iter()
            .map(|g| GainStats {
                parity: g.parity,
                residual: g.residual,
                cond_estimate: g.cond_estimate,
                bounds: g.bounds,
            })
            .collect();
        Ok(GainProfile {
            lambda,
            m: potentials.m,
            n_max: potentials.n_max(),
            odd_gains: odd.gains,
            even_gains: even.gains,
            odd_corrections: odd.corrections,
            even_corrections: even.corrections,
            stats,
        })
    }

    /// Same shape with every gain set to zero; open loop.
    pub fn zeroed(&self) -> Self {
        let mut g = self.clone();
        g.odd_gains.iter_mut().for_each(|k| *k = 0.0);
        g.even_gains.iter_mut().for_each(|k| *k = 0.0);
        g
    }

    pub fn gains(&self, parity: Parity) -> &[f64] {
        match parity {
            Parity::Odd => &self.odd_gains,
            Parity::Even => &self.even_gains,
        }
    }

    pub fn corrections(&self, parity: Parity) -> &[f64] {
        match parity {
            Parity::Odd => &self.odd_corrections,
            Parity::Even => &self.even_corrections,
        }
    }

    /// Largest TB = B residual over both parities.
    pub fn max_residual(&self) -> f64 {
        self.stats.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    /// `(u_1, u_2) = (sum K_n^1 y_n^1, sum K_n^2 y_n^2)`.
    pub fn feedback(&self, y: &SpectralFunction) -> (f64, f64) {
        let dot = |k: &[f64], c: &[f64]| k.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
        (dot(&self.odd_gains, y.odd()), dot(&self.even_gains, y.even()))
    }
}

/// Checked variant of [`GainProfile::feedback`].
pub fn feedback_evaluate(gains: &GainProfile, y: &SpectralFunction) -> Result<(f64, f64)> {
    if y.n_max() != gains.n_max {
        return Err(Error::ShapeMismatch {
            expected: format!("truncation order {}", gains.n_max),
            found: format!("{}", y.n_max()),
        });
    }
    Ok(gains.feedback(y))
}
