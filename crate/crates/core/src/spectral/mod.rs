//! Real functions on the torus `R / 2piZ` in the orthonormal Laplacian eigenbasis.
//!
//! A function is stored as two coefficient vectors:
//!
//! * odd part against `sin(nx)/sqrt(pi)`, modes `n = 1..=N`
//! * even part against `cos(nx)/sqrt(pi)` for `n >= 1` and `1/sqrt(2pi)` for `n = 0`
//!
//! With this normalization every Sobolev norm is a weighted l2 sum of the
//! coefficients, the constant mode carrying weight 1 for every exponent.

mod grid;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::{default_grid_size, evaluate_on_grid, project_to_spectrum, GridTransform};

/// Odd (sine) or even (cosine) half of `L^2(T)`.
///
/// Serialized as `1` (odd) and `2` (even).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Odd, Parity::Even];

    /// Lowest mode index of this parity.
    pub fn first_mode(self) -> usize {
        match self {
            Parity::Odd => 1,
            Parity::Even => 0,
        }
    }

    /// Number of stored coefficients at truncation `n_max`.
    pub fn len(self, n_max: usize) -> usize {
        match self {
            Parity::Odd => n_max,
            Parity::Even => n_max + 1,
        }
    }

    /// Mode index of storage slot `i`.
    #[inline]
    pub fn mode(self, i: usize) -> usize {
        i + self.first_mode()
    }

    /// Storage slot of mode `n`, if it exists in this parity.
    #[inline]
    pub fn slot(self, n: usize) -> Option<usize> {
        n.checked_sub(self.first_mode())
    }

    pub fn modes(self, n_max: usize) -> std::ops::RangeInclusive<usize> {
        self.first_mode()..=n_max
    }

    pub fn opposite(self) -> Parity {
        match self {
            Parity::Odd => Parity::Even,
            Parity::Even => Parity::Odd,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Parity::Odd => 1,
            Parity::Even => 2,
        }
    }
}

impl From<Parity> for u8 {
    fn from(p: Parity) -> u8 {
        p.index()
    }
}

impl TryFrom<u8> for Parity {
    type Error = String;

    fn try_from(k: u8) -> std::result::Result<Self, Self::Error> {
        match k {
            1 => Ok(Parity::Odd),
            2 => Ok(Parity::Even),
            other => Err(format!("parity must be 1 or 2, got {other}")),
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Odd => f.write_str("odd"),
            Parity::Even => f.write_str("even"),
        }
    }
}

/// Sobolev exponent `s` of `H^s(T)`. May be negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub const L2: SobolevIndex = SobolevIndex(0.0);

    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() {
            Ok(SobolevIndex(s))
        } else {
            Err(Error::InvalidInput(format!("Sobolev index must be finite, got {s}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Squared norm weight of mode `n`: `n^{2s}`, and 1 for the constant mode.
    #[inline]
    pub fn weight(self, n: usize) -> f64 {
        mode_weight(n, self.0)
    }
}

impl From<f64> for SobolevIndex {
    /// Panics on non-finite input; use [`SobolevIndex::new`] for fallible construction.
    fn from(s: f64) -> Self {
        SobolevIndex::new(s).expect("finite Sobolev index")
    }
}

/// `n^{2s}` with the inhomogeneous convention `0 -> 1`.
#[inline]
pub fn mode_weight(n: usize, s: f64) -> f64 {
    if n == 0 || s == 0.0 {
        1.0
    } else {
        (n as f64).powf(2.0 * s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawSpectral {
    n_max: usize,
    odd: Vec<f64>,
    even: Vec<f64>,
}

/// Truncated real function on the torus, `modes 1..=N` odd and `0..=N` even.
///
/// JSON form: `{"n_max": N, "odd": [...], "even": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectral", into = "RawSpectral")]
pub struct SpectralFunction {
    n_max: usize,
    odd: Vec<f64>,
    even: Vec<f64>,
}

impl TryFrom<RawSpectral> for SpectralFunction {
    type Error = Error;

    fn try_from(raw: RawSpectral) -> Result<Self> {
        let f = SpectralFunction::new(raw.odd, raw.even)?;
        if f.n_max != raw.n_max {
            return Err(Error::ShapeMismatch {
                expected: format!("n_max = {}", raw.n_max),
                found: format!("coefficient vectors of order {}", f.n_max),
            });
        }
        Ok(f)
    }
}

impl From<SpectralFunction> for RawSpectral {
    fn from(f: SpectralFunction) -> Self {
        RawSpectral {
            n_max: f.n_max,
            odd: f.odd,
            even: f.even,
        }
    }
}

impl SpectralFunction {
    /// Build from coefficient vectors; `even.len()` must be `odd.len() + 1`.
    pub fn new(odd: Vec<f64>, even: Vec<f64>) -> Result<Self> {
        if even.len() != odd.len() + 1 {
            return Err(Error::ShapeMismatch {
                expected: format!("even length {}", odd.len() + 1),
                found: format!("even length {}", even.len()),
            });
        }
        if odd.is_empty() {
            return Err(Error::InvalidInput("truncation order must be positive".into()));
        }
        if let Some(bad) = odd.iter().chain(&even).find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coefficient {bad}")));
        }
        Ok(SpectralFunction {
            n_max: odd.len(),
            odd,
            even,
        })
    }

    pub fn zeros(n_max: usize) -> Self {
        assert!(n_max > 0, "truncation order must be positive");
        SpectralFunction {
            n_max,
            odd: vec![0.0; n_max],
            even: vec![0.0; n_max + 1],
        }
    }

    /// Single eigenmode `f_n^k` with unit coefficient.
    pub fn basis(n_max: usize, parity: Parity, n: usize) -> Result<Self> {
        let mut f = Self::zeros(n_max);
        f.set(parity, n, 1.0)?;
        Ok(f)
    }

    /// Function with one parity given by `coeffs` and the other zero.
    pub fn from_parity(parity: Parity, coeffs: Vec<f64>) -> Result<Self> {
        let n_max = match parity {
            Parity::Odd => coeffs.len(),
            Parity::Even => coeffs.len().saturating_sub(1),
        };
        if n_max == 0 {
            return Err(Error::InvalidInput("truncation order must be positive".into()));
        }
        match parity {
            Parity::Odd => Self::new(coeffs, vec![0.0; n_max + 1]),
            Parity::Even => Self::new(vec![0.0; n_max], coeffs),
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn odd(&self) -> &[f64] {
        &self.odd
    }

    pub fn even(&self) -> &[f64] {
        &self.even
    }

    pub fn coeffs(&self, parity: Parity) -> &[f64] {
        match parity {
            Parity::Odd => &self.odd,
            Parity::Even => &self.even,
        }
    }

    pub fn coeffs_mut(&mut self, parity: Parity) -> &mut [f64] {
        match parity {
            Parity::Odd => &mut self.odd,
            Parity::Even => &mut self.even,
        }
    }

    /// Coefficient of mode `n`; zero beyond the truncation.
    pub fn get(&self, parity: Parity, n: usize) -> f64 {
        parity
            .slot(n)
            .and_then(|i| self.coeffs(parity).get(i).copied())
            .unwrap_or(0.0)
    }

    pub fn set(&mut self, parity: Parity, n: usize, value: f64) -> Result<()> {
        let n_max = self.n_max;
        let slot = parity
            .slot(n)
            .filter(|&i| i < parity.len(n_max))
            .ok_or_else(|| Error::InvalidInput(format!("mode {n} is not a stored {parity} mode at order {n_max}")))?;
        self.coeffs_mut(parity)[slot] = value;
        Ok(())
    }

    /// Iterate `(parity, mode, coefficient)` over all stored coefficients.
    pub fn iter(&self) -> impl Iterator<Item = (Parity, usize, f64)> + '_ {
        Parity::BOTH.into_iter().flat_map(move |p| {
            self.coeffs(p)
                .iter()
                .enumerate()
                .map(move |(i, &c)| (p, p.mode(i), c))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.odd.iter().chain(&self.even).all(|&c| c == 0.0)
    }

    /// Zero-pad or cut to truncation order `n_max`.
    pub fn resized(&self, n_max: usize) -> Self {
        let mut out = Self::zeros(n_max);
        for p in Parity::BOTH {
            let src = self.coeffs(p);
            let dst = out.coeffs_mut(p);
            let k = src.len().min(dst.len());
            dst[..k].copy_from_slice(&src[..k]);
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    pub fn scale(&mut self, factor: f64) {
        self.odd.iter_mut().chain(self.even.iter_mut()).for_each(|c| *c *= factor);
    }

    /// `self += alpha * other`; `other` is zero-padded or cut to this truncation.
    pub fn axpy(&mut self, alpha: f64, other: &SpectralFunction) {
        for p in Parity::BOTH {
            for (d, s) in self.coeffs_mut(p).iter_mut().zip(other.coeffs(p)) {
                *d += alpha * s;
            }
        }
    }

    /// Sum of two functions, zero-padding the shorter one.
    pub fn add(&self, other: &SpectralFunction) -> Self {
        let mut out = self.resized(self.n_max.max(other.n_max));
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &SpectralFunction) -> Self {
        let mut out = self.resized(self.n_max.max(other.n_max));
        out.axpy(-1.0, other);
        out
    }

    /// Multiply every mode `n` by `multiplier(n)`.
    pub fn map_modes(&self, multiplier: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for p in Parity::BOTH {
            for (i, c) in out.coeffs_mut(p).iter_mut().enumerate() {
                *c *= multiplier(p.mode(i));
            }
        }
        out
    }

    /// Exact heat propagator `e^{t Delta}`.
    pub fn heat_propagated(&self, t: f64) -> Self {
        self.map_modes(|n| (-((n * n) as f64) * t).exp())
    }

    /// Spatial derivative: `a_n sin(nx) -> n a_n cos(nx)`, `b_n cos(nx) -> -n b_n sin(nx)`.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zeros(self.n_max);
        for n in 1..=self.n_max {
            let nf = n as f64;
            out.even[n] = nf * self.odd[n - 1];
            out.odd[n - 1] = -nf * self.even[n];
        }
        out
    }

    /// Flat view `[odd..., even...]` used by dense linear algebra.
    pub fn to_flat(&self) -> Vec<f64> {
        self.odd.iter().chain(&self.even).copied().collect()
    }

    pub fn from_flat(n_max: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != 2 * n_max + 1 {
            return Err(Error::ShapeMismatch {
                expected: format!("{} coefficients", 2 * n_max + 1),
                found: format!("{}", flat.len()),
            });
        }
        Self::new(flat[..n_max].to_vec(), flat[n_max..].to_vec())
    }

    /// Mean value `∫ f dx` over one period.
    pub fn mass(&self) -> f64 {
        (2.0 * std::f64::consts::PI).sqrt() * self.even[0]
    }
}

/// `||f||_{H^s}`: square root of `(a_0^2)^2 + sum n^{2s}((a_n^1)^2 + (a_n^2)^2)`.
pub fn sobolev_norm(f: &SpectralFunction, s: SobolevIndex) -> f64 {
    inner_product_hs(f, f, s).max(0.0).sqrt()
}

/// `<f, g>_{H^s}`; mixed truncations are zero-padded.
pub fn inner_product_hs(f: &SpectralFunction, g: &SpectralFunction, s: SobolevIndex) -> f64 {
    Parity::BOTH
        .into_iter()
        .map(|p| weighted_dot(f.coeffs(p), g.coeffs(p), p, s))
        .sum()
}

/// Weighted dot product of two coefficient slices of the same parity.
pub fn weighted_dot(a: &[f64], b: &[f64], parity: Parity, s: SobolevIndex) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| s.weight(parity.mode(i)) * x * y)
        .sum()
}

/// Weighted norm of a single-parity coefficient slice.
pub fn parity_norm(a: &[f64], parity: Parity, s: SobolevIndex) -> f64 {
    weighted_dot(a, a, parity, s).sqrt()
}

/// Apply the Laplacian: mode `n` is multiplied by `-n^2`.
pub fn laplacian_apply(f: &SpectralFunction) -> SpectralFunction {
    f.map_modes(|n| -((n * n) as f64))
}

/// Keep the `parity` half of `f`, zeroing the other.
pub fn parity_project(f: &SpectralFunction, parity: Parity) -> SpectralFunction {
    let mut out = f.clone();
    out.coeffs_mut(parity.opposite()).iter_mut().for_each(|c| *c = 0.0);
    out
}
