use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Parity, SpectralFunction};

/// Rule that generated the amplitudes; used to extend them past the truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PotentialProfile {
    /// `a_n = amplitude` for every mode.
    ConstantAmplitude { amplitude: f64 },
    /// `a_n = amplitude * n^{-m}`, `a_0 = amplitude`.
    PowerLaw { amplitude: f64 },
    /// User-supplied amplitudes; zero beyond the truncation.
    Explicit,
}

/// Observed `c <= |a_n| n^m <= C` over `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub lower: f64,
    pub upper: f64,
}

impl Envelope {
    fn of<'a>(m: f64, parts: impl IntoIterator<Item = (usize, &'a f64)>) -> Envelope {
        let mut env = Envelope {
            lower: f64::INFINITY,
            upper: 0.0,
        };
        for (n, a) in parts {
            let scaled = a.abs() * (n as f64).powf(m);
            env.lower = env.lower.min(scaled);
            env.upper = env.upper.max(scaled);
        }
        env
    }
}

/// Control profiles `phi_1 = sum a_n^1 f_n^1` (odd) and `phi_2 = sum a_n^2 f_n^2` (even).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub m: f64,
    pub odd_amplitudes: Vec<f64>,
    pub even_amplitudes: Vec<f64>,
    pub profile: PotentialProfile,
    pub envelope: Envelope,
}

impl PotentialSpec {
    /// Validated potentials: `a_0^2 != 0` and every `a_n^k` finite and nonzero.
    pub fn new(m: f64, odd: Vec<f64>, even: Vec<f64>, profile: PotentialProfile) -> Result<Self> {
        let spec = Self::unchecked(m, odd, even, profile)?;
        if spec.even_amplitudes[0] == 0.0 {
            return Err(Error::InvalidInput(
                "even potential must have a nonzero constant mode a_0".into(),
            ));
        }
        for p in Parity::BOTH {
            if let Some(i) = spec.amplitudes(p).iter().position(|&a| a == 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{p} potential amplitude of mode {} vanishes",
                    p.mode(i)
                )));
            }
        }
        Ok(spec)
    }

    /// Shape checks only; used by probes that need vanishing amplitudes.
    pub fn unchecked(m: f64, odd: Vec<f64>, even: Vec<f64>, profile: PotentialProfile) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidInput(format!("decay exponent m must be finite, got {m}")));
        }
        // shape and finiteness checks are shared with SpectralFunction
        SpectralFunction::new(odd.clone(), even.clone())?;
        let envelope = Envelope::of(
            m,
            odd.iter()
                .enumerate()
                .map(|(i, a)| (i + 1, a))
                .chain(even.iter().enumerate().skip(1)),
        );
        Ok(PotentialSpec {
            m,
            odd_amplitudes: odd,
            even_amplitudes: even,
            profile,
            envelope,
        })
    }

    /// `a_n^k = amplitude` for all modes (decay exponent 0).
    pub fn constant(n_max: usize, amplitude: f64) -> Result<Self> {
        Self::from_profile(n_max, 0.0, PotentialProfile::ConstantAmplitude { amplitude })
    }

    /// `a_n^k = amplitude * n^{-m}`, `a_0^2 = amplitude`.
    pub fn power_law(n_max: usize, m: f64, amplitude: f64) -> Result<Self> {
        Self::from_profile(n_max, m, PotentialProfile::PowerLaw { amplitude })
    }

    fn from_profile(n_max: usize, m: f64, profile: PotentialProfile) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidInput("truncation order must be positive".into()));
        }
        let rule = |n: usize| profile_amplitude(&profile, m, n).unwrap_or(0.0);
        let odd = (1..=n_max).map(rule).collect();
        let even = (0..=n_max).map(rule).collect();
        Self::new(m, odd, even, profile)
    }

    pub fn n_max(&self) -> usize {
        self.odd_amplitudes.len()
    }

    pub fn amplitudes(&self, parity: Parity) -> &[f64] {
        match parity {
            Parity::Odd => &self.odd_amplitudes,
            Parity::Even => &self.even_amplitudes,
        }
    }

    /// Amplitude of mode `n`, extended past the truncation by the generating rule.
    pub fn amplitude_at(&self, parity: Parity, n: usize) -> f64 {
        if n < parity.first_mode() {
            return 0.0;
        }
        if n <= self.n_max() {
            return self.amplitudes(parity)[n - parity.first_mode()];
        }
        profile_amplitude(&self.profile, self.m, n).unwrap_or(0.0)
    }

    /// Same rule at a different truncation order. Explicit profiles are cut or zero-padded.
    pub fn resized(&self, n_max: usize) -> Result<Self> {
        match self.profile {
            PotentialProfile::Explicit => {
                let f = self.to_spectral().resized(n_max);
                Self::new(self.m, f.odd().to_vec(), f.even().to_vec(), PotentialProfile::Explicit)
            }
            _ => Self::from_profile(n_max, self.m, self.profile.clone()),
        }
    }

    /// `phi_1 + phi_2` as one function.
    pub fn to_spectral(&self) -> SpectralFunction {
        SpectralFunction::new(self.odd_amplitudes.clone(), self.even_amplitudes.clone())
            .expect("shape checked at construction")
    }

    /// Single-parity control profile `phi_k`.
    pub fn profile_function(&self, parity: Parity) -> SpectralFunction {
        crate::spectral::parity_project(&self.to_spectral(), parity)
    }
}

fn profile_amplitude(profile: &PotentialProfile, m: f64, n: usize) -> Option<f64> {
    match *profile {
        PotentialProfile::ConstantAmplitude { amplitude } => Some(amplitude),
        PotentialProfile::PowerLaw { amplitude } => Some(if n == 0 {
            amplitude
        } else {
            amplitude * (n as f64).powf(-m)
        }),
        PotentialProfile::Explicit => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile() {
        let p = PotentialSpec::constant(4, 1.0).unwrap();
        assert_eq!(p.odd_amplitudes, vec![1.0; 4]);
        assert_eq!(p.even_amplitudes, vec![1.0; 5]);
        assert_eq!(p.amplitude_at(Parity::Odd, 100), 1.0);
        assert_eq!(p.amplitude_at(Parity::Odd, 0), 0.0);
        assert_eq!(p.envelope, Envelope { lower: 1.0, upper: 1.0 });
    }

    #[test]
    fn power_law_envelope_is_flat() {
        let p = PotentialSpec::power_law(32, 1.5, 2.0).unwrap();
        assert!((p.envelope.lower - 2.0).abs() < 1e-12);
        assert!((p.envelope.upper - 2.0).abs() < 1e-12);
        assert!((p.amplitude_at(Parity::Even, 64) - 2.0 * 64f64.powf(-1.5)).abs() < 1e-15);
        assert_eq!(p.amplitude_at(Parity::Even, 0), 2.0);
    }

    #[test]
    fn rejects_vanishing_amplitudes() {
        let zero_mean = PotentialSpec::new(0.0, vec![1.0], vec![0.0, 1.0], PotentialProfile::Explicit);
        assert!(zero_mean.is_err());
        let hole = PotentialSpec::new(0.0, vec![1.0, 0.0], vec![1.0, 1.0, 1.0], PotentialProfile::Explicit);
        assert!(hole.is_err());
        assert!(PotentialSpec::unchecked(0.0, vec![1.0], vec![0.0, 1.0], PotentialProfile::Explicit).is_ok());
    }

    #[test]
    fn explicit_extends_with_zeros() {
        let p = PotentialSpec::new(0.0, vec![1.0, 2.0], vec![3.0, 4.0, 5.0], PotentialProfile::Explicit).unwrap();
        assert_eq!(p.amplitude_at(Parity::Even, 2), 5.0);
        assert_eq!(p.amplitude_at(Parity::Even, 3), 0.0);
        let q = p.resized(1).unwrap();
        assert_eq!(q.odd_amplitudes, vec![1.0]);
        assert_eq!(q.even_amplitudes, vec![3.0, 4.0]);
    }
}
