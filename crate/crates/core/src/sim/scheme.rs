use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{Parity, SpectralFunction};

/// Explicit part of the right-hand side, `f(t, y)`.
pub type Source<'a> = dyn FnMut(f64, &SpectralFunction) -> Result<SpectralFunction> + 'a;

/// Cached `e^{h Delta}` for one step size.
#[derive(Debug, Clone)]
pub struct Propagator {
    h: f64,
    odd: Vec<f64>,
    even: Vec<f64>,
}

impl Propagator {
    pub fn new(n_max: usize, h: f64) -> Self {
        let factor = |n: usize| (-((n * n) as f64) * h).exp();
        Propagator {
            h,
            odd: Parity::Odd.modes(n_max).map(factor).collect(),
            even: Parity::Even.modes(n_max).map(factor).collect(),
        }
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn apply(&self, y: &SpectralFunction) -> SpectralFunction {
        let mut out = y.clone();
        self.apply_in_place(&mut out);
        out
    }

    pub fn apply_in_place(&self, y: &mut SpectralFunction) {
        for (p, factors) in [(Parity::Odd, &self.odd), (Parity::Even, &self.even)] {
            for (c, e) in y.coeffs_mut(p).iter_mut().zip(factors) {
                *c *= e;
            }
        }
    }
}

/// One step of `y' = Delta y + f(t, y)` with the heat part integrated exactly.
pub trait TimeStepper: Send + Sync {
    fn name(&self) -> &'static str;

    /// Global order of accuracy.
    fn order(&self) -> u32;

    fn step(&self, t: f64, y: &SpectralFunction, prop: &Propagator, source: &mut Source<'_>) -> Result<SpectralFunction>;
}

/// `y <- e^{h Delta}(y + h f(t, y))`.
pub struct IntegratingFactorEuler;

impl TimeStepper for IntegratingFactorEuler {
    fn name(&self) -> &'static str {
        "integrating_factor_euler"
    }

    fn order(&self) -> u32 {
        1
    }

    fn step(&self, t: f64, y: &SpectralFunction, prop: &Propagator, source: &mut Source<'_>) -> Result<SpectralFunction> {
        let mut next = y.clone();
        next.axpy(prop.step_size(), &source(t, y)?);
        prop.apply_in_place(&mut next);
        Ok(next)
    }
}

/// Heun's method in the integrating-factor variables.
pub struct IntegratingFactorRk2;

impl TimeStepper for IntegratingFactorRk2 {
    fn name(&self) -> &'static str {
        "integrating_factor_rk2"
    }

    fn order(&self) -> u32 {
        2
    }

    fn step(&self, t: f64, y: &SpectralFunction, prop: &Propagator, source: &mut Source<'_>) -> Result<SpectralFunction> {
        let h = prop.step_size();
        let k1 = source(t, y)?;
        let mut predictor = y.clone();
        predictor.axpy(h, &k1);
        prop.apply_in_place(&mut predictor);
        let k2 = source(t + h, &predictor)?;
        let mut next = y.clone();
        next.axpy(0.5 * h, &k1);
        prop.apply_in_place(&mut next);
        next.axpy(0.5 * h, &k2);
        Ok(next)
    }
}

/// Time steppers selectable by name.
#[derive(Clone)]
pub struct SchemeRegistry {
    schemes: BTreeMap<&'static str, Arc<dyn TimeStepper>>,
}

impl Default for SchemeRegistry {
    fn default() -> Self {
        let mut r = SchemeRegistry {
            schemes: BTreeMap::new(),
        };
        r.register(Arc::new(IntegratingFactorEuler));
        r.register(Arc::new(IntegratingFactorRk2));
        r
    }
}

impl SchemeRegistry {
    pub fn register(&mut self, scheme: Arc<dyn TimeStepper>) {
        self.schemes.insert(scheme.name(), scheme);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn TimeStepper>> {
        self.schemes.get(name).cloned().ok_or_else(|| Error::UnknownName {
            kind: "scheme",
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.schemes.keys().copied().collect()
    }
}
