use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar control signal `v(t)`.
pub trait ControlSignal {
    fn value(&self, t: f64) -> f64;
}

impl<F: Fn(f64) -> f64> ControlSignal for F {
    fn value(&self, t: f64) -> f64 {
        self(t)
    }
}

/// Samples on the uniform grid `t_j = start + j * step`, linearly interpolated
/// and held constant outside the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    pub start: f64,
    pub step: f64,
    pub samples: Vec<f64>,
}

impl SampledSignal {
    pub fn new(start: f64, step: f64, samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() || !(step > 0.0) {
            return Err(Error::InvalidInput(
                "sampled signal needs at least one sample and a positive step".into(),
            ));
        }
        Ok(SampledSignal { start, step, samples })
    }

    /// `n + 1` samples covering `[0, horizon]`.
    pub fn uniform(horizon: f64, samples: Vec<f64>) -> Result<Self> {
        let intervals = samples.len().saturating_sub(1).max(1);
        Self::new(0.0, horizon / intervals as f64, samples)
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.samples.len() - 1) as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|j| self.start + j as f64 * self.step)
    }
}

impl ControlSignal for SampledSignal {
    fn value(&self, t: f64) -> f64 {
        let last = self.samples.len() - 1;
        let x = (t - self.start) / self.step;
        if x <= 0.0 {
            return self.samples[0];
        }
        if x >= last as f64 {
            return self.samples[last];
        }
        let j = x.floor() as usize;
        let w = x - j as f64;
        (1.0 - w) * self.samples[j] + w * self.samples[(j + 1).min(last)]
    }
}
