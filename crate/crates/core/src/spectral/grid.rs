use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::SpectralFunction;
use crate::error::{Error, Result};

/// Smallest grid on which `n_max` modes are sampled without ambiguity.
fn min_grid(n_max: usize) -> usize {
    2 * n_max + 2
}

/// Grid size used for evaluation and dealiased products: quadratic products of
/// modes up to `n_max` alias only above `n_max` once the grid exceeds `3 n_max`.
pub fn default_grid_size(n_max: usize) -> usize {
    3 * n_max + 2
}

/// Cached forward/inverse FFT plans between a truncation order and a physical grid
/// `x_j = 2 pi j / n_grid`.
#[derive(Clone)]
pub struct GridTransform {
    n_max: usize,
    n_grid: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GridTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridTransform")
            .field("n_max", &self.n_max)
            .field("n_grid", &self.n_grid)
            .finish()
    }
}

impl GridTransform {
    pub fn new(n_max: usize, n_grid: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidInput("truncation order must be positive".into()));
        }
        let required = min_grid(n_max);
        if n_grid < required {
            return Err(Error::GridTooSmall {
                n_grid,
                n_max,
                required,
            });
        }
        let mut planner = FftPlanner::new();
        Ok(GridTransform {
            n_max,
            n_grid,
            forward: planner.plan_fft_forward(n_grid),
            inverse: planner.plan_fft_inverse(n_grid),
        })
    }

    pub fn with_default_grid(n_max: usize) -> Result<Self> {
        Self::new(n_max, default_grid_size(n_max))
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    /// Sample `f` on the grid. Modes above this transform's order are ignored.
    pub fn evaluate(&self, f: &SpectralFunction) -> Vec<f64> {
        let m = self.n_grid;
        let inv_sqrt_pi = 1.0 / PI.sqrt();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        buf[0] = Complex64::new(f.even()[0] / (2.0 * PI).sqrt(), 0.0);
        for n in 1..=self.n_max.min(f.n_max()) {
            let c = Complex64::new(f.even()[n], -f.odd()[n - 1]) * (0.5 * inv_sqrt_pi);
            buf[n] = c;
            buf[m - n] = c.conj();
        }
        self.inverse.process(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Discrete Fourier analysis of grid samples, truncated to this transform's order.
    pub fn project(&self, samples: &[f64]) -> Result<SpectralFunction> {
        if samples.len() != self.n_grid {
            return Err(Error::ShapeMismatch {
                expected: format!("{} samples", self.n_grid),
                found: format!("{}", samples.len()),
            });
        }
        let m = self.n_grid as f64;
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 2.0 * PI.sqrt() / m;
        let mut odd = Vec::with_capacity(self.n_max);
        let mut even = Vec::with_capacity(self.n_max + 1);
        even.push((2.0 * PI).sqrt() * buf[0].re / m);
        for z in &buf[1..=self.n_max] {
            even.push(scale * z.re);
            odd.push(-scale * z.im);
        }
        SpectralFunction::new(odd, even)
    }

    /// Product `f * g` computed on the grid and truncated back to `n_max` modes.
    ///
    /// Exact (no aliasing) when `n_grid > 3 n_max`.
    pub fn product(&self, f: &SpectralFunction, g: &SpectralFunction) -> Result<SpectralFunction> {
        let fx = self.evaluate(f);
        let gx = self.evaluate(g);
        let prod: Vec<f64> = fx.iter().zip(&gx).map(|(a, b)| a * b).collect();
        self.project(&prod)
    }

    /// Dealiased Burgers flux derivative `d/dx (y^2 / 2)`, truncated to `n_max`.
    pub fn burgers_flux(&self, y: &SpectralFunction) -> Result<SpectralFunction> {
        let yx = self.evaluate(y);
        let half_sq: Vec<f64> = yx.iter().map(|v| 0.5 * v * v).collect();
        Ok(self.project(&half_sq)?.derivative())
    }
}

/// Sample `f` at `x_j = 2 pi j / n_grid`.
pub fn evaluate_on_grid(f: &SpectralFunction, n_grid: usize) -> Result<Vec<f64>> {
    Ok(GridTransform::new(f.n_max(), n_grid)?.evaluate(f))
}

/// Coefficients of modes up to `n_max` from uniform samples on `[0, 2 pi)`.
pub fn project_to_spectrum(samples: &[f64], n_max: usize) -> Result<SpectralFunction> {
    GridTransform::new(n_max, samples.len())?.project(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Parity;
    use proptest::prelude::*;

    fn grid_points(n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |j| 2.0 * PI * j as f64 / n as f64)
    }

    /// Direct summation of the eigen-expansion; independent of the FFT path.
    fn evaluate_direct(f: &SpectralFunction, x: f64) -> f64 {
        let mut v = f.even()[0] / (2.0 * PI).sqrt();
        for n in 1..=f.n_max() {
            let nx = n as f64 * x;
            v += (f.odd()[n - 1] * nx.sin() + f.even()[n] * nx.cos()) / PI.sqrt();
        }
        v
    }

    #[test]
    fn zero_function_samples_to_zero() {
        let v = evaluate_on_grid(&SpectralFunction::zeros(5), 16).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn constant_mode_samples_to_one() {
        let mut f = SpectralFunction::zeros(3);
        f.set(Parity::Even, 0, (2.0 * PI).sqrt()).unwrap();
        for v in evaluate_on_grid(&f, 16).unwrap() {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn unit_sine_matches_direct_evaluation() {
        let f = SpectralFunction::basis(4, Parity::Odd, 1).unwrap();
        let v = evaluate_on_grid(&f, 64).unwrap();
        for (x, got) in grid_points(64).zip(v) {
            assert!((got - x.sin() / PI.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn projects_sampled_sine() {
        let samples: Vec<f64> = grid_points(64).map(|x| (2.0 * x).sin() / PI.sqrt()).collect();
        let f = project_to_spectrum(&samples, 10).unwrap();
        for (p, n, c) in f.iter() {
            let expected = if p == Parity::Odd && n == 2 { 1.0 } else { 0.0 };
            assert!((c - expected).abs() < 1e-12, "{p} {n}: {c}");
        }
    }

    #[test]
    fn projects_constant() {
        let f = project_to_spectrum(&[1.0; 20], 4).unwrap();
        assert!((f.even()[0] - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_grids() {
        let f = SpectralFunction::zeros(8);
        assert!(matches!(evaluate_on_grid(&f, 17), Err(Error::GridTooSmall { required: 18, .. })));
        assert!(evaluate_on_grid(&f, 18).is_ok());
        assert!(project_to_spectrum(&[0.0; 10], 5).is_err());
    }

    #[test]
    fn dealiased_product_is_exact() {
        // sin(3x) * cos(3x) = sin(6x)/2 has mode 6 > n_max = 4: must vanish after truncation
        let n_max = 4;
        let grid = GridTransform::with_default_grid(n_max).unwrap();
        let s3 = SpectralFunction::basis(n_max, Parity::Odd, 3).unwrap();
        let c3 = SpectralFunction::basis(n_max, Parity::Even, 3).unwrap();
        let p = grid.product(&s3, &c3).unwrap();
        assert!(p.iter().all(|(_, _, c)| c.abs() < 1e-14));

        // cos(2x) cos(4x)/pi = (cos(2x) + cos(6x)) / (2 pi) -> only cos(2x) survives
        let c2 = SpectralFunction::basis(n_max, Parity::Even, 2).unwrap();
        let c4 = SpectralFunction::basis(n_max, Parity::Even, 4).unwrap();
        let p = grid.product(&c2, &c4).unwrap();
        let expected = 1.0 / (2.0 * PI.sqrt());
        assert!((p.get(Parity::Even, 2) - expected).abs() < 1e-14);
        assert!(p.get(Parity::Even, 4).abs() < 1e-14);
    }

    fn band_limited(n_max: usize) -> impl Strategy<Value = SpectralFunction> {
        (
            prop::collection::vec(-1.0f64..1.0, n_max),
            prop::collection::vec(-1.0f64..1.0, n_max + 1),
        )
            .prop_map(|(o, e)| SpectralFunction::new(o, e).unwrap())
    }

    proptest! {
        #[test]
        fn round_trip_on_default_grid(f in (1usize..24).prop_flat_map(band_limited)) {
            let n = default_grid_size(f.n_max());
            let back = project_to_spectrum(&evaluate_on_grid(&f, n).unwrap(), f.n_max()).unwrap();
            for ((_, _, a), (_, _, b)) in f.iter().zip(back.iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn fft_matches_direct_sum(f in (1usize..12).prop_flat_map(band_limited)) {
            let n = 3 * f.n_max();
            let v = evaluate_on_grid(&f, n.max(2 * f.n_max() + 2)).unwrap();
            for (x, got) in grid_points(v.len()).zip(v) {
                prop_assert!((got - evaluate_direct(&f, x)).abs() < 1e-12);
            }
        }

        #[test]
        fn samples_round_trip(f in (1usize..16).prop_flat_map(band_limited)) {
            let n = default_grid_size(f.n_max());
            let samples = evaluate_on_grid(&f, n).unwrap();
            let again = evaluate_on_grid(&project_to_spectrum(&samples, f.n_max()).unwrap(), n).unwrap();
            for (a, b) in samples.iter().zip(again) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
