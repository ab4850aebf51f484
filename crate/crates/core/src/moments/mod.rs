//! Open-loop null controls from the truncated moment problems.
//!
//! For each parity, `y_n(T) = e^{-n^2 T} y_n(0) + a_n int_0^T e^{-n^2 (T - s)} v(s) ds`, so
//! steering the targeted modes to zero fixes the moments of `v` against the exponential
//! family. The least-norm `v` in the trapezoid-weighted `L^2(0, T)` is `E^T c` with
//! `(E W E^T + eps I) c = targets`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gains::PotentialSpec;
use crate::linalg::{DenseLu, ILL_CONDITIONED};
use crate::sim::{simulate_open_loop, ControlSignal, SampledSignal, SimConfig};
use crate::spectral::{Parity, SpectralFunction};

pub const DEFAULT_GRID_SIZE: usize = 2048;
pub const DEFAULT_MODE_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentOptions {
    pub grid_size: usize,
    pub regularization: f64,
    pub mode_cap: usize,
}

impl Default for MomentOptions {
    fn default() -> Self {
        MomentOptions {
            grid_size: DEFAULT_GRID_SIZE,
            regularization: 0.0,
            mode_cap: DEFAULT_MODE_CAP,
        }
    }
}

/// Control sampled on `grid_size` uniform nodes over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSolution {
    pub horizon: f64,
    pub values: Vec<f64>,
    /// `max_n |int e^{-n^2 (T - s)} v(s) ds - target_n|` under the quadrature.
    pub moment_residual: f64,
    pub gram_cond: f64,
    /// Quadrature `L^2(0, T)` norm of `v`.
    pub norm: f64,
}

fn trapezoid_weights(grid_size: usize, horizon: f64) -> Vec<f64> {
    let h = horizon / (grid_size - 1) as f64;
    (0..grid_size)
        .map(|j| if j == 0 || j == grid_size - 1 { 0.5 * h } else { h })
        .collect()
}

/// Moments against `e^{-n^2 (T - s)}` for `n` in `modes`.
pub fn solve_moment_problem_for_modes(
    modes: &[usize],
    targets: &[f64],
    horizon: f64,
    grid_size: usize,
    regularization: f64,
) -> Result<MomentSolution> {
    if modes.len() != targets.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} targets", modes.len()),
            found: format!("{}", targets.len()),
        });
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::OutOfRange {
            what: "horizon",
            value: horizon,
            range: "(0, inf)",
        });
    }
    if grid_size < 2 {
        return Err(Error::InvalidInput("moment quadrature needs at least 2 nodes".into()));
    }
    if !(regularization >= 0.0) {
        return Err(Error::OutOfRange {
            what: "regularization",
            value: regularization,
            range: "[0, inf)",
        });
    }
    let h = horizon / (grid_size - 1) as f64;
    let w = trapezoid_weights(grid_size, horizon);
    let e = DMatrix::from_fn(modes.len(), grid_size, |i, j| {
        let n2 = (modes[i] * modes[i]) as f64;
        (-n2 * (horizon - j as f64 * h)).exp()
    });
    let ew = DMatrix::from_fn(modes.len(), grid_size, |i, j| e[(i, j)] * w[j]);
    let gram = &ew * e.transpose();
    let reg_gram = &gram + DMatrix::identity(modes.len(), modes.len()) * regularization;
    let lu = DenseLu::new(&reg_gram)?;
    let gram_cond = lu.cond1_estimate();
    if regularization == 0.0 && !(gram_cond <= ILL_CONDITIONED) {
        return Err(Error::IllConditioned {
            what: "moment Gram matrix (add regularization or target fewer modes)",
            cond: gram_cond,
            threshold: ILL_CONDITIONED,
        });
    }
    let b = DVector::from_column_slice(targets);
    let c = lu.solve(&b).ok_or(Error::IllConditioned {
        what: "moment Gram matrix",
        cond: f64::INFINITY,
        threshold: ILL_CONDITIONED,
    })?;
    let v = e.transpose() * c;
    let moment_residual = (&ew * &v - b).amax();
    let norm = v.iter().zip(&w).map(|(x, w)| w * x * x).sum::<f64>().sqrt();
    Ok(MomentSolution {
        horizon,
        values: v.iter().copied().collect(),
        moment_residual,
        gram_cond,
        norm,
    })
}

/// Moments for `n = 1..=M` where `M = targets.len()`.
pub fn solve_moment_problem(targets: &[f64], horizon: f64, grid_size: usize, regularization: f64) -> Result<MomentSolution> {
    let modes: Vec<usize> = (1..=targets.len()).collect();
    solve_moment_problem_for_modes(&modes, targets, horizon, grid_size, regularization)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentControlPlan {
    pub horizon: f64,
    /// Odd modes `1..=M` and even modes `0..=M` are steered to zero.
    pub target_modes: usize,
    pub v1_samples: Vec<f64>,
    pub v2_samples: Vec<f64>,
    pub moment_residual: f64,
    pub gram_cond: f64,
    /// Terminal norm of the targeted modes in the verification run; `None` before verification.
    pub terminal_residual: Option<f64>,
}

impl MomentControlPlan {
    pub fn signals(&self) -> Result<(SampledSignal, SampledSignal)> {
        Ok((
            SampledSignal::uniform(self.horizon, self.v1_samples.clone())?,
            SampledSignal::uniform(self.horizon, self.v2_samples.clone())?,
        ))
    }

    pub fn grid_step(&self) -> f64 {
        self.horizon / (self.v1_samples.len().max(2) - 1) as f64
    }

    /// CSV with columns `t,v1,v2`.
    pub fn to_csv(&self) -> String {
        let h = self.grid_step();
        let mut out = String::from("t,v1,v2\n");
        for (j, (a, b)) in self.v1_samples.iter().zip(&self.v2_samples).enumerate() {
            out.push_str(&format!("{:.16e},{a:.16e},{b:.16e}\n", j as f64 * h));
        }
        out
    }

    /// Replay a plan exported by [`MomentControlPlan::to_csv`].
    pub fn from_csv(text: &str, target_modes: usize) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("t,v1,v2") {
            return Err(Error::Config("plan CSV must start with the header t,v1,v2".into()));
        }
        let (mut t, mut v1, mut v2) = (Vec::new(), Vec::new(), Vec::new());
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cells: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("plan CSV line {}: {e}", i + 2)))?;
            if cells.len() != 3 {
                return Err(Error::Config(format!("plan CSV line {}: expected 3 columns", i + 2)));
            }
            t.push(cells[0]);
            v1.push(cells[1]);
            v2.push(cells[2]);
        }
        if t.len() < 2 {
            return Err(Error::Config("plan CSV needs at least two samples".into()));
        }
        let h = t[1] - t[0];
        if t.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0)) || t[0] != 0.0 {
            return Err(Error::Config("plan CSV times must be uniform and start at 0".into()));
        }
        Ok(MomentControlPlan {
            horizon: *t.last().unwrap(),
            target_modes,
            v1_samples: v1,
            v2_samples: v2,
            moment_residual: f64::NAN,
            gram_cond: f64::NAN,
            terminal_residual: None,
        })
    }
}

fn targeted_modes(parity: Parity, modes: usize) -> Vec<usize> {
    (parity.first_mode()..=modes).collect()
}

/// Null-control plan for the targeted modes with default options.
pub fn plan_null_control(
    y0: &SpectralFunction,
    potentials: &PotentialSpec,
    horizon: f64,
    modes: usize,
) -> Result<MomentControlPlan> {
    plan_null_control_with(y0, potentials, horizon, modes, &MomentOptions::default())
}

pub fn plan_null_control_with(
    y0: &SpectralFunction,
    potentials: &PotentialSpec,
    horizon: f64,
    modes: usize,
    opts: &MomentOptions,
) -> Result<MomentControlPlan> {
    if modes == 0 {
        return Err(Error::InvalidInput("at least one mode must be targeted".into()));
    }
    if modes > opts.mode_cap {
        return Err(Error::InvalidInput(format!(
            "{modes} targeted modes exceed the cap {}; raise mode_cap and add regularization",
            opts.mode_cap
        )));
    }
    if modes > y0.n_max() || modes > potentials.n_max() {
        return Err(Error::InvalidInput(format!(
            "{modes} targeted modes exceed the truncation order {}",
            y0.n_max().min(potentials.n_max())
        )));
    }
    let mut parts = Vec::new();
    for parity in Parity::BOTH {
        let ns = targeted_modes(parity, modes);
        let mut targets = Vec::with_capacity(ns.len());
        for &n in &ns {
            let a = potentials.amplitude_at(parity, n);
            if a == 0.0 {
                return Err(Error::ControllabilityObstruction { parity, mode: n });
            }
            targets.push(-y0.get(parity, n) * (-((n * n) as f64) * horizon).exp() / a);
        }
        parts.push(solve_moment_problem_for_modes(
            &ns,
            &targets,
            horizon,
            opts.grid_size,
            opts.regularization,
        )?);
    }
    let even = parts.pop().expect("two parities");
    let odd = parts.pop().expect("two parities");
    Ok(MomentControlPlan {
        horizon,
        target_modes: modes,
        moment_residual: odd.moment_residual.max(even.moment_residual),
        gram_cond: odd.gram_cond.max(even.gram_cond),
        v1_samples: odd.values,
        v2_samples: even.values,
        terminal_residual: None,
    })
}

/// Simulate the two-control open loop with step equal to the sample spacing and
/// return the `L^2` norm of the targeted modes at the horizon.
pub fn verify_plan(plan: &mut MomentControlPlan, y0: &SpectralFunction, potentials: &PotentialSpec) -> Result<f64> {
    let n_max = y0.n_max();
    let phi = potentials.to_spectral().resized(n_max);
    let phi1 = crate::spectral::parity_project(&phi, Parity::Odd);
    let phi2 = crate::spectral::parity_project(&phi, Parity::Even);
    let (v1, v2) = plan.signals()?;
    let mut cfg = SimConfig::new(plan.grid_step(), plan.horizon, y0.clone());
    cfg.record_every = usize::MAX;
    let inputs: [(&SpectralFunction, &dyn ControlSignal); 2] = [(&phi1, &v1), (&phi2, &v2)];
    let traj = simulate_open_loop(&cfg, &inputs)?;
    let y_t = traj.final_state();
    let residual = Parity::BOTH
        .iter()
        .flat_map(|&p| targeted_modes(p, plan.target_modes).into_iter().map(move |n| y_t.get(p, n)))
        .map(|c| c * c)
        .sum::<f64>()
        .sqrt();
    plan.terminal_residual = Some(residual);
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_targets_give_zero_control() {
        let sol = solve_moment_problem(&[0.0; 4], 1.0, 256, 0.0).unwrap();
        assert!(sol.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_moment_closed_form() {
        let sol = solve_moment_problem(&[1.0], 1.0, DEFAULT_GRID_SIZE, 0.0).unwrap();
        let denom = (1.0 - (-2.0f64).exp()) / 2.0;
        let h = 1.0 / (DEFAULT_GRID_SIZE - 1) as f64;
        for (j, v) in sol.values.iter().enumerate() {
            let s = j as f64 * h;
            let exact = (-(1.0 - s)).exp() / denom;
            assert!((v - exact).abs() < 1e-6 * exact.abs().max(1.0), "s={s}: {v} vs {exact}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let plan = MomentControlPlan {
            horizon: 1.0,
            target_modes: 1,
            v1_samples: vec![0.0, 1.0, 2.0],
            v2_samples: vec![3.0, 4.0, 5.0],
            moment_residual: 0.0,
            gram_cond: 1.0,
            terminal_residual: None,
        };
        let back = MomentControlPlan::from_csv(&plan.to_csv(), 1).unwrap();
        assert_eq!(back.v1_samples, plan.v1_samples);
        assert_eq!(back.v2_samples, plan.v2_samples);
        assert_eq!(back.horizon, 1.0);
        assert!(MomentControlPlan::from_csv("x,y\n", 1).is_err());
    }

    #[test]
    fn obstruction_names_mode() {
        let pot = PotentialSpec::unchecked(
            0.0,
            vec![1.0, 0.0, 1.0],
            vec![1.0; 4],
            crate::gains::PotentialProfile::Explicit,
        )
        .unwrap();
        let y0 = SpectralFunction::basis(3, Parity::Odd, 1).unwrap();
        assert!(matches!(
            plan_null_control(&y0, &pot, 1.0, 2),
            Err(Error::ControllabilityObstruction { parity: Parity::Odd, mode: 2 })
        ));
    }
}
