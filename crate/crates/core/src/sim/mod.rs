//! Time integration in coefficient space: heat and viscous Burgers closed loops,
//! open-loop runs, and the probes built on the resulting trajectories.

mod probes;
mod scheme;
mod signal;

use log::warn;
use serde::{Deserialize, Serialize};

pub use probes::{
    decay_constant, fit_decay_rate, fit_log_slope, mass_probe, noncontrollability_invariant, target_residuals,
};
pub use scheme::{IntegratingFactorEuler, IntegratingFactorRk2, Propagator, SchemeRegistry, Source, TimeStepper};
pub use signal::{ControlSignal, SampledSignal};

use crate::error::{Error, Result};
use crate::gains::{GainProfile, PotentialSpec, TransformPair};
use crate::spectral::{sobolev_norm, GridTransform, SobolevIndex, SpectralFunction};

/// Growth factor over the initial norm treated as blow-up.
pub const INSTABILITY_FACTOR: f64 = 1e6;
/// Default L2 smallness of Burgers initial data.
pub const DEFAULT_SMALLNESS: f64 = 1e-2;
pub const DEFAULT_SCHEME: &str = "integrating_factor_rk2";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_max: usize,
    pub dt: f64,
    pub t_final: f64,
    pub initial_state: SpectralFunction,
    pub scheme: String,
    pub record_every: usize,
    /// Sobolev indices whose norms are recorded; `0` is always included.
    pub norm_indices: Vec<f64>,
    /// Rate-fit window; defaults to `[0.2 t_final, t_final]`.
    pub fit_window: Option<(f64, f64)>,
    /// Burgers smallness threshold on `||y_0||_{L^2}`.
    pub smallness: f64,
}

impl SimConfig {
    pub fn new(dt: f64, t_final: f64, initial_state: SpectralFunction) -> Self {
        SimConfig {
            n_max: initial_state.n_max(),
            dt,
            t_final,
            initial_state,
            scheme: DEFAULT_SCHEME.to_string(),
            record_every: 1,
            norm_indices: vec![0.0],
            fit_window: None,
            smallness: DEFAULT_SMALLNESS,
        }
    }

    pub fn with_scheme(mut self, scheme: &str) -> Self {
        self.scheme = scheme.to_string();
        self
    }

    pub fn with_record_every(mut self, stride: usize) -> Self {
        self.record_every = stride;
        self
    }

    pub fn with_norm_indices(mut self, indices: &[f64]) -> Self {
        self.norm_indices = indices.to_vec();
        self
    }

    pub fn fit_window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or((0.2 * self.t_final, self.t_final))
    }

    fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::OutOfRange {
                what: "dt",
                value: self.dt,
                range: "(0, inf)",
            });
        }
        if !(self.t_final >= self.dt) {
            return Err(Error::InvalidInput(format!(
                "t_final = {} must be at least dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidInput("record_every must be positive".into()));
        }
        if self.initial_state.n_max() != self.n_max {
            return Err(Error::ShapeMismatch {
                expected: format!("initial state at truncation order {}", self.n_max),
                found: format!("{}", self.initial_state.n_max()),
            });
        }
        Ok((self.t_final / self.dt).round() as usize)
    }

    fn indices(&self) -> Vec<f64> {
        let mut idx = vec![0.0];
        idx.extend(self.norm_indices.iter().copied().filter(|&s| s != 0.0));
        idx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrajectory {
    pub scheme: String,
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<SpectralFunction>,
    pub norm_indices: Vec<f64>,
    /// `norm_history[i][j]` is the `H^{norm_indices[j]}` norm of `states[i]`.
    pub norm_history: Vec<Vec<f64>>,
    /// Control values `(u_1, u_2)` at each snapshot.
    pub controls: Vec<(f64, f64)>,
    /// `||T_12 y(t)||_{L^2}` per snapshot when a transform was supplied.
    pub transformed_norms: Option<Vec<f64>>,
    pub fit_window: (f64, f64),
    /// Fitted decay rate of `||y||_{L^2}`; `None` when the norm vanishes on the window.
    pub fitted_rate: Option<f64>,
    pub transformed_rate: Option<f64>,
    pub warnings: Vec<String>,
}

impl SimTrajectory {
    pub fn final_state(&self) -> &SpectralFunction {
        self.states.last().expect("trajectories hold the initial state")
    }

    /// Norm history for one recorded index.
    pub fn norms(&self, index: f64) -> Option<Vec<f64>> {
        let j = self.norm_indices.iter().position(|&s| s == index)?;
        Some(self.norm_history.iter().map(|row| row[j]).collect())
    }

    /// Columns `t, norm_L2, norm_H{r}..., u1, u2, mass[, z_norm_L2]`.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["t".to_string()];
        for &s in &self.norm_indices {
            header.push(if s == 0.0 { "norm_L2".into() } else { format!("norm_H{s}") });
        }
        header.extend(["u1", "u2", "mass"].map(String::from));
        if self.transformed_norms.is_some() {
            header.push("z_norm_L2".into());
        }
        let mut out = header.join(",");
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![*t];
            row.extend(&self.norm_history[i]);
            row.extend([self.controls[i].0, self.controls[i].1, self.states[i].mass()]);
            if let Some(z) = &self.transformed_norms {
                row.push(z[i]);
            }
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// `dt <= 0.1 / (|lambda| + sqrt(sum K_n^2 w_n))` with `w_n = 1/n`, `w_0 = 1`.
pub fn stability_limit(gains: &GainProfile) -> f64 {
    let est: f64 = crate::spectral::Parity::BOTH
        .iter()
        .flat_map(|&p| {
            gains
                .gains(p)
                .iter()
                .enumerate()
                .map(move |(i, k)| k * k / p.mode(i).max(1) as f64)
        })
        .sum();
    0.1 / (gains.lambda.abs() + est.sqrt())
}

struct Recorder<'a> {
    indices: Vec<f64>,
    transform: Option<&'a TransformPair>,
    traj: SimTrajectory,
}

impl<'a> Recorder<'a> {
    fn new(cfg: &SimConfig, transform: Option<&'a TransformPair>, warnings: Vec<String>) -> Self {
        let indices = cfg.indices();
        Recorder {
            traj: SimTrajectory {
                scheme: cfg.scheme.clone(),
                dt: cfg.dt,
                times: Vec::new(),
                states: Vec::new(),
                norm_indices: indices.clone(),
                norm_history: Vec::new(),
                controls: Vec::new(),
                transformed_norms: transform.map(|_| Vec::new()),
                fit_window: cfg.fit_window(),
                fitted_rate: None,
                transformed_rate: None,
                warnings,
            },
            indices,
            transform,
        }
    }

    fn record(&mut self, t: f64, y: &SpectralFunction, u: (f64, f64)) -> Result<()> {
        self.traj.times.push(t);
        self.traj
            .norm_history
            .push(self.indices.iter().map(|&s| sobolev_norm(y, SobolevIndex::from(s))).collect());
        self.traj.controls.push(u);
        if let (Some(tp), Some(z)) = (self.transform, self.traj.transformed_norms.as_mut()) {
            z.push(sobolev_norm(&tp.apply(y)?, SobolevIndex::L2));
        }
        self.traj.states.push(y.clone());
        Ok(())
    }

    fn finish(mut self) -> SimTrajectory {
        let (t0, t1) = self.traj.fit_window;
        let l2: Vec<f64> = self.traj.norm_history.iter().map(|r| r[0]).collect();
        self.traj.fitted_rate = fit_log_slope(&self.traj.times, &l2, t0, t1).ok();
        if let Some(z) = &self.traj.transformed_norms {
            self.traj.transformed_rate = fit_log_slope(&self.traj.times, z, t0, t1).ok();
        }
        self.traj
    }
}

fn integrate(
    cfg: &SimConfig,
    source: &mut Source<'_>,
    controls: &dyn Fn(f64, &SpectralFunction) -> (f64, f64),
    transform: Option<&TransformPair>,
    warnings: Vec<String>,
) -> Result<SimTrajectory> {
    let steps = cfg.steps()?;
    let scheme = SchemeRegistry::default().get(&cfg.scheme)?;
    let prop = Propagator::new(cfg.n_max, cfg.dt);
    let mut rec = Recorder::new(cfg, transform, warnings);
    let mut y = cfg.initial_state.clone();
    let y0_norm = sobolev_norm(&y, SobolevIndex::L2);
    let limit = INSTABILITY_FACTOR * if y0_norm > 0.0 { y0_norm } else { 1.0 };
    rec.record(0.0, &y, controls(0.0, &y))?;
    for k in 1..=steps {
        let t_prev = (k - 1) as f64 * cfg.dt;
        y = scheme.step(t_prev, &y, &prop, source)?;
        let t = k as f64 * cfg.dt;
        let norm = sobolev_norm(&y, SobolevIndex::L2);
        if !norm.is_finite() || norm > limit {
            return Err(Error::Instability { time: t, norm, limit });
        }
        if k % cfg.record_every == 0 || k == steps {
            rec.record(t, &y, controls(t, &y))?;
        }
    }
    Ok(rec.finish())
}

fn check_closed_loop(cfg: &SimConfig, gains: &GainProfile, potentials: &PotentialSpec) -> Result<Vec<String>> {
    if gains.n_max != cfg.n_max || potentials.n_max() != cfg.n_max {
        return Err(Error::ShapeMismatch {
            expected: format!("gains and potentials at truncation order {}", cfg.n_max),
            found: format!("gains {}, potentials {}", gains.n_max, potentials.n_max()),
        });
    }
    let mut warnings = Vec::new();
    let limit = stability_limit(gains);
    if cfg.dt > limit {
        let msg = format!("dt = {} exceeds the feedback stability guard {:.3e}", cfg.dt, limit);
        warn!("{msg}");
        warnings.push(msg);
    }
    Ok(warnings)
}

/// `y' = Delta y + K_1(y) phi_1 + K_2(y) phi_2`.
pub fn simulate_heat_closed_loop(
    cfg: &SimConfig,
    gains: &GainProfile,
    potentials: &PotentialSpec,
    transform: Option<&TransformPair>,
) -> Result<SimTrajectory> {
    let warnings = check_closed_loop(cfg, gains, potentials)?;
    let phi = potentials.to_spectral();
    let feedback = |_: f64, y: &SpectralFunction| gains.feedback(y);
    let mut source = |_: f64, y: &SpectralFunction| Ok(feedback_source(gains, &phi, y));
    integrate(cfg, &mut source, &feedback, transform, warnings)
}

fn feedback_source(gains: &GainProfile, phi: &SpectralFunction, y: &SpectralFunction) -> SpectralFunction {
    let (u1, u2) = gains.feedback(y);
    let mut f = SpectralFunction::zeros(y.n_max());
    f.coeffs_mut(crate::spectral::Parity::Odd)
        .iter_mut()
        .zip(phi.odd())
        .for_each(|(c, a)| *c = u1 * a);
    f.coeffs_mut(crate::spectral::Parity::Even)
        .iter_mut()
        .zip(phi.even())
        .for_each(|(c, a)| *c = u2 * a);
    f
}

/// `y' = Delta y - (y^2 / 2)_x + K_1(y) phi_1 + K_2(y) phi_2`, nonlinearity dealiased on a `3N + 2` grid.
pub fn simulate_burgers_closed_loop(
    cfg: &SimConfig,
    gains: &GainProfile,
    potentials: &PotentialSpec,
    transform: Option<&TransformPair>,
) -> Result<SimTrajectory> {
    if potentials.m != 0.0 {
        return Err(Error::InvalidInput(format!(
            "Burgers feedback requires m = 0 potentials, got m = {}",
            potentials.m
        )));
    }
    let mut warnings = check_closed_loop(cfg, gains, potentials)?;
    let y0 = sobolev_norm(&cfg.initial_state, SobolevIndex::L2);
    if y0 > cfg.smallness {
        let msg = format!("||y0||_L2 = {y0:.3e} exceeds the smallness threshold {:.3e}", cfg.smallness);
        warn!("{msg}");
        warnings.push(msg);
    }
    let grid = GridTransform::with_default_grid(cfg.n_max)?;
    let phi = potentials.to_spectral();
    let feedback = |_: f64, y: &SpectralFunction| gains.feedback(y);
    let mut source = |_: f64, y: &SpectralFunction| {
        let mut f = feedback_source(gains, &phi, y);
        f.axpy(-1.0, &grid.burgers_flux(y)?);
        Ok(f)
    };
    integrate(cfg, &mut source, &feedback, transform, warnings)
}

/// `y' = Delta y + sum_k v_k(t) phi_k`; recorded controls are the first two inputs.
pub fn simulate_open_loop(cfg: &SimConfig, inputs: &[(&SpectralFunction, &dyn ControlSignal)]) -> Result<SimTrajectory> {
    for (phi, _) in inputs {
        if phi.n_max() != cfg.n_max {
            return Err(Error::ShapeMismatch {
                expected: format!("control profile at truncation order {}", cfg.n_max),
                found: format!("{}", phi.n_max()),
            });
        }
    }
    let controls = |t: f64, _: &SpectralFunction| {
        let v = |i: usize| inputs.get(i).map_or(0.0, |(_, s)| s.value(t));
        (v(0), v(1))
    };
    let mut source = |t: f64, _: &SpectralFunction| {
        let mut f = SpectralFunction::zeros(cfg.n_max);
        for (phi, s) in inputs {
            f.axpy(s.value(t), phi);
        }
        Ok(f)
    };
    integrate(cfg, &mut source, &controls, None, Vec::new())
}

/// Single-control system `u' = Delta u + v(t) phi`.
pub fn simulate_heat_open_loop(cfg: &SimConfig, phi: &SpectralFunction, control: &dyn ControlSignal) -> Result<SimTrajectory> {
    simulate_open_loop(cfg, &[(phi, control)])
}
