use std::path::{Path, PathBuf};

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::config::{read_spectral, InitialKind, ScenarioConfig, SimulationKind};
use crate::diagnostics::{
    aggregate_smoothing, check_denominator_bound, denominator_bound_region, inverse_identity_residual,
    operator_equality_residual, q_family, quadratic_closeness, riesz_frame_bounds, smoothing_sums, tb_eq_b_residual,
    ClosenessReport, ResidualReport, SmoothingReport,
};
use crate::error::{Error, Result};
use crate::gains::{GainProfile, PotentialSpec, TransformPair};
use crate::moments::{plan_null_control_with, verify_plan, MomentControlPlan, MomentOptions};
use crate::sim::{decay_constant, simulate_burgers_closed_loop, simulate_heat_closed_loop, SimConfig, SimTrajectory};
use crate::spectral::{sobolev_norm, Parity, SobolevIndex, SpectralFunction};

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Which parts of the pipeline to execute. Gains and the transform always run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stages {
    pub diagnostics: bool,
    pub simulation: SimulationKind,
    pub moments: bool,
}

impl Stages {
    /// Everything the config asks for.
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Stages {
            diagnostics: !cfg.diagnostics.enabled.is_empty(),
            simulation: cfg.simulation.kind,
            moments: cfg.moments.enabled,
        }
    }

    pub fn gains_only() -> Self {
        Stages {
            diagnostics: false,
            simulation: SimulationKind::None,
            moments: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSummary {
    pub max_residual: f64,
    pub odd_cond_estimate: f64,
    pub even_cond_estimate: f64,
    pub k0_even: f64,
    pub odd_gain_range: [f64; 2],
    pub even_gain_range: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSummary {
    pub cond_l2: f64,
    pub odd_cond_l2: f64,
    pub even_cond_l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticEntry {
    pub name: String,
    pub parity: Option<Parity>,
    pub parameter: Option<f64>,
    pub value: f64,
    pub verdict: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub kind: SimulationKind,
    pub scheme: String,
    pub dt: f64,
    pub t_final: f64,
    pub initial_norm: f64,
    pub final_norm: f64,
    pub fit_window: [f64; 2],
    pub fitted_rate: Option<f64>,
    pub transformed_rate: Option<f64>,
    pub decay_constant: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsSummary {
    pub horizon: f64,
    pub modes: usize,
    pub moment_residual: f64,
    pub gram_cond: f64,
    pub terminal_residual: Option<f64>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub schema_version: u32,
    pub seed: u64,
    pub lambda: f64,
    pub m: f64,
    pub n_max: usize,
    pub gains: GainSummary,
    pub transform: TransformSummary,
    pub diagnostics: Vec<DiagnosticEntry>,
    pub simulation: Option<SimulationSummary>,
    pub moments: Option<MomentsSummary>,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DenominatorDiagnostic {
    pub global_min: f64,
    /// Minimum over `p < n`, `n > lambda`.
    pub region_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieszDiagnostic {
    pub parity: Parity,
    pub s: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Contents of `diagnostics.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsDocument {
    pub denominator: Option<DenominatorDiagnostic>,
    pub closeness: Vec<ClosenessReport>,
    pub smoothing: Vec<SmoothingReport>,
    pub aggregate: Vec<(f64, f64)>,
    pub residuals: Vec<ResidualReport>,
    pub riesz: Vec<RieszDiagnostic>,
    pub conditioning: Option<TransformSummary>,
}

#[derive(Serialize)]
struct GainsDocument<'a> {
    potentials: &'a PotentialSpec,
    gains: &'a GainProfile,
}

/// Everything a run produced, in memory.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub summary: ScenarioSummary,
    pub potentials: PotentialSpec,
    pub gains: GainProfile,
    pub transform: TransformPair,
    pub diagnostics: Option<DiagnosticsDocument>,
    pub trajectory: Option<SimTrajectory>,
    pub plan: Option<MomentControlPlan>,
}

/// Run every stage the config enables and write the artifacts to its output directory.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    run_stages(cfg, Stages::from_config(cfg))
}

pub fn run_stages(cfg: &ScenarioConfig, stages: Stages) -> Result<ScenarioOutcome> {
    cfg.validate().map_err(|e| e.context("scenario"))?;
    let out = cfg.output_dir.as_path();
    std::fs::create_dir_all(out)?;
    let mut artifacts = Vec::new();

    let (potentials, gains, transform) = (|| {
        let potentials = cfg.potentials()?;
        let gains = GainProfile::synthesize(cfg.lambda, &potentials)?;
        let transform = TransformPair::assemble(&gains, &potentials)?;
        Ok((potentials, gains, transform))
    })()
    .map_err(|e: Error| e.context("gains"))?;
    info!("gains synthesized at N = {}", cfg.n_max);
    write_json(out, "gains.json", &GainsDocument { potentials: &potentials, gains: &gains }, &mut artifacts)?;
    write_json(out, "transform.json", &transform, &mut artifacts)?;

    let diagnostics = if stages.diagnostics {
        let doc = run_diagnostics(cfg, &potentials, &gains, &transform).map_err(|e| e.context("diagnostics"))?;
        write_json(out, "diagnostics.json", &doc, &mut artifacts)?;
        Some(doc)
    } else {
        None
    };

    let trajectory = match stages.simulation {
        SimulationKind::None => None,
        kind => {
            let traj = run_simulation(cfg, kind, &potentials, &gains, &transform)
                .map_err(|e| e.context("sim"))?;
            write_text(out, "trajectory.csv", &traj.to_csv(), &mut artifacts)?;
            Some(traj)
        }
    };

    let plan = if stages.moments {
        let plan = run_moments(cfg, &potentials).map_err(|e| e.context("moments"))?;
        write_text(out, "moments.csv", &plan.to_csv(), &mut artifacts)?;
        Some(plan)
    } else {
        None
    };

    artifacts.push("summary.json".to_string());
    let summary = ScenarioSummary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        seed: cfg.seed,
        lambda: cfg.lambda,
        m: cfg.m,
        n_max: cfg.n_max,
        gains: gain_summary(&gains),
        transform: transform_summary(&transform),
        diagnostics: diagnostics.as_ref().map(flatten_diagnostics).unwrap_or_default(),
        simulation: trajectory.as_ref().map(|t| simulation_summary(cfg, stages.simulation, t)),
        moments: plan.as_ref().map(|p| MomentsSummary {
            horizon: p.horizon,
            modes: p.target_modes,
            moment_residual: p.moment_residual,
            gram_cond: p.gram_cond,
            terminal_residual: p.terminal_residual,
        }),
        artifacts,
    };
    let mut unused = Vec::new();
    write_json(out, "summary.json", &summary, &mut unused)?;
    Ok(ScenarioOutcome {
        summary,
        potentials,
        gains,
        transform,
        diagnostics,
        trajectory,
        plan,
    })
}

fn write_text(dir: &Path, name: &str, text: &str, artifacts: &mut Vec<String>) -> Result<()> {
    std::fs::write(dir.join(name), text)?;
    artifacts.push(name.to_string());
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T, artifacts: &mut Vec<String>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text, artifacts)
}

fn range(v: &[f64]) -> [f64; 2] {
    v.iter()
        .fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], &x| [lo.min(x), hi.max(x)])
}

fn gain_summary(g: &GainProfile) -> GainSummary {
    let cond = |p: Parity| {
        g.stats
            .iter()
            .find(|s| s.parity == p)
            .map_or(f64::NAN, |s| s.cond_estimate)
    };
    GainSummary {
        max_residual: g.max_residual(),
        odd_cond_estimate: cond(Parity::Odd),
        even_cond_estimate: cond(Parity::Even),
        k0_even: g.even_gains[0],
        odd_gain_range: range(&g.odd_gains),
        even_gain_range: range(&g.even_gains),
    }
}

fn transform_summary(t: &TransformPair) -> TransformSummary {
    TransformSummary {
        cond_l2: t.cond_l2(),
        odd_cond_l2: t.odd.cond_l2,
        even_cond_l2: t.even.cond_l2,
    }
}

fn run_diagnostics(
    cfg: &ScenarioConfig,
    potentials: &PotentialSpec,
    gains: &GainProfile,
    transform: &TransformPair,
) -> Result<DiagnosticsDocument> {
    let d = &cfg.diagnostics;
    let lambda = cfg.lambda;
    let mut doc = DiagnosticsDocument::default();
    if d.is_enabled("denominator") {
        doc.denominator = Some(DenominatorDiagnostic {
            global_min: check_denominator_bound(lambda, cfg.n_max)?,
            region_min: denominator_bound_region(lambda, cfg.n_max, lambda)?,
        });
    }
    if d.is_enabled("closeness") {
        for &s in &d.closeness_s {
            for parity in Parity::BOTH {
                doc.closeness.push(quadratic_closeness(lambda, potentials, s, parity)?);
            }
        }
    }
    if d.is_enabled("smoothing") {
        for &r in &d.smoothing_r {
            for parity in Parity::BOTH {
                doc.smoothing.push(smoothing_sums(lambda, potentials, r, parity)?);
            }
        }
    }
    if d.is_enabled("aggregate") && potentials.m == 0.0 {
        for &r in &d.smoothing_r {
            doc.aggregate.push((r, aggregate_smoothing(lambda, potentials, r)?));
        }
    }
    if d.is_enabled("tb_eq_b") {
        for &s in &d.tb_eq_b_s {
            doc.residuals.push(tb_eq_b_residual(transform, gains, potentials, s)?);
        }
    }
    if d.is_enabled("operator_equality") {
        doc.residuals
            .push(operator_equality_residual(transform, gains, potentials, d.operator_r)?);
    }
    if d.is_enabled("inverse_identity") {
        doc.residuals.push(inverse_identity_residual(transform));
    }
    if d.is_enabled("riesz") {
        for parity in Parity::BOTH {
            let (lower, upper) = riesz_frame_bounds(&q_family(lambda, potentials, 0.0, parity)?, potentials.m)?;
            doc.riesz.push(RieszDiagnostic {
                parity,
                s: 0.0,
                lower,
                upper,
            });
        }
    }
    if d.is_enabled("conditioning") {
        doc.conditioning = Some(transform_summary(transform));
    }
    Ok(doc)
}

fn flatten_diagnostics(doc: &DiagnosticsDocument) -> Vec<DiagnosticEntry> {
    let mut out = Vec::new();
    if let Some(den) = &doc.denominator {
        out.push(entry("denominator_global", None, None, den.global_min, Some(den.global_min > 0.0)));
        out.push(entry("denominator_region", None, None, den.region_min, Some(den.region_min >= 0.5)));
    }
    for c in &doc.closeness {
        out.push(entry(&c.kind, Some(c.parity), Some(c.s), c.cauchy_ratio, Some(c.verdict)));
    }
    for s in &doc.smoothing {
        for c in [&s.plain, &s.weighted] {
            out.push(entry(&c.kind, Some(c.parity), Some(c.s), c.cauchy_ratio, Some(c.verdict)));
        }
    }
    for (r, v) in &doc.aggregate {
        out.push(entry("aggregate_smoothing", Some(Parity::Odd), Some(*r), *v, None));
    }
    for r in &doc.residuals {
        let name = serde_json::to_value(r.kind)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        let value = if r.kind == crate::diagnostics::ResidualKind::TbEqB {
            r.total
        } else {
            r.interior_max
        };
        out.push(entry(&name, None, Some(r.norm_index), value, r.verdict));
    }
    for r in &doc.riesz {
        out.push(entry("riesz_lower", Some(r.parity), Some(r.s), r.lower, Some(r.lower > 0.0)));
    }
    if let Some(c) = &doc.conditioning {
        out.push(entry("cond_l2", None, None, c.cond_l2, Some(c.cond_l2.is_finite())));
    }
    out
}

fn entry(name: &str, parity: Option<Parity>, parameter: Option<f64>, value: f64, verdict: Option<bool>) -> DiagnosticEntry {
    DiagnosticEntry {
        name: name.to_string(),
        parity,
        parameter,
        value,
        verdict,
    }
}

/// Seeded random state with coefficients `N(0, 1) / (1 + n)`, odd modes first.
pub fn random_state(n_max: usize, seed: u64) -> SpectralFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z / (1.0 + n as f64)
    };
    let odd = (1..=n_max).map(&mut draw).collect();
    let even = (0..=n_max).map(&mut draw).collect();
    SpectralFunction::new(odd, even).expect("finite samples")
}

pub fn initial_state(cfg: &ScenarioConfig) -> Result<SpectralFunction> {
    let s = &cfg.simulation;
    let mut y0 = match s.initial {
        InitialKind::Random => random_state(cfg.n_max, cfg.seed),
        InitialKind::Mode => {
            let parity = Parity::try_from(s.initial_parity).map_err(Error::Config)?;
            SpectralFunction::basis(cfg.n_max, parity, s.initial_mode)?
        }
        InitialKind::File => {
            let path: &PathBuf = s
                .initial_file
                .as_ref()
                .ok_or_else(|| Error::Config("simulation.initial_file is not set".into()))?;
            read_spectral(path)?.resized(cfg.n_max)
        }
    };
    if let Some(target) = s.initial_norm {
        let norm = sobolev_norm(&y0, SobolevIndex::L2);
        if norm > 0.0 {
            y0.scale(target / norm);
        }
    }
    Ok(y0)
}

fn sim_config(cfg: &ScenarioConfig, y0: SpectralFunction) -> SimConfig {
    let s = &cfg.simulation;
    let mut sc = SimConfig::new(s.dt, s.t_final, y0)
        .with_scheme(&s.scheme)
        .with_record_every(s.record_every)
        .with_norm_indices(&s.norm_indices);
    sc.fit_window = s.fit_window.map(|[a, b]| (a, b));
    sc.smallness = s.smallness;
    sc
}

fn run_simulation(
    cfg: &ScenarioConfig,
    kind: SimulationKind,
    potentials: &PotentialSpec,
    gains: &GainProfile,
    transform: &TransformPair,
) -> Result<SimTrajectory> {
    let sc = sim_config(cfg, initial_state(cfg)?);
    match kind {
        SimulationKind::Heat => simulate_heat_closed_loop(&sc, gains, potentials, Some(transform)),
        SimulationKind::Burgers => simulate_burgers_closed_loop(&sc, gains, potentials, Some(transform)),
        SimulationKind::None => Err(Error::InvalidInput("no simulation requested".into())),
    }
}

fn simulation_summary(cfg: &ScenarioConfig, kind: SimulationKind, t: &SimTrajectory) -> SimulationSummary {
    let norm = |y: &SpectralFunction| sobolev_norm(y, SobolevIndex::L2);
    SimulationSummary {
        kind,
        scheme: t.scheme.clone(),
        dt: t.dt,
        t_final: cfg.simulation.t_final,
        initial_norm: norm(&t.states[0]),
        final_norm: norm(t.final_state()),
        fit_window: [t.fit_window.0, t.fit_window.1],
        fitted_rate: t.fitted_rate,
        transformed_rate: t.transformed_rate,
        decay_constant: decay_constant(t, cfg.lambda),
        warnings: t.warnings.clone(),
    }
}

fn run_moments(cfg: &ScenarioConfig, potentials: &PotentialSpec) -> Result<MomentControlPlan> {
    let m = &cfg.moments;
    let opts = MomentOptions {
        grid_size: m.grid_size,
        regularization: m.regularization,
        mode_cap: m.mode_cap,
    };
    let y0 = initial_state(cfg)?;
    let mut plan = plan_null_control_with(&y0, potentials, m.horizon, m.modes, &opts)?;
    verify_plan(&mut plan, &y0, potentials)?;
    Ok(plan)
}
