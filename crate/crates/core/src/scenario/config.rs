use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gains::{ensure_admissible, PotentialProfile, PotentialSpec};
use crate::moments::{DEFAULT_GRID_SIZE, DEFAULT_MODE_CAP};
use crate::sim::{DEFAULT_SCHEME, DEFAULT_SMALLNESS};
use crate::spectral::SpectralFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialMode {
    ConstantAmplitude,
    PowerLaw,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationKind {
    None,
    Heat,
    Burgers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// Seeded Gaussian coefficients `N(0, 1) / (1 + n)`.
    Random,
    /// Single eigenmode given by `initial_parity` and `initial_mode`.
    Mode,
    /// JSON `SpectralFunction` at `initial_file`.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub kind: SimulationKind,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: String,
    pub record_every: usize,
    pub norm_indices: Vec<f64>,
    pub fit_window: Option<[f64; 2]>,
    pub smallness: f64,
    pub initial: InitialKind,
    /// Rescale the initial state to this `L^2` norm.
    pub initial_norm: Option<f64>,
    pub initial_parity: u8,
    pub initial_mode: usize,
    pub initial_file: Option<PathBuf>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            kind: SimulationKind::Heat,
            dt: 1e-4,
            t_final: 2.0,
            scheme: DEFAULT_SCHEME.to_string(),
            record_every: 100,
            norm_indices: vec![0.0],
            fit_window: None,
            smallness: DEFAULT_SMALLNESS,
            initial: InitialKind::Random,
            initial_norm: None,
            initial_parity: 1,
            initial_mode: 1,
            initial_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSection {
    pub enabled: Vec<String>,
    pub closeness_s: Vec<f64>,
    pub smoothing_r: Vec<f64>,
    pub tb_eq_b_s: Vec<f64>,
    pub operator_r: f64,
}

pub const DIAGNOSTIC_NAMES: [&str; 9] = [
    "denominator",
    "closeness",
    "smoothing",
    "aggregate",
    "tb_eq_b",
    "operator_equality",
    "inverse_identity",
    "riesz",
    "conditioning",
];

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            enabled: DIAGNOSTIC_NAMES.iter().map(|s| s.to_string()).collect(),
            closeness_s: vec![-1.0, 0.0, 1.0],
            smoothing_r: vec![0.0],
            tb_eq_b_s: vec![-1.0, 0.0],
            operator_r: 0.0,
        }
    }
}

impl DiagnosticsSection {
    pub fn is_enabled(&self, name: &str) -> bool {
        self.enabled.iter().any(|e| e == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsSection {
    pub enabled: bool,
    pub horizon: f64,
    pub modes: usize,
    pub regularization: f64,
    pub grid_size: usize,
    pub mode_cap: usize,
}

impl Default for MomentsSection {
    fn default() -> Self {
        MomentsSection {
            enabled: true,
            horizon: 1.0,
            modes: 4,
            regularization: 0.0,
            grid_size: DEFAULT_GRID_SIZE,
            mode_cap: DEFAULT_MODE_CAP,
        }
    }
}

/// Scenario description; see the repository README for the file grammar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub lambda: f64,
    pub m: f64,
    pub n_max: usize,
    pub potential_mode: PotentialMode,
    pub amplitude: f64,
    pub odd_amplitudes: Option<Vec<f64>>,
    pub even_amplitudes: Option<Vec<f64>>,
    /// JSON `SpectralFunction` holding explicit amplitudes.
    pub amplitudes_file: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub simulation: SimulationSection,
    pub diagnostics: DiagnosticsSection,
    pub moments: MomentsSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 0,
            lambda: 6.0,
            m: 0.0,
            n_max: 64,
            potential_mode: PotentialMode::ConstantAmplitude,
            amplitude: 1.0,
            odd_amplitudes: None,
            even_amplitudes: None,
            amplitudes_file: None,
            output_dir: PathBuf::from("out"),
            simulation: SimulationSection::default(),
            diagnostics: DiagnosticsSection::default(),
            moments: MomentsSection::default(),
        }
    }
}

/// Read, parse and validate a scenario file. Relative paths inside it are resolved
/// against the file's directory.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &mut Option<PathBuf>| {
        if let Some(p) = p.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    };
    resolve(&mut cfg.amplitudes_file);
    resolve(&mut cfg.simulation.initial_file);
    if cfg.output_dir.is_relative() {
        cfg.output_dir = base.join(&cfg.output_dir);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parse without touching the file system.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
}

impl ScenarioConfig {
    /// Semantic checks; file references must exist.
    pub fn validate(&self) -> Result<()> {
        ensure_admissible(self.lambda)?;
        if self.n_max == 0 {
            return Err(Error::Config("n_max must be positive".into()));
        }
        if !self.m.is_finite() {
            return Err(Error::Config("m must be finite".into()));
        }
        if self.potential_mode == PotentialMode::ConstantAmplitude && self.m != 0.0 {
            return Err(Error::Config(
                "potential_mode = constant_amplitude requires m = 0; use power_law".into(),
            ));
        }
        if self.potential_mode == PotentialMode::Explicit
            && self.amplitudes_file.is_none()
            && (self.odd_amplitudes.is_none() || self.even_amplitudes.is_none())
        {
            return Err(Error::Config(
                "potential_mode = explicit needs odd_amplitudes and even_amplitudes, or amplitudes_file".into(),
            ));
        }
        for (key, file) in [
            ("amplitudes_file", &self.amplitudes_file),
            ("simulation.initial_file", &self.simulation.initial_file),
        ] {
            if let Some(f) = file {
                if !f.is_file() {
                    return Err(Error::Config(format!("{key} {} does not exist", f.display())));
                }
            }
        }
        if self.simulation.initial == InitialKind::File && self.simulation.initial_file.is_none() {
            return Err(Error::Config("simulation.initial = file needs simulation.initial_file".into()));
        }
        if self.simulation.kind != SimulationKind::None {
            let s = &self.simulation;
            if !(s.dt > 0.0) || !(s.t_final >= s.dt) {
                return Err(Error::Config(format!(
                    "simulation needs 0 < dt <= t_final (dt = {}, t_final = {})",
                    s.dt, s.t_final
                )));
            }
            if s.record_every == 0 {
                return Err(Error::Config("simulation.record_every must be positive".into()));
            }
            crate::sim::SchemeRegistry::default().get(&s.scheme)?;
        }
        for name in &self.diagnostics.enabled {
            if !DIAGNOSTIC_NAMES.contains(&name.as_str()) {
                return Err(Error::UnknownName {
                    kind: "diagnostic",
                    name: name.clone(),
                    available: DIAGNOSTIC_NAMES.join(", "),
                });
            }
        }
        Ok(())
    }

    pub fn potentials(&self) -> Result<PotentialSpec> {
        match self.potential_mode {
            PotentialMode::ConstantAmplitude => PotentialSpec::constant(self.n_max, self.amplitude),
            PotentialMode::PowerLaw => PotentialSpec::power_law(self.n_max, self.m, self.amplitude),
            PotentialMode::Explicit => {
                let f = match &self.amplitudes_file {
                    Some(path) => read_spectral(path)?,
                    None => SpectralFunction::new(
                        self.odd_amplitudes.clone().unwrap_or_default(),
                        self.even_amplitudes.clone().unwrap_or_default(),
                    )?,
                };
                PotentialSpec::new(self.m, f.odd().to_vec(), f.even().to_vec(), PotentialProfile::Explicit)?
                    .resized(self.n_max)
            }
        }
    }
}

pub(crate) fn read_spectral(path: &Path) -> Result<SpectralFunction> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg = parse_config("lambda = 6.0\nn_max = 16\n").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.n_max, 16);
        assert_eq!(cfg.simulation.kind, SimulationKind::Heat);
    }

    #[test]
    fn parse_error_has_line() {
        let err = parse_config("lambda = 6.0\nn_max = [\n").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
        let err = parse_config("lamda = 6.0\n").unwrap_err();
        assert!(err.to_string().contains("lamda"), "{err}");
    }

    #[test]
    fn resonant_lambda_suggests_six() {
        let cfg = parse_config("lambda = 3.0\n").unwrap();
        match cfg.validate() {
            Err(Error::InadmissibleLambda { suggestions, .. }) => assert_eq!(suggestions, vec![6.0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn explicit_needs_amplitudes() {
        let cfg = parse_config("potential_mode = \"explicit\"\n").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = parse_config(
            "potential_mode = \"explicit\"\nn_max = 2\nodd_amplitudes = [1.0, 1.0]\neven_amplitudes = [1.0, 1.0, 1.0]\n",
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.potentials().unwrap().n_max(), 2);
    }
}
