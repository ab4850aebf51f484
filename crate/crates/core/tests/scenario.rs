use std::path::Path;

use backstep_core::scenario::{
    load_config, parse_config, run_scenario, run_stages, InitialKind, ScenarioConfig, SimulationKind, Stages,
};
use backstep_core::spectral::{Parity, SpectralFunction};
use serde_json::Value;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");
const VALUE_TOL: f64 = 1e-9;

fn small_config(out: &Path) -> ScenarioConfig {
    let mut cfg = parse_config("n_max = 8\n[simulation]\ndt = 1e-4\nt_final = 0.2\nrecord_every = 200\n").unwrap();
    cfg.output_dir = out.to_path_buf();
    cfg
}

fn assert_close(expected: &Value, actual: &Value, path: &str) {
    match (expected, actual) {
        (Value::Number(e), Value::Number(a)) => {
            let (e, a) = (e.as_f64().unwrap(), a.as_f64().unwrap());
            assert!((e - a).abs() <= VALUE_TOL * (1.0 + e.abs()), "{path}: {e} vs {a}");
        }
        (Value::Array(e), Value::Array(a)) => {
            assert_eq!(e.len(), a.len(), "{path}: length");
            for (i, (x, y)) in e.iter().zip(a).enumerate() {
                assert_close(x, y, &format!("{path}[{i}]"));
            }
        }
        (Value::Object(e), Value::Object(a)) => {
            let ek: Vec<_> = e.keys().collect();
            let ak: Vec<_> = a.keys().collect();
            assert_eq!(ek, ak, "{path}: keys");
            for (k, v) in e {
                assert_close(v, &a[k], &format!("{path}.{k}"));
            }
        }
        (e, a) => assert_eq!(e, a, "{path}"),
    }
}

#[test]
fn golden_summary() {
    let mut cfg = load_config(Path::new(DATA).join("golden.toml")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    cfg.output_dir = dir.path().to_path_buf();
    run_scenario(&cfg).unwrap();
    let expected: Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(DATA).join("golden_summary.json")).unwrap()).unwrap();
    let actual: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_close(&expected, &actual, "summary");
}

#[test]
fn diagnostics_only_writes_no_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let stages = Stages {
        diagnostics: true,
        ..Stages::gains_only()
    };
    let outcome = run_stages(&cfg, stages).unwrap();
    assert!(outcome.trajectory.is_none() && outcome.plan.is_none());
    assert!(dir.path().join("diagnostics.json").is_file());
    assert!(!dir.path().join("trajectory.csv").exists());
    assert!(!dir.path().join("moments.csv").exists());
    assert_eq!(
        outcome.summary.artifacts,
        ["gains.json", "transform.json", "diagnostics.json", "summary.json"]
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_scenario(&small_config(a.path())).unwrap();
    run_scenario(&small_config(b.path())).unwrap();
    for name in ["summary.json", "gains.json", "transform.json", "trajectory.csv", "moments.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn seed_changes_random_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    let first = run_scenario(&cfg).unwrap().summary.simulation.unwrap().initial_norm;
    cfg.seed = 1;
    let second = run_scenario(&cfg).unwrap().summary.simulation.unwrap().initial_norm;
    assert_ne!(first, second);
}

#[test]
fn file_references_resolve_against_config_directory() {
    let dir = tempfile::tempdir().unwrap();
    let y0 = SpectralFunction::basis(8, Parity::Even, 2).unwrap().scaled(0.3);
    std::fs::write(dir.path().join("y0.json"), serde_json::to_string(&y0).unwrap()).unwrap();
    let amps = SpectralFunction::new(vec![1.0, 0.5, 0.25, 0.2, 0.1, 0.1, 0.1, 0.1], vec![2.0; 9]).unwrap();
    std::fs::write(dir.path().join("amps.json"), serde_json::to_string(&amps).unwrap()).unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "n_max = 8\npotential_mode = \"explicit\"\namplitudes_file = \"amps.json\"\noutput_dir = \"res\"\n\
         [simulation]\ninitial = \"file\"\ninitial_file = \"y0.json\"\ndt = 1e-4\nt_final = 0.1\n\
         [moments]\nenabled = false\n[diagnostics]\nenabled = []\n",
    )
    .unwrap();
    let cfg = load_config(dir.path().join("run.toml")).unwrap();
    assert_eq!(cfg.simulation.initial, InitialKind::File);
    let outcome = run_scenario(&cfg).unwrap();
    assert_eq!(outcome.potentials.amplitudes(Parity::Odd)[1], 0.5);
    assert!((outcome.summary.simulation.unwrap().initial_norm - 0.3).abs() < 1e-15);
    assert!(dir.path().join("res/trajectory.csv").is_file());
    assert!(!dir.path().join("res/diagnostics.json").exists());
}

#[test]
fn errors_name_their_module() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.lambda = 8.0;
    let err = run_scenario(&cfg).unwrap_err();
    assert_eq!(err.module(), Some("scenario"));
    assert!(err.is_config_error());

    let mut cfg = small_config(dir.path());
    cfg.simulation.kind = SimulationKind::Heat;
    cfg.simulation.dt = 0.2;
    cfg.simulation.t_final = 20.0;
    cfg.n_max = 48;
    let err = run_scenario(&cfg).unwrap_err();
    assert_eq!(err.module(), Some("sim"));
    assert_eq!(err.kind(), "instability");
    assert!(!err.is_config_error());
}

#[test]
fn unknown_keys_are_rejected() {
    let err = parse_config("[simulation]\nstep = 0.1\n").unwrap_err();
    assert!(err.to_string().contains("step"));
    let err = parse_config("[diagnostics]\nenabled = [\"spectrum\"]\n").unwrap().validate().unwrap_err();
    assert_eq!(err.kind(), "unknown_name");
}
