//! Scenario files, the end-to-end pipeline, and its on-disk artifacts.

mod config;
mod run;

pub use config::{
    load_config, parse_config, DiagnosticsSection, InitialKind, MomentsSection, PotentialMode, ScenarioConfig,
    SimulationKind, SimulationSection, DIAGNOSTIC_NAMES,
};
pub use run::{
    initial_state, random_state, run_scenario, run_stages, DenominatorDiagnostic, DiagnosticEntry, DiagnosticsDocument,
    GainSummary, MomentsSummary, RieszDiagnostic, ScenarioOutcome, ScenarioSummary, SimulationSummary, Stages,
    TransformSummary, SUMMARY_SCHEMA_VERSION,
};
