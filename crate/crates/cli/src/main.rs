use std::path::PathBuf;
use std::process::ExitCode;

use backstep_core::scenario::{load_config, run_stages, ScenarioConfig, ScenarioOutcome, SimulationKind, Stages};
use backstep_core::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "backstep", version, about = "Spectral backstepping stabilization of the controlled heat equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize gains and the transform; writes gains.json and transform.json.
    Gains(Common),
    /// Gains plus the enabled diagnostics.
    Diagnose(Common),
    /// Closed-loop heat simulation.
    SimulateHeat(Common),
    /// Closed-loop viscous Burgers simulation.
    SimulateBurgers(Common),
    /// Open-loop null control by the moment method.
    Moments(Common),
    /// Every stage the config enables.
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(n) = self.n_max {
            cfg.n_max = n;
        }
        if let Some(lambda) = self.lambda {
            cfg.lambda = lambda;
        }
        Ok(cfg)
    }
}

fn execute(command: &Command) -> Result<ScenarioOutcome, Error> {
    let (common, which) = match command {
        Command::Gains(c) => (c, "gains"),
        Command::Diagnose(c) => (c, "diagnose"),
        Command::SimulateHeat(c) => (c, "simulate-heat"),
        Command::SimulateBurgers(c) => (c, "simulate-burgers"),
        Command::Moments(c) => (c, "moments"),
        Command::Report(c) => (c, "report"),
    };
    let mut cfg = common.load().map_err(|e| e.context("scenario"))?;
    let mut stages = Stages::gains_only();
    match which {
        "diagnose" => stages.diagnostics = true,
        "simulate-heat" | "simulate-burgers" => {
            let kind = if which == "simulate-heat" { SimulationKind::Heat } else { SimulationKind::Burgers };
            cfg.simulation.kind = kind;
            stages.simulation = kind;
        }
        "moments" => stages.moments = true,
        "report" => stages = Stages::from_config(&cfg),
        _ => {}
    }
    run_stages(&cfg, stages)
}

fn print_outcome(outcome: &ScenarioOutcome) {
    let s = &outcome.summary;
    println!("lambda = {}, N = {}, max gain residual = {:.3e}", s.lambda, s.n_max, s.gains.max_residual);
    println!("cond(T_12) = {:.6e}", s.transform.cond_l2);
    for d in &s.diagnostics {
        let verdict = match d.verdict {
            Some(true) => " pass",
            Some(false) => " FAIL",
            None => "",
        };
        let parity = d.parity.map_or(String::new(), |p| format!(" {p:?}"));
        let param = d.parameter.map_or(String::new(), |v| format!(" ({v})"));
        println!("  {:<30} {:>13.6e}{verdict}", format!("{}{parity}{param}", d.name), d.value);
    }
    if let Some(sim) = &s.simulation {
        println!(
            "simulation ({:?}, {}): ||y(T)|| = {:.6e}, fitted rate = {}",
            sim.kind,
            sim.scheme,
            sim.final_norm,
            sim.fitted_rate.map_or("n/a".to_string(), |r| format!("{r:.4}"))
        );
        for w in &sim.warnings {
            println!("  warning: {w}");
        }
    }
    if let Some(m) = &s.moments {
        println!("moments: residual = {:.3e}, gram cond = {:.3e}", m.moment_residual, m.gram_cond);
    }
    println!("artifacts: {}", s.artifacts.join(", "));
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(outcome) => {
            print_outcome(&outcome);
            ExitCode::SUCCESS
        }
        Err(err) => {
            let report = serde_json::json!({
                "error": err.kind(),
                "module": err.module(),
                "message": err.to_string(),
            });
            eprintln!("{report}");
            log::debug!("{err:?}");
            ExitCode::from(if err.is_config_error() { 2 } else { 3 })
        }
    }
}
