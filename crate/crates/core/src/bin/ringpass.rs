use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use ringpass::error::Error;
use ringpass::harness::{exit_code, read_config_file, run_scenario, summary_line, Scenario, ScenarioConfig};

/// Transport and superposition schemes on a flux-threaded three-trap ring.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    scenario: Command,

    /// `key = value` file; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for the CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Propagation step.
    #[arg(long, global = true)]
    dt: Option<f64>,

    /// CI-scale continuum grid.
    #[arg(long, global = true)]
    coarse: bool,

    /// Any other parameter, e.g. `--set T=48`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Counter-diabatic transport in the three-level model.
    #[command(name = "transport-3l")]
    Transport3l,
    /// Equal-weight superposition in the three-level model.
    #[command(name = "superposition-3l")]
    Superposition3l,
    /// Final P3 over a grid of total times and fluxes.
    PhaseScan,
    /// Final populations against the flux at fixed T.
    FluxReadout,
    /// Shortest T reaching the target fidelity under an amplitude cap.
    MinTime,
    /// Mapped transport on the continuum ring.
    TransportContinuum,
    /// Mapped superposition on the continuum ring.
    SuperpositionContinuum,
    /// Continuum transport with the flux reversed.
    InvertedFlux,
}

impl Command {
    fn scenario(self) -> Scenario {
        match self {
            Command::Transport3l => Scenario::Transport3l,
            Command::Superposition3l => Scenario::Superposition3l,
            Command::PhaseScan => Scenario::PhaseScan,
            Command::FluxReadout => Scenario::FluxReadout,
            Command::MinTime => Scenario::MinTime,
            Command::TransportContinuum => Scenario::TransportContinuum,
            Command::SuperpositionContinuum => Scenario::SuperpositionContinuum,
            Command::InvertedFlux => Scenario::InvertedFlux,
        }
    }
}

fn config_from(cli: &Cli) -> Result<ScenarioConfig, Error> {
    let mut overrides = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => Vec::new(),
    };
    for item in &cli.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{item}'")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(out) = &cli.out {
        overrides.push(("out".into(), out.display().to_string()));
    }
    if let Some(dt) = cli.dt {
        overrides.push(("dt".into(), dt.to_string()));
    }
    if cli.coarse {
        overrides.push(("coarse".into(), "true".into()));
    }
    ScenarioConfig::resolve(cli.scenario.scenario(), &overrides)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = config_from(&cli).and_then(|c| run_scenario(&c));
    match result {
        Ok(report) => {
            println!("{}", summary_line(report.scenario, report.value, start.elapsed().as_secs_f64()));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
