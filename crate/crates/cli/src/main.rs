use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kerrcat::{Engine, SweepAxis};
use kerrcat_cli::commands::{self, Outcome, Overrides};
use kerrcat_cli::scenario::ScenarioFile;
use kerrcat_cli::table::Format;
use kerrcat_cli::CliError;

#[derive(Parser, Debug)]
#[command(name = "kerrcat", version, about = "Kerr-cat force sensing: validation, sweeps and shot simulations")]
struct Cli {
    /// Scenario TOML file; the built-in default is used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    shots: Option<u64>,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
    /// analytic | brute-force
    #[arg(long, global = true)]
    engine: Option<Engine>,
    /// Replaces every validation tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare closed forms against the Fock-space pipelines.
    Validate,
    /// Run one Monte Carlo cell per value. Rates in Hz, temp in K.
    Sweep {
        #[arg(long)]
        axis: SweepAxis,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
    },
    /// One Monte Carlo run of the scenario.
    Shots,
    /// Reference device parameters and derived quantities.
    Params,
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let scenario = match &cli.config {
        Some(path) => ScenarioFile::load(path)?,
        None => ScenarioFile::default(),
    };
    let overrides = Overrides { seed: cli.seed, shots: cli.shots, engine: cli.engine, tolerance: cli.tolerance };
    if let Some(t) = overrides.tolerance {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::Usage("--tolerance must be finite and non-negative".into()));
        }
    }
    let outcome = match &cli.command {
        Command::Validate => commands::validate(&scenario, &overrides)?,
        Command::Sweep { axis, values } => commands::sweep_table(&scenario, *axis, values, &overrides)?,
        Command::Shots => commands::shots_table(&scenario, &overrides)?,
        Command::Params => commands::params_table()?,
    };
    let text = outcome.table.render(cli.format);
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    env_logger::Builder::new().filter_level(log::LevelFilter::Warn).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) if outcome.passed => ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("kerrcat: {}", CliError::ValidationFailed);
            ExitCode::from(CliError::ValidationFailed.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("kerrcat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
