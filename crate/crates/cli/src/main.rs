use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orbitcov::validate::{summary_lines, DEFAULT_SEED};
use orbitcov::{
    cmd_coverage, cmd_geometry, cmd_sweep, exit, run_all, CliError, RunOptions, ScenarioConfig,
    ValidateOptions,
};

/// Coverage of LEO satellite constellations on circular orbits.
#[derive(Debug, Parser)]
#[command(name = "orbitcov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Visible arc length and visible time over a θ grid.
    Geometry(Common),
    /// Analytic and simulated coverage curves of one scenario.
    Coverage(Common),
    /// Coverage curves while one parameter takes each listed value.
    Sweep(Common),
    /// Run the acceptance suite and write validation.json.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario TOML file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides mc.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides mc.trials.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Scenario file whose mc.seed seeds the suite.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces every trial budget of the suite.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn run_scenario(
    args: &Common,
    f: fn(&ScenarioConfig, &RunOptions, &Path) -> Result<orbitcov::run::Written, CliError>,
) -> Result<(), CliError> {
    let Format::Csv = args.format;
    let config = ScenarioConfig::load(&args.config)?;
    let opts = RunOptions {
        seed: args.seed,
        trials: args.trials,
    };
    let written = f(&config, &opts, &args.out)?;
    for n in &written.notices {
        eprintln!("notice: {n}");
    }
    for p in &written.files {
        println!("{}", p.display());
    }
    Ok(())
}

fn validate(args: &ValidateArgs) -> Result<(), CliError> {
    let Format::Csv = args.format;
    let config_seed = match &args.config {
        Some(path) => ScenarioConfig::load(path)?.mc.map(|m| m.seed),
        None => None,
    };
    let opts = ValidateOptions {
        seed: args.seed.or(config_seed).unwrap_or(DEFAULT_SEED),
        trials: args.trials,
    };
    let report = run_all(&opts)?;
    std::fs::create_dir_all(&args.out)?;
    let path = args.out.join("validation.json");
    std::fs::write(&path, report.to_json())?;
    for line in summary_lines(&report) {
        println!("{line}");
    }
    println!("{}", path.display());
    match report.failures() {
        0 => Ok(()),
        n => Err(CliError::ValidationFailed(n)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Geometry(a) => run_scenario(a, cmd_geometry),
        Command::Coverage(a) => run_scenario(a, cmd_coverage),
        Command::Sweep(a) => run_scenario(a, cmd_sweep),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
