//! `axicyl`: runs the solver and the verification experiments, writing CSV
//! tables and a `manifest.json` into the output directory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical halt, 4 I/O
//! failure, 1 anything else.

mod commands;
mod error;
mod manifest;
mod settings;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::CliError;
use manifest::RunManifest;
use settings::Settings;

#[derive(Parser, Debug)]
#[command(name = "axicyl", version, about = "Axisymmetric swirling flow outside a cylinder")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `section.key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "AXICYL_OUT", default_value = "axicyl-out")]
    out: PathBuf,

    /// Overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Time-integrate one configuration and record diagnostics.
    Run,
    /// Manufactured-solution convergence over a refinement ladder.
    Mms,
    /// Decay-exponent fits of the linear semigroups and the commutation check.
    Semigroup,
    /// Picard iterates of the reduced system against the direct solver.
    Picard,
    /// One run per inner radius eps.
    SweepEps,
    /// Inequality checks over random samples.
    Inequalities,
    /// Print the version, CSV layouts and the effective configuration.
    Info,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Mms => "mms",
            Command::Semigroup => "semigroup",
            Command::Picard => "picard",
            Command::SweepEps => "sweep-eps",
            Command::Inequalities => "inequalities",
            Command::Info => "info",
        }
    }
}

fn load(cli: &Cli) -> Result<Settings, CliError> {
    let mut s = match &cli.config {
        Some(p) => Settings::from_file(p)?,
        None => Settings::default(),
    };
    if let Some(seed) = cli.seed {
        s.set("seed", &seed.to_string())?;
    }
    Ok(s)
}

fn dispatch(cmd: Command, s: &Settings, out: &Path, m: &mut RunManifest) -> Result<(), CliError> {
    match cmd {
        Command::Run => commands::run(s, out, m),
        Command::Mms => commands::mms(s, out, m),
        Command::Semigroup => commands::semigroup(s, out, m),
        Command::Picard => commands::picard(s, out, m),
        Command::SweepEps => commands::sweep_eps(s, out, m),
        Command::Inequalities => commands::inequalities(s, out, m),
        Command::Info => unreachable!("info writes no files"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("axicyl: cannot size thread pool: {e}");
        }
    }
    let settings = load(&cli);
    if cli.command == Command::Info {
        return match settings {
            Ok(s) => {
                // A closed pipe (`axicyl info | head`) is not an error.
                let _ = commands::info(&s);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("axicyl: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        };
    }

    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("axicyl: cannot create {}: {e}", cli.out.display());
        return ExitCode::from(4);
    }
    let (seed, pairs) = match &settings {
        Ok(s) => (s.solver.seed, s.pairs()),
        Err(_) => (
            cli.seed.unwrap_or(0),
            cli.config.as_deref().map(settings::raw_pairs).unwrap_or_default(),
        ),
    };
    let mut manifest = RunManifest::new(cli.command.name(), seed, pairs);
    let result = settings.and_then(|s| dispatch(cli.command, &s, &cli.out, &mut manifest));
    let code = match &result {
        Ok(()) => {
            manifest.status = "completed".into();
            0
        }
        Err(e) => {
            eprintln!("axicyl: {e}");
            manifest.status = e.status().into();
            manifest.message = Some(e.to_string());
            e.exit_code()
        }
    };
    if let Err(e) = manifest.write(&cli.out) {
        eprintln!("axicyl: cannot write manifest: {e}");
        return ExitCode::from(4);
    }
    ExitCode::from(code as u8)
}
