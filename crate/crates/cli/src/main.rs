//! `kolmo`: Diophantine certificates, measure sweeps, operator bound checks,
//! matrix diagonalization and KAM normal forms from a JSON config.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, EXIT_VALIDATION};
use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "kolmo", version, about)]
struct Cli {
    /// JSON config; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides `out` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the effective config as JSON and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Best Diophantine constant of `alpha` on a finite box.
    Diophantine,
    /// Monte Carlo measure of non-Diophantine vectors against the bound.
    Measure,
    /// Empirical check of a derivation's Cauchy constant.
    Certify,
    /// Kolmogorov diagonalization of a matrix with simple spectrum.
    Diagonalize,
    /// Invariant-torus normal form.
    Kam,
    /// Normal form at a singular point.
    KamSingular,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Diophantine => "diophantine",
            Command::Measure => "measure",
            Command::Certify => "certify",
            Command::Diagonalize => "diagonalize",
            Command::Kam => "kam",
            Command::KamSingular => "kam-singular",
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::validation(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::validation(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<i32, Failure> {
    let cfg = load(cli)?;
    if cli.print_config {
        let text = serde_json::to_string_pretty(&cfg).expect("config serializes");
        // A closed pipe (e.g. `| head`) is not an error here.
        let _ = writeln!(std::io::stdout(), "{text}");
        return Ok(0);
    }
    let Some(cmd) = cli.command else {
        return Err(Failure::validation("no subcommand given (see --help)"));
    };
    cfg.validate(cmd.name()).map_err(Failure::validation)?;
    let out = match cmd {
        Command::Diophantine => commands::diophantine(&cfg),
        Command::Measure => commands::measure(&cfg),
        Command::Certify => commands::certify(&cfg),
        Command::Diagonalize => commands::diagonalize(&cfg),
        Command::Kam => commands::kam(&cfg),
        Command::KamSingular => commands::kam_singular(&cfg),
    };
    if let Err(f) = &out {
        commands::write_failure_report(&cfg, f);
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(c) => c,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_VALIDATION as u8))
}
