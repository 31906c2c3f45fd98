//! The `dharper` command line: one subcommand per experiment, flat
//! key-value configuration, CSV output with JSON metadata sidecars.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::repro::Figure;
use commands::{Ctx, Produced};
use config::Config;
use error::{CliError, Result};
use output::RunInfo;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "dharper", version, about = "Driven Harper model experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat TOML file of key = value settings.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; defaults to $DHARPER_OUT, then `out`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for random ensembles; overrides the `seed` key.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Suppress progress messages.
    #[arg(long, global = true)]
    quiet: bool,
    /// Override one config key; repeatable. Flags win over the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stroboscopic map of classical orbits.
    ClassicalMap,
    /// Ensemble dispersion and ballistic rate.
    ClassicalSpread,
    /// Transporting-island classification of the elementary cell.
    IslandScan,
    /// Wave-packet propagation.
    QuantumEvolve,
    /// One-period evolution operator, written as a binary file.
    FloquetBuild,
    /// Participation ratio against the drive frequency.
    FloquetScan,
    /// Participation ratio against the Peierls phase.
    AlphaScan,
    /// Spectra of the static chain at rational flux.
    Butterfly,
    /// Size scaling across the static metal-insulator transition.
    AaTransition,
    /// Canned parameter sets of the four figures.
    Repro {
        #[arg(value_enum)]
        figure: Figure,
    },
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::ClassicalMap => "classical-map".into(),
            Command::ClassicalSpread => "classical-spread".into(),
            Command::IslandScan => "island-scan".into(),
            Command::QuantumEvolve => "quantum-evolve".into(),
            Command::FloquetBuild => "floquet-build".into(),
            Command::FloquetScan => "floquet-scan".into(),
            Command::AlphaScan => "alpha-scan".into(),
            Command::Butterfly => "butterfly".into(),
            Command::AaTransition => "aa-transition".into(),
            Command::Repro { figure } => format!("repro {figure:?}").to_lowercase(),
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code: 0 on success, 2 on configuration errors, 1 on
/// numerical or I/O failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(paths) => {
            if !cli.quiet {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
            0
        }
        Err(e) => {
            eprintln!("dharper: error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let cfg = Config::load(cli.config.as_deref(), &cli.set)?;
    let out = match (&cli.out, std::env::var_os("DHARPER_OUT")) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) if !p.is_empty() => PathBuf::from(p),
        _ => PathBuf::from("out"),
    };
    let seed = match (cli.seed, cfg.u64_opt("seed")?) {
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => DEFAULT_SEED,
    };
    if cli.threads == Some(0) {
        return Err(CliError::config("--threads", "must be >= 1"));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::config("--threads", e.to_string()))?;
    let ctx = Ctx {
        cfg: &cfg,
        seed,
        quiet: cli.quiet,
    };
    let produced: Produced = pool.install(|| match &cli.command {
        Command::ClassicalMap => commands::classical::map(&ctx),
        Command::ClassicalSpread => commands::classical::spread(&ctx),
        Command::IslandScan => commands::classical::islands(&ctx),
        Command::QuantumEvolve => commands::quantum::run(&ctx),
        Command::FloquetBuild => commands::floquet::build(&ctx),
        Command::FloquetScan => commands::floquet::omega_scan(&ctx),
        Command::AlphaScan => commands::floquet::flux_scan(&ctx),
        Command::Butterfly => commands::aa::run_butterfly(&ctx),
        Command::AaTransition => commands::aa::transition(&ctx),
        Command::Repro { figure } => commands::repro::run(&ctx, *figure),
    })?;
    let info = RunInfo {
        command: cli.command.name(),
        config: cfg.resolved(),
        derived: produced.derived,
        seed: produced.seed,
        dt: produced.dt,
        threads: pool.current_num_threads(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    output::commit(&out, &produced.artifacts, &info)
}
