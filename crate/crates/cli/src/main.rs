mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use commands::Failure;
use output::{Manifest, Outputs};

#[derive(Parser)]
#[command(name = "isotropica", version, about = "Semiclassical isotropic-state and spectral experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, env = "ISOTROPICA_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    BuildState,
    Decompose,
    Wavefront,
    Widths,
    ValidatePhase,
    OscillatoryEval,
    Spectrum,
    TraceCheck,
    WeylCount,
    GammaDecay,
    Propagate,
    BsCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::BuildState => "build-state",
            Command::Decompose => "decompose",
            Command::Wavefront => "wavefront",
            Command::Widths => "widths",
            Command::ValidatePhase => "validate-phase",
            Command::OscillatoryEval => "oscillatory-eval",
            Command::Spectrum => "spectrum",
            Command::TraceCheck => "trace-check",
            Command::WeylCount => "weyl-count",
            Command::GammaDecay => "gamma-decay",
            Command::Propagate => "propagate",
            Command::BsCheck => "bs-check",
        }
    }
}

fn parse<T: DeserializeOwned>(value: &serde_json::Value) -> Result<T, Failure> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Failure::Schema(format!("at `{path}`: {}", e.into_inner()))
    })
}

fn config_seed(value: &serde_json::Value) -> Option<u64> {
    value.get("seed").and_then(|s| s.as_u64())
}

fn dispatch(cmd: Command, value: &serde_json::Value, seed: u64, out: &mut Outputs) -> Result<(), Failure> {
    match cmd {
        Command::BuildState => commands::build_state(parse(value)?, out),
        Command::Decompose => commands::decompose(parse(value)?, out),
        Command::Wavefront => commands::wavefront(parse(value)?, out),
        Command::Widths => commands::widths(parse(value)?, out),
        Command::ValidatePhase => commands::validate(parse(value)?, out),
        Command::OscillatoryEval => commands::oscillatory(parse(value)?, out),
        Command::Spectrum => commands::spectrum(parse(value)?, out),
        Command::TraceCheck => commands::trace_check(parse(value)?, out),
        Command::WeylCount => commands::weyl_count(parse(value)?, seed, out),
        Command::GammaDecay => commands::gamma(parse(value)?, out),
        Command::Propagate => commands::propagate(parse(value)?, out),
        Command::BsCheck => commands::bs_check(parse(value)?, out),
    }
}

fn read_config(path: Option<&Path>) -> Result<serde_json::Value, Failure> {
    let path = path.ok_or_else(|| Failure::Schema("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(Failure::Io)?;
    serde_json::from_str(&text).map_err(|e| Failure::Schema(format!("malformed JSON in {}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<usize, Failure> {
    let start = Instant::now();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Invalid("--threads must be positive".into()));
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let value = read_config(cli.config.as_deref())?;
    let seed = cli.seed.or_else(|| config_seed(&value)).unwrap_or(0);
    let mut out = Outputs::new(&cli.out)?;
    dispatch(cli.command, &value, seed, &mut out)?;
    let mut written = out.written.clone();
    written.push("manifest.json".into());
    let manifest = Manifest {
        command: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        seed,
        threads: rayon::current_num_threads(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs: written,
        config: value,
    };
    out.json("manifest.json", &manifest)?;
    Ok(out.written.len())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(n) => {
            if !cli.quiet {
                println!("{}: wrote {n} files to {}", cli.command.name(), cli.out.display());
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Schema(msg)) | Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Guard { guard, detail }) => {
            eprintln!("refused by guard {guard}: {detail}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("I/O error: {e}");
            ExitCode::from(1)
        }
    }
}
