//! `pairsim` command-line front end.

mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use commands::{DumpFormat, Overrides, SimulateArgs};
use output::{OutDir, RunManifest, MANIFEST};
use pairsim::{Error, HardwareKind, Metric};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(String),
    /// `validate-identities` found a failing identity.
    ChecksFailed,
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_constraint() => 3,
            CliError::Core(e) if e.is_numeric() => 4,
            CliError::Core(_) => 2,
            CliError::Io(_) | CliError::ChecksFailed => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "constraint",
            4 => "numeric",
            _ => "runtime",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Io(m) => m.clone(),
            CliError::ChecksFailed => "one or more identity checks failed".into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Parser)]
#[command(name = "pairsim", version, about = "Compile and verify pairing-Hamiltonian dynamics on qubit chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for sweeps (default: available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_metric)]
    metric: Option<Metric>,
    /// Overrides `hardware.kind`.
    #[arg(long, value_parser = parse_kind)]
    backend: Option<HardwareKind>,
    /// Overrides `trotter.m`.
    #[arg(long)]
    m: Option<usize>,
    /// Overrides `trotter.g`.
    #[arg(long)]
    g: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Compile the configured target into a schedule and gate counts.
    Compile(Common),
    /// Execute a schedule file on the configured chain.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        schedule: PathBuf,
        /// Initial spin label (e.g. `udd`) or `plus`; omit for the unitary.
        #[arg(long)]
        initial: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: DumpFormat,
    },
    /// Fidelity of the compiled evolution over `run.t_grid`.
    FidelitySweep(Common),
    /// Infidelity against the Trotter step count at `run.t`.
    TrotterFit(Common),
    /// Gate-count growth with chain length.
    ComplexitySweep(Common),
    /// Ancilla correlation protocol, spectrum and gaps.
    Spectroscopy(Common),
    /// Check every synthesis identity on an `n`-qubit chain.
    ValidateIdentities {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<HardwareKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(k) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build_global()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let started = Instant::now();
    let (name, common) = match &cli.command {
        Command::Compile(c) => ("compile", c),
        Command::Simulate { common, .. } => ("simulate", common),
        Command::FidelitySweep(c) => ("fidelity-sweep", c),
        Command::TrotterFit(c) => ("trotter-fit", c),
        Command::ComplexitySweep(c) => ("complexity-sweep", c),
        Command::Spectroscopy(c) => ("spectroscopy", c),
        Command::ValidateIdentities { n, out } => {
            let mut dir = out.as_deref().map(OutDir::create).transpose()?;
            let ok = commands::validate_identities(*n, dir.as_mut())?;
            if let Some(dir) = dir.as_mut() {
                finish(dir, "validate-identities", None, None, started)?;
            }
            return if ok { Ok(()) } else { Err(CliError::ChecksFailed) };
        }
    };
    let ov = Overrides {
        backend: common.backend,
        m: common.m,
        g: common.g,
        metric: common.metric,
    };
    let config = commands::load_config(&common.config, &ov)?;
    log::info!("{name}: {} qubits on {}", config.n(), config.hardware.kind);
    let mut out = OutDir::create(&common.out.clone().unwrap_or_else(|| commands::default_out(name)))?;
    let mut seed = None;
    match &cli.command {
        Command::Compile(_) => commands::compile(&config, &mut out)?,
        Command::Simulate {
            schedule, initial, format, ..
        } => commands::simulate(
            &config,
            &SimulateArgs {
                schedule,
                initial: initial.as_deref(),
                format: *format,
            },
            &mut out,
        )?,
        Command::FidelitySweep(_) => commands::fidelity_sweep_cmd(&config, &mut out)?,
        Command::TrotterFit(_) => commands::trotter_fit_cmd(&config, &mut out)?,
        Command::ComplexitySweep(_) => commands::complexity_sweep_cmd(&config, &mut out)?,
        Command::Spectroscopy(_) => {
            let s = common.seed.unwrap_or(0);
            if config.spectroscopy.as_ref().is_some_and(|sp| sp.shots.is_some()) {
                seed = Some(s);
            }
            commands::spectroscopy_cmd(&config, s, &mut out)?
        }
        Command::ValidateIdentities { .. } => unreachable!(),
    }
    let snapshot = serde_json::to_value(&config).expect("config serializes");
    finish(&mut out, name, Some(snapshot), seed, started)
}

fn finish(
    out: &mut OutDir,
    name: &str,
    config: Option<serde_json::Value>,
    seed: Option<u64>,
    started: Instant,
) -> Result<(), CliError> {
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand: name,
        config,
        outputs: out.written().to_vec(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        seed,
    };
    out.write_json(MANIFEST, &manifest)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PAIRSIM_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let diag = serde_json::json!({
                "error": e.kind(),
                "exit_code": e.exit_code(),
                "message": e.message(),
            });
            eprintln!("{diag}");
            ExitCode::from(e.exit_code())
        }
    }
}
