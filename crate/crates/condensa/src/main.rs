use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use condensa::config::{ExperimentConfig, Kind, Level, DEFAULT_SEED};
use condensa::error::CliError;
use condensa::parallel::configure_threads;
use condensa::runner::execute;

#[derive(Parser)]
#[command(name = "condensa", version, about = "Inclusion-process condensation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// experiment config (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// overrides the config output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// worker threads for replica-parallel runs
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// exact stationary law against the closed form
    Stationary,
    /// trace-process jump rates, exact and Monte Carlo
    Meanrate,
    /// limit-chain classification and Gordan certificate
    Classify,
    /// one Gillespie trajectory
    Simulate,
    /// condensate formation times over a list of N
    Nucleation,
    /// torus rates, generator gaps and condensate tracking
    Thermo,
    /// run the acceptance suite
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        level: Level,
    },
}

impl Command {
    fn kind(&self) -> Kind {
        match self {
            Command::Stationary => Kind::Stationary,
            Command::Meanrate => Kind::Meanrate,
            Command::Classify => Kind::Classify,
            Command::Simulate => Kind::Simulate,
            Command::Nucleation => Kind::Nucleation,
            Command::Thermo => Kind::Thermo,
            Command::Verify { .. } => Kind::Verify,
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let kind = cli.command.kind();
    let mut cfg = match (&cli.global.config, &cli.command) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Command::Verify { level }) => ExperimentConfig::verify(*level),
        (None, _) => return Err(CliError::config("--config", format!("`{}` needs a config file", kind.name()))),
    };
    if cfg.kind != kind {
        return Err(CliError::KindMismatch { command: kind.name().into(), kind: cfg.kind.name().into() });
    }
    if let (Command::Verify { level }, true) = (&cli.command, cli.global.config.is_none()) {
        cfg.level = Some(*level);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = (|| {
        configure_threads(cli.global.threads)?;
        let mut cfg = load(&cli)?;
        let seed = cli.global.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
        if let Some(out) = &cli.global.out {
            cfg.output_dir = out.to_string_lossy().into_owned();
        }
        let dir = PathBuf::from(&cfg.output_dir);
        let report = execute(&cfg, seed, &dir)?;
        Ok::<_, CliError>((report, dir))
    })();
    match result {
        Ok((report, dir)) => {
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("check failed: {} = {:e} (tolerance {:e})", c.name, c.value, c.tolerance);
            }
            println!("{} artifacts in {}", report.artifacts.len(), dir.display());
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
