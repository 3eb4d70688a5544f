mod commands;
mod config;
mod figures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use isac_core::paretoopt::BoundaryMethod;
use isac_core::{FormulaVariant, ResourceAllocation};
use thiserror::Error;

use commands::Target;
use config::RunConfig;
use figures::FigureId;
use output::{cached, write_all};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] isac_core::Error),
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for anything the user can fix in the inputs, 1 for numerical or
    /// runtime failures.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(isac_core::Error::Infeasible(_) | isac_core::Error::Config(_)) | CliError::Config(_) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "isac", version, about = "Rate, ASE and frontier evaluation for cooperative ISAC networks")]
struct Cli {
    /// TOML run configuration; defaults apply to everything left out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    variant: Option<FormulaVariant>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic rate and ASE of one allocation.
    Eval {
        #[arg(long, value_enum)]
        target: Target,
        /// `K,L,J,Q`, overriding the config allocation.
        #[arg(long, value_parser = parse_alloc)]
        alloc: Option<ResourceAllocation>,
    },
    /// Monte Carlo estimate of one rate, with a half-window truncation probe.
    Mc {
        #[arg(long, value_enum)]
        target: Target,
        #[arg(long, value_parser = parse_alloc)]
        alloc: Option<ResourceAllocation>,
        /// Also write per-trial records.
        #[arg(long)]
        records: bool,
    },
    /// Communication/sensing ASE frontier.
    Boundary {
        #[arg(long, default_value = "enumerate", value_parser = parse_method)]
        method: BoundaryMethod,
        /// Paper search only: bisect for the sensing peak instead of
        /// sweeping every `J(Q−1)`.
        #[arg(long)]
        strict_paper: bool,
    },
    /// Curve data for one figure: f4, f5, f6, f7, f9 or f11.
    Figure { id: FigureId },
    /// Full acceptance suite.
    Validate,
    /// Print the effective configuration as TOML.
    ShowConfig,
}

fn parse_alloc(s: &str) -> Result<ResourceAllocation, String> {
    let v: Vec<u32> = s.split(',').map(|x| x.trim().parse::<u32>().map_err(|e| format!("`{x}`: {e}"))).collect::<Result<_, _>>()?;
    match v[..] {
        [k, l, j, q] => Ok(ResourceAllocation::new(k, l, j, q)),
        _ => Err(format!("expected K,L,J,Q, got `{s}`")),
    }
}

fn parse_method(s: &str) -> Result<BoundaryMethod, String> {
    s.parse().map_err(|e: isac_core::Error| e.to_string())
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.mc.seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.mc.trials = t;
    }
    if let Some(v) = cli.variant {
        cfg.formula_variant = v;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if let Some(c) = &cli.cache_dir {
        cfg.cache_dir = Some(c.clone());
    }
    match &cli.command {
        Command::Eval { alloc: Some(a), .. } | Command::Mc { alloc: Some(a), .. } => cfg.allocation = Some(*a),
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(cfg: &RunConfig, command: &str, compute: impl FnOnce() -> Result<(Vec<output::Artifact>, String), CliError>) -> Result<(), CliError> {
    let mut summary = None;
    let (artifacts, hit) = cached(cfg, command, || {
        let (a, s) = compute()?;
        summary = Some(s);
        Ok(a)
    })?;
    if let Some(s) = summary {
        println!("{s}");
    }
    if hit {
        eprintln!("cache hit: {command}");
    }
    for p in write_all(&cfg.output_dir, &artifacts)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    let cfg = effective_config(cli)?;
    match &cli.command {
        Command::Eval { target, .. } => {
            let r = commands::eval(&cfg, *target)?;
            println!("{}", r.summary);
            write_all(&cfg.output_dir, &[r.artifact])?;
        }
        Command::Mc { target, records, .. } => {
            emit(&cfg, &format!("mc {target:?} records={records}"), || commands::mc(&cfg, *target, *records))?;
        }
        Command::Boundary { method, strict_paper } => {
            emit(&cfg, &format!("boundary {method} strict={strict_paper}"), || commands::boundary(&cfg, *method, *strict_paper))?;
        }
        Command::Figure { id } => {
            emit(&cfg, &format!("figure {}", id.name()), || Ok((figures::figure(&cfg, *id)?, format!("figure {}", id.name()))))?;
        }
        Command::Validate => {
            let (outcomes, artifact) = commands::validate_suite(&cfg);
            for o in &outcomes {
                println!("{}", o.line());
            }
            write_all(&cfg.output_dir, &[artifact])?;
            if outcomes.iter().any(|o| o.is_hard_failure()) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::ShowConfig => print!("{}", cfg.to_toml()),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            if let CliError::Core(isac_core::Error::Infeasible(vs)) = &e {
                for v in vs {
                    eprintln!("{}", serde_json::to_string(v).expect("violations serialize"));
                }
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
