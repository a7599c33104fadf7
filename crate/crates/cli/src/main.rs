mod commands;
mod config;
mod context;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use config::{Profile, RunConfig};
use context::Ctx;
use quietrotor::simulation::ControllerKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: configuration, missing files, malformed data.
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Runtime(e.to_string())
            }
        }
    )*};
}
runtime_from!(
    quietrotor::environment::EnvError,
    quietrotor::agent::AgentError,
    quietrotor::energy_stats::StatsError,
    quietrotor::turbine::TurbineError,
    quietrotor::qnet::QnetError
);

#[derive(Parser)]
#[command(name = "quietrotor", version, about = "Noise-aware wind turbine control with double deep Q-learning")]
struct Cli {
    /// TOML configuration; built-in defaults when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    profile: Option<Profile>,
    /// Include wall-clock timings in the JSON report
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AgentArg {
    Quiet,
    Power,
    Classic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AgentOrAll {
    Quiet,
    Power,
    Classic,
    All,
}

impl AgentArg {
    fn kind(self) -> ControllerKind {
        match self {
            AgentArg::Quiet => ControllerKind::QuietDdqn,
            AgentArg::Power => ControllerKind::PowerDdqn,
            AgentArg::Classic => ControllerKind::Classic,
        }
    }
}

impl AgentOrAll {
    fn kinds(self) -> Vec<ControllerKind> {
        match self {
            AgentOrAll::Quiet => vec![ControllerKind::QuietDdqn],
            AgentOrAll::Power => vec![ControllerKind::PowerDdqn],
            AgentOrAll::Classic => vec![ControllerKind::Classic],
            AgentOrAll::All => ControllerKind::ALL.to_vec(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent, or tune the classic controller
    Train {
        #[arg(long, value_enum)]
        agent: AgentArg,
    },
    /// Run controllers on a wind time series
    Simulate {
        #[arg(long, value_enum, default_value = "all")]
        agent: AgentOrAll,
        #[arg(long)]
        wind: Option<PathBuf>,
    },
    /// Cp/noise cloud and greedy trajectories at a fixed wind speed
    Pareto {
        #[arg(long, value_enum, default_value = "quiet")]
        agent: AgentArg,
    },
    /// Binned power curves and Gaussian-process Cp fits
    Epc {
        #[arg(long, value_enum, default_value = "all")]
        agent: AgentOrAll,
        #[arg(long)]
        wind: Option<PathBuf>,
    },
    /// Expected annual energy under a Weibull wind distribution
    Annual {
        #[arg(long)]
        wind: Option<PathBuf>,
    },
    /// Quick self-checks of the numerical core
    Validate,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Train { .. } => "train",
            Command::Simulate { .. } => "simulate",
            Command::Pareto { .. } => "pareto",
            Command::Epc { .. } => "epc",
            Command::Annual { .. } => "annual",
            Command::Validate => "validate",
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => {
            let mut c = RunConfig::default();
            c.resolve_paths(Path::new("."));
            c
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(p) = cli.profile {
        cfg.profile = p;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let cfg = load_config(cli)?;
    let ctx = Ctx::new(cfg)?;
    let setup_s = started.elapsed().as_secs_f64();
    let results = match &cli.command {
        Command::Train { agent } => commands::train_cmd(&ctx, agent.kind())?,
        Command::Simulate { agent, wind } => commands::simulate_cmd(&ctx, &agent.kinds(), wind.clone())?,
        Command::Pareto { agent } => commands::pareto_cmd(&ctx, agent.kind())?,
        Command::Epc { agent, wind } => commands::epc_cmd(&ctx, &agent.kinds(), wind.clone())?,
        Command::Annual { wind } => commands::annual_cmd(&ctx, wind.clone())?,
        Command::Validate => {
            let checks = commands::validate_cmd(&ctx);
            for (name, ok, detail) in &checks {
                println!("{} {name}: {detail}", if *ok { "PASS" } else { "FAIL" });
            }
            let failed = checks.iter().filter(|c| !c.1).count();
            let j = json!(checks.iter().map(|(n, ok, d)| json!({"check": n, "pass": ok, "detail": d})).collect::<Vec<_>>());
            write_report(cli, &ctx, j, setup_s, started)?;
            if failed > 0 {
                return Err(CliError::Runtime(format!("{failed} self-check(s) failed")));
            }
            return Ok(());
        }
    };
    write_report(cli, &ctx, results, setup_s, started)
}

fn write_report(cli: &Cli, ctx: &Ctx, results: serde_json::Value, setup_s: f64, started: Instant) -> Result<(), CliError> {
    let mut echo = serde_json::to_value(&ctx.cfg).expect("config serialises");
    echo.as_object_mut().unwrap().remove("out_dir");
    let mut report = json!({
        "command": cli.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": ctx.cfg.seed,
        "config_hash": ctx.hash,
        "config": echo,
        "results": results,
    });
    if cli.timings {
        report["timings"] = json!({"setup_s": setup_s, "total_s": started.elapsed().as_secs_f64()});
    }
    let path = ctx.out(&format!("report_{}.json", cli.command.name()));
    output::write_json(&path, &report)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Validation(_) => ExitCode::from(1),
                CliError::Runtime(_) => ExitCode::from(2),
            }
        }
    }
}
