use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use validsim_cli::config::{
    ClassifySection, CliError, Command, Department, OutputFormat, PoolSection, RunConfig,
};
use validsim_cli::{default_classify_config, default_sweep_config, execute, parse_config, run};

/// Monte Carlo toolkit for test-validity estimation: pooled sub-sample bias
/// experiments and classification-rate utility reports.
#[derive(Parser)]
#[command(name = "validsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for all random streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Independent replications per simulation cell.
    #[arg(long)]
    replications: Option<usize>,
    /// Report format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Run one simulation cell (or a stack of cells) and report bias tables.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep bias across population validity levels and partition shapes.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Classification rates for given validity, base rate, and quota grids.
    Classify {
        #[command(flatten)]
        common: CommonArgs,
        /// Latent test validity; repeat for a grid.
        #[arg(long = "validity")]
        validities: Vec<f64>,
        /// Positive base rate; repeat for a grid.
        #[arg(long = "base-rate")]
        base_rates: Vec<f64>,
        /// Admission quota; repeat for a grid.
        #[arg(long = "quota")]
        quotas: Vec<f64>,
    },
    /// Pool reported departmental correlations, weighted by enrollment.
    Pool {
        #[command(flatten)]
        common: CommonArgs,
        /// Department as N:R, e.g. 85:0.436; repeatable.
        #[arg(long = "dept", value_parser = parse_dept)]
        departments: Vec<Department>,
    },
}

fn parse_dept(raw: &str) -> Result<Department, String> {
    let (n, r) = raw
        .split_once(':')
        .ok_or_else(|| format!("expected N:R, got `{raw}`"))?;
    let n: usize = n.trim().parse().map_err(|e| format!("bad count in `{raw}`: {e}"))?;
    let r: f64 = r.trim().parse().map_err(|e| format!("bad correlation in `{raw}`: {e}"))?;
    Ok(Department { n, r })
}

fn load_config(common: &CommonArgs, command: Command) -> Result<RunConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => {
            let source = std::fs::read_to_string(path)?;
            let config = parse_config(&source)?;
            if config.command != command {
                return Err(CliError::Validation(format!(
                    "config file is for command `{:?}`, invoked as `{command:?}`",
                    config.command
                )));
            }
            config
        }
        None => match command {
            Command::Sweep => default_sweep_config(),
            Command::Classify => default_classify_config(),
            Command::Simulate => {
                return Err(CliError::Validation(
                    "simulate needs --config; the population matrix is supplied there".into(),
                ))
            }
            Command::Pool => {
                let mut cfg = RunConfig::bare(Command::Pool);
                cfg.pool = Some(PoolSection {
                    departments: Vec::new(),
                });
                cfg
            }
        },
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(replications) = common.replications {
        config.replications = replications;
    }
    if let Some(format) = common.format {
        config.format = format;
    }
    if let Some(out) = &common.out {
        config.out = Some(out.clone());
    }
    Ok(config)
}

fn build(cli: Cli) -> Result<RunConfig, CliError> {
    match cli.command {
        CliCommand::Simulate { common } => load_config(&common, Command::Simulate),
        CliCommand::Sweep { common } => load_config(&common, Command::Sweep),
        CliCommand::Classify {
            common,
            validities,
            base_rates,
            quotas,
        } => {
            let mut config = load_config(&common, Command::Classify)?;
            let section = config.classify.get_or_insert(ClassifySection {
                validities: Vec::new(),
                base_rates: Vec::new(),
                quotas: Vec::new(),
            });
            if !validities.is_empty() {
                section.validities = validities;
            }
            if !base_rates.is_empty() {
                section.base_rates = base_rates;
            }
            if !quotas.is_empty() {
                section.quotas = quotas;
            }
            Ok(config)
        }
        CliCommand::Pool {
            common,
            departments,
        } => {
            let mut config = load_config(&common, Command::Pool)?;
            if !departments.is_empty() {
                config.pool = Some(PoolSection { departments });
            }
            Ok(config)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = build(cli).and_then(|config| {
        let report = execute(&config)?;
        run::deliver(&config, &report)
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("validsim: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
