//! Dispatch a validated [`RunConfig`] to the library and render the result.

use validsim_core::{pool_departments, reproduce_bias_tables, utility_grid, validity_sweep, DeptRecord};

use crate::config::{CliError, Command, RunConfig};
use crate::render;

/// Run a config end to end and return the rendered report.
pub fn execute(config: &RunConfig) -> Result<String, CliError> {
    config.validate()?;
    let embedded = config.to_toml();
    match config.command {
        Command::Simulate => {
            let designs = config.simulate_designs()?;
            let tables = reproduce_bias_tables(&designs)?;
            Ok(render::render_bias_tables(&embedded, &tables, config.format))
        }
        Command::Sweep => {
            let s = config.sweep.as_ref().expect("validated");
            let sweep = validity_sweep(
                &s.validities,
                s.r12,
                &s.cells,
                config.replications,
                config.seed,
            )?;
            Ok(render::render_sweep(&embedded, &sweep, config.format))
        }
        Command::Classify => {
            let c = config.classify.as_ref().expect("validated");
            let grid = utility_grid(&c.validities, &c.base_rates, &c.quotas)?;
            Ok(render::render_grid(&embedded, &grid, config.format))
        }
        Command::Pool => {
            let p = config.pool.as_ref().expect("validated");
            let records = p
                .departments
                .iter()
                .map(|d| DeptRecord::new(d.n, d.r))
                .collect::<validsim_core::Result<Vec<_>>>()?;
            let pooled = pool_departments(&records)?;
            Ok(render::render_pool(
                &embedded,
                &p.departments,
                pooled,
                config.format,
            ))
        }
    }
}

/// Write a report to the configured destination (file or standard output).
pub fn deliver(config: &RunConfig, report: &str) -> Result<(), CliError> {
    match &config.out {
        Some(path) => std::fs::write(path, report)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(report.as_bytes())?;
        }
    }
    Ok(())
}
