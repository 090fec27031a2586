//! Library backing the `validsim` binary: run configuration, dispatch, and
//! report rendering. Kept as a library so integration tests can drive runs
//! without spawning processes.

pub mod config;
pub mod render;
pub mod run;

pub use config::{
    extract_embedded_config, parse_config, CliError, Command, OutputFormat, RunConfig,
    DEFAULT_MASTER_SEED, DEFAULT_REPLICATIONS,
};
pub use run::{deliver, execute};

/// The validity sweep grid used when `sweep` runs without a config file:
/// predictor intercorrelation .6, validity pairs spanning population
/// multiple correlations from .0 to .4, and three partition shapes with a
/// pooled sample size near 1000.
pub fn default_sweep_config() -> RunConfig {
    let mut cfg = RunConfig::bare(Command::Sweep);
    cfg.sweep = Some(config::SweepSection {
        r12: 0.6,
        validities: vec![(0.0, 0.0), (0.1, 0.1), (0.1, 0.2), (0.2, 0.3), (0.4, 0.2)],
        cells: vec![(40, 25), (20, 50), (13, 77)],
    });
    cfg
}

/// The classification grid used when `classify` runs without arguments:
/// validities .50/.30/.15 against base rates .50-.70 and quotas .30-.70.
pub fn default_classify_config() -> RunConfig {
    let mut cfg = RunConfig::bare(Command::Classify);
    cfg.classify = Some(config::ClassifySection {
        validities: vec![0.50, 0.30, 0.15],
        base_rates: vec![0.50, 0.55, 0.60, 0.65, 0.70],
        quotas: vec![0.70, 0.60, 0.50, 0.40, 0.30],
    });
    cfg
}
