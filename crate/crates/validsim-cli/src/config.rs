//! Run configuration: TOML parsing, validation, and the error/exit taxonomy.
//!
//! A run is fully determined by its [`RunConfig`]; reports embed the resolved
//! config verbatim so any output can be reproduced from its own header.
//! Unknown fields in a config file are rejected, not ignored.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use validsim_core::{CorrelationMatrix, DeptRecord, SimDesign};

/// Master seed used when neither the config file nor the flags set one.
pub const DEFAULT_MASTER_SEED: u64 = 0x5EED_CAFE;

/// Replication count used when none is given.
pub const DEFAULT_REPLICATIONS: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("computation failed: {0}")]
    Compute(#[from] validsim_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Distinct exit code per error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Compute(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Sweep,
    Classify,
    Pool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Markdown,
    Csv,
}

/// One simulation cell or a stack of cells sharing the population matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// Full symmetric population correlation matrix, row by row.
    pub sigma: Vec<Vec<f64>>,
    /// Number of sub-samples (single-cell form, together with `sss`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nss: Option<usize>,
    /// Sub-sample size (single-cell form).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sss: Option<usize>,
    /// Several (nss, sss) cells at once; blocks are reported by increasing sss.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<(usize, usize)>>,
    /// 1-based variable indices to report; all variables when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Correlation between the two predictors.
    pub r12: f64,
    /// Predictor-criterion correlation pairs, one population matrix each.
    pub validities: Vec<(f64, f64)>,
    /// (nss, sss) partition shapes.
    pub cells: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySection {
    pub validities: Vec<f64>,
    pub base_rates: Vec<f64>,
    pub quotas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Department {
    pub n: usize,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolSection {
    pub departments: Vec<Department>,
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub format: OutputFormat,
    /// Output file; standard output when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pool: Option<PoolSection>,
}

fn default_seed() -> u64 {
    DEFAULT_MASTER_SEED
}

fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}

impl RunConfig {
    /// Skeleton config for a command with everything else at defaults.
    pub fn bare(command: Command) -> Self {
        Self {
            command,
            seed: DEFAULT_MASTER_SEED,
            replications: DEFAULT_REPLICATIONS,
            format: OutputFormat::default(),
            out: None,
            simulate: None,
            sweep: None,
            classify: None,
            pool: None,
        }
    }

    /// Serialize to the TOML embedded in every report.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Population matrix of the simulate section.
    pub fn simulate_sigma(&self) -> Result<CorrelationMatrix, CliError> {
        let section = self
            .simulate
            .as_ref()
            .ok_or_else(|| CliError::Validation("missing [simulate] section".into()))?;
        CorrelationMatrix::from_rows(&section.sigma)
            .map_err(|e| CliError::Validation(format!("sigma: {e}")))
    }

    /// The validated designs of a simulate run, one per cell.
    pub fn simulate_designs(&self) -> Result<Vec<SimDesign>, CliError> {
        let section = self
            .simulate
            .as_ref()
            .ok_or_else(|| CliError::Validation("missing [simulate] section".into()))?;
        let sigma = self.simulate_sigma()?;
        let p = sigma.order();

        let shapes: Vec<(usize, usize)> = match (&section.cells, section.nss, section.sss) {
            (Some(cells), None, None) => {
                if cells.is_empty() {
                    return Err(CliError::Validation("cells list is empty".into()));
                }
                cells.clone()
            }
            (None, Some(nss), Some(sss)) => vec![(nss, sss)],
            _ => {
                return Err(CliError::Validation(
                    "give either nss and sss, or a cells list, not both".into(),
                ))
            }
        };

        let criteria = match &section.criteria {
            None => None,
            Some(list) => {
                if list.is_empty() {
                    return Err(CliError::Validation("criteria list is empty".into()));
                }
                let mut zero_based = Vec::with_capacity(list.len());
                for &c in list {
                    if c == 0 || c > p {
                        return Err(CliError::Validation(format!(
                            "criterion {c} out of range: variables are numbered 1..={p}"
                        )));
                    }
                    zero_based.push(c - 1);
                }
                Some(zero_based)
            }
        };

        shapes
            .into_iter()
            .map(|(nss, sss)| {
                SimDesign::new(
                    sigma.clone(),
                    nss,
                    sss,
                    self.replications,
                    self.seed,
                    criteria.clone(),
                )
                .map_err(|e| CliError::Validation(e.to_string()))
            })
            .collect()
    }

    /// Check every invariant a run needs; called after flag overrides.
    pub fn validate(&self) -> Result<(), CliError> {
        let section_for = |cmd: Command| -> &str {
            match cmd {
                Command::Simulate => "simulate",
                Command::Sweep => "sweep",
                Command::Classify => "classify",
                Command::Pool => "pool",
            }
        };
        let present = [
            (Command::Simulate, self.simulate.is_some()),
            (Command::Sweep, self.sweep.is_some()),
            (Command::Classify, self.classify.is_some()),
            (Command::Pool, self.pool.is_some()),
        ];
        for (cmd, has) in present {
            if cmd == self.command && !has {
                return Err(CliError::Validation(format!(
                    "command `{}` needs a [{}] section",
                    section_for(cmd),
                    section_for(cmd)
                )));
            }
            if cmd != self.command && has {
                return Err(CliError::Validation(format!(
                    "section [{}] does not belong to command `{}`",
                    section_for(cmd),
                    section_for(self.command)
                )));
            }
        }
        if self.replications == 0 {
            return Err(CliError::Validation("replications must be at least 1".into()));
        }

        match self.command {
            Command::Simulate => {
                self.simulate_designs()?;
            }
            Command::Sweep => {
                let s = self.sweep.as_ref().expect("checked above");
                if !(-1.0..=1.0).contains(&s.r12) {
                    return Err(CliError::Validation(format!(
                        "predictor intercorrelation r12 = {} outside [-1, 1]",
                        s.r12
                    )));
                }
                if s.validities.is_empty() {
                    return Err(CliError::Validation("validities list is empty".into()));
                }
                if s.cells.is_empty() {
                    return Err(CliError::Validation("cells list is empty".into()));
                }
                for &(v1, v2) in &s.validities {
                    let sigma = CorrelationMatrix::from_two_predictors(s.r12, v1, v2)
                        .map_err(|e| CliError::Validation(e.to_string()))?;
                    validsim_core::gram_factor(&sigma)
                        .map_err(|e| CliError::Validation(format!("validity pair ({v1}, {v2}): {e}")))?;
                    for &(nss, sss) in &s.cells {
                        SimDesign::new(sigma.clone(), nss, sss, self.replications, self.seed, None)
                            .map_err(|e| CliError::Validation(e.to_string()))?;
                    }
                }
            }
            Command::Classify => {
                let c = self.classify.as_ref().expect("checked above");
                for (name, list) in [
                    ("validities", &c.validities),
                    ("base_rates", &c.base_rates),
                    ("quotas", &c.quotas),
                ] {
                    if list.is_empty() {
                        return Err(CliError::Validation(format!("{name} list is empty")));
                    }
                }
                for &v in &c.validities {
                    if !(-1.0..=1.0).contains(&v) {
                        return Err(CliError::Validation(format!(
                            "validity {v} outside [-1, 1]"
                        )));
                    }
                }
                for (name, list) in [("base rate", &c.base_rates), ("quota", &c.quotas)] {
                    for &v in list {
                        if !(v > 0.0 && v < 1.0) {
                            return Err(CliError::Validation(format!(
                                "{name} {v} must lie strictly inside (0, 1)"
                            )));
                        }
                    }
                }
            }
            Command::Pool => {
                let p = self.pool.as_ref().expect("checked above");
                if p.departments.is_empty() {
                    return Err(CliError::Validation("departments list is empty".into()));
                }
                for d in &p.departments {
                    DeptRecord::new(d.n, d.r).map_err(|e| CliError::Validation(e.to_string()))?;
                }
            }
        }
        Ok(())
    }
}

/// Parse and validate a config document.
pub fn parse_config(source: &str) -> Result<RunConfig, CliError> {
    let config: RunConfig = toml::from_str(source).map_err(|e| CliError::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Recover the embedded config from a rendered report: either the fenced
/// ```toml block of a markdown report or the leading `# `-prefixed lines of a
/// CSV report.
pub fn extract_embedded_config(report: &str) -> Option<String> {
    if let Some(start) = report.find("```toml\n") {
        let rest = &report[start + "```toml\n".len()..];
        let end = rest.find("```")?;
        return Some(rest[..end].to_string());
    }
    let mut lines = Vec::new();
    for line in report.lines() {
        if let Some(stripped) = line.strip_prefix("# ") {
            lines.push(stripped);
        } else if line == "#" {
            lines.push("");
        } else {
            break;
        }
    }
    if lines.is_empty() {
        None
    } else {
        Some(lines.join("\n") + "\n")
    }
}
