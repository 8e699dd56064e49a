//! Configuration schemas, data-file parsing, and config-identity hashing.
//!
//! Every command reads a JSON config with a strict schema: unknown keys are
//! rejected so typos fail loudly instead of silently running defaults.  The
//! effective configuration (after command-line overrides) is serialized and
//! hashed; the hash and seed are stamped into every output artifact.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use crate::CliError;

/// Default replicate count for validity and demonstration curves.
pub const DEFAULT_CURVE_REPS: usize = 2_000;

/// Contour command configuration: which model, its data, and grids.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ContourConfig {
    /// Exact binomial contours: equal-tail interval index next to the
    /// fused plausibility.
    Binomial {
        n: u64,
        x: u64,
        #[serde(default = "default_grid")]
        grid: usize,
    },
    /// Two normal samples with unequal variances: the classical interval
    /// index next to the fused marginal plausibility of the mean difference.
    BehrensFisher {
        n1: usize,
        m1: f64,
        v1: f64,
        n2: usize,
        m2: f64,
        v2: f64,
        #[serde(default = "default_lambda_points")]
        lambda_points: usize,
        #[serde(default = "default_table_reps")]
        n_rep: usize,
        seed: u64,
        #[serde(default = "default_grid")]
        grid: usize,
    },
    /// Ratio of two normal means: naive marginalization next to the
    /// strategic (capacity-preserving) contour.
    FiellerCreasy {
        x1: f64,
        x2: f64,
        #[serde(default = "default_grid")]
        grid: usize,
    },
    /// Normal location by split likelihood ratio: the split p-value next
    /// to the recalibrated plausibility.
    NormalSlr {
        data_file: String,
        #[serde(default)]
        split: SplitKind,
        #[serde(default = "default_table_reps")]
        n_rep: usize,
        seed: u64,
        #[serde(default = "default_grid")]
        grid: usize,
    },
}

/// Test command configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestConfig {
    /// Monotone-density null against a kernel alternative.
    Monotonicity {
        data_file: String,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default)]
        split: SplitKind,
        #[serde(default = "default_inner_reps")]
        n_rep: usize,
        seed: u64,
    },
    /// Normality null against a two-component mixture.
    Mixture {
        data_file: String,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default)]
        split: SplitKind,
        #[serde(default = "default_table_reps")]
        table_reps: usize,
        seed: u64,
    },
}

/// Validate command configuration: which inferential model to put on the
/// diagonal, at which truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ValidateConfig {
    /// Binomial plausibility of the true success probability.
    Binomial {
        n: u64,
        theta: f64,
        #[serde(default = "default_curve_reps")]
        n_rep: usize,
        seed: u64,
    },
    /// Distribution-band plausibility of the true distribution.
    Dkw {
        n: usize,
        #[serde(default = "default_curve_reps")]
        n_rep: usize,
        #[serde(default = "default_table_reps")]
        table_reps: usize,
        seed: u64,
    },
}

/// Power command configuration: a parameter grid for one of the paired
/// test comparisons.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PowerConfig {
    /// Mixture alternative: component separation grid.
    Mixture {
        n: usize,
        mu_grid: Vec<f64>,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_power_reps")]
        n_rep: usize,
        #[serde(default = "default_table_reps")]
        table_reps: usize,
        seed: u64,
    },
    /// Gamma-shape alternative: shape grid, with shape one the null.
    Monotonicity {
        n: usize,
        shape_grid: Vec<f64>,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_power_reps")]
        n_rep: usize,
        #[serde(default = "default_inner_reps")]
        inner_reps: usize,
        seed: u64,
    },
}

/// How to split data for the split-likelihood-ratio procedures.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SplitKind {
    /// First half evaluates, second half estimates.
    #[default]
    FirstHalf,
    /// Random split with a recorded seed.
    Random { seed: u64 },
}

impl SplitKind {
    /// Builds the split for `n` observations.
    pub fn build(&self, n: usize) -> Result<validim::universal::slr::SplitSpec, CliError> {
        let spec = match self {
            SplitKind::FirstHalf => validim::universal::slr::SplitSpec::first_half(n),
            SplitKind::Random { seed } => validim::universal::slr::SplitSpec::random(n, *seed),
        };
        spec.map_err(CliError::from_precondition)
    }
}

impl ContourConfig {
    /// Applies `--seed` / `--mc-reps` to the fields they govern.
    pub fn apply_overrides(&mut self, seed_over: Option<u64>, reps_over: Option<usize>) {
        match self {
            ContourConfig::Binomial { .. } | ContourConfig::FiellerCreasy { .. } => {}
            ContourConfig::BehrensFisher { n_rep, seed, .. }
            | ContourConfig::NormalSlr { n_rep, seed, .. } => {
                if let Some(s) = seed_over {
                    *seed = s;
                }
                if let Some(r) = reps_over {
                    *n_rep = r;
                }
            }
        }
    }
}

impl TestConfig {
    /// Applies `--seed` / `--mc-reps` to the fields they govern.
    pub fn apply_overrides(&mut self, seed_over: Option<u64>, reps_over: Option<usize>) {
        match self {
            TestConfig::Monotonicity { n_rep, seed, .. } => {
                if let Some(s) = seed_over {
                    *seed = s;
                }
                if let Some(r) = reps_over {
                    *n_rep = r;
                }
            }
            TestConfig::Mixture {
                table_reps, seed, ..
            } => {
                if let Some(s) = seed_over {
                    *seed = s;
                }
                if let Some(r) = reps_over {
                    *table_reps = r;
                }
            }
        }
    }
}

impl ValidateConfig {
    /// Applies `--seed` / `--mc-reps` to the fields they govern.
    pub fn apply_overrides(&mut self, seed_over: Option<u64>, reps_over: Option<usize>) {
        match self {
            ValidateConfig::Binomial { n_rep, seed, .. }
            | ValidateConfig::Dkw { n_rep, seed, .. } => {
                if let Some(s) = seed_over {
                    *seed = s;
                }
                if let Some(r) = reps_over {
                    *n_rep = r;
                }
            }
        }
    }
}

impl PowerConfig {
    /// Applies `--seed` / `--mc-reps` to the fields they govern.
    pub fn apply_overrides(&mut self, seed_over: Option<u64>, reps_over: Option<usize>) {
        match self {
            PowerConfig::Mixture { n_rep, seed, .. }
            | PowerConfig::Monotonicity { n_rep, seed, .. } => {
                if let Some(s) = seed_over {
                    *seed = s;
                }
                if let Some(r) = reps_over {
                    *n_rep = r;
                }
            }
        }
    }
}

fn default_grid() -> usize {
    201
}

fn default_lambda_points() -> usize {
    41
}

fn default_table_reps() -> usize {
    10_000
}

fn default_alpha() -> f64 {
    0.05
}

fn default_inner_reps() -> usize {
    1_000
}

fn default_curve_reps() -> usize {
    DEFAULT_CURVE_REPS
}

fn default_power_reps() -> usize {
    200
}

/// Reads and parses a JSON config file against schema `T`.
pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {} is invalid: {e}", path.display())))
}

/// Short hexadecimal digest of the effective configuration.
pub fn config_hash<T: Serialize>(effective: &T) -> String {
    let canonical = serde_json::to_string(effective).unwrap_or_default();
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Reads a whitespace-separated numeric data file: one observation per
/// line, or two columns for two-sample data.
pub fn read_data_file(path: &Path) -> Result<(Vec<f64>, Option<Vec<f64>>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read data file {}: {e}", path.display())))?;
    let mut col1 = Vec::new();
    let mut col2 = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let w = fields.len();
        if w != 1 && w != 2 {
            return Err(CliError::Config(format!(
                "data file {} line {}: expected one or two columns, found {w}",
                path.display(),
                lineno + 1
            )));
        }
        if *width.get_or_insert(w) != w {
            return Err(CliError::Config(format!(
                "data file {} line {}: inconsistent column count",
                path.display(),
                lineno + 1
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                CliError::Config(format!(
                    "data file {} line {}: '{s}' is not a number",
                    path.display(),
                    lineno + 1
                ))
            })
        };
        col1.push(parse(fields[0])?);
        if w == 2 {
            col2.push(parse(fields[1])?);
        }
    }
    if col1.is_empty() {
        return Err(CliError::Config(format!(
            "data file {} holds no observations",
            path.display()
        )));
    }
    Ok((col1, if col2.is_empty() { None } else { Some(col2) }))
}
