//! Experiment configuration files.
//!
//! A config is a flat TOML document: one `key = value` pair per line, `#`
//! comments, strings in double quotes. No tables. Recognised keys:
//!
//! | key | type | default |
//! |-----|------|---------|
//! | `name` | string | required |
//! | `symbol` | string: `sst`, `sgg`, `geometric:<q>`, `polynomial:<s>` | required |
//! | `penalty` | string: `constant:<c>`, `linear`, `inverse-symbol`, `inverse-symbol:<s>` | required |
//! | `upsilon` | real > 0 | required |
//! | `solution_radius` | real > 0 | 1 |
//! | `data_radius` | real >= `solution_radius` | 1 |
//! | `max_degree` | integer >= 0 | 30 |
//! | `epsilon` | real >= 0 | 0.05 |
//! | `trials` | integer >= 1 | 10 |
//! | `seed` | integer >= 0 | 0 |
//! | `alpha_base`, `lambda_base` | real > 0 | 1.78e-5 |
//! | `alpha_factor`, `lambda_factor` | real > 1 | 1.25 |
//! | `alpha_count`, `lambda_count` | integer >= 1 | 50 |
//! | `alpha_zero`, `lambda_zero` | bool | true |
//! | `fixed_alpha`, `fixed_lambda` | real >= 0 | unset |
//! | `results` | path | `<name>_results.csv` |
//! | `summary` | path | `<name>_summary.csv` |
//! | `plot` | path to an SVG file | unset (no plot) |
//!
//! Setting both `fixed_alpha` and `fixed_lambda` skips the parameter search.
//! Relative output paths are resolved against the output directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sphreg::experiments::ParameterChoice;
use sphreg::selection::ParameterGrid;
use sphreg::{ExperimentCase, PenaltyRule, SymbolPreset};

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    symbol: String,
    penalty: String,
    upsilon: f64,
    #[serde(default = "one")]
    solution_radius: f64,
    #[serde(default = "one")]
    data_radius: f64,
    #[serde(default = "default_degree")]
    max_degree: usize,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_base")]
    alpha_base: f64,
    #[serde(default = "default_factor")]
    alpha_factor: f64,
    #[serde(default = "default_count")]
    alpha_count: usize,
    #[serde(default = "yes")]
    alpha_zero: bool,
    #[serde(default = "default_base")]
    lambda_base: f64,
    #[serde(default = "default_factor")]
    lambda_factor: f64,
    #[serde(default = "default_count")]
    lambda_count: usize,
    #[serde(default = "yes")]
    lambda_zero: bool,
    fixed_alpha: Option<f64>,
    fixed_lambda: Option<f64>,
    results: Option<PathBuf>,
    summary: Option<PathBuf>,
    plot: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_degree() -> usize {
    30
}
fn default_epsilon() -> f64 {
    0.05
}
fn default_trials() -> usize {
    10
}
fn default_base() -> f64 {
    ParameterGrid::standard().base()
}
fn default_factor() -> f64 {
    ParameterGrid::standard().factor()
}
fn default_count() -> usize {
    ParameterGrid::standard().count()
}

/// A parsed config: the experiment plus where its outputs go.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: ExperimentCase,
    pub results: PathBuf,
    pub summary: PathBuf,
    pub plot: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| format!("line {}: ", text[..s.start].matches('\n').count() + 1))
                .unwrap_or_default();
            CliError::invalid(format!("invalid config: {line}{}", e.message()))
        })?;
        let field = |name: &str, e: sphreg::Error| CliError::invalid(format!("invalid config: {name}: {e}"));
        let symbol: SymbolPreset = raw.symbol.parse().map_err(|e| field("symbol", e))?;
        let penalty: PenaltyRule = raw.penalty.parse().map_err(|e| field("penalty", e))?;
        let alpha_grid = ParameterGrid::new(raw.alpha_base, raw.alpha_factor, raw.alpha_count, raw.alpha_zero)
            .map_err(|e| field("alpha grid", e))?;
        let lambda_grid =
            ParameterGrid::new(raw.lambda_base, raw.lambda_factor, raw.lambda_count, raw.lambda_zero)
                .map_err(|e| field("lambda grid", e))?;
        let choice = match (raw.fixed_alpha, raw.fixed_lambda) {
            (None, None) => ParameterChoice::QuasiOptimality,
            (Some(alpha), Some(lambda)) => ParameterChoice::Fixed { alpha, lambda },
            _ => {
                return Err(CliError::invalid(
                    "invalid config: fixed_alpha and fixed_lambda must be given together",
                ))
            }
        };
        let case = ExperimentCase {
            name: raw.name,
            symbol,
            solution_radius: raw.solution_radius,
            data_radius: raw.data_radius,
            max_degree: raw.max_degree,
            upsilon: raw.upsilon,
            penalty,
            epsilon: raw.epsilon,
            trials: raw.trials,
            seed: raw.seed,
            alpha_grid,
            lambda_grid,
            choice,
        };
        case.validate()
            .map_err(|e| CliError::invalid(format!("invalid config: {e}")))?;
        let results = raw
            .results
            .unwrap_or_else(|| PathBuf::from(format!("{}_results.csv", case.name)));
        let summary = raw
            .summary
            .unwrap_or_else(|| PathBuf::from(format!("{}_summary.csv", case.name)));
        Ok(Self {
            case,
            results,
            summary,
            plot: raw.plot,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = crate::files::read_input(path)?;
        Self::parse(&text).map_err(|e| CliError::new(e.code, format!("{}: {}", path.display(), e.message())))
    }
}
