use std::path::{Path, PathBuf};

use sphreg::experiments::{results_csv, strip_plot_svg, summary_csv, Experiment, LeaderSummary};
use sphreg::selection::{expand_grid, select_two_step, trace_csv, EvalGrid, ParameterGrid};
use sphreg::verify::{run_checks, CheckOutcome, VerifyOptions};
use sphreg::{
    sphere_rule, symbol_preset, two_step_solve, CollocationParams, HarmonicCoefficients, PenaltyRule,
    SmoothingParams, SymbolPreset, TrialResult,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::files::{atomic_write, coefficients_csv, read_samples, rule_csv};

fn invalid(e: sphreg::Error) -> CliError {
    CliError::invalid(e.to_string())
}

fn numerical(e: sphreg::Error) -> CliError {
    CliError::numerical(e.to_string())
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub results: Vec<TrialResult>,
    pub summary: LeaderSummary,
    pub results_path: PathBuf,
    pub summary_path: PathBuf,
    pub plot_path: Option<PathBuf>,
}

impl ExperimentReport {
    pub fn describe(&self) -> String {
        let s = &self.summary;
        let mut out = format!(
            "{}: {} results written to {}\n",
            s.case,
            self.results.len(),
            self.results_path.display()
        );
        out.push_str(&format!(
            "median relative error: two_step {:.4e}, smoothing_only {:.4e}, collocation_only {:.4e}\n",
            s.median_two_step, s.median_smoothing_only, s.median_collocation_only
        ));
        out.push_str(&format!(
            "ratio {:.4}, leader_following {} (summary in {})\n",
            s.ratio(),
            s.follows_leader(),
            self.summary_path.display()
        ));
        if let Some(p) = &self.plot_path {
            out.push_str(&format!("plot written to {}\n", p.display()));
        }
        out
    }
}

/// Runs the configured experiment and writes results, summary and optional plot.
/// Relative output paths are resolved against `out_dir`, or the working
/// directory when it is `None`.
pub fn cmd_experiment(config_path: &Path, out_dir: Option<&Path>) -> CliResult<ExperimentReport> {
    let config = RunConfig::load(config_path)?;
    let base = out_dir.unwrap_or(Path::new("."));
    let name = config.case.name.clone();
    let experiment = Experiment::new(config.case).map_err(invalid)?;
    let results = experiment.run().map_err(numerical)?;
    let summary = LeaderSummary::from_results(&name, &results).map_err(numerical)?;

    let results_path = resolve(base, &config.results);
    atomic_write(&results_path, &results_csv(&name, &results))?;
    let summary_path = resolve(base, &config.summary);
    atomic_write(&summary_path, &summary_csv(std::slice::from_ref(&summary)))?;
    let plot_path = match &config.plot {
        Some(p) => {
            let p = resolve(base, p);
            atomic_write(&p, &strip_plot_svg(&name, &results))?;
            Some(p)
        }
        None => None,
    };
    Ok(ExperimentReport {
        results,
        summary,
        results_path,
        summary_path,
        plot_path,
    })
}

#[derive(Debug, Clone)]
pub struct SolveRequest {
    pub samples: PathBuf,
    pub max_degree: usize,
    pub data_radius: f64,
    pub solution_radius: f64,
    pub symbol: SymbolPreset,
    pub penalty: PenaltyRule,
    pub parameters: SolveParameters,
    pub output: PathBuf,
}

#[derive(Debug, Clone)]
pub enum SolveParameters {
    Fixed { alpha: f64, lambda: f64 },
    Auto {
        alpha_grid: ParameterGrid,
        lambda_grid: ParameterGrid,
        trace: Option<PathBuf>,
    },
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub coefficients: HarmonicCoefficients,
    pub alpha: f64,
    pub lambda: f64,
}

pub fn cmd_solve(req: &SolveRequest) -> CliResult<SolveReport> {
    let rule = sphere_rule(req.max_degree, req.data_radius).map_err(invalid)?;
    let symbol = symbol_preset(req.symbol, req.solution_radius, req.data_radius, req.max_degree)
        .map_err(invalid)?;
    let beta = req.penalty.build(&symbol).map_err(invalid)?;
    let samples = read_samples(&req.samples, &rule)?;
    let report = match &req.parameters {
        SolveParameters::Fixed { alpha, lambda } => {
            let sp = SmoothingParams::new(*lambda, beta).map_err(invalid)?;
            let cp = CollocationParams::new(*alpha, symbol).map_err(invalid)?;
            SolveReport {
                coefficients: two_step_solve(&samples, &rule, &sp, &cp).map_err(numerical)?,
                alpha: *alpha,
                lambda: *lambda,
            }
        }
        SolveParameters::Auto {
            alpha_grid,
            lambda_grid,
            trace,
        } => {
            let grid = EvalGrid::standard(req.max_degree, req.solution_radius).map_err(numerical)?;
            let sel = select_two_step(
                &samples,
                &rule,
                &symbol,
                &beta,
                &expand_grid(alpha_grid),
                &expand_grid(lambda_grid),
                &grid,
            )
            .map_err(numerical)?;
            if let Some(path) = trace {
                atomic_write(path, &trace_csv(&sel.trace))?;
            }
            SolveReport {
                coefficients: sel.solution,
                alpha: sel.alpha,
                lambda: sel.lambda,
            }
        }
    };
    if report.coefficients.values().iter().any(|v| !v.is_finite()) {
        return Err(CliError::numerical("solution has non-finite coefficients"));
    }
    atomic_write(&req.output, &coefficients_csv(&report.coefficients))?;
    Ok(report)
}

/// Writes the canonical rule for `(M, ρ)`; returns its number of points.
pub fn cmd_rule(max_degree: usize, rho: f64, output: &Path) -> CliResult<usize> {
    let rule = sphere_rule(max_degree, rho).map_err(invalid)?;
    atomic_write(output, &rule_csv(&rule))?;
    Ok(rule.len())
}

pub fn cmd_verify(opts: VerifyOptions) -> Vec<CheckOutcome> {
    run_checks(opts)
}

pub fn verify_table(outcomes: &[CheckOutcome]) -> String {
    let mut out = format!("{:<22} {:<6} {:>12} {:>10}\n", "check", "result", "value", "tolerance");
    for c in outcomes {
        out.push_str(&format!(
            "{:<22} {:<6} {:>12.3e} {:>10.0e}\n",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.value,
            c.tolerance
        ));
    }
    out
}
