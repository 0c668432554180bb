//! Synthetic experiment harness: simulated data, the three competing methods
//! with quasi-optimal parameters, relative uniform errors and reporting.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::decimal;
use crate::operators::{apply_forward, symbol_preset, synthesize, HarmonicCoefficients, SphericalSymbol, SymbolPreset};
use crate::quadrature::{sphere_rule, CubatureRule};
use crate::selection::{expand_grid, select_two_step, sup_norm, EvalGrid, ParameterGrid, TwoStepSelection};
use crate::smoothing::{PenaltyRule, PenaltyWeights};

/// Tolerance of the leader-following comparison of medians.
pub const LEADER_FACTOR: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Presmoothing followed by regularized collocation, both parameters chosen.
    TwoStep,
    /// Presmoothing followed by direct inversion (`α = 0`).
    SmoothingOnly,
    /// Regularized collocation on the raw data (`λ = 0`).
    CollocationOnly,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::TwoStep, Method::SmoothingOnly, Method::CollocationOnly];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::TwoStep => "two_step",
            Method::SmoothingOnly => "smoothing_only",
            Method::CollocationOnly => "collocation_only",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{s}`")))
    }
}

/// How the regularization parameters are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParameterChoice {
    QuasiOptimality,
    /// Bypass the search. `SmoothingOnly` uses `(0, lambda)` and
    /// `CollocationOnly` uses `(alpha, 0)`.
    Fixed { alpha: f64, lambda: f64 },
}

/// One configuration of the synthetic experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentCase {
    pub name: String,
    pub symbol: SymbolPreset,
    /// `R`.
    pub solution_radius: f64,
    /// `ρ`.
    pub data_radius: f64,
    pub max_degree: usize,
    /// Decay exponent of the simulated solution coefficients.
    pub upsilon: f64,
    pub penalty: PenaltyRule,
    /// Standard deviation of the additive Gaussian noise.
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub alpha_grid: ParameterGrid,
    pub lambda_grid: ParameterGrid,
    pub choice: ParameterChoice,
}

/// The five bundled benchmark configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkCase {
    A,
    B,
    C,
    D,
    E,
}

impl BenchmarkCase {
    pub const ALL: [BenchmarkCase; 5] = [
        BenchmarkCase::A,
        BenchmarkCase::B,
        BenchmarkCase::C,
        BenchmarkCase::D,
        BenchmarkCase::E,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkCase::A => "fig1a",
            BenchmarkCase::B => "fig1b",
            BenchmarkCase::C => "fig1c",
            BenchmarkCase::D => "fig1d",
            BenchmarkCase::E => "fig1e",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl ExperimentCase {
    /// Benchmark preset: `M = 30`, `R = ρ = 1`, `ε = 0.05`, 10 trials,
    /// standard parameter grids.
    pub fn benchmark(case: BenchmarkCase) -> Self {
        let (symbol, upsilon, exponent) = match case {
            BenchmarkCase::A => (SymbolPreset::Geometric(1.48), 1.5, 0.0),
            BenchmarkCase::B => (SymbolPreset::Geometric(1.48), 5.5, 3.5),
            BenchmarkCase::C => (SymbolPreset::Polynomial(2.0), 1.5, 0.0),
            BenchmarkCase::D => (SymbolPreset::Polynomial(2.0), 5.5, 3.5),
            BenchmarkCase::E => (SymbolPreset::Polynomial(2.0), 5.5, 5.5),
        };
        let seed = match case {
            BenchmarkCase::A => 101,
            BenchmarkCase::B => 102,
            BenchmarkCase::C => 103,
            BenchmarkCase::D => 104,
            BenchmarkCase::E => 105,
        };
        Self {
            name: case.name().to_string(),
            symbol,
            solution_radius: 1.0,
            data_radius: 1.0,
            max_degree: 30,
            upsilon,
            penalty: PenaltyRule::InverseSymbol { exponent },
            epsilon: 0.05,
            trials: 10,
            seed,
            alpha_grid: ParameterGrid::standard(),
            lambda_grid: ParameterGrid::standard(),
            choice: ParameterChoice::QuasiOptimality,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains([',', '\n', '"']) {
            return Err(Error::InvalidParameter(
                "name: must be nonempty and free of commas, quotes and newlines".into(),
            ));
        }
        if !(self.upsilon.is_finite() && self.upsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "upsilon: must be positive, got {}",
                self.upsilon
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon: must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if self.trials < 1 {
            return Err(Error::InvalidParameter("trials: must be at least 1".into()));
        }
        if let ParameterChoice::Fixed { alpha, lambda } = self.choice {
            if !(alpha.is_finite() && alpha >= 0.0 && lambda.is_finite() && lambda >= 0.0) {
                return Err(Error::InvalidParameter(
                    "fixed_alpha/fixed_lambda: must be finite and nonnegative".into(),
                ));
            }
        }
        self.symbol()?;
        Ok(())
    }

    pub fn symbol(&self) -> Result<SphericalSymbol> {
        symbol_preset(self.symbol, self.solution_radius, self.data_radius, self.max_degree)
    }
}

/// Simulated solution and its clean and noisy samples on the cubature points.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedProblem {
    pub x_true: HarmonicCoefficients,
    pub clean: Vec<f64>,
    pub noisy: Vec<f64>,
}

/// Relative error of one method in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub method: Method,
    pub relative_error: f64,
    pub alpha: f64,
    pub lambda: f64,
}

/// Everything a case needs that does not change between trials.
#[derive(Debug, Clone)]
pub struct Experiment {
    case: ExperimentCase,
    rule: CubatureRule,
    symbol: SphericalSymbol,
    beta: PenaltyWeights,
    grid: EvalGrid,
    alphas: Vec<f64>,
    lambdas: Vec<f64>,
}

impl Experiment {
    pub fn new(case: ExperimentCase) -> Result<Self> {
        case.validate()?;
        let symbol = case.symbol()?;
        let beta = case.penalty.build(&symbol)?;
        let rule = sphere_rule(case.max_degree, case.data_radius)?;
        let grid = EvalGrid::standard(case.max_degree, case.solution_radius)?;
        let alphas = expand_grid(&case.alpha_grid);
        let lambdas = expand_grid(&case.lambda_grid);
        Ok(Self {
            case,
            rule,
            symbol,
            beta,
            grid,
            alphas,
            lambdas,
        })
    }

    pub fn case(&self) -> &ExperimentCase {
        &self.case
    }

    pub fn rule(&self) -> &CubatureRule {
        &self.rule
    }

    pub fn symbol(&self) -> &SphericalSymbol {
        &self.symbol
    }

    pub fn beta(&self) -> &PenaltyWeights {
        &self.beta
    }

    pub fn grid(&self) -> &EvalGrid {
        &self.grid
    }

    /// Generator for one trial: ChaCha8 seeded with the case seed, stream = trial index.
    fn rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.case.seed);
        rng.set_stream(trial);
        rng
    }

    /// `x̂_{k,j} = (k + 1/2)^{-υ} g_{k,j}` with `g ~ U[-1, 1]` drawn in canonical
    /// order, `y = A_M x` sampled on the rule, then i.i.d. `N(0, ε²)` noise per point.
    pub fn simulate(&self, trial: u64) -> Result<SimulatedProblem> {
        let mut rng = self.rng(trial);
        let upsilon = self.case.upsilon;
        let x_true = HarmonicCoefficients::from_fn(
            self.case.max_degree,
            self.case.solution_radius,
            |idx| (idx.k() as f64 + 0.5).powf(-upsilon) * rng.gen_range(-1.0..=1.0),
        )?;
        let clean = synthesize(&apply_forward(&self.symbol, &x_true)?, self.rule.points())?;
        let noisy = if self.case.epsilon > 0.0 {
            let noise = Normal::new(0.0, self.case.epsilon)
                .map_err(|e| Error::InvalidParameter(format!("epsilon: {e}")))?;
            clean.iter().map(|v| v + noise.sample(&mut rng)).collect()
        } else {
            clean.clone()
        };
        Ok(SimulatedProblem {
            x_true,
            clean,
            noisy,
        })
    }

    fn solve(&self, samples: &[f64], method: Method) -> Result<TwoStepSelection> {
        let zero = [0.0];
        let (alphas, lambdas): (Vec<f64>, Vec<f64>) = match (self.case.choice, method) {
            (ParameterChoice::QuasiOptimality, Method::TwoStep) => {
                (self.alphas.clone(), self.lambdas.clone())
            }
            (ParameterChoice::QuasiOptimality, Method::SmoothingOnly) => {
                (zero.to_vec(), self.lambdas.clone())
            }
            (ParameterChoice::QuasiOptimality, Method::CollocationOnly) => {
                (self.alphas.clone(), zero.to_vec())
            }
            (ParameterChoice::Fixed { alpha, lambda }, m) => match m {
                Method::TwoStep => (vec![alpha], vec![lambda]),
                Method::SmoothingOnly => (zero.to_vec(), vec![lambda]),
                Method::CollocationOnly => (vec![alpha], zero.to_vec()),
            },
        };
        select_two_step(
            samples,
            &self.rule,
            &self.symbol,
            &self.beta,
            &alphas,
            &lambdas,
            &self.grid,
        )
    }

    /// All three methods on one simulated data set.
    pub fn run_trial(&self, trial: usize) -> Result<Vec<TrialResult>> {
        let problem = self.simulate(trial as u64)?;
        Method::ALL
            .iter()
            .map(|&method| {
                let sel = self.solve(&problem.noisy, method)?;
                Ok(TrialResult {
                    trial,
                    method,
                    relative_error: relative_sup_error(&problem.x_true, &sel.solution, &self.grid)?,
                    alpha: sel.alpha,
                    lambda: sel.lambda,
                })
            })
            .collect()
    }

    /// Every trial, ordered by trial index then method.
    pub fn run(&self) -> Result<Vec<TrialResult>> {
        let per_trial = (0..self.case.trials)
            .into_par_iter()
            .map(|t| self.run_trial(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(per_trial.into_iter().flatten().collect())
    }
}

/// Simulates one trial of `case` from scratch.
pub fn simulate_problem(case: &ExperimentCase, trial: u64) -> Result<SimulatedProblem> {
    Experiment::new(case.clone())?.simulate(trial)
}

/// `‖x - x̃‖ / ‖x‖` in the grid estimate of the uniform norm on `Ω_R`.
pub fn relative_sup_error(
    x_true: &HarmonicCoefficients,
    x_approx: &HarmonicCoefficients,
    grid: &EvalGrid,
) -> Result<f64> {
    let denom = sup_norm(x_true, grid)?;
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(sup_norm(&x_true.difference(x_approx)?, grid)? / denom)
}

pub fn run_case(case: &ExperimentCase) -> Result<Vec<TrialResult>> {
    Experiment::new(case.clone())?.run()
}

/// Results CSV: `case,trial,method,relative_error,alpha,lambda`.
pub fn results_csv(case_name: &str, results: &[TrialResult]) -> String {
    let mut out = String::from("case,trial,method,relative_error,alpha,lambda\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            case_name,
            r.trial,
            r.method,
            decimal(r.relative_error),
            decimal(r.alpha),
            decimal(r.lambda)
        ));
    }
    out
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Median errors per method and whether the two-step median stays within
/// [`LEADER_FACTOR`] of the better single-parameter median.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderSummary {
    pub case: String,
    pub median_two_step: f64,
    pub median_smoothing_only: f64,
    pub median_collocation_only: f64,
}

impl LeaderSummary {
    pub fn from_results(case: &str, results: &[TrialResult]) -> Result<Self> {
        let med = |m: Method| {
            let v: Vec<f64> = results
                .iter()
                .filter(|r| r.method == m)
                .map(|r| r.relative_error)
                .collect();
            median(&v).ok_or_else(|| {
                Error::InvalidParameter(format!("no results for method {m} in case {case}"))
            })
        };
        Ok(Self {
            case: case.to_string(),
            median_two_step: med(Method::TwoStep)?,
            median_smoothing_only: med(Method::SmoothingOnly)?,
            median_collocation_only: med(Method::CollocationOnly)?,
        })
    }

    /// `median(two_step) / min(median(smoothing_only), median(collocation_only))`.
    pub fn ratio(&self) -> f64 {
        self.median_two_step / self.median_smoothing_only.min(self.median_collocation_only)
    }

    pub fn follows_leader(&self) -> bool {
        self.ratio() <= LEADER_FACTOR
    }
}

/// Summary CSV: `case,median_two_step,median_smoothing_only,median_collocation_only,ratio,leader_following`.
pub fn summary_csv(summaries: &[LeaderSummary]) -> String {
    let mut out = String::from(
        "case,median_two_step,median_smoothing_only,median_collocation_only,ratio,leader_following\n",
    );
    for s in summaries {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.case,
            decimal(s.median_two_step),
            decimal(s.median_smoothing_only),
            decimal(s.median_collocation_only),
            decimal(s.ratio()),
            s.follows_leader()
        ));
    }
    out
}

/// Strip plot of relative errors: one row of circles per method.
pub fn strip_plot_svg(case_name: &str, results: &[TrialResult]) -> String {
    const WIDTH: f64 = 640.0;
    const ROW: f64 = 60.0;
    const LEFT: f64 = 150.0;
    const RIGHT: f64 = 30.0;
    const TOP: f64 = 40.0;
    let height = TOP + ROW * 3.0 + 50.0;
    let max = results
        .iter()
        .map(|r| r.relative_error)
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let x_max = if max > 0.0 { nice_ceiling(max) } else { 1.0 };
    let span = WIDTH - LEFT - RIGHT;
    let x_of = |v: f64| LEFT + span * (v / x_max).clamp(0.0, 1.0);

    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    s.push_str(&format!(
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\">Relative errors, {}</text>\n",
        WIDTH / 2.0,
        case_name
    ));
    for (row, method) in Method::ALL.iter().enumerate() {
        let y = TOP + ROW * (row as f64 + 0.5);
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\" dominant-baseline=\"middle\">{}</text>\n",
            LEFT - 10.0,
            y,
            method
        ));
        s.push_str(&format!(
            "<line x1=\"{LEFT}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>\n",
            WIDTH - RIGHT
        ));
        for r in results.iter().filter(|r| r.method == *method) {
            s.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{y:.1}\" r=\"5\" fill=\"none\" stroke=\"black\"/>\n",
                x_of(r.relative_error)
            ));
        }
    }
    let axis_y = TOP + ROW * 3.0 + 10.0;
    s.push_str(&format!(
        "<line x1=\"{LEFT}\" y1=\"{axis_y}\" x2=\"{:.1}\" y2=\"{axis_y}\" stroke=\"black\"/>\n",
        WIDTH - RIGHT
    ));
    for i in 0..=5 {
        let v = x_max * i as f64 / 5.0;
        let x = x_of(v);
        s.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{axis_y}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            axis_y + 5.0,
            axis_y + 20.0,
            trim_number(v)
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn nice_ceiling(v: f64) -> f64 {
    let p = 10f64.powf(v.log10().floor());
    for m in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if m * p >= v {
            return m * p;
        }
    }
    10.0 * p
}

fn trim_number(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() { "0".into() } else { s.to_string() }
}
