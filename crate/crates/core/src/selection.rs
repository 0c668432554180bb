//! Quasi-optimality parameter choice over geometric grids, for one parameter
//! and for the nested two-parameter search.
//!
//! All differences are measured in the uniform norm on `Ω_R`, approximated by
//! the maximum over an [`EvalGrid`]. Every candidate of the nested search is a
//! per-degree rescaling of the same discrete Fourier coefficients, so the
//! search evaluates the per-degree partial sums once ([`DegreeFields`]) and
//! combines them for each candidate instead of synthesizing every solution.

use rayon::prelude::*;

use crate::collocation::{invert_regularized, two_step_factors, CollocationParams};
use crate::error::{Error, Result};
use crate::format::decimal;
use crate::harmonics::{num_coefficients, BasisEvaluator, SpherePoint};
use crate::operators::{analyze, check_radius, HarmonicCoefficients, SphericalSymbol};
use crate::quadrature::{sphere_rule, CubatureRule};
use crate::smoothing::{smoothing_factors, PenaltyWeights};

/// Geometric parameter set `{base · factor^i, i = 0..=count}`, optionally with 0 prepended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterGrid {
    base: f64,
    factor: f64,
    count: usize,
    include_zero: bool,
}

impl ParameterGrid {
    pub fn new(base: f64, factor: f64, count: usize, include_zero: bool) -> Result<Self> {
        if !(base.is_finite() && base > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid base must be positive, got {base}"
            )));
        }
        if !(factor.is_finite() && factor > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "grid factor must exceed 1, got {factor}"
            )));
        }
        if count < 1 {
            return Err(Error::InvalidParameter("grid count must be at least 1".into()));
        }
        Ok(Self {
            base,
            factor,
            count,
            include_zero,
        })
    }

    /// `α_0 = λ_0 = 1.78e-5`, `q = r = 1.25`, `L = K = 50`, with 0 prepended.
    pub fn standard() -> Self {
        Self {
            base: 1.78e-5,
            factor: 1.25,
            count: 50,
            include_zero: true,
        }
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn include_zero(&self) -> bool {
        self.include_zero
    }
}

/// Grid values in ascending order.
pub fn expand_grid(g: &ParameterGrid) -> Vec<f64> {
    let zero = g.include_zero.then_some(0.0);
    zero.into_iter()
        .chain((0..=g.count).map(|i| g.base * g.factor.powi(i as i32)))
        .collect()
}

/// Points on `Ω_R` with the harmonic basis tabulated up to a fixed degree.
#[derive(Debug, Clone)]
pub struct EvalGrid {
    points: Vec<SpherePoint>,
    radius: f64,
    max_degree: usize,
    basis: Vec<f64>,
}

impl EvalGrid {
    pub fn new(points: Vec<SpherePoint>, max_degree: usize) -> Result<Self> {
        let radius = points.first().ok_or(Error::EmptyGrid)?.radius();
        for p in &points {
            check_radius(radius, p.radius())?;
        }
        let stride = num_coefficients(max_degree);
        let mut basis = vec![0.0; points.len() * stride];
        let mut eval = BasisEvaluator::new(max_degree);
        for (row, p) in basis.chunks_mut(stride).zip(&points) {
            eval.eval_into(p.direction(), 1.0 / radius, row);
        }
        Ok(Self {
            points,
            radius,
            max_degree,
            basis,
        })
    }

    /// Points of `sphere_rule(2M, R)`.
    pub fn standard(max_degree: usize, radius: f64) -> Result<Self> {
        let rule = sphere_rule(2 * max_degree, radius)?;
        Self::new(rule.points().to_vec(), max_degree)
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn check(&self, c: &HarmonicCoefficients) -> Result<()> {
        check_radius(self.radius, c.radius())?;
        if c.max_degree() > self.max_degree {
            return Err(Error::DegreeMismatch(format!(
                "coefficients of degree {} exceed the grid's tabulated degree {}",
                c.max_degree(),
                self.max_degree
            )));
        }
        Ok(())
    }

    /// Values of the expansion `c` at every grid point.
    pub fn synthesize(&self, c: &HarmonicCoefficients) -> Result<Vec<f64>> {
        self.check(c)?;
        let stride = num_coefficients(self.max_degree);
        let n = c.values().len();
        Ok(self
            .basis
            .chunks(stride)
            .map(|row| row[..n].iter().zip(c.values()).map(|(b, v)| b * v).sum())
            .collect())
    }
}

/// Grid estimate of the uniform norm `‖c‖_{C(Ω_R)}`.
pub fn sup_norm(c: &HarmonicCoefficients, grid: &EvalGrid) -> Result<f64> {
    Ok(grid
        .synthesize(c)?
        .into_iter()
        .fold(0.0, |m, v| m.max(v.abs())))
}

/// Per-degree partial sums `F_k(t) = Σ_j ĉ_{k,j} (1/R) Y_{k,j}(t/R)` over a grid.
///
/// Any expansion of the form `Σ_k f_k Σ_j ĉ_{k,j} (1/R) Y_{k,j}` then evaluates
/// at `t` as `Σ_k f_k F_k(t)`.
#[derive(Debug, Clone)]
pub struct DegreeFields {
    max_degree: usize,
    fields: Vec<f64>,
}

impl DegreeFields {
    /// `values` are degree-major coefficients up to `max_degree`; they are
    /// interpreted on the grid's sphere.
    pub fn new(values: &[f64], max_degree: usize, grid: &EvalGrid) -> Result<Self> {
        let n = num_coefficients(max_degree);
        if values.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: values.len(),
            });
        }
        if max_degree > grid.max_degree {
            return Err(Error::DegreeMismatch(format!(
                "fields of degree {max_degree} exceed the grid's tabulated degree {}",
                grid.max_degree
            )));
        }
        let stride = num_coefficients(grid.max_degree);
        let mut fields = Vec::with_capacity(grid.len() * (max_degree + 1));
        for row in grid.basis.chunks(stride) {
            for k in 0..=max_degree {
                let r = k * k..(k + 1) * (k + 1);
                fields.push(row[r.clone()].iter().zip(&values[r]).map(|(b, v)| b * v).sum());
            }
        }
        Ok(Self { max_degree, fields })
    }

    /// `max_t |Σ_k (f_k - g_k) F_k(t)|`.
    pub fn sup_of_difference(&self, f: &[f64], g: &[f64]) -> f64 {
        let d: Vec<f64> = f.iter().zip(g).map(|(a, b)| a - b).collect();
        self.sup_of_scaled(&d)
    }

    /// `max_t |Σ_k f_k F_k(t)|`.
    pub fn sup_of_scaled(&self, f: &[f64]) -> f64 {
        let stride = self.max_degree + 1;
        let f = &f[..stride];
        self.fields
            .chunks(stride)
            .map(|row| row.iter().zip(f).map(|(a, b)| a * b).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

/// Index `i >= 1` minimizing `differences[i - 1]`; ties go to the smallest
/// index and NaN never wins. Returns `None` for an empty slice.
pub fn quasi_optimal_index(differences: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &d) in differences.iter().enumerate() {
        let d = if d.is_nan() { f64::INFINITY } else { d };
        match best {
            Some((_, b)) if d >= b => {}
            _ => best = Some((i, d)),
        }
    }
    best.map(|(i, _)| i + 1)
}

/// Outcome of a single-parameter quasi-optimality selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub chosen_index: usize,
    pub chosen_value: f64,
    /// `differences[i - 1] = ‖x_i - x_{i-1}‖`, `i = 1..len`.
    pub differences: Vec<f64>,
    pub solution: HarmonicCoefficients,
}

/// Quasi-optimality over solutions ordered by ascending parameter `values`.
pub fn select_single(
    values: &[f64],
    solutions: &[HarmonicCoefficients],
    grid: &EvalGrid,
) -> Result<SelectionResult> {
    if solutions.len() < 2 {
        return Err(Error::TooFewSolutions(solutions.len()));
    }
    if values.len() != solutions.len() {
        return Err(Error::LengthMismatch {
            expected: solutions.len(),
            actual: values.len(),
        });
    }
    let differences = solutions
        .windows(2)
        .map(|w| sup_norm(&w[1].difference(&w[0])?, grid))
        .collect::<Result<Vec<f64>>>()?;
    let chosen_index = quasi_optimal_index(&differences).expect("at least one difference");
    Ok(SelectionResult {
        chosen_index,
        chosen_value: values[chosen_index],
        differences,
        solution: solutions[chosen_index].clone(),
    })
}

/// Inner-search record for one `α_j` of the nested search.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub alpha: f64,
    pub chosen_lambda: f64,
    /// Smallest consecutive difference of the λ-search; `None` for a one-point λ set.
    pub inner_min_diff: Option<f64>,
    /// `‖x_{α_j, λ(α_j)} - x_{α_{j-1}, λ(α_{j-1})}‖`; `None` for `j = 0`.
    pub outer_diff: Option<f64>,
}

/// Result of the nested two-parameter quasi-optimality search.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStepSelection {
    pub alpha: f64,
    pub lambda: f64,
    pub alpha_index: usize,
    pub lambda_index: usize,
    pub solution: HarmonicCoefficients,
    pub trace: Vec<TraceRecord>,
}

fn check_values(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} set is empty")));
    }
    if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "{name} values must be finite and nonnegative, got {x}"
        )));
    }
    Ok(())
}

/// Nested quasi-optimality: for every `α_j` pick `λ(α_j)` from `lambda_values`,
/// then pick `α` from the sequence `x_{α_j, λ(α_j)}`.
///
/// A one-element set skips the corresponding search, so `alpha_values = [0]`
/// gives presmoothing with direct inversion and `lambda_values = [0]` gives
/// single-step regularized collocation.
#[allow(clippy::too_many_arguments)]
pub fn select_two_step(
    samples: &[f64],
    rule: &CubatureRule,
    symbol: &SphericalSymbol,
    beta: &PenaltyWeights,
    alpha_values: &[f64],
    lambda_values: &[f64],
    grid: &EvalGrid,
) -> Result<TwoStepSelection> {
    check_values("alpha", alpha_values)?;
    check_values("lambda", lambda_values)?;
    check_radius(symbol.data_radius(), rule.radius())?;
    check_radius(symbol.solution_radius(), grid.radius())?;
    let m = symbol.max_degree().min(beta.max_degree());
    let c = analyze(samples, rule, m)?;
    let fields = DegreeFields::new(c.values(), m, grid)?;

    let inner = alpha_values
        .par_iter()
        .map(|&alpha| {
            let mut factors = lambda_values
                .iter()
                .map(|&lambda| two_step_factors(alpha, lambda, symbol, beta))
                .collect::<Result<Vec<_>>>()?;
            let diffs: Vec<f64> = factors
                .windows(2)
                .map(|w| fields.sup_of_difference(&w[1], &w[0]))
                .collect();
            let (idx, min) = match quasi_optimal_index(&diffs) {
                Some(i) => (i, Some(diffs[i - 1])),
                None => (0, None),
            };
            Ok((idx, min, factors.swap_remove(idx)))
        })
        .collect::<Result<Vec<_>>>()?;

    let outer: Vec<f64> = inner
        .windows(2)
        .map(|w| fields.sup_of_difference(&w[1].2, &w[0].2))
        .collect();
    let alpha_index = quasi_optimal_index(&outer).unwrap_or(0);
    let lambda_index = inner[alpha_index].0;
    let alpha = alpha_values[alpha_index];
    let lambda = lambda_values[lambda_index];

    let trace = inner
        .iter()
        .enumerate()
        .map(|(j, (li, min, _))| TraceRecord {
            alpha: alpha_values[j],
            chosen_lambda: lambda_values[*li],
            inner_min_diff: *min,
            outer_diff: j.checked_sub(1).map(|i| outer[i]),
        })
        .collect();

    // same arithmetic path as two_step_solve
    let smoothed = c.scale_degrees(&smoothing_factors(lambda, beta), rule.radius())?;
    let solution = invert_regularized(&smoothed, &CollocationParams::new(alpha, symbol.clone())?)?;
    Ok(TwoStepSelection {
        alpha,
        lambda,
        alpha_index,
        lambda_index,
        solution,
        trace,
    })
}

/// Selection trace as CSV: `alpha,chosen_lambda,inner_min_diff,outer_diff`.
/// Undefined differences are written as empty fields.
pub fn trace_csv(trace: &[TraceRecord]) -> String {
    let opt = |v: Option<f64>| v.map(decimal).unwrap_or_default();
    let mut out = String::from("alpha,chosen_lambda,inner_min_diff,outer_diff\n");
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{}\n",
            decimal(r.alpha),
            decimal(r.chosen_lambda),
            opt(r.inner_min_diff),
            opt(r.outer_diff)
        ));
    }
    out
}
