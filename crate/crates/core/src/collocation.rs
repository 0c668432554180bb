//! Regularized collocation `R_{α,M}`, the composite two-step solution, filtered
//! polynomial approximation and the computable norm bound of `R_{α,M} T_{λ,M}`.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::harmonics::{legendre_sequence, SpherePoint};
use crate::operators::{check_radius, HarmonicCoefficients, SphericalSymbol};
use crate::quadrature::{sphere_rule, CubatureRule};
use crate::smoothing::{smooth, smoothing_factors, PenaltyWeights, SmoothingParams};

/// Regularization parameter `α >= 0` of the inversion step and the operator symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationParams {
    alpha: f64,
    symbol: SphericalSymbol,
}

impl CollocationParams {
    pub fn new(alpha: f64, symbol: SphericalSymbol) -> Result<Self> {
        if alpha.is_nan() || alpha < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be nonnegative, got {alpha}"
            )));
        }
        Ok(Self { alpha, symbol })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn symbol(&self) -> &SphericalSymbol {
        &self.symbol
    }
}

/// Tikhonov filter `a_k / (α + a_k²)` for every degree of the symbol.
pub fn collocation_factors(alpha: f64, symbol: &SphericalSymbol) -> Result<Vec<f64>> {
    symbol
        .values()
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let d = alpha + a * a;
            if d == 0.0 {
                return Err(Error::Singular(format!(
                    "alpha = 0 with a_{k} = 0 has no inverse"
                )));
            }
            Ok(a / d)
        })
        .collect()
}

/// Combined per-degree factor `a_k/(α + a_k²) · 1/(1 + λβ_k²)` of the two-step solution.
pub fn two_step_factors(
    alpha: f64,
    lambda: f64,
    symbol: &SphericalSymbol,
    beta: &PenaltyWeights,
) -> Result<Vec<f64>> {
    let m = symbol.max_degree().min(beta.max_degree());
    let col = collocation_factors(alpha, symbol)?;
    let sm = smoothing_factors(lambda, beta);
    Ok((0..=m).map(|k| sm[k] * col[k]).collect())
}

/// `R_{α,M} p`: coefficients `a_k/(α + a_k²) p̂_{k,j}`, moved from `Ω_ρ` to `Ω_R`.
/// At `α = 0` this is the formal inverse `p̂_{k,j}/a_k`.
pub fn invert_regularized(
    p: &HarmonicCoefficients,
    params: &CollocationParams,
) -> Result<HarmonicCoefficients> {
    let symbol = params.symbol();
    check_radius(symbol.data_radius(), p.radius())?;
    if p.max_degree() > symbol.max_degree() {
        return Err(Error::DegreeMismatch(format!(
            "data of degree {} exceed the symbol length (degree {})",
            p.max_degree(),
            symbol.max_degree()
        )));
    }
    let factors = collocation_factors(params.alpha(), symbol)?;
    p.scale_degrees(&factors, symbol.solution_radius())
}

/// Two-step regularized solution `R_{α,M} T_{λ,M} y^ε` from samples on the rule's points.
pub fn two_step_solve(
    samples: &[f64],
    rule: &CubatureRule,
    sp: &SmoothingParams,
    cp: &CollocationParams,
) -> Result<HarmonicCoefficients> {
    check_radius(cp.symbol().data_radius(), rule.radius())?;
    invert_regularized(&smooth(samples, rule, sp)?, cp)
}

/// A filter `h` with `h = 1` on `[0, 1/2]`, `h = 0` on `[1, ∞)` and a
/// user-supplied transition on `(1/2, 1)` clamped to `[0, 1]`.
#[derive(Clone, Copy)]
pub struct FilterFunction {
    transition: fn(f64) -> f64,
}

fn cosine_transition(t: f64) -> f64 {
    (PI * (t - 0.5)).cos().powi(2)
}

impl FilterFunction {
    /// `h(t) = cos²(π(t - 1/2))` on the transition band; `C¹` at both knots.
    pub fn cosine() -> Self {
        Self {
            transition: cosine_transition,
        }
    }

    /// Custom transition. It should fall continuously from 1 at `t = 1/2` to 0 at `t = 1`.
    pub fn new(transition: fn(f64) -> f64) -> Self {
        Self { transition }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.5 {
            1.0
        } else if t >= 1.0 {
            0.0
        } else {
            (self.transition)(t).clamp(0.0, 1.0)
        }
    }
}

impl Default for FilterFunction {
    fn default() -> Self {
        Self::cosine()
    }
}

impl fmt::Debug for FilterFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FilterFunction").finish_non_exhaustive()
    }
}

/// Filtered approximation: degree `k` is scaled by `h(k/M)`.
///
/// Degrees up to `M/2` pass unchanged and degrees `>= M` are removed. For
/// `M = 0` only the constant term is kept.
pub fn filtered_projection(
    c: &HarmonicCoefficients,
    h: &FilterFunction,
    max_degree: usize,
) -> HarmonicCoefficients {
    let factors: Vec<f64> = (0..=c.max_degree())
        .map(|k| {
            if max_degree == 0 {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                h.eval(k as f64 / max_degree as f64)
            }
        })
        .collect();
    c.scale_degrees(&factors, c.radius())
        .expect("factor table covers every degree")
}

/// Precomputed weighted Legendre sums `S_k(t) = Σ_i ω_i P_k(t·t_i/(Rρ))` for the
/// norm bound of `R_{α,M} T_{λ,M}`, so the bound can be evaluated cheaply for
/// many `(α, λ)` pairs.
#[derive(Debug, Clone)]
pub struct NormBound {
    max_degree: usize,
    prefactor: f64,
    sums: Vec<f64>,
}

impl NormBound {
    pub fn new(rule: &CubatureRule, eval_grid: &[SpherePoint], max_degree: usize) -> Result<Self> {
        let first = eval_grid.first().ok_or(Error::EmptyGrid)?;
        let r = first.radius();
        for p in eval_grid {
            check_radius(r, p.radius())?;
        }
        rule.require_exactness(max_degree)?;
        let stride = max_degree + 1;
        let mut sums = vec![0.0; eval_grid.len() * stride];
        let mut pk = vec![0.0; stride];
        for (row, t) in sums.chunks_mut(stride).zip(eval_grid) {
            for (ti, &w) in rule.points().iter().zip(rule.weights()) {
                legendre_sequence(t.direction().dot(ti.direction()), &mut pk);
                for (s, p) in row.iter_mut().zip(&pk) {
                    *s += w * p;
                }
            }
        }
        Ok(Self {
            max_degree,
            prefactor: 1.0 / (r * rule.radius()),
            sums,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `(1/(Rρ)) max_t |Σ_k (2k+1) a_k / (4π(α + a_k²)(1 + λβ_k²)) S_k(t)|`.
    pub fn evaluate(&self, sp: &SmoothingParams, cp: &CollocationParams) -> Result<f64> {
        let m = self.max_degree;
        if cp.symbol().max_degree() < m || sp.beta().max_degree() < m {
            return Err(Error::DegreeMismatch(format!(
                "norm bound prepared for degree {m} but parameters cover degrees {} and {}",
                cp.symbol().max_degree(),
                sp.beta().max_degree()
            )));
        }
        let f = two_step_factors(cp.alpha(), sp.lambda(), cp.symbol(), sp.beta())?;
        let coef: Vec<f64> = (0..=m)
            .map(|k| (2 * k + 1) as f64 * f[k] / (4.0 * PI))
            .collect();
        let max = self
            .sums
            .chunks(m + 1)
            .map(|row| row.iter().zip(&coef).map(|(s, c)| s * c).sum::<f64>().abs())
            .fold(0.0, f64::max);
        Ok(self.prefactor * max)
    }
}

/// Points of `sphere_rule(2M, R)`, the default grid for sup-norm estimates on `Ω_R`.
pub fn default_eval_points(max_degree: usize, radius: f64) -> Result<Vec<SpherePoint>> {
    Ok(sphere_rule(2 * max_degree, radius)?.points().to_vec())
}

/// Grid estimate of the `C(Ω_ρ) → C(Ω_R)` norm bound of `R_{α,M} T_{λ,M}`.
///
/// The maximum over the true sphere is approximated by the maximum over
/// `eval_grid`, which must lie on `Ω_R`.
pub fn composite_norm_bound(
    sp: &SmoothingParams,
    cp: &CollocationParams,
    rule: &CubatureRule,
    eval_grid: &[SpherePoint],
) -> Result<f64> {
    let symbol = cp.symbol();
    check_radius(symbol.data_radius(), rule.radius())?;
    if let Some(p) = eval_grid.first() {
        check_radius(symbol.solution_radius(), p.radius())?;
    }
    let m = symbol.max_degree().min(sp.beta().max_degree());
    NormBound::new(rule, eval_grid, m)?.evaluate(sp, cp)
}
