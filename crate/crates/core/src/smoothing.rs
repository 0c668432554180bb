//! Noise reduction on the data sphere: the penalized least-squares smoother
//! `T_{λ,M}` over the reproducing kernel Hilbert space of spherical polynomials.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::harmonics::{eval_basis, legendre_sequence, num_coefficients, BasisEvaluator, SpherePoint};
use crate::operators::{analyze, check_radius, synthesize, HarmonicCoefficients, SphericalSymbol};
use crate::quadrature::CubatureRule;

/// Largest degree accepted by the dense oracle.
pub const ORACLE_MAX_DEGREE: usize = 12;

/// Positive, nondecreasing penalty weights `β_0..β_M` defining the kernel norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyWeights {
    beta: Vec<f64>,
}

impl PenaltyWeights {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::InvalidParameter("penalty weights need degree 0".into()));
        }
        if let Some((k, b)) = beta.iter().enumerate().find(|(_, b)| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "penalty weight beta_{k} = {b} must be positive"
            )));
        }
        if let Some(k) = (0..beta.len() - 1).find(|&k| beta[k + 1] < beta[k] * (1.0 - 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "penalty weights must be nondecreasing: beta_{} = {} < beta_{} = {}",
                k + 1,
                beta[k + 1],
                k,
                beta[k]
            )));
        }
        Ok(Self { beta })
    }

    /// `β_k ≡ c`.
    pub fn constant(max_degree: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; max_degree + 1])
    }

    pub fn values(&self) -> &[f64] {
        &self.beta
    }

    pub fn max_degree(&self) -> usize {
        self.beta.len() - 1
    }
}

/// Recipes for building penalty weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyRule {
    /// `β_k = c`.
    Constant(f64),
    /// `β_k = k + 1`.
    Linear,
    /// `β_k² = a_k^{-1} (k + 1/2)^s` for `k >= 1`, with `β_0 = β_1`.
    InverseSymbol { exponent: f64 },
}

impl PenaltyRule {
    pub fn build(&self, symbol: &SphericalSymbol) -> Result<PenaltyWeights> {
        let m = symbol.max_degree();
        match *self {
            PenaltyRule::Constant(c) => PenaltyWeights::constant(m, c),
            PenaltyRule::Linear => PenaltyWeights::new((0..=m).map(|k| k as f64 + 1.0).collect()),
            PenaltyRule::InverseSymbol { exponent } => {
                let beta_at = |k: usize| {
                    ((k as f64 + 0.5).powf(exponent) / symbol.get(k)).sqrt()
                };
                // the rule is only defined for k >= 1
                let beta = (0..=m)
                    .map(|k| if k == 0 { beta_at(1.min(m)) } else { beta_at(k) })
                    .collect();
                PenaltyWeights::new(beta)
            }
        }
    }
}

impl fmt::Display for PenaltyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PenaltyRule::Constant(c) => write!(f, "constant:{c}"),
            PenaltyRule::Linear => write!(f, "linear"),
            PenaltyRule::InverseSymbol { exponent } if *exponent == 0.0 => {
                write!(f, "inverse-symbol")
            }
            PenaltyRule::InverseSymbol { exponent } => write!(f, "inverse-symbol:{exponent}"),
        }
    }
}

impl FromStr for PenaltyRule {
    type Err = Error;

    /// Parses `constant:<c>`, `linear`, `inverse-symbol` or `inverse-symbol:<s>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s, None),
        };
        let number = |a: &str| {
            a.parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("penalty parameter in `{s}`: {e}")))
        };
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("constant", Some(a)) => Ok(PenaltyRule::Constant(number(a)?)),
            ("linear", None) => Ok(PenaltyRule::Linear),
            ("inverse-symbol", None) => Ok(PenaltyRule::InverseSymbol { exponent: 0.0 }),
            ("inverse-symbol", Some(a)) => Ok(PenaltyRule::InverseSymbol {
                exponent: number(a)?,
            }),
            _ => Err(Error::InvalidParameter(format!("unknown penalty rule `{s}`"))),
        }
    }
}

/// Regularization parameter `λ >= 0` and the penalty weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingParams {
    lambda: f64,
    beta: PenaltyWeights,
}

impl SmoothingParams {
    pub fn new(lambda: f64, beta: PenaltyWeights) -> Result<Self> {
        if lambda.is_nan() || lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda must be nonnegative, got {lambda}"
            )));
        }
        Ok(Self { lambda, beta })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta(&self) -> &PenaltyWeights {
        &self.beta
    }

    /// Per-degree damping `1/(1 + λ β_k²)`.
    pub fn factors(&self) -> Vec<f64> {
        smoothing_factors(self.lambda, &self.beta)
    }
}

pub fn smoothing_factors(lambda: f64, beta: &PenaltyWeights) -> Vec<f64> {
    beta.values()
        .iter()
        .map(|b| 1.0 / (1.0 + lambda * b * b))
        .collect()
}

/// Reproducing kernel `K(t, τ)` evaluated through the addition theorem as
/// `Σ_k β_k^{-2} (2k+1)/(4πρ²) P_k(cos γ)`.
pub fn kernel(
    t: &SpherePoint,
    tau: &SpherePoint,
    beta: &PenaltyWeights,
    max_degree: usize,
) -> Result<f64> {
    check_radius(t.radius(), tau.radius())?;
    if beta.max_degree() < max_degree {
        return Err(Error::LengthMismatch {
            expected: max_degree + 1,
            actual: beta.values().len(),
        });
    }
    let rho = t.radius();
    let mut p = vec![0.0; max_degree + 1];
    legendre_sequence(t.direction().dot(tau.direction()), &mut p);
    let sum: f64 = (0..=max_degree)
        .map(|k| {
            let b = beta.values()[k];
            (2 * k + 1) as f64 * p[k] / (b * b)
        })
        .sum();
    Ok(sum / (4.0 * PI * rho * rho))
}

/// Coefficients of `K(·, τ)`: `β_k^{-2} (1/ρ) Y_{k,j}(τ/ρ)`.
pub fn kernel_coefficients(
    tau: &SpherePoint,
    beta: &PenaltyWeights,
    max_degree: usize,
) -> Result<HarmonicCoefficients> {
    if beta.max_degree() < max_degree {
        return Err(Error::LengthMismatch {
            expected: max_degree + 1,
            actual: beta.values().len(),
        });
    }
    let inv: Vec<f64> = beta.values().iter().map(|b| 1.0 / (b * b)).collect();
    HarmonicCoefficients::new(max_degree, tau.radius(), eval_basis(max_degree, tau))?
        .scale_degrees(&inv, tau.radius())
}

/// Kernel inner product `Σ β_k² f̂_{k,j} ĝ_{k,j}`.
pub fn rkhs_inner(
    f: &HarmonicCoefficients,
    g: &HarmonicCoefficients,
    beta: &PenaltyWeights,
) -> Result<f64> {
    check_radius(f.radius(), g.radius())?;
    let m = f.max_degree().min(g.max_degree());
    if beta.max_degree() < m {
        return Err(Error::LengthMismatch {
            expected: m + 1,
            actual: beta.values().len(),
        });
    }
    let mut total = 0.0;
    for k in 0..=m {
        let b2 = beta.values()[k].powi(2);
        let dot: f64 = f.degree(k).iter().zip(g.degree(k)).map(|(a, b)| a * b).sum();
        total += b2 * dot;
    }
    Ok(total)
}

/// Closed-form smoother: `ĉ_{k,j} / (1 + λ β_k²)` where `ĉ` are the discrete
/// Fourier coefficients of the samples. The truncation degree is that of the
/// penalty weights, and the rule must be exact to twice that degree.
pub fn smooth(
    samples: &[f64],
    rule: &CubatureRule,
    params: &SmoothingParams,
) -> Result<HarmonicCoefficients> {
    let m = params.beta().max_degree();
    let c = analyze(samples, rule, m)?;
    c.scale_degrees(&params.factors(), rule.radius())
}

/// Value of the penalized least-squares objective
/// `Σ ω_i (p(t_i) - y_i)² + λ ‖p‖²_K` at the polynomial `p`.
pub fn smoothing_objective(
    p: &HarmonicCoefficients,
    samples: &[f64],
    rule: &CubatureRule,
    params: &SmoothingParams,
) -> Result<f64> {
    if samples.len() != rule.len() {
        return Err(Error::LengthMismatch {
            expected: rule.len(),
            actual: samples.len(),
        });
    }
    let values = synthesize(p, rule.points())?;
    let misfit: f64 = values
        .iter()
        .zip(samples)
        .zip(rule.weights())
        .map(|((v, y), w)| w * (v - y).powi(2))
        .sum();
    Ok(misfit + params.lambda() * rkhs_inner(p, p, params.beta())?)
}

/// Minimizer of the penalized least-squares objective by a dense solve of the
/// normal equations `(Φᵀ W Φ + λ diag(β_k²)) c = Φᵀ W y` in the coefficient
/// basis. Independent of the cubature-orthogonality shortcut used by
/// [`smooth`]; restricted to `M <= 12`.
pub fn smooth_oracle(
    samples: &[f64],
    rule: &CubatureRule,
    params: &SmoothingParams,
) -> Result<HarmonicCoefficients> {
    let m = params.beta().max_degree();
    if m > ORACLE_MAX_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "dense oracle supports M <= {ORACLE_MAX_DEGREE}, got {m}"
        )));
    }
    if samples.len() != rule.len() {
        return Err(Error::LengthMismatch {
            expected: rule.len(),
            actual: samples.len(),
        });
    }
    let n = num_coefficients(m);
    let mut design = DMatrix::<f64>::zeros(rule.len(), n);
    let mut eval = BasisEvaluator::new(m);
    let mut row = vec![0.0; n];
    for (i, p) in rule.points().iter().enumerate() {
        eval.eval_into(p.direction(), 1.0 / p.radius(), &mut row);
        for (c, v) in row.iter().enumerate() {
            design[(i, c)] = *v;
        }
    }
    let w = DVector::from_column_slice(rule.weights());
    let y = DVector::from_column_slice(samples);
    let weighted = DMatrix::from_fn(rule.len(), n, |i, c| w[i] * design[(i, c)]);
    let mut normal = design.transpose() * &weighted;
    for c in 0..n {
        let k = (c as f64).sqrt() as usize;
        let k = if (k + 1) * (k + 1) <= c { k + 1 } else { k };
        normal[(c, c)] += params.lambda() * params.beta().values()[k].powi(2);
    }
    let rhs = weighted.transpose() * y;
    let chol = normal.cholesky().ok_or_else(|| {
        Error::Singular("normal equations of the smoothing functional are not positive definite".into())
    })?;
    let sol = chol.solve(&rhs);
    HarmonicCoefficients::new(m, rule.radius(), sol.iter().copied().collect())
}
