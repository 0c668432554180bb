//! Spectral analysis and synthesis, the truncated pseudo-differential operator
//! `A_M` and Sobolev-type norms.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harmonics::{num_coefficients, BasisEvaluator, DegreeIndex, SpherePoint};
use crate::quadrature::CubatureRule;

/// Relative tolerance when checking that a point lies on a coefficient set's sphere.
pub const RADIUS_TOLERANCE: f64 = 1e-9;

/// Relative slack allowed when checking `a_{k+1} <= a_k`.
const MONOTONE_SLACK: f64 = 1e-12;

pub(crate) fn check_radius(expected: f64, actual: f64) -> Result<()> {
    if (expected - actual).abs() > RADIUS_TOLERANCE * expected.abs().max(actual.abs()) {
        return Err(Error::RadiusMismatch { expected, actual });
    }
    Ok(())
}

/// Spherical Fourier coefficients `ĉ_{k,j} = ⟨(1/r) Y_{k,j}(·/r), c⟩` of a
/// function on the sphere of radius `r`, stored degree-major (`k² + j - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoefficients {
    max_degree: usize,
    radius: f64,
    values: Vec<f64>,
}

impl HarmonicCoefficients {
    pub fn new(max_degree: usize, radius: f64, values: Vec<f64>) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coefficient radius must be positive, got {radius}"
            )));
        }
        let expected = num_coefficients(max_degree);
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(Self {
            max_degree,
            radius,
            values,
        })
    }

    pub fn zeros(max_degree: usize, radius: f64) -> Result<Self> {
        Self::new(max_degree, radius, vec![0.0; num_coefficients(max_degree)])
    }

    pub fn from_fn<F: FnMut(DegreeIndex) -> f64>(
        max_degree: usize,
        radius: f64,
        mut f: F,
    ) -> Result<Self> {
        let values = (0..num_coefficients(max_degree))
            .map(|i| f(DegreeIndex::from_flat(i)))
            .collect();
        Self::new(max_degree, radius, values)
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, idx: DegreeIndex) -> Option<f64> {
        self.values.get(idx.flat()).copied()
    }

    pub fn set(&mut self, idx: DegreeIndex, value: f64) -> Result<()> {
        if idx.k() > self.max_degree {
            return Err(Error::DegreeMismatch(format!(
                "degree {} exceeds the truncation degree {}",
                idx.k(),
                self.max_degree
            )));
        }
        self.values[idx.flat()] = value;
        Ok(())
    }

    /// The `2k+1` coefficients of degree `k`.
    pub fn degree(&self, k: usize) -> &[f64] {
        &self.values[k * k..(k + 1) * (k + 1)]
    }

    /// Iterates `(k, j, value)` in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| {
            let idx = DegreeIndex::from_flat(i);
            (idx.k(), idx.j(), v)
        })
    }

    /// Applies a per-degree multiplier and re-tags the result with `radius`.
    pub fn scale_degrees(&self, factors: &[f64], radius: f64) -> Result<Self> {
        if factors.len() <= self.max_degree {
            return Err(Error::LengthMismatch {
                expected: self.max_degree + 1,
                actual: factors.len(),
            });
        }
        let mut values = self.values.clone();
        for k in 0..=self.max_degree {
            for v in &mut values[k * k..(k + 1) * (k + 1)] {
                *v *= factors[k];
            }
        }
        Self::new(self.max_degree, radius, values)
    }

    /// `self - other`; both must live on the same sphere and share the degree.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Self::new(self.max_degree, self.radius, values)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            max_degree: self.max_degree,
            radius: self.radius,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute coefficient-wise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        check_radius(self.radius, other.radius)?;
        if self.max_degree != other.max_degree {
            return Err(Error::DegreeMismatch(format!(
                "truncation degrees differ: {} vs {}",
                self.max_degree, other.max_degree
            )));
        }
        Ok(())
    }
}

/// Discrete Fourier coefficients `Σ_i ω_i (1/ρ) Y_{k,j}(t_i/ρ) s_i` for `k <= M`.
///
/// Exact for spherical polynomials of degree `<= M` because the rule integrates
/// degree `2M` exactly; a weaker rule is rejected.
pub fn analyze(
    samples: &[f64],
    rule: &CubatureRule,
    max_degree: usize,
) -> Result<HarmonicCoefficients> {
    rule.require_exactness(max_degree)?;
    if samples.len() != rule.len() {
        return Err(Error::LengthMismatch {
            expected: rule.len(),
            actual: samples.len(),
        });
    }
    let n = num_coefficients(max_degree);
    let mut acc = vec![0.0; n];
    let mut row = vec![0.0; n];
    let mut eval = BasisEvaluator::new(max_degree);
    let scale = 1.0 / rule.radius();
    for ((p, &w), &s) in rule.points().iter().zip(rule.weights()).zip(samples) {
        eval.eval_into(p.direction(), scale, &mut row);
        let ws = w * s;
        for (a, b) in acc.iter_mut().zip(&row) {
            *a += ws * b;
        }
    }
    HarmonicCoefficients::new(max_degree, rule.radius(), acc)
}

/// Point values `Σ ĉ_{k,j} (1/r) Y_{k,j}(t/r)` on the coefficients' sphere.
pub fn synthesize(coeffs: &HarmonicCoefficients, pts: &[SpherePoint]) -> Result<Vec<f64>> {
    let r = coeffs.radius();
    let mut eval = BasisEvaluator::new(coeffs.max_degree());
    let mut row = vec![0.0; coeffs.values().len()];
    pts.iter()
        .map(|p| {
            check_radius(r, p.radius())?;
            eval.eval_into(p.direction(), 1.0 / r, &mut row);
            Ok(row.iter().zip(coeffs.values()).map(|(b, c)| b * c).sum())
        })
        .collect()
}

/// Named families of spherical symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolPreset {
    /// Satellite-to-satellite tracking, `a_k = (k+1)/ρ (R/ρ)^k`.
    Sst,
    /// Satellite gravity gradiometry, `a_k = (k+1)(k+2)/ρ² (R/ρ)^k`.
    Sgg,
    /// `a_k = q^{-k}` with base `q > 1`.
    Geometric(f64),
    /// `a_k = (k+1)^{-s}` with exponent `s > 0`.
    Polynomial(f64),
    /// User-supplied table.
    Custom,
}

impl fmt::Display for SymbolPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolPreset::Sst => write!(f, "sst"),
            SymbolPreset::Sgg => write!(f, "sgg"),
            SymbolPreset::Geometric(q) => write!(f, "geometric:{q}"),
            SymbolPreset::Polynomial(s) => write!(f, "polynomial:{s}"),
            SymbolPreset::Custom => write!(f, "custom"),
        }
    }
}

impl FromStr for SymbolPreset {
    type Err = Error;

    /// Parses `sst`, `sgg`, `geometric:<q>` or `polynomial:<s>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s, None),
        };
        let number = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::InvalidParameter(format!("symbol `{name}` needs a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("symbol parameter in `{s}`: {e}")))
        };
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("sst", None) => Ok(SymbolPreset::Sst),
            ("sgg", None) => Ok(SymbolPreset::Sgg),
            ("geometric", a) => Ok(SymbolPreset::Geometric(number(a)?)),
            ("polynomial", a) => Ok(SymbolPreset::Polynomial(number(a)?)),
            _ => Err(Error::InvalidParameter(format!("unknown symbol `{s}`"))),
        }
    }
}

/// Positive, nonincreasing multipliers `a_0..a_M` of `A_M`, mapping functions on
/// `Ω_R` to functions on `Ω_ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalSymbol {
    a: Vec<f64>,
    solution_radius: f64,
    data_radius: f64,
    preset: SymbolPreset,
}

impl SphericalSymbol {
    pub fn new(a: Vec<f64>, solution_radius: f64, data_radius: f64, preset: SymbolPreset) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidParameter("symbol needs at least one degree".into()));
        }
        if !(solution_radius.is_finite() && solution_radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "solution radius R must be positive, got {solution_radius}"
            )));
        }
        if !(data_radius.is_finite() && data_radius >= solution_radius) {
            return Err(Error::InvalidParameter(format!(
                "data radius rho={data_radius} must be finite and >= R={solution_radius}"
            )));
        }
        if let Some((k, v)) = a.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "symbol {preset} has nonpositive a_{k} = {v}"
            )));
        }
        if let Some(k) = (0..a.len() - 1).find(|&k| a[k + 1] > a[k] * (1.0 + MONOTONE_SLACK)) {
            return Err(Error::InvalidParameter(format!(
                "symbol {preset} is not nonincreasing: a_{} = {} > a_{} = {}",
                k + 1,
                a[k + 1],
                k,
                a[k]
            )));
        }
        Ok(Self {
            a,
            solution_radius,
            data_radius,
            preset,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.a
    }

    pub fn get(&self, k: usize) -> f64 {
        self.a[k]
    }

    /// Highest degree covered.
    pub fn max_degree(&self) -> usize {
        self.a.len() - 1
    }

    /// `R`, the radius of the sphere carrying the solution.
    pub fn solution_radius(&self) -> f64 {
        self.solution_radius
    }

    /// `ρ`, the radius of the sphere carrying the data.
    pub fn data_radius(&self) -> f64 {
        self.data_radius
    }

    pub fn preset(&self) -> SymbolPreset {
        self.preset
    }
}

/// Builds the symbol of a named preset for degrees `0..=M`.
pub fn symbol_preset(
    preset: SymbolPreset,
    solution_radius: f64,
    data_radius: f64,
    max_degree: usize,
) -> Result<SphericalSymbol> {
    if !(solution_radius > 0.0 && solution_radius <= data_radius) {
        return Err(Error::InvalidParameter(format!(
            "preset radii must satisfy 0 < R <= rho, got R={solution_radius}, rho={data_radius}"
        )));
    }
    let ratio = solution_radius / data_radius;
    let rho = data_radius;
    let a: Vec<f64> = match preset {
        SymbolPreset::Sst => (0..=max_degree)
            .map(|k| (k as f64 + 1.0) / rho * ratio.powi(k as i32))
            .collect(),
        SymbolPreset::Sgg => (0..=max_degree)
            .map(|k| {
                let kf = k as f64;
                (kf + 1.0) * (kf + 2.0) / (rho * rho) * ratio.powi(k as i32)
            })
            .collect(),
        SymbolPreset::Geometric(q) => {
            if !(q.is_finite() && q > 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "geometric symbol base must exceed 1, got {q}"
                )));
            }
            (0..=max_degree).map(|k| q.powi(-(k as i32))).collect()
        }
        SymbolPreset::Polynomial(s) => {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "polynomial symbol exponent must be positive, got {s}"
                )));
            }
            (0..=max_degree).map(|k| (k as f64 + 1.0).powf(-s)).collect()
        }
        SymbolPreset::Custom => {
            return Err(Error::InvalidParameter(
                "custom symbols are built with SphericalSymbol::new".into(),
            ))
        }
    };
    SphericalSymbol::new(a, solution_radius, data_radius, preset)
}

/// `A_M x`: multiplies degree `k` by `a_k` and moves the result to `Ω_ρ`.
pub fn apply_forward(
    symbol: &SphericalSymbol,
    x: &HarmonicCoefficients,
) -> Result<HarmonicCoefficients> {
    check_radius(symbol.solution_radius(), x.radius())?;
    if x.max_degree() > symbol.max_degree() {
        return Err(Error::DegreeMismatch(format!(
            "coefficients of degree {} exceed the symbol length (degree {})",
            x.max_degree(),
            symbol.max_degree()
        )));
    }
    x.scale_degrees(symbol.values(), symbol.data_radius())
}

/// Per-degree denominators of a Sobolev-type norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessWeights {
    w: Vec<f64>,
}

impl SmoothnessWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some((k, v)) = w.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "smoothness weight w_{k} = {v} must be positive"
            )));
        }
        Ok(Self { w })
    }

    /// `w_k = ψ²(a_k²)`.
    pub fn from_symbol<F: Fn(f64) -> f64>(symbol: &SphericalSymbol, psi: F) -> Result<Self> {
        Self::new(symbol.values().iter().map(|a| psi(a * a).powi(2)).collect())
    }

    /// `w_k = φ²(β_k^{-2})`.
    pub fn from_penalty<F: Fn(f64) -> f64>(beta: &[f64], phi: F) -> Result<Self> {
        Self::new(beta.iter().map(|b| phi(1.0 / (b * b)).powi(2)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }
}

/// `sqrt(Σ_{k,j} ĉ_{k,j}² / w_k)`.
pub fn sobolev_norm(coeffs: &HarmonicCoefficients, w: &SmoothnessWeights) -> Result<f64> {
    let w = w.values();
    if w.len() <= coeffs.max_degree() {
        return Err(Error::LengthMismatch {
            expected: coeffs.max_degree() + 1,
            actual: w.len(),
        });
    }
    let mut total = 0.0;
    for (k, wk) in w.iter().enumerate().take(coeffs.max_degree() + 1) {
        let s: f64 = coeffs.degree(k).iter().map(|c| c * c).sum();
        total += s / wk;
    }
    Ok(total.sqrt())
}
