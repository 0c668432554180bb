//! Gauss-Legendre rules on `[-1, 1]` and the product cubature rule on a sphere.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::harmonics::{SpherePoint, UnitVector};

const NEWTON_MAX_STEPS: usize = 100;

/// Nodes and weights of a one-dimensional Gauss-Legendre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct LineRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl LineRule {
    /// Nodes in strictly increasing order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// `P_n(t)` and `P_{n-1}(t)`.
fn legendre_pair(n: usize, t: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = t;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * t * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// The `n`-point Gauss-Legendre rule, exact for polynomials of degree `2n-1`.
///
/// Roots of `P_n` are refined by Newton's method from the Tricomi-type initial
/// guess `cos(π(i + 3/4)/(n + 1/2))`; weights are `2/((1-t²) P_n'(t)²)`.
pub fn gauss_legendre(n: usize) -> Result<LineRule> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "Gauss-Legendre rule needs at least one node".into(),
        ));
    }
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // roots come in ± pairs; solve for the positive half
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut converged = false;
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_STEPS {
            let (p, pm1) = legendre_pair(n, t);
            dp = nf * (t * p - pm1) / (t * t - 1.0);
            let dt = p / dp;
            t -= dt;
            if dt.abs() <= 1e-15 * t.abs().max(1.0) {
                converged = true;
                let (p, pm1) = legendre_pair(n, t);
                dp = nf * (t * p - pm1) / (t * t - 1.0);
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence { n });
        }
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes[i] = -t;
        nodes[n - 1 - i] = t;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(LineRule { nodes, weights })
}

/// Positive-weight cubature on `Ω_ρ` exact for spherical polynomials of degree `<= 2M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubatureRule {
    points: Vec<SpherePoint>,
    weights: Vec<f64>,
    max_degree: usize,
    exactness_degree: usize,
    radius: f64,
}

impl CubatureRule {
    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The polynomial degree `M` the rule was built for.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Degree of exactness, `2M`.
    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fails unless the rule integrates products of degree-`degree` polynomials exactly.
    pub fn require_exactness(&self, degree: usize) -> Result<()> {
        if self.exactness_degree < 2 * degree {
            return Err(Error::InsufficientExactness {
                required: 2 * degree,
                available: self.exactness_degree,
            });
        }
        Ok(())
    }

    /// Copy of the rule with one weight multiplied by `factor`. Used to check
    /// that the verification suite notices a corrupted rule.
    #[doc(hidden)]
    pub fn with_scaled_weight(&self, index: usize, factor: f64) -> Self {
        let mut out = self.clone();
        out.weights[index] *= factor;
        out
    }
}

/// Tensor-product rule: `M+1` Gauss-Legendre nodes in `cos θ` times `2(M+1)`
/// equispaced longitudes `φ_l = π l/(M+1)`. Point `(i, l)` carries weight
/// `ρ² π/(M+1) w_i`, so the rule has `N = 2(M+1)²` points and integrates over
/// the surface measure of `Ω_ρ`. Points are ordered latitude-major.
pub fn sphere_rule(max_degree: usize, rho: f64) -> Result<CubatureRule> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sphere radius must be positive, got {rho}"
        )));
    }
    let n_lat = max_degree + 1;
    let n_lon = 2 * (max_degree + 1);
    let line = gauss_legendre(n_lat)?;
    let dphi = PI / n_lat as f64;
    let lon: Vec<(f64, f64)> = (0..n_lon).map(|l| (l as f64 * dphi).sin_cos()).collect();
    let mut points = Vec::with_capacity(n_lat * n_lon);
    let mut weights = Vec::with_capacity(n_lat * n_lon);
    for (&ct, &w) in line.nodes().iter().zip(line.weights()) {
        let st = (1.0 - ct * ct).sqrt();
        let wi = rho * rho * dphi * w;
        for &(sp, cp) in &lon {
            let u = UnitVector::normalize(st * cp, st * sp, ct)?;
            points.push(SpherePoint::new(u, rho)?);
            weights.push(wi);
        }
    }
    Ok(CubatureRule {
        points,
        weights,
        max_degree,
        exactness_degree: 2 * max_degree,
        radius: rho,
    })
}

/// `Σ ω_i s_i`, summed in point order.
pub fn integrate(rule: &CubatureRule, samples: &[f64]) -> Result<f64> {
    if samples.len() != rule.len() {
        return Err(Error::LengthMismatch {
            expected: rule.len(),
            actual: samples.len(),
        });
    }
    Ok(rule.weights.iter().zip(samples).map(|(w, s)| w * s).sum())
}
