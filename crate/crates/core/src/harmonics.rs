//! Legendre polynomials and real orthonormal spherical harmonics.
//!
//! Convention: for degree `k` and order `m = -k..=k` the real harmonic is
//!
//! ```text
//! Y_{k,m}(θ, φ) = q_k^0(cos θ)                      m = 0
//!               = √2 q_k^m(cos θ) cos(m φ)          m > 0
//!               = √2 q_k^|m|(cos θ) sin(|m| φ)      m < 0
//! ```
//!
//! where `q_k^m = sqrt((2k+1)/(4π) (k-m)!/(k+m)!) P_k^m` is the associated
//! Legendre function normalized without the Condon-Shortley phase. The
//! harmonics are orthonormal in `L2` of the unit sphere. The order index used
//! throughout the crate is `j = m + k + 1`, so `j` runs over `1..=2k+1` and the
//! flat position of `(k, j)` in a degree-major vector is `k² + j - 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const UNIT_TOLERANCE: f64 = 1e-12;
const LEGENDRE_DOMAIN_SLACK: f64 = 1e-12;

/// Number of real harmonics of degree at most `max_degree`, i.e. `(M+1)²`.
#[inline]
pub fn num_coefficients(max_degree: usize) -> usize {
    (max_degree + 1) * (max_degree + 1)
}

/// A direction on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitVector {
    pub const NORTH_POLE: UnitVector = UnitVector {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    /// Accepts direction cosines whose squared norm is 1 within `1e-12`.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n2 = x * x + y * y + z * z;
        if !n2.is_finite() || (n2 - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::Domain {
                value: n2,
                domain: "squared norm of a unit vector (1 ± 1e-12)",
            });
        }
        Ok(Self { x, y, z })
    }

    /// Scales an arbitrary nonzero vector onto the unit sphere.
    pub fn normalize(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Domain {
                value: n,
                domain: "norm of a nonzero finite vector",
            });
        }
        Ok(Self {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// Direction with polar angle `theta` (from +z) and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            x: st * cp,
            y: st * sp,
            z: ct,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Cosine of the angle between two directions, clamped to `[-1, 1]`.
    pub fn dot(&self, other: &UnitVector) -> f64 {
        (self.x * other.x + self.y * other.y + self.z * other.z).clamp(-1.0, 1.0)
    }
}

/// A point `t` on the sphere `Ω_r` of radius `r` centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    direction: UnitVector,
    radius: f64,
}

impl SpherePoint {
    pub fn new(direction: UnitVector, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(Self { direction, radius })
    }

    /// Builds a point from Cartesian coordinates; the radius is the Euclidean norm.
    pub fn from_cartesian(x: f64, y: f64, z: f64) -> Result<Self> {
        let radius = (x * x + y * y + z * z).sqrt();
        let direction = UnitVector::normalize(x, y, z)?;
        Self::new(direction, radius)
    }

    pub fn direction(&self) -> &UnitVector {
        &self.direction
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn cartesian(&self) -> [f64; 3] {
        let r = self.radius;
        [r * self.direction.x, r * self.direction.y, r * self.direction.z]
    }
}

/// Degree `k` and order index `j ∈ 1..=2k+1` of a real harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeIndex {
    k: usize,
    j: usize,
}

impl DegreeIndex {
    pub fn new(k: usize, j: usize) -> Result<Self> {
        if j == 0 || j > 2 * k + 1 {
            return Err(Error::InvalidIndex { k, j });
        }
        Ok(Self { k, j })
    }

    /// Index for order `m ∈ -k..=k`.
    pub fn from_order(k: usize, m: i64) -> Result<Self> {
        let j = m + k as i64 + 1;
        if j < 1 {
            return Err(Error::InvalidIndex { k, j: 0 });
        }
        Self::new(k, j as usize)
    }

    /// Inverse of [`DegreeIndex::flat`].
    pub fn from_flat(i: usize) -> Self {
        let k = (i as f64).sqrt() as usize;
        // guard against rounding in the square root
        let k = if (k + 1) * (k + 1) <= i {
            k + 1
        } else if k * k > i {
            k - 1
        } else {
            k
        };
        Self { k, j: i - k * k + 1 }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn j(&self) -> usize {
        self.j
    }

    /// Signed order `m = j - k - 1`.
    pub fn order(&self) -> i64 {
        self.j as i64 - self.k as i64 - 1
    }

    /// Position in a degree-major coefficient vector.
    pub fn flat(&self) -> usize {
        self.k * self.k + self.j - 1
    }
}

/// Legendre polynomial `P_k(t)` by the three-term recurrence.
pub fn legendre(k: usize, t: f64) -> Result<f64> {
    if t.is_nan() || t.abs() > 1.0 + LEGENDRE_DOMAIN_SLACK {
        return Err(Error::Domain {
            value: t,
            domain: "[-1, 1]",
        });
    }
    let t = t.clamp(-1.0, 1.0);
    let mut prev = 1.0;
    if k == 0 {
        return Ok(prev);
    }
    let mut cur = t;
    for n in 1..k {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * t * cur - nf * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Writes `P_0(t), ..., P_{out.len()-1}(t)` into `out`. The caller guarantees `|t| <= 1`.
pub fn legendre_sequence(t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = t;
    for n in 1..out.len() - 1 {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + 1.0) * t * out[n] - nf * out[n - 1]) / (nf + 1.0);
    }
}

#[inline]
fn tri(k: usize, m: usize) -> usize {
    k * (k + 1) / 2 + m
}

/// Reusable workspace for evaluating all harmonics up to a fixed degree.
///
/// Holds the triangular table of normalized associated Legendre values and the
/// azimuthal factors so repeated evaluations do not allocate.
#[derive(Debug, Clone)]
pub struct BasisEvaluator {
    max_degree: usize,
    plm: Vec<f64>,
    cos_m: Vec<f64>,
    sin_m: Vec<f64>,
}

impl BasisEvaluator {
    pub fn new(max_degree: usize) -> Self {
        Self {
            max_degree,
            plm: vec![0.0; tri(max_degree, max_degree) + 1],
            cos_m: vec![0.0; max_degree + 1],
            sin_m: vec![0.0; max_degree + 1],
        }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Normalized associated Legendre values `q_k^m(cos θ)` with `sin θ = s`.
    fn fill_legendre(&mut self, c: f64, s: f64) {
        let big_m = self.max_degree;
        let p = &mut self.plm;
        p[0] = 0.5 / PI.sqrt();
        for m in 1..=big_m {
            let mf = m as f64;
            p[tri(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[tri(m - 1, m - 1)];
        }
        for m in 0..big_m {
            let mf = m as f64;
            p[tri(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * c * p[tri(m, m)];
        }
        for m in 0..=big_m {
            let mf = m as f64;
            for k in (m + 2)..=big_m {
                let kf = k as f64;
                let a = ((4.0 * kf * kf - 1.0) / (kf * kf - mf * mf)).sqrt();
                let km1 = kf - 1.0;
                let b = ((km1 * km1 - mf * mf) / (4.0 * km1 * km1 - 1.0)).sqrt();
                p[tri(k, m)] = a * (c * p[tri(k - 1, m)] - b * p[tri(k - 2, m)]);
            }
        }
    }

    fn fill_azimuth(&mut self, u: &UnitVector) {
        let s = u.x.hypot(u.y);
        let phi = if s > 0.0 { u.y.atan2(u.x) } else { 0.0 };
        for m in 0..=self.max_degree {
            let (sm, cm) = (m as f64 * phi).sin_cos();
            self.cos_m[m] = cm;
            self.sin_m[m] = sm;
        }
    }

    /// Writes `scale · Y_{k,j}(u)` for all `k <= max_degree` in canonical order.
    pub fn eval_into(&mut self, u: &UnitVector, scale: f64, out: &mut [f64]) {
        assert_eq!(out.len(), num_coefficients(self.max_degree));
        let s = u.x.hypot(u.y);
        self.fill_legendre(u.z, s);
        self.fill_azimuth(u);
        let sqrt2 = std::f64::consts::SQRT_2;
        for k in 0..=self.max_degree {
            let base = k * k + k; // position of m = 0
            out[base] = scale * self.plm[tri(k, 0)];
            for m in 1..=k {
                let q = scale * sqrt2 * self.plm[tri(k, m)];
                out[base + m] = q * self.cos_m[m];
                out[base - m] = q * self.sin_m[m];
            }
        }
    }
}

/// Real orthonormal spherical harmonic `Y_{k,j}(u)`.
pub fn sph_harm(idx: DegreeIndex, u: &UnitVector) -> f64 {
    let mut eval = BasisEvaluator::new(idx.k);
    let mut out = vec![0.0; num_coefficients(idx.k)];
    eval.eval_into(u, 1.0, &mut out);
    out[idx.flat()]
}

/// Radius-scaled basis values `(1/r) Y_{k,j}(t/r)` for all `k <= max_degree`.
pub fn eval_basis(max_degree: usize, p: &SpherePoint) -> Vec<f64> {
    let mut eval = BasisEvaluator::new(max_degree);
    let mut out = vec![0.0; num_coefficients(max_degree)];
    eval.eval_into(p.direction(), 1.0 / p.radius(), &mut out);
    out
}
