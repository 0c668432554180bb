//! Embedded invariant suite behind the `verify` subcommand.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::collocation::{composite_norm_bound, invert_regularized, two_step_solve, CollocationParams};
use crate::error::Result;
use crate::harmonics::{legendre_sequence, num_coefficients, BasisEvaluator, SpherePoint, UnitVector};
use crate::operators::{
    analyze, apply_forward, symbol_preset, synthesize, HarmonicCoefficients, SphericalSymbol, SymbolPreset,
};
use crate::quadrature::{sphere_rule, CubatureRule};
use crate::smoothing::{smooth, smooth_oracle, PenaltyWeights, SmoothingParams};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Smaller degrees and fewer random instances.
    pub quick: bool,
    /// Corrupt one cubature weight in every rule the suite builds.
    pub inject_fault: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Observed error measure.
    pub value: f64,
    pub tolerance: f64,
}

struct Suite {
    opts: VerifyOptions,
}

impl Suite {
    fn rule(&self, m: usize, rho: f64) -> Result<CubatureRule> {
        let rule = sphere_rule(m, rho)?;
        Ok(if self.opts.inject_fault {
            rule.with_scaled_weight(0, 1.5)
        } else {
            rule
        })
    }

    fn check(
        &self,
        name: &'static str,
        tolerance: f64,
        f: impl FnOnce() -> Result<f64>,
    ) -> CheckOutcome {
        match f() {
            Ok(value) => CheckOutcome {
                name,
                passed: value.is_finite() && value < tolerance,
                value,
                tolerance,
            },
            Err(_) => CheckOutcome {
                name,
                passed: false,
                value: f64::NAN,
                tolerance,
            },
        }
    }

    /// Max deviation of the discrete Gram matrix from the identity.
    fn gram(&self, m: usize) -> Result<f64> {
        let rule = self.rule(m, 1.0)?;
        let n = num_coefficients(m);
        let mut phi = DMatrix::<f64>::zeros(rule.len(), n);
        let mut weighted = DMatrix::<f64>::zeros(rule.len(), n);
        let mut eval = BasisEvaluator::new(m);
        let mut row = vec![0.0; n];
        for (i, (p, &w)) in rule.points().iter().zip(rule.weights()).enumerate() {
            eval.eval_into(p.direction(), 1.0, &mut row);
            for (c, v) in row.iter().enumerate() {
                phi[(i, c)] = *v;
                weighted[(i, c)] = w * v;
            }
        }
        let g = phi.transpose() * weighted;
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { 1.0 } else { 0.0 };
                dev = dev.max((g[(r, c)] - target).abs());
            }
        }
        Ok(dev)
    }

    fn addition_theorem(&self, pairs: usize, m: usize) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = num_coefficients(m);
        let mut eval = BasisEvaluator::new(m);
        let (mut yu, mut yv) = (vec![0.0; n], vec![0.0; n]);
        let mut p = vec![0.0; m + 1];
        let mut worst: f64 = 0.0;
        for _ in 0..pairs {
            let u = random_unit(&mut rng)?;
            let v = random_unit(&mut rng)?;
            eval.eval_into(&u, 1.0, &mut yu);
            eval.eval_into(&v, 1.0, &mut yv);
            legendre_sequence(u.dot(&v), &mut p);
            for (k, pk) in p.iter().enumerate() {
                let range = k * k..(k + 1) * (k + 1);
                let s: f64 = yu[range.clone()].iter().zip(&yv[range]).map(|(a, b)| a * b).sum();
                worst = worst.max((s - (2 * k + 1) as f64 / (4.0 * PI) * pk).abs());
            }
        }
        Ok(worst)
    }

    fn oracle(&self, instances: usize) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst: f64 = 0.0;
        for i in 0..instances {
            let m = 1 + i % 8;
            let rule = self.rule(m, 1.0)?;
            let samples: Vec<f64> = (0..rule.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let beta = PenaltyWeights::new((0..=m).map(|k| (k + 1) as f64).collect())?;
            for lambda in [0.0, 1e-4, 0.1, 1.0] {
                let sp = SmoothingParams::new(lambda, beta.clone())?;
                let fast = smooth(&samples, &rule, &sp)?;
                let dense = smooth_oracle(&samples, &rule, &sp)?;
                worst = worst.max(fast.max_abs_diff(&dense)?);
            }
        }
        Ok(worst)
    }

    fn limiting_cases(&self, m: usize) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rule = self.rule(m, 1.0)?;
        let symbol = symbol_preset(SymbolPreset::Polynomial(2.0), 1.0, 1.0, m)?;
        let beta = PenaltyWeights::new((0..=m).map(|k| (k + 1) as f64).collect())?;
        let samples: Vec<f64> = (0..rule.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let alpha = 1e-3;
        let lambda = 1e-2;
        let sp0 = SmoothingParams::new(0.0, beta.clone())?;
        let cp = CollocationParams::new(alpha, symbol.clone())?;
        let single = invert_regularized(&analyze(&samples, &rule, m)?, &cp)?;
        let d1 = two_step_solve(&samples, &rule, &sp0, &cp)?.max_abs_diff(&single)?;
        let sp = SmoothingParams::new(lambda, beta)?;
        let cp0 = CollocationParams::new(0.0, symbol.clone())?;
        let smoothed = smooth(&samples, &rule, &sp)?;
        let direct = smoothed.scale_degrees(
            &symbol.values().iter().map(|a| 1.0 / a).collect::<Vec<_>>(),
            symbol.solution_radius(),
        )?;
        let d2 = two_step_solve(&samples, &rule, &sp, &cp0)?.max_abs_diff(&direct)?;
        Ok(d1.max(d2))
    }

    /// Relative max-coefficient error of the unregularized solve on clean data.
    fn exact_recovery(&self, m: usize) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rule = self.rule(m, 1.0)?;
        let symbol = symbol_preset(SymbolPreset::Polynomial(2.0), 1.0, 1.0, m)?;
        let x = HarmonicCoefficients::from_fn(m, 1.0, |idx| {
            (idx.k() as f64 + 0.5).powf(-1.5) * rng.gen_range(-1.0..=1.0)
        })?;
        let y = synthesize(&apply_forward(&symbol, &x)?, rule.points())?;
        let sp = SmoothingParams::new(0.0, PenaltyWeights::constant(m, 1.0)?)?;
        let cp = CollocationParams::new(0.0, symbol)?;
        let rec = two_step_solve(&y, &rule, &sp, &cp)?;
        let scale = x.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(rec.max_abs_diff(&x)? / scale)
    }

    fn unit_norm_bound(&self) -> Result<f64> {
        let rule = self.rule(0, 1.0)?;
        let symbol = SphericalSymbol::new(vec![1.0], 1.0, 1.0, SymbolPreset::Custom)?;
        let sp = SmoothingParams::new(0.0, PenaltyWeights::constant(0, 1.0)?)?;
        let cp = CollocationParams::new(0.0, symbol)?;
        let grid = [SpherePoint::new(UnitVector::NORTH_POLE, 1.0)?];
        Ok((composite_norm_bound(&sp, &cp, &rule, &grid)? - 1.0).abs())
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Result<UnitVector> {
    loop {
        let (x, y, z) = (
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let r2: f64 = x * x + y * y + z * z;
        if r2 > 1e-4 && r2 <= 1.0 {
            return UnitVector::normalize(x, y, z);
        }
    }
}

/// Runs every check and reports each outcome; nothing short-circuits.
pub fn run_checks(opts: VerifyOptions) -> Vec<CheckOutcome> {
    let s = Suite { opts };
    let (gram_m, pairs, add_m, instances, lim_m, rec_m) = if opts.quick {
        (12, 20, 30, 8, 10, 12)
    } else {
        (30, 100, 61, 50, 30, 30)
    };
    vec![
        s.check("cubature_exactness", 1e-9, || s.gram(gram_m)),
        s.check("addition_theorem", 1e-10, || s.addition_theorem(pairs, add_m)),
        s.check("oracle_equivalence", 1e-8, || s.oracle(instances)),
        s.check("limiting_cases", 1e-14, || s.limiting_cases(lim_m)),
        s.check("exact_recovery", 1e-7, || s.exact_recovery(rec_m)),
        s.check("unit_norm_bound", 1e-10, || s.unit_norm_bound()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let out = run_checks(VerifyOptions { quick: true, inject_fault: false });
        for c in &out {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn fault_is_detected() {
        let out = run_checks(VerifyOptions { quick: true, inject_fault: true });
        let failed: Vec<_> = out.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        assert!(failed.contains(&"cubature_exactness"));
        assert!(failed.contains(&"oracle_equivalence"));
    }
}
