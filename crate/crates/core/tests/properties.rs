use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sphreg::collocation::{default_eval_points, filtered_projection, NormBound};
use sphreg::experiments::{results_csv, Experiment, ExperimentCase, BenchmarkCase};
use sphreg::harmonics::{legendre, num_coefficients};
use sphreg::operators::SmoothnessWeights;
use sphreg::quadrature::integrate;
use sphreg::selection::{select_single, select_two_step, EvalGrid, ParameterGrid};
use sphreg::smoothing::{kernel_coefficients, rkhs_inner, smoothing_objective};
use sphreg::{
    analyze, apply_forward, eval_basis, invert_regularized, smooth, sphere_rule, symbol_preset, synthesize,
    two_step_solve, CollocationParams, FilterFunction, HarmonicCoefficients, PenaltyRule, PenaltyWeights,
    SmoothingParams, SpherePoint, SymbolPreset, UnitVector,
};

fn random_coeffs(rng: &mut ChaCha8Rng, m: usize, radius: f64) -> HarmonicCoefficients {
    HarmonicCoefficients::from_fn(m, radius, |_| rng.gen_range(-1.0..1.0)).unwrap()
}

fn point(theta: f64, phi: f64, radius: f64) -> SpherePoint {
    SpherePoint::new(UnitVector::from_angles(theta, phi), radius).unwrap()
}

fn preset() -> impl Strategy<Value = SymbolPreset> {
    prop_oneof![
        Just(SymbolPreset::Sst),
        Just(SymbolPreset::Sgg),
        (1.01f64..3.0).prop_map(SymbolPreset::Geometric),
        (0.5f64..4.0).prop_map(SymbolPreset::Polynomial),
    ]
}

fn l2(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn discrete_orthonormality(m in 0usize..10, rho in 0.3f64..3.0) {
        let rule = sphere_rule(m, rho).unwrap();
        let n = num_coefficients(m);
        let rows: Vec<Vec<f64>> = rule.points().iter().map(|p| eval_basis(m, p)).collect();
        for a in 0..n {
            for b in 0..n {
                let g: f64 = rows.iter().zip(rule.weights()).map(|(r, w)| w * r[a] * r[b]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                prop_assert!((g - target).abs() < 1e-10, "({a},{b}) {g}");
            }
        }
    }

    #[test]
    fn legendre_bounded(k in 0usize..130, t in -1.0f64..=1.0) {
        prop_assert!(legendre(k, t).unwrap().abs() <= 1.0 + 1e-15);
    }

    #[test]
    fn cubature_exact_on_polynomials(m in 0usize..12, rho in 0.5f64..2.5, seed in any::<u64>()) {
        // A degree-2M polynomial as a product of two degree-M ones; its integral
        // is the coefficient inner product by orthonormality.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_coeffs(&mut rng, m, rho);
        let g = random_coeffs(&mut rng, m, rho);
        let rule = sphere_rule(m, rho).unwrap();
        let fv = synthesize(&f, rule.points()).unwrap();
        let gv = synthesize(&g, rule.points()).unwrap();
        let prod: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| a * b).collect();
        let exact: f64 = f.values().iter().zip(g.values()).map(|(a, b)| a * b).sum();
        let got = integrate(&rule, &prod).unwrap();
        prop_assert!((got - exact).abs() <= 1e-9 * exact.abs().max(1.0));

        let finer = sphere_rule(m + 5, rho).unwrap();
        let fv = synthesize(&f, finer.points()).unwrap();
        let gv = synthesize(&g, finer.points()).unwrap();
        let prod: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| a * b).collect();
        prop_assert!((integrate(&finer, &prod).unwrap() - got).abs() < 1e-10);
    }

    #[test]
    fn positive_weights(m in 0usize..=100) {
        let rule = sphere_rule(m, 1.0).unwrap();
        prop_assert!(rule.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn forward_operator_is_diagonal(p in preset(), m in 0usize..20, seed in any::<u64>()) {
        let (r, rho) = match p {
            SymbolPreset::Sgg => (1.0, 3.0),
            _ => (1.0, 2.0),
        };
        let symbol = symbol_preset(p, r, rho, m).unwrap();
        prop_assert!(symbol.values().windows(2).all(|w| w[1] <= w[0]));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_coeffs(&mut rng, m, r);
        let y = apply_forward(&symbol, &x).unwrap();
        prop_assert_eq!(y.radius(), rho);
        for ((k, _, xv), (_, _, yv)) in x.iter().zip(y.iter()) {
            if xv != 0.0 {
                prop_assert!(yv == symbol.get(k) * xv);
            }
        }
        let scaled = apply_forward(&symbol, &x.scaled(3.0)).unwrap();
        for (a, b) in scaled.values().iter().zip(y.scaled(3.0).values()) {
            prop_assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
    }

    #[test]
    fn analyze_round_trip(m in 0usize..14, rho in 0.5f64..2.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_coeffs(&mut rng, m, rho);
        let rule = sphere_rule(m, rho).unwrap();
        let back = analyze(&synthesize(&c, rule.points()).unwrap(), &rule, m).unwrap();
        prop_assert!(back.max_abs_diff(&c).unwrap() < 1e-9);
    }

    #[test]
    fn smoothing_damps_and_descends(m in 1usize..8, seed in any::<u64>(), l1 in 0.0f64..2.0, dl in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rule = sphere_rule(m, 1.0).unwrap();
        let y: Vec<f64> = (0..rule.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let beta = PenaltyWeights::new((0..=m).map(|k| (k + 1) as f64).collect()).unwrap();
        let sp1 = SmoothingParams::new(l1, beta.clone()).unwrap();
        let sp2 = SmoothingParams::new(l1 + dl, beta.clone()).unwrap();
        let a = smooth(&y, &rule, &sp1).unwrap();
        let b = smooth(&y, &rule, &sp2).unwrap();
        for (x, z) in a.values().iter().zip(b.values()) {
            prop_assert!(z.abs() <= x.abs());
        }
        let sp0 = SmoothingParams::new(0.0, beta).unwrap();
        let at_zero = smooth(&y, &rule, &sp0).unwrap();
        let j_min = smoothing_objective(&a, &y, &rule, &sp1).unwrap();
        let j_zero = smoothing_objective(&at_zero, &y, &rule, &sp1).unwrap();
        prop_assert!(j_min <= j_zero + 1e-12 * j_zero.abs().max(1.0));
    }

    #[test]
    fn reproducing_property(m in 0usize..10, rho in 0.5f64..2.0, theta in 0.0f64..PI, phi in 0.0f64..TAU, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_coeffs(&mut rng, m, rho);
        let beta = PenaltyWeights::new((0..=m).map(|k| 1.0 + k as f64 * k as f64).collect()).unwrap();
        let tau = point(theta, phi, rho);
        let k = kernel_coefficients(&tau, &beta, m).unwrap();
        let lhs = rkhs_inner(&p, &k, &beta).unwrap();
        let rhs = synthesize(&p, std::slice::from_ref(&tau)).unwrap()[0];
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn composition_and_damping(m in 1usize..10, seed in any::<u64>(), alpha in 0.0f64..1.0, lambda in 0.0f64..1.0, da in 0.0f64..1.0, dl in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rule = sphere_rule(m, 1.0).unwrap();
        let symbol = symbol_preset(SymbolPreset::Polynomial(2.0), 1.0, 1.0, m).unwrap();
        let beta = PenaltyRule::Linear.build(&symbol).unwrap();
        let y: Vec<f64> = (0..rule.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let solve = |a: f64, l: f64| {
            let sp = SmoothingParams::new(l, beta.clone()).unwrap();
            let cp = CollocationParams::new(a, symbol.clone()).unwrap();
            two_step_solve(&y, &rule, &sp, &cp).unwrap()
        };
        let sp = SmoothingParams::new(lambda, beta.clone()).unwrap();
        let cp = CollocationParams::new(alpha, symbol.clone()).unwrap();
        let composed = invert_regularized(&smooth(&y, &rule, &sp).unwrap(), &cp).unwrap();
        prop_assert_eq!(solve(alpha, lambda), composed);

        let base = l2(solve(alpha, lambda).values());
        prop_assert!(l2(solve(alpha + da, lambda).values()) <= base * (1.0 + 1e-14));
        prop_assert!(l2(solve(alpha, lambda + dl).values()) <= base * (1.0 + 1e-14));
    }

    #[test]
    fn filter_never_amplifies(m in 0usize..16, cut in 0usize..20, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_coeffs(&mut rng, m, 1.0);
        let f = filtered_projection(&c, &FilterFunction::cosine(), cut);
        for k in 0..=m {
            prop_assert!(l2(f.degree(k)) <= l2(c.degree(k)));
        }
    }

    #[test]
    fn selection_index_bounds_and_scale(len in 2usize..12, seed in any::<u64>(), c in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = 4;
        let grid = EvalGrid::standard(m, 1.0).unwrap();
        let sols: Vec<HarmonicCoefficients> = (0..len).map(|_| random_coeffs(&mut rng, m, 1.0)).collect();
        let values: Vec<f64> = (0..len).map(|i| i as f64).collect();
        let r = select_single(&values, &sols, &grid).unwrap();
        prop_assert_eq!(r.differences.len(), len - 1);
        prop_assert!(r.chosen_index >= 1 && r.chosen_index < len);
        prop_assert_eq!(&r, &select_single(&values, &sols, &grid).unwrap());

        let scaled: Vec<HarmonicCoefficients> = sols.iter().map(|s| s.scaled(c)).collect();
        let rs = select_single(&values, &scaled, &grid).unwrap();
        prop_assert_eq!(rs.chosen_index, r.chosen_index);
        for (a, b) in rs.differences.iter().zip(&r.differences) {
            prop_assert!((a - c.abs() * b).abs() <= 1e-12 * b.max(1e-300));
        }
    }

    #[test]
    fn two_step_selection_scale_invariant(seed in any::<u64>(), c in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0]) {
        let m = 5;
        let rule = sphere_rule(m, 1.0).unwrap();
        let symbol = symbol_preset(SymbolPreset::Geometric(1.48), 1.0, 1.0, m).unwrap();
        let beta = PenaltyRule::InverseSymbol { exponent: 0.0 }.build(&symbol).unwrap();
        let grid = EvalGrid::standard(m, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = (0..rule.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let yc: Vec<f64> = y.iter().map(|v| v * c).collect();
        let values: Vec<f64> = std::iter::once(0.0).chain((0..8).map(|i| 1e-3 * 3f64.powi(i))).collect();
        let a = select_two_step(&y, &rule, &symbol, &beta, &values, &values, &grid).unwrap();
        let b = select_two_step(&yc, &rule, &symbol, &beta, &values, &values, &grid).unwrap();
        prop_assert_eq!((a.alpha_index, a.lambda_index), (b.alpha_index, b.lambda_index));
        for (x, z) in a.solution.values().iter().zip(b.solution.values()) {
            prop_assert!((x * c - z).abs() <= 1e-12 * (x * c).abs().max(1e-12));
        }
    }

    #[test]
    fn norm_bound_monotone(m in 0usize..8, a1 in 0.0f64..1.0, da in 0.0f64..1.0, l1 in 0.0f64..1.0, dl in 0.0f64..1.0) {
        let symbol = symbol_preset(SymbolPreset::Polynomial(1.5), 1.0, 1.0, m).unwrap();
        let beta = PenaltyRule::Linear.build(&symbol).unwrap();
        let rule = sphere_rule(m, 1.0).unwrap();
        let bound = NormBound::new(&rule, &default_eval_points(m, 1.0).unwrap(), m).unwrap();
        let eval = |a: f64, l: f64| {
            bound
                .evaluate(
                    &SmoothingParams::new(l, beta.clone()).unwrap(),
                    &CollocationParams::new(a, symbol.clone()).unwrap(),
                )
                .unwrap()
        };
        let base = eval(a1, l1);
        prop_assert!(eval(a1 + da, l1) <= base);
        prop_assert!(eval(a1, l1 + dl) <= base);
    }
}

#[test]
fn sobolev_norm_weights_by_degree() {
    let c = HarmonicCoefficients::from_fn(2, 1.0, |idx| if idx.k() == 2 { 1.0 } else { 0.0 }).unwrap();
    let w = SmoothnessWeights::new(vec![1.0, 2.0, 3.0]).unwrap();
    let n = sphreg::operators::sobolev_norm(&c, &w).unwrap();
    assert!((n - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
}

#[test]
fn experiment_errors_positive_and_reproducible() {
    let mut case = ExperimentCase::benchmark(BenchmarkCase::B);
    case.max_degree = 8;
    case.trials = 4;
    case.alpha_grid = ParameterGrid::new(1e-4, 2.0, 12, true).unwrap();
    case.lambda_grid = ParameterGrid::new(1e-4, 2.0, 12, true).unwrap();
    let exp = Experiment::new(case.clone()).unwrap();
    let a = exp.run().unwrap();
    assert_eq!(a.len(), 12);
    assert!(a.iter().all(|r| r.relative_error.is_finite() && r.relative_error > 0.0));
    let b = Experiment::new(case.clone()).unwrap().run().unwrap();
    assert_eq!(results_csv(&case.name, &a), results_csv(&case.name, &b));
}
