use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rrvr_core::analysis::{
    excess_risk, inner_differences, normal_equation_residual, reference_minimizer, relative_mse, theorem_constants,
    ConstantsVariant, DifferenceConvention, TheoremKind,
};
use rrvr_core::data::synth_logistic;
use rrvr_core::{CurvatureConstants, Dataset, LossKind, LossModel, Weights};

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn alpha_matches_exact_rational_evaluation() {
    let unit = CurvatureConstants { delta: 1.0, nu: 1.0 };
    let t = theorem_constants(TheoremKind::SagaRr, 1.0 / 110.0, unit, 10, ConstantsVariant::Derived).unwrap();
    assert_eq!(t.mu_max, 1.0 / 110.0);
    // (1 − 10/440) / (1 − 27·10³/110³)
    let exact = (ratio(1, 1) - ratio(10, 440)) / (ratio(1, 1) - ratio(27_000, 110 * 110 * 110));
    assert!((t.alpha - exact.to_f64().unwrap()).abs() <= 4.0 * f64::EPSILON);
    assert!(!t.exceeds_bound);

    let a = theorem_constants(TheoremKind::Avrg, 1.0 / 90.0, unit, 10, ConstantsVariant::Derived).unwrap();
    assert_eq!(a.mu_max, 1.0 / 90.0);
    let exact = (ratio(1, 1) - ratio(10, 360)) / (ratio(1, 1) - ratio(18_000, 90 * 90 * 90));
    assert!((a.alpha - exact.to_f64().unwrap()).abs() <= 4.0 * f64::EPSILON);
}

#[test]
fn constant_variants_differ_only_where_documented() {
    let c = CurvatureConstants { delta: 0.5, nu: 0.1 };
    let mu = 0.001;
    let derived = theorem_constants(TheoremKind::Avrg, mu, c, 20, ConstantsVariant::Derived).unwrap();
    let printed = theorem_constants(TheoremKind::Avrg, mu, c, 20, ConstantsVariant::AsPrinted).unwrap();
    assert!((derived.gamma - 6.0 * mu * 20.0 * 0.25 / 0.1).abs() <= 1e-15);
    assert!((printed.gamma - 6.0 * mu * 0.5 * 20.0).abs() <= 1e-15);
    assert_ne!(derived.alpha, printed.alpha);
    let s_derived = theorem_constants(TheoremKind::SagaRr, mu, c, 20, ConstantsVariant::Derived).unwrap();
    let s_printed = theorem_constants(TheoremKind::SagaRr, mu, c, 20, ConstantsVariant::AsPrinted).unwrap();
    assert_eq!(s_derived.alpha, s_printed.alpha);
    assert!((s_printed.gamma - 9.0 * mu * 0.5 * 20.0).abs() <= 1e-15);
}

#[test]
fn oversized_step_is_flagged() {
    let c = CurvatureConstants { delta: 1.0, nu: 1.0 };
    let t = theorem_constants(TheoremKind::SagaRr, 2.0 / 110.0, c, 10, ConstantsVariant::Derived).unwrap();
    assert!(t.exceeds_bound);
    assert!(theorem_constants(TheoremKind::SagaRr, 0.0, c, 10, ConstantsVariant::Derived).is_err());
}

proptest! {
    #[test]
    fn alpha_is_below_one_and_falls_for_small_steps(delta in 0.1f64..5.0, ratio_nu in 0.01f64..1.0, n in 1usize..500, a in 0.01f64..1.0, b in 0.01f64..1.0) {
        let c = CurvatureConstants { delta, nu: delta * ratio_nu };
        for kind in [TheoremKind::SagaRr, TheoremKind::Avrg] {
            let max = kind.mu_max(c, n);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            for frac in [lo, hi] {
                prop_assert!(theorem_constants(kind, frac * max, c, n, ConstantsVariant::Derived).unwrap().alpha < 1.0);
            }
            // α is U-shaped in μ with its minimum near 0.6·mu_max; below half the bound it falls
            let t_lo = theorem_constants(kind, lo * max / 2.0, c, n, ConstantsVariant::Derived).unwrap();
            let t_hi = theorem_constants(kind, hi * max / 2.0, c, n, ConstantsVariant::Derived).unwrap();
            prop_assert!(t_lo.alpha >= t_hi.alpha);
        }
    }
}

#[test]
fn alpha_rises_again_near_the_bound() {
    let c = CurvatureConstants { delta: 1.0, nu: 1.0 };
    let at = |f: f64| theorem_constants(TheoremKind::SagaRr, f / 110.0, c, 10, ConstantsVariant::Derived).unwrap().alpha;
    assert!(at(0.3) > at(0.6));
    assert!(at(1.0) > at(0.6));
}

#[test]
fn alpha_tends_to_one_as_step_vanishes() {
    let c = CurvatureConstants { delta: 0.3, nu: 0.02 };
    let t = theorem_constants(TheoremKind::SagaRr, 1e-12, c, 50, ConstantsVariant::Derived).unwrap();
    assert!(t.alpha < 1.0 && t.alpha > 1.0 - 1e-12);
}

/// Independent logistic minimizer: damped-free Newton iterations with a dense Cholesky solve.
fn newton_oracle(ds: &Dataset, rho: f64) -> DVector<f64> {
    let m = ds.dim();
    let n = ds.len() as f64;
    let h: Vec<DVector<f64>> = ds.samples().iter().map(|s| DVector::from_column_slice(s.features())).collect();
    let y: Vec<f64> = ds.samples().iter().map(|s| s.target()).collect();
    let mut w = DVector::zeros(m);
    for _ in 0..100 {
        let mut g = &w * rho;
        let mut hess = DMatrix::identity(m, m) * rho;
        for (hk, &yk) in h.iter().zip(&y) {
            let z = yk * hk.dot(&w);
            let s = 1.0 / (1.0 + z.exp());
            g -= hk * (yk * s / n);
            hess += hk * hk.transpose() * (s * (1.0 - s) / n);
        }
        if g.norm() < 1e-15 {
            break;
        }
        let step = hess.cholesky().unwrap().solve(&g);
        w -= step;
    }
    w
}

#[test]
fn logistic_reference_agrees_with_newton_oracle() {
    let ds = synth_logistic(50, 5, 0).unwrap();
    let rho = 1.0 / 50.0;
    let model = LossModel::new(LossKind::LogisticL2, rho).unwrap();
    let r = reference_minimizer(&model, &ds, 1e-12).unwrap();
    assert!(r.grad_norm <= 1e-12);
    let oracle = newton_oracle(&ds, rho);
    let delta: f64 = r.w_star.iter().zip(oracle.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    assert!(delta <= 1e-8, "‖Δ‖ = {delta}");
}

#[test]
fn quadratic_reference_solves_normal_equations() {
    for seed in 0..5 {
        let ds = synth_logistic(30, 6, seed).unwrap();
        let model = LossModel::new(LossKind::QuadraticL2, 1.0 / 30.0).unwrap();
        let r = reference_minimizer(&model, &ds, 1e-12).unwrap();
        assert!(normal_equation_residual(&model, &ds, &r.w_star) <= 1e-12);
    }
}

#[test]
fn metrics_examples() {
    let ds = synth_logistic(20, 3, 4).unwrap();
    let model = LossModel::new(LossKind::LogisticL2, 0.05).unwrap();
    let r = reference_minimizer(&model, &ds, 1e-12).unwrap();
    assert_eq!(relative_mse(&r.w_star, &r).unwrap(), 0.0);
    assert_eq!(relative_mse(&[0.0; 3], &r).unwrap(), 1.0);
    let double: Vec<f64> = r.w_star.iter().map(|x| 2.0 * x).collect();
    assert!((relative_mse(&double, &r).unwrap() - 1.0).abs() <= 1e-15);
    assert_eq!(excess_risk(&model, &ds, &r.w_star, &r).unwrap(), 0.0);

    // strictly positive away from w*: ν/2·‖w − w*‖² lower bound
    let mut w = r.w_star.clone();
    w[0] += 0.05 * r.w_star.norm();
    assert!(relative_mse(&w, &r).unwrap() >= 1e-3);
    let e = excess_risk(&model, &ds, &w, &r).unwrap();
    assert!(e > 0.0 && e >= 0.025 * w.dist_sq(&r.w_star));
}

#[test]
fn inner_difference_examples() {
    let t = vec![
        Weights::from_vec(vec![0.0, 0.0]),
        Weights::from_vec(vec![1.0, 0.0]),
        Weights::from_vec(vec![2.0, 0.0]),
    ];
    assert_eq!(inner_differences(&t, DifferenceConvention::Interior).unwrap(), (0.5, 0.5));
    assert_eq!(inner_differences(&t, DifferenceConvention::FullRange).unwrap(), (0.5, 2.5));
    let flat = vec![Weights::from_vec(vec![3.0]); 5];
    assert_eq!(inner_differences(&flat, DifferenceConvention::FullRange).unwrap(), (0.0, 0.0));
}
