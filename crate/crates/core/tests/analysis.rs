use std::f64::consts::PI;

use proptest::prelude::*;
use specwave::analysis::{
    check_inequalities, criticality, fit_power_law, japanese, predict_exponent, weighted_x_norm,
    ExponentTarget, InequalityOptions, TimeWindow,
};
use specwave::analysis::inequalities::{GAGLIARDO_NIRENBERG, HEAT_L2_LINF, SOBOLEV};
use specwave::evolution::{linear_solve, CauchyData, TraceOptions};
use specwave::kernels::MultiplierKernel;
use specwave::spectral::{measure_alpha, sierpinski_alpha, SpectrumBackend};

#[test]
fn power_law_fit_recovers_exponent_and_ignores_scale() {
    let w = TimeWindow::new(10.0, 1000.0).unwrap();
    let t = w.log_spaced(40);
    for &a in &[0.25, 0.75, 1.5] {
        let v: Vec<f64> = t.iter().map(|t| 3.0 * t.powf(-a)).collect();
        let f1 = fit_power_law(&t, &v, w).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| 1e4 * x).collect();
        let f2 = fit_power_law(&t, &scaled, w).unwrap();
        assert!((f1.exponent - a).abs() < 1e-12);
        assert!((f1.exponent - f2.exponent).abs() < 1e-12);
        assert!((f2.intercept - f1.intercept - 1e4f64.ln()).abs() < 1e-9);
        assert!(f1.is_power_law());
    }
}

#[test]
fn exponential_decay_is_not_reported_as_a_power_law() {
    let w = TimeWindow::new(1.0, 50.0).unwrap();
    let t = w.log_spaced(40);
    let v: Vec<f64> = t.iter().map(|t| (-0.3 * t).exp()).collect();
    let fit = fit_power_law(&t, &v, w).unwrap();
    assert!(!fit.is_power_law());
}

#[test]
fn fit_needs_enough_points_in_the_window() {
    let w = TimeWindow::new(10.0, 20.0).unwrap();
    let t = [1.0, 2.0, 11.0, 12.0];
    let v = [1.0, 0.5, 0.1, 0.09];
    assert!(fit_power_law(&t, &v, w).is_err());
    assert!(TimeWindow::new(5.0, 5.0).is_err());
}

#[test]
fn l2_exponent_vanishes_for_l2_data() {
    let p = predict_exponent(0.25, 2.0, 0, 0.0, ExponentTarget::L2).unwrap();
    assert_eq!(p.predicted, 0.0);
    let d = predict_exponent(0.25, 2.0, 0, 0.0, ExponentTarget::DiffL2).unwrap();
    assert_eq!(d.predicted, 1.0);
}

#[test]
fn predicted_exponents_for_the_interval() {
    let cases = [
        (ExponentTarget::L2, 0, 0.0, 0.25),
        (ExponentTarget::L2, 1, 0.0, 1.25),
        (ExponentTarget::L2, 0, 1.0, 0.75),
        (ExponentTarget::Linf, 0, 0.0, 0.5),
        (ExponentTarget::DiffL2, 0, 0.0, 1.25),
        (ExponentTarget::DiffLinf, 0, 0.0, 1.5),
    ];
    for (target, k, s, want) in cases {
        let got = predict_exponent(0.25, 1.0, k, s, target).unwrap().predicted;
        assert!((got - want).abs() < 1e-15, "{target:?} k={k} s={s}: {got}");
    }
}

#[test]
fn prediction_rejects_out_of_range_inputs() {
    let e = predict_exponent(0.25, 2.5, 0, 0.0, ExponentTarget::L2).unwrap_err();
    assert!(e.to_string().contains("q ∈ [1,2]"));
    assert!(predict_exponent(0.25, 1.0, 2, 0.0, ExponentTarget::L2).is_err());
    assert!(predict_exponent(0.0, 1.0, 0, 0.0, ExponentTarget::L2).is_err());
    assert!(predict_exponent(0.25, 1.0, 0, -1.0, ExponentTarget::L2).is_err());
}

proptest! {
    #[test]
    fn exponents_decrease_with_q(alpha in 0.05..2.0f64, q1 in 1.0..2.0f64, q2 in 1.0..2.0f64, s in 0.0..3.0f64) {
        let (lo, hi) = if q1 < q2 { (q1, q2) } else { (q2, q1) };
        for target in [ExponentTarget::L2, ExponentTarget::Linf, ExponentTarget::DiffL2] {
            let a = predict_exponent(alpha, lo, 0, s, target).unwrap().predicted;
            let b = predict_exponent(alpha, hi, 0, s, target).unwrap().predicted;
            prop_assert!(a >= b - 1e-12);
        }
    }

    #[test]
    fn fujita_exponent_splits_the_delta_regimes(alpha in 0.05..0.5f64, q in 1.0..2.0f64, p in 1.01..8.0f64) {
        let rec = criticality(p, q, alpha).unwrap();
        prop_assert!((rec.p_fujita - (1.0 + q / (2.0 * alpha))).abs() < 1e-12);
        match rec.delta {
            Some(0) => prop_assert!(p > rec.p_fujita),
            Some(1) => prop_assert!((p - rec.p_fujita).abs() < 1e-9),
            None => prop_assert!(p < rec.p_fujita),
            _ => prop_assert!(false),
        }
        prop_assert!((rec.sigma - f64::max(1.0, 2.0 / p)).abs() < 1e-15);
        prop_assert_eq!(rec.admissible, rec.violations.is_empty());
    }

    #[test]
    fn admissible_triples_lie_inside_their_q_range(alpha in 0.05..0.5f64, q in 1.0..2.0f64, p in 1.01..8.0f64) {
        let rec = criticality(p, q, alpha).unwrap();
        if rec.admissible {
            let (lo, hi) = rec.q_range.unwrap();
            prop_assert!(lo <= q && q <= hi + 1e-12);
            prop_assert!(p > 1.0 + 1.0 / (2.0 * alpha));
        }
    }
}

#[test]
fn critical_boundary_takes_delta_one() {
    // q = 2α(p−1) with α = 1/4, p = 4
    let rec = criticality(4.0, 1.5, 0.25).unwrap();
    assert_eq!(rec.delta, Some(1));
    assert!(rec.on_delta_boundary());
    assert!(rec.admissible);
    assert_eq!(rec.q_range, Some((1.0, 1.5)));
}

#[test]
fn q_range_endpoints_are_admissible() {
    let alpha = 0.25;
    let p = 3.5;
    let rec = criticality(p, 1.0, alpha).unwrap();
    let (lo, hi) = rec.q_range.unwrap();
    assert!(criticality(p, lo, alpha).unwrap().admissible);
    assert!(criticality(p, hi, alpha).unwrap().admissible);
    assert!(!criticality(p, (hi + 0.01).min(2.0), alpha).unwrap().admissible);
}

#[test]
fn japanese_bracket() {
    assert_eq!(japanese(0.0), 1.0);
    assert!((japanese(3.0) - 10f64.sqrt()).abs() < 1e-15);
    assert!((japanese(1e8) - 1e8).abs() < 1e-6);
}

#[test]
fn x_norm_scales_linearly_for_linear_flow() {
    let backend = SpectrumBackend::dirichlet_1d(20.0 * PI, 256).unwrap();
    let c = 10.0 * PI;
    let u0 = backend.sample(|x| (-(x - c).powi(2)).exp()).unwrap();
    let data = CauchyData::new(u0.clone(), u0).unwrap();
    let times = TimeWindow::new(0.5, 50.0).unwrap().log_spaced(30);
    let opts = TraceOptions { q: 1.0, ..TraceOptions::default() };
    let k = MultiplierKernel::default();
    let a = linear_solve(&backend, k, &data, &times, opts).unwrap();
    let b = linear_solve(&backend, k, &data.scaled(0.5), &times, opts).unwrap();
    let xa = weighted_x_norm(&a, 1.0, 0.25, 0).unwrap();
    let xb = weighted_x_norm(&b, 1.0, 0.25, 0).unwrap();
    assert!((xb / xa - 0.5).abs() < 1e-12);
    let x_log = weighted_x_norm(&a, 1.0, 0.25, 1).unwrap();
    assert!(x_log <= xa * (1.0 + 1e-12));
}

#[test]
fn inequality_suite_is_homogeneous_and_stable_on_a_small_ladder() {
    let levels: Vec<SpectrumBackend> = [128, 256, 512]
        .iter()
        .map(|&n| SpectrumBackend::dirichlet_1d(20.0 * PI, n).unwrap())
        .collect();
    let opts = InequalityOptions {
        levels: vec![128, 256, 512],
        trials: 40,
        seed: 7,
        ..InequalityOptions::default()
    };
    let report = check_inequalities(&levels, &opts).unwrap();
    for name in [GAGLIARDO_NIRENBERG, SOBOLEV, HEAT_L2_LINF] {
        let r = report.get(name).unwrap();
        assert!(r.skipped.is_none(), "{name} skipped: {:?}", r.skipped);
        assert!(r.bounded, "{name}: change {}", r.max_relative_change);
        assert!(r.max_ratio.is_finite() && r.max_ratio > 0.0);
    }
    let again = check_inequalities(&levels, &opts).unwrap();
    assert_eq!(report, again);
}

#[test]
fn fractional_power_rescales_the_decay_index() {
    let base = SpectrumBackend::dirichlet_1d(200.0 * PI, 2048).unwrap();
    for &nu in &[1.0, 1.5] {
        let frac = SpectrumBackend::fractional(&base, nu).unwrap();
        let want = 1.0 / (2.0 * nu);
        assert!((frac.alpha().unwrap() - want).abs() < 1e-15);
        let w = TimeWindow::new(10.0, 100.0).unwrap();
        let fit = measure_alpha(&frac, w, 24).unwrap();
        assert!((fit.exponent - want).abs() < 0.1 * want, "ν={nu}: measured {}", fit.exponent);
    }
}

#[test]
fn sierpinski_decay_index() {
    assert!((sierpinski_alpha(2) - 3f64.log2() / (2.0 * 5f64.log2())).abs() < 1e-15);
    for d in 2..6 {
        assert!(sierpinski_alpha(d) < 0.5);
    }
    let sg = SpectrumBackend::sierpinski(5).unwrap();
    assert!((sg.alpha().unwrap() - sierpinski_alpha(2)).abs() < 1e-15);
    assert!(sg.eigenvalues().iter().all(|&l| l >= 0.0));
}
