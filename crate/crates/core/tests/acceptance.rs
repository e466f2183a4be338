//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion; exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specwave::analysis::inequalities::{GAGLIARDO_NIRENBERG, SOBOLEV};
use specwave::analysis::{scan_kernel_bounds, KernelScanGrid};
use specwave::config::{BackendSpec, ExperimentConfig};
use specwave::evolution::{nonlinear_evolve, CauchyData, NonlinearForm, NonlinearOptions, Nonlinearity, Scheme};
use specwave::experiments::{run_inequalities, smalldata_global, verify_diffusion, verify_matsumura};
use specwave::kernels::MultiplierKernel;
use specwave::output::{report_json, trace_csv};
use specwave::spectral::SpectrumBackend;

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn kernel_correctness() -> Outcome {
    let k = MultiplierKernel::default();
    let mut worst: f64 = 0.0;
    for t in [0.1, 1.0, 2.0, 10.0, 100.0] {
        let zero = (k.eval_d(t, 0.0).unwrap() - (1.0 - (-t).exp())).abs();
        let quarter = (k.eval_d(t, 0.25).unwrap() - t * (-t / 2.0).exp()).abs();
        worst = worst.max(zero).max(quarter);
    }
    let d = 1e-9;
    let mut jump: f64 = 0.0;
    for i in 0..=100_000 {
        let t = 1e3 * i as f64 / 100_000.0;
        jump = jump.max((k.eval_d(t, 0.25 + d).unwrap() - k.eval_d(t, 0.25 - d).unwrap()).abs());
    }
    check(
        worst < 1e-12 && jump < 1e-8,
        format!("closed-form error {worst:.2e} (< 1e-12), jump across 1/4 ± 1e-9 {jump:.2e} (< 1e-8)"),
    )
}

fn ode_identity() -> Outcome {
    let k = MultiplierKernel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let t: f64 = rng.random_range(1e-3..=100.0);
        let l: f64 = rng.random_range(0.0..=100.0);
        let d = |s: f64| k.eval_d(s, l).unwrap();
        let (dm, d0, dp) = (d(t - h), d(t), d(t + h));
        let d1 = (dp - dm) / (2.0 * h);
        let d2 = (dp - 2.0 * d0 + dm) / (h * h);
        worst = worst.max((d2 + d1 + l * d0).abs());
    }
    check(worst < 1e-5, format!("max |D'' + D' + λD| by finite differences {worst:.2e} (< 1e-5)"))
}

fn uniform_bound_scan() -> Outcome {
    let r = scan_kernel_bounds(MultiplierKernel::default(), KernelScanGrid::default()).unwrap();
    check(
        r.uniform_bound_holds,
        format!(
            "sup|D| = {:.4} at (t={}, λ={:.4}), sup|∂tD| = {:.4} at (t={}, λ={:.4}), bound 3, grid {}×{}",
            r.sup_d.value, r.sup_d.t, r.sup_d.lambda, r.sup_dt_d.value, r.sup_dt_d.t, r.sup_dt_d.lambda,
            r.grid.t_points, r.grid.lambda_points
        ),
    )
}

fn difference_symbol_scan() -> Outcome {
    let r = scan_kernel_bounds(MultiplierKernel::default(), KernelScanGrid::default()).unwrap();
    let decades: Vec<String> = r
        .diff_decades
        .iter()
        .map(|d| format!("[{:.0},{:.0}]: {:.4}", d.t_lo, d.t_hi, d.max))
        .collect();
    check(
        r.diff_stable,
        format!("certified C = {:.4}; decade maxima {} (within 10%)", r.diff_constant, decades.join(", ")),
    )
}

fn dirichlet_config() -> ExperimentConfig {
    ExperimentConfig {
        backend: BackendSpec::Dirichlet1d { length: 200.0 * PI, modes: 4096 },
        fit_window: (10.0, 200.0),
        fit_points: 40,
        ..Default::default()
    }
}

fn matsumura() -> Outcome {
    let out = verify_matsumura(&dirichlet_config(), 0).unwrap().report;
    let want = [("l2", 0.25, 0.05), ("ut-l2", 1.25, 0.1), ("h1dot", 0.75, 0.1), ("linf", 0.5, 0.1)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, target, tol) in want {
        let e = out.fit(name).unwrap().fit.exponent;
        ok &= (e - target).abs() <= tol;
        parts.push(format!("{name} {e:.4} ({target} ± {tol})"));
    }
    check(ok, parts.join(", "))
}

fn diffusion() -> Outcome {
    let out = verify_diffusion(&dirichlet_config(), 0).unwrap().report;
    let diff = out.fit("diff-l2").unwrap().fit.exponent;
    let sol = out.fit("l2").unwrap().fit.exponent;
    check(
        (diff - 1.25).abs() <= 0.1,
        format!("difference L² exponent {diff:.4} (1.25 ± 0.1); solution L² exponent {sol:.4}"),
    )
}

fn fractional() -> Outcome {
    let cfg = ExperimentConfig {
        backend: BackendSpec::Fractional { length: 200.0 * PI, modes: 4096, nu: 1.0 },
        fit_window: (10.0, 100.0),
        ..dirichlet_config()
    };
    let out = verify_matsumura(&cfg, 0).unwrap().report;
    let e = out.fit("l2").unwrap().fit.exponent;
    check(
        (out.alpha - 0.5).abs() < 1e-12 && (e - 0.5).abs() <= 0.07,
        format!("α = {}, L² exponent {e:.4} (0.5 ± 0.07) on [10, 100]", out.alpha),
    )
}

fn inequalities() -> Outcome {
    let mut cfg = ExperimentConfig {
        backend: BackendSpec::Dirichlet1d { length: PI, modes: 512 },
        ..Default::default()
    };
    cfg.inequalities.levels = vec![512, 1024, 2048, 4096];
    let r = run_inequalities(&cfg, 0).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in [GAGLIARDO_NIRENBERG, SOBOLEV] {
        let res = r.get(name).unwrap();
        ok &= res.skipped.is_none() && res.bounded;
        let levels: Vec<String> = res.per_level.iter().map(|l| format!("{}:{:.4}", l.modes, l.max_ratio)).collect();
        parts.push(format!("{name} [{}] max change {:.1}%", levels.join(" "), 100.0 * res.max_relative_change));
    }
    check(ok, parts.join("; "))
}

fn smalldata() -> Outcome {
    let cfg = ExperimentConfig {
        p: 4.0,
        q: 1.0,
        epsilon: Some(1e-2),
        horizon: 400.0,
        step: 0.05,
        ..dirichlet_config()
    };
    let r = smalldata_global(&cfg, 0, false).unwrap().report;
    let ratio = r.x_ratio.unwrap_or(f64::INFINITY);
    let e = r.fit("l2").map_or(f64::NAN, |f| f.fit.exponent);
    check(
        r.blowup.is_none() && ratio <= 50.0 && (e - 0.25).abs() <= 0.07,
        format!("blow-up {:?}, X/I₀ = {ratio:.4} (≤ 50), L² exponent {e:.4} (0.25 ± 0.07)", r.blowup.map(|b| b.time)),
    )
}

/// RK4 reference for `u'' + u' + u = -u³`, `u(0) = 1`, `u'(0) = 0`, sampled
/// every `every` steps.
fn rk4_cubic(t_end: f64, h: f64, every: usize) -> Vec<f64> {
    let f = |u: f64, v: f64| (v, -v - u - u * u * u);
    let n = (t_end / h).round() as usize;
    let (mut u, mut v) = (1.0, 0.0);
    let mut out = vec![u];
    for i in 1..=n {
        let (a1, b1) = f(u, v);
        let (a2, b2) = f(u + 0.5 * h * a1, v + 0.5 * h * b1);
        let (a3, b3) = f(u + 0.5 * h * a2, v + 0.5 * h * b2);
        let (a4, b4) = f(u + h * a3, v + h * b3);
        u += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        v += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        if i % every == 0 {
            out.push(u);
        }
    }
    out
}

/// Global error: the largest deviation from the reference at `t = 0.2 k`, `t ≤ 10`.
fn integrator_order() -> Outcome {
    let b = SpectrumBackend::from_matrix(&DMatrix::from_element(1, 1, 1.0), &[1.0], None).unwrap();
    let data = CauchyData::new(b.grid_function(vec![1.0]).unwrap(), b.zeros()).unwrap();
    let f = Nonlinearity::new(3.0, NonlinearForm::MinusSigned).unwrap();
    let (t_end, sample) = (10.0, 0.2);
    let reference = rk4_cubic(t_end, 1e-4, 2000);
    let steps = [0.1, 0.05, 0.025, 0.0125];
    let ratios = |scheme| -> Vec<f64> {
        let errs: Vec<f64> = steps
            .iter()
            .map(|&h| {
                let opts = NonlinearOptions {
                    step: h,
                    horizon: t_end,
                    scheme,
                    snapshot_every: Some((sample / h).round() as usize),
                    ..Default::default()
                };
                let tr = nonlinear_evolve(&b, MultiplierKernel::default(), &data, &f, opts).unwrap();
                assert_eq!(tr.snapshots.len(), reference.len());
                tr.snapshots
                    .iter()
                    .zip(&reference)
                    .map(|(s, r)| (s.u.samples()[0] - r).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        errs.windows(2).map(|w| w[0] / w[1]).collect()
    };
    let euler = ratios(Scheme::ExponentialEuler);
    let mid = ratios(Scheme::ExponentialMidpoint);
    let ok = euler.iter().all(|r| (1.7..=2.3).contains(r)) && mid.iter().all(|r| (3.5..=4.5).contains(r));
    check(ok, format!("halving ratios Euler {euler:.3?} (1.7–2.3), midpoint {mid:.3?} (3.5–4.5)"))
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig {
        backend: BackendSpec::Dirichlet1d { length: 40.0 * PI, modes: 512 },
        fit_window: (10.0, 150.0),
        horizon: 200.0,
        epsilon: Some(1e-2),
        ..Default::default()
    };
    let run = || -> Vec<String> {
        let m = verify_matsumura(&cfg, 7).unwrap();
        let s = smalldata_global(&cfg, 7, false).unwrap();
        let mut ineq = cfg.clone();
        ineq.inequalities.levels = vec![128, 256];
        ineq.inequalities.trials = 20;
        let i = run_inequalities(&ineq, 7).unwrap();
        vec![
            report_json(&m.report).unwrap(),
            trace_csv(&m.traces[0].1).unwrap(),
            report_json(&s.report).unwrap(),
            trace_csv(&s.traces[0].1).unwrap(),
            report_json(&i).unwrap(),
        ]
    };
    let outputs: Vec<Vec<String>> = [1, 2, 4]
        .iter()
        .map(|&n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(run))
        .collect();
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    let bytes: usize = outputs[0].iter().map(String::len).sum();
    check(same, format!("{bytes} bytes of JSON/CSV identical across 1, 2 and 4 threads"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 11] = [
        ("kernel correctness", kernel_correctness, Duration::from_secs(1)),
        ("ODE identity", ode_identity, Duration::from_secs(5)),
        ("uniform kernel bound scan", uniform_bound_scan, Duration::from_secs(30)),
        ("difference symbol scan", difference_symbol_scan, Duration::from_secs(30)),
        ("linear decay rates", matsumura, Duration::from_secs(60)),
        ("diffusion phenomenon", diffusion, Duration::from_secs(60)),
        ("fractional backend", fractional, Duration::from_secs(60)),
        ("inequality suite", inequalities, Duration::from_secs(120)),
        ("small-data global run", smalldata, Duration::from_secs(300)),
        ("integrator order", integrator_order, Duration::from_secs(30)),
        ("determinism", determinism, Duration::from_secs(600)),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let in_time = took <= *budget;
        let passed = out.passed && in_time;
        if !passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<28} {} ({:.2} s of {} s) {}",
            i + 1,
            name,
            if passed { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs(),
            out.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
