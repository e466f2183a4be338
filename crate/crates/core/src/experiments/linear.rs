use rayon::prelude::*;

use super::{build_data, check_window, fit_check, resolve_alpha, ExperimentReport, Outcome};
use crate::analysis::ExponentTarget;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::evolution::{heat_solve, linear_solve, record_norms, EvolutionTrace, LinearPropagator, NormSelector, TraceOptions};

fn output_times(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    match &cfg.times {
        Some(t) => Ok(t.clone()),
        None => Ok(cfg.window()?.log_spaced(cfg.fit_points)),
    }
}

/// Linear decay rates: `‖u‖₂`, `‖u_t‖₂`, `‖A^{1/2}u‖₂` and `‖u‖_∞` against the
/// predicted exponents `2α(1/q−1/2) + k + s/2` and `2α/q`.
pub fn verify_matsumura(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome<ExperimentReport>> {
    cfg.validate()?;
    let backend = cfg.backend.build()?;
    let window = cfg.window()?;
    check_window(&backend, window, None)?;
    let alpha = resolve_alpha(&backend, window, cfg.fit_points)?;
    let data = build_data(&backend, &cfg.data, cfg.epsilon.unwrap_or(1.0), seed)?;
    let times = output_times(cfg)?;
    let opts = TraceOptions {
        q: cfg.q,
        sobolev_s: cfg.sobolev_s,
        keep_snapshots: false,
    };
    let trace = linear_solve(&backend, cfg.kernel()?, &data, &times, opts)?;

    let mut report = ExperimentReport::new("verify-matsumura", cfg, seed, alpha);
    let aq = (alpha.0, cfg.q);
    let tol = cfg.tolerances;
    let checks = [
        ("l2", NormSelector::L2, (0, 0.0, ExponentTarget::L2), tol.l2),
        ("ut-l2", NormSelector::UtL2, (1, 0.0, ExponentTarget::L2), tol.derivative),
        ("h1dot", NormSelector::H1dot, (0, 1.0, ExponentTarget::L2), tol.derivative),
        ("linf", NormSelector::Linf, (0, 0.0, ExponentTarget::Linf), tol.linf),
    ];
    for (name, channel, target, tolerance) in checks {
        let check = fit_check(name, &trace, channel, window, aq, target, tolerance)
            .map_err(window_error)?;
        report.push_fit(check);
    }
    Ok(Outcome {
        report: report.finish(),
        traces: vec![("linear".into(), trace)],
    })
}

fn window_error(e: Error) -> Error {
    match e {
        Error::Parameter { name: "window", reason } => Error::config("fit_window", reason),
        other => other,
    }
}

/// Decay of `u_lin(t) − e^{-tA}(u0 + u1)` in `L²` and `L^∞`, against the linear
/// prediction plus one.
pub fn verify_diffusion(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome<ExperimentReport>> {
    cfg.validate()?;
    let backend = cfg.backend.build()?;
    let window = cfg.window()?;
    if window.lo < 1.0 {
        return Err(Error::config(
            "fit_window",
            format!("the comparison holds for t ≥ 1, window starts at {}", window.lo),
        ));
    }
    check_window(&backend, window, None)?;
    let alpha = resolve_alpha(&backend, window, cfg.fit_points)?;
    let data = build_data(&backend, &cfg.data, cfg.epsilon.unwrap_or(1.0), seed)?;
    let times = output_times(cfg)?;
    let opts = TraceOptions {
        q: cfg.q,
        sobolev_s: None,
        keep_snapshots: false,
    };
    let kernel = cfg.kernel()?;
    let prop = LinearPropagator::new(&backend, kernel, &data)?;
    let (c0, c1) = prop.initial_coeffs();
    let heat_data: Vec<f64> = c0.iter().zip(c1).map(|(a, b)| a + b).collect();
    let lam = backend.eigenvalues();

    let norms = times
        .par_iter()
        .map(|&t| {
            let (u, _) = prop.coeffs_at(t);
            let diff: Vec<f64> = u
                .iter()
                .zip(&heat_data)
                .zip(lam)
                .map(|((u, h), &l)| u - h * (-t * l).exp())
                .collect();
            let samples = backend.inverse_raw(&diff);
            let mut rec = record_norms(&backend, &diff, &samples, None, &opts);
            rec.h1dot = None;
            rec
        })
        .collect();
    let diff_trace = EvolutionTrace {
        times: times.clone(),
        norms,
        snapshots: Vec::new(),
        blowup: None,
        lq_exponent: cfg.q,
        sobolev_s: None,
    };
    let solution = linear_solve(&backend, kernel, &data, &times, opts)?;

    let mut report = ExperimentReport::new("verify-diffusion", cfg, seed, alpha);
    let aq = (alpha.0, cfg.q);
    let tol = cfg.tolerances.diff;
    for (name, channel, target) in [
        ("diff-l2", NormSelector::L2, ExponentTarget::DiffL2),
        ("diff-linf", NormSelector::Linf, ExponentTarget::DiffLinf),
    ] {
        let check = fit_check(name, &diff_trace, channel, window, aq, (0, 0.0, target), tol).map_err(window_error)?;
        if !check.fit.is_power_law() {
            report
                .notes
                .push(format!("{name}: decay is better described by an exponential than a power law"));
        }
        report.push_fit(check);
    }
    let sol = fit_check("l2", &solution, NormSelector::L2, window, aq, (0, 0.0, ExponentTarget::L2), cfg.tolerances.l2)
        .map_err(window_error)?;
    let gain = report.fits[0].fit.exponent - sol.fit.exponent;
    report.push_criterion(
        "l2-gain",
        (gain - 1.0).abs() <= tol,
        format!("difference decays faster than the solution by t^-{gain:.4} (expected t^-1, tol {tol})"),
    );
    report.fits.push(sol);
    Ok(Outcome {
        report: report.finish(),
        traces: vec![("difference".into(), diff_trace), ("linear".into(), solution)],
    })
}

/// Linear trace at the configured output times.
pub fn linear_trace(cfg: &ExperimentConfig, seed: u64, keep_snapshots: bool) -> Result<EvolutionTrace> {
    cfg.validate()?;
    let backend = cfg.backend.build()?;
    let data = build_data(&backend, &cfg.data, cfg.epsilon.unwrap_or(1.0), seed)?;
    let opts = TraceOptions {
        q: cfg.q,
        sobolev_s: cfg.sobolev_s,
        keep_snapshots,
    };
    linear_solve(&backend, cfg.kernel()?, &data, &output_times(cfg)?, opts)
}

/// Heat flow of `u0 + u1` at the configured output times.
pub fn heat_trace(cfg: &ExperimentConfig, seed: u64, keep_snapshots: bool) -> Result<EvolutionTrace> {
    cfg.validate()?;
    let backend = cfg.backend.build()?;
    let data = build_data(&backend, &cfg.data, cfg.epsilon.unwrap_or(1.0), seed)?;
    let sum: Vec<f64> = data
        .u0
        .samples()
        .iter()
        .zip(data.u1.samples())
        .map(|(a, b)| a + b)
        .collect();
    let f = backend.grid_function(sum)?;
    let opts = TraceOptions {
        q: cfg.q,
        sobolev_s: cfg.sobolev_s,
        keep_snapshots,
    };
    heat_solve(&backend, &f, &output_times(cfg)?, opts)
}
