use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_data, check_window, fit_check, initial_size, resolve_alpha, ExperimentReport, Criterion, Outcome};
use crate::analysis::{criticality, forcing_trace, weighted_x_norm, weighted_y_norm, CriticalityRecord, ExponentTarget};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::evolution::{
    nonlinear_evolve, BlowUp, EvolutionTrace, NonlinearForm, NonlinearOptions, Nonlinearity, NormSelector,
    TraceOptions,
};

pub const SMALLDATA_EPSILON: f64 = 1e-2;

fn nonlinear_options(cfg: &ExperimentConfig, q: f64) -> NonlinearOptions {
    NonlinearOptions {
        step: cfg.step,
        horizon: cfg.horizon,
        scheme: cfg.scheme,
        blowup_cap: cfg.blowup_cap,
        record_every: cfg.record_every,
        snapshot_every: cfg.snapshot_every,
        trace: TraceOptions {
            q,
            sobolev_s: cfg.sobolev_s,
            keep_snapshots: false,
        },
    }
}

/// Small-data run for an admissible `(p, q, α)`: no blow-up up to the horizon,
/// bounded weighted norm `X/I₀`, and the linear `L²` decay rate.
///
/// Inadmissible triples are refused unless `exploratory` is set.
pub fn smalldata_global(cfg: &ExperimentConfig, seed: u64, exploratory: bool) -> Result<Outcome<ExperimentReport>> {
    cfg.validate()?;
    let backend = cfg.backend.build()?;
    let window = cfg.window()?;
    check_window(&backend, window, Some(cfg.horizon))?;
    let alpha = resolve_alpha(&backend, window, cfg.fit_points)?;
    let crit = criticality(cfg.p, cfg.q, alpha.0)?;
    if !crit.admissible && !exploratory {
        return Err(Error::config(
            "p",
            format!(
                "(p, q, α) = ({}, {}, {}) is inadmissible: {}; rerun with --exploratory to proceed",
                cfg.p,
                cfg.q,
                alpha.0,
                crit.violations.join("; ")
            ),
        ));
    }
    let epsilon = cfg.epsilon.unwrap_or(SMALLDATA_EPSILON);
    let data = build_data(&backend, &cfg.data, epsilon, seed)?;
    let forcing = Nonlinearity::new(cfg.p, cfg.form)?;
    let trace = nonlinear_evolve(&backend, cfg.kernel()?, &data, &forcing, nonlinear_options(cfg, cfg.q))?;

    let mut report = ExperimentReport::new("smalldata", cfg, seed, alpha);
    if !crit.admissible {
        report.notes.push(format!("exploratory run of an inadmissible triple: {}", crit.violations.join("; ")));
    }
    if crit.on_delta_boundary() {
        report.notes.push(
            "q = 2α(p−1): the X-norm uses the logarithmic weight δ = 1; below the boundary δ = 0"
                .into(),
        );
    }
    let delta = crit.delta.unwrap_or(0);
    let i0 = initial_size(&backend, &data, cfg.q)?;
    report.initial_size = Some(i0);
    report.blowup = trace.blowup;
    report.push_criterion(
        "no-blowup",
        trace.blowup.is_none(),
        match trace.blowup {
            None => format!("‖u‖_∞ stayed below {} up to T = {}", cfg.blowup_cap, cfg.horizon),
            Some(b) => format!("numerical blow-up at t = {}", b.time),
        },
    );
    if trace.blowup.is_none() {
        let x = weighted_x_norm(&trace, cfg.q, alpha.0, delta)?;
        let ratio = x / i0;
        report.x_norm = Some(x);
        report.x_ratio = Some(ratio);
        report.push_criterion(
            "x-ratio",
            ratio <= cfg.tolerances.x_ratio,
            format!("X/I₀ = {ratio:.6} (X = {x:.6e}, I₀ = {i0:.6e}, δ = {delta}, cap {})", cfg.tolerances.x_ratio),
        );
        if !trace.snapshots.is_empty() {
            let ft = forcing_trace(&backend, &trace, &forcing, crit.sigma)?;
            report.y_norm = Some(weighted_y_norm(&ft, cfg.p, cfg.q, alpha.0, crit.sigma)?);
        }
        let check = fit_check(
            "l2",
            &trace,
            NormSelector::L2,
            window,
            (alpha.0, cfg.q),
            (0, 0.0, ExponentTarget::L2),
            cfg.tolerances.smalldata_l2,
        )
        .map_err(|e| match e {
            Error::Parameter { name: "window", reason } => Error::config("fit_window", reason),
            other => other,
        })?;
        report.push_fit(check);
    }
    report.criticality = Some(crit);
    Ok(Outcome {
        report: report.finish(),
        traces: vec![("nonlinear".into(), trace)],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunClass {
    Bounded,
    /// The cap was crossed before the horizon: a numerical, not proven, blow-up.
    NumericalBlowup,
    /// No blow-up, but `‖u‖_∞` grew over the last quarter of the run.
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub p: f64,
    pub q: f64,
    pub eps: f64,
    pub form: NonlinearForm,
    pub class: RunClass,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub blowup: Option<BlowUp>,
    pub final_linf: f64,
    pub criticality: CriticalityRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub experiment: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub alpha: f64,
    pub points: Vec<SweepPoint>,
    pub criteria: Vec<Criterion>,
    pub passed: bool,
}

fn classify(trace: &EvolutionTrace, horizon: f64) -> RunClass {
    if trace.blowup.is_some() {
        return RunClass::NumericalBlowup;
    }
    let cut = 0.75 * horizon;
    let idx = trace.times.partition_point(|&t| t < cut).min(trace.len().saturating_sub(1));
    let (Some(at_cut), Some(last)) = (trace.norms.get(idx), trace.norms.last()) else {
        return RunClass::Undecided;
    };
    if last.linf > at_cut.linf {
        RunClass::Undecided
    } else {
        RunClass::Bounded
    }
}

/// Runs every `(p, q, ε, form)` of the sweep grid with the config's backend,
/// data shape and horizon. Points run in parallel; output order is grid order.
pub fn critical_sweep(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome<SweepReport>> {
    cfg.validate()?;
    let backend = cfg.backend.build()?;
    let window = cfg.window()?;
    let alpha = resolve_alpha(&backend, window, cfg.fit_points)?.0;
    let kernel = cfg.kernel()?;
    let s = &cfg.sweep;
    let mut grid = Vec::new();
    for &p in &s.p {
        for &q in &s.q {
            for &eps in &s.eps {
                for &form in &s.forms {
                    grid.push((p, q, eps, form));
                }
            }
        }
    }
    let runs: Vec<(SweepPoint, EvolutionTrace)> = grid
        .par_iter()
        .map(|&(p, q, eps, form)| -> Result<(SweepPoint, EvolutionTrace)> {
            let data = build_data(&backend, &cfg.data, eps, seed)?;
            let forcing = Nonlinearity::new(p, form)?;
            let trace = nonlinear_evolve(&backend, kernel, &data, &forcing, nonlinear_options(cfg, q))?;
            let point = SweepPoint {
                p,
                q,
                eps,
                form,
                class: classify(&trace, cfg.horizon),
                blowup: trace.blowup,
                final_linf: trace.norms.last().map_or(0.0, |r| r.linf),
                criticality: criticality(p, q, alpha)?,
            };
            Ok((point, trace))
        })
        .collect::<Result<_>>()?;

    let mut criteria = Vec::new();
    for (pt, _) in &runs {
        if pt.form == NonlinearForm::MinusSigned {
            criteria.push(Criterion {
                name: format!("dissipative-bounded p={} q={} eps={}", pt.p, pt.q, pt.eps),
                passed: pt.class != RunClass::NumericalBlowup,
                detail: format!("class {:?}", pt.class),
            });
        }
    }
    let passed = criteria.iter().all(|c| c.passed);
    let mut points = Vec::with_capacity(runs.len());
    let mut traces = Vec::with_capacity(runs.len());
    for (pt, tr) in runs {
        let label = format!("p{}_q{}_eps{}_{}", pt.p, pt.q, pt.eps, form_slug(pt.form));
        points.push(pt);
        traces.push((label, tr));
    }
    Ok(Outcome {
        report: SweepReport {
            experiment: "sweep".into(),
            seed,
            config: cfg.clone(),
            alpha,
            points,
            criteria,
            passed,
        },
        traces,
    })
}

pub(crate) fn form_slug(form: NonlinearForm) -> &'static str {
    match form {
        NonlinearForm::PlusAbs => "plus-abs",
        NonlinearForm::MinusAbs => "minus-abs",
        NonlinearForm::PlusSigned => "plus-signed",
        NonlinearForm::MinusSigned => "minus-signed",
    }
}

impl SweepReport {
    /// Phase table rows `(p, q, eps, form, class, t_blowup)`.
    pub fn phase_table(&self) -> Result<String> {
        use crate::output::{format_float, table_csv};
        let rows = self.points.iter().map(|pt| {
            vec![
                format_float(pt.p),
                format_float(pt.q),
                format_float(pt.eps),
                form_slug(pt.form).to_string(),
                match pt.class {
                    RunClass::Bounded => "bounded",
                    RunClass::NumericalBlowup => "numerical-blowup",
                    RunClass::Undecided => "undecided",
                }
                .to_string(),
                pt.blowup.map(|b| format_float(b.time)).unwrap_or_default(),
            ]
        });
        table_csv(&["p", "q", "eps", "form", "class", "t_blowup"], rows)
    }
}

/// Semilinear trace with the configured nonlinearity, amplitude (default 1) and stepping.
pub fn nonlinear_trace(cfg: &ExperimentConfig, seed: u64) -> Result<EvolutionTrace> {
    cfg.validate()?;
    let backend = cfg.backend.build()?;
    let data = build_data(&backend, &cfg.data, cfg.epsilon.unwrap_or(1.0), seed)?;
    let forcing = Nonlinearity::new(cfg.p, cfg.form)?;
    nonlinear_evolve(&backend, cfg.kernel()?, &data, &forcing, nonlinear_options(cfg, cfg.q))
}
