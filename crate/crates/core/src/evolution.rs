//! Linear damped-wave propagation, heat flow, and the semilinear exponential integrator.
//!
//! The linear flow is exact in time: for data `(u0, u1)` with coefficients
//! `c⁰, c¹` the solution has coefficients `D(t,λ)(c⁰ + c¹) + ∂tD(t,λ) c⁰`.
//! The semilinear stepper propagates this linear part exactly and freezes the
//! forcing over each step (variation of constants).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::MultiplierKernel;
use crate::spectral::{lq_norm_raw, GridFunction, SpectralCoeffs, SpectrumBackend};

pub const DEFAULT_STEP: f64 = 0.05;
pub const DEFAULT_BLOWUP_CAP: f64 = 1e6;
pub const DEFAULT_SNAPSHOT_STRIDE: usize = 10;

/// Initial data `(u(0), ∂t u(0))`.
#[derive(Debug, Clone)]
pub struct CauchyData {
    pub u0: GridFunction,
    pub u1: GridFunction,
}

impl CauchyData {
    pub fn new(u0: GridFunction, u1: GridFunction) -> Result<Self> {
        if u0.basis() != u1.basis() {
            return Err(Error::BackendMismatch);
        }
        if u0.len() != u1.len() {
            return Err(Error::Shape {
                expected: u0.len(),
                got: u1.len(),
            });
        }
        Ok(CauchyData { u0, u1 })
    }

    pub fn scaled(&self, c: f64) -> CauchyData {
        CauchyData {
            u0: self.u0.scaled(c),
            u1: self.u1.scaled(c),
        }
    }
}

/// A pointwise forcing term `F(u)`.
pub trait Forcing: Sync {
    fn apply(&self, u: f64) -> f64;
}

/// `F ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoForcing;

impl Forcing for NoForcing {
    fn apply(&self, _u: f64) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearForm {
    /// `+|u|^p`
    PlusAbs,
    /// `-|u|^p`
    MinusAbs,
    /// `+|u|^{p-1} u`
    PlusSigned,
    /// `-|u|^{p-1} u`
    MinusSigned,
}

impl NonlinearForm {
    pub fn label(&self) -> &'static str {
        match self {
            NonlinearForm::PlusAbs => "+|u|^p",
            NonlinearForm::MinusAbs => "-|u|^p",
            NonlinearForm::PlusSigned => "+|u|^(p-1)u",
            NonlinearForm::MinusSigned => "-|u|^(p-1)u",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    p: f64,
    form: NonlinearForm,
}

impl Nonlinearity {
    pub fn new(p: f64, form: NonlinearForm) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::param("p", format!("must exceed 1, got {p}")));
        }
        Ok(Nonlinearity { p, form })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn form(&self) -> NonlinearForm {
        self.form
    }
}

impl Forcing for Nonlinearity {
    fn apply(&self, u: f64) -> f64 {
        let a = u.abs().powf(self.p);
        match self.form {
            NonlinearForm::PlusAbs => a,
            NonlinearForm::MinusAbs => -a,
            NonlinearForm::PlusSigned => a.copysign(u),
            NonlinearForm::MinusSigned => -a.copysign(u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormSelector {
    L1,
    Lq,
    L2,
    Linf,
    H1dot,
    UtL2,
    Hs,
}

/// Norms of the state at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub l1: f64,
    pub lq: f64,
    pub l2: f64,
    pub linf: f64,
    /// `‖A^{1/2} u‖_{L²}`
    pub h1dot: Option<f64>,
    /// `‖∂t u‖_{L²}`
    pub ut_l2: Option<f64>,
    /// `‖u‖_{H^s(A)}` for the trace's Sobolev index.
    pub hs: Option<f64>,
}

impl NormRecord {
    pub fn is_finite(&self) -> bool {
        [self.l1, self.lq, self.l2, self.linf].iter().all(|v| v.is_finite())
            && [self.h1dot, self.ut_l2, self.hs]
                .iter()
                .all(|v| v.is_none_or(f64::is_finite))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BlowUpReason {
    CapExceeded { linf: f64, cap: f64 },
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    pub time: f64,
    pub reason: BlowUpReason,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub u: GridFunction,
}

/// Time series of norms for one run.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub norms: Vec<NormRecord>,
    pub snapshots: Vec<Snapshot>,
    pub blowup: Option<BlowUp>,
    /// Exponent of the `lq` channel.
    pub lq_exponent: f64,
    pub sobolev_s: Option<f64>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channel(&self, which: NormSelector) -> Result<Vec<f64>> {
        let missing = |name: &str| Error::Data(format!("trace has no `{name}` channel"));
        self.norms
            .iter()
            .map(|r| match which {
                NormSelector::L1 => Ok(r.l1),
                NormSelector::Lq => Ok(r.lq),
                NormSelector::L2 => Ok(r.l2),
                NormSelector::Linf => Ok(r.linf),
                NormSelector::H1dot => r.h1dot.ok_or_else(|| missing("h1dot")),
                NormSelector::UtL2 => r.ut_l2.ok_or_else(|| missing("ut_l2")),
                NormSelector::Hs => r.hs.ok_or_else(|| missing("hs")),
            })
            .collect()
    }
}

/// Which norms to record alongside the fixed `L¹`, `L²`, `L^∞` channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub q: f64,
    pub sobolev_s: Option<f64>,
    pub keep_snapshots: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            q: 2.0,
            sobolev_s: None,
            keep_snapshots: false,
        }
    }
}

impl TraceOptions {
    fn validate(&self) -> Result<()> {
        if self.q.is_nan() || self.q < 1.0 {
            return Err(Error::param("q", format!("q must lie in [1, ∞], got {}", self.q)));
        }
        if let Some(s) = self.sobolev_s {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::param("sobolev_s", format!("must be >= 0, got {s}")));
            }
        }
        Ok(())
    }
}

pub(crate) fn record_norms(
    backend: &SpectrumBackend,
    coeffs: &[f64],
    samples: &[f64],
    ut_coeffs: Option<&[f64]>,
    opts: &TraceOptions,
) -> NormRecord {
    let w = backend.weights();
    // the exponents below are validated, so these cannot fail
    let l1 = lq_norm_raw(samples, w, 1.0).unwrap_or(f64::NAN);
    let lq = lq_norm_raw(samples, w, opts.q).unwrap_or(f64::NAN);
    let linf = lq_norm_raw(samples, w, f64::INFINITY).unwrap_or(f64::NAN);
    let l2 = backend.symbol_norm(coeffs, |_| 1.0);
    let h1dot = Some(backend.symbol_norm(coeffs, |l| l));
    let ut_l2 = ut_coeffs.map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt());
    let hs = opts
        .sobolev_s
        .map(|s| backend.symbol_norm(coeffs, |l| (1.0 + l).powf(s)));
    NormRecord {
        l1,
        lq,
        l2,
        linf,
        h1dot,
        ut_l2,
        hs,
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::param("times", format!("must be finite and >= 0, got {t}")));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("times", "must be strictly increasing"));
    }
    Ok(())
}

/// Exact linear damped-wave flow for fixed data, evaluated mode by mode.
pub struct LinearPropagator<'a> {
    backend: &'a SpectrumBackend,
    kernel: MultiplierKernel,
    c0: Vec<f64>,
    c1: Vec<f64>,
}

impl<'a> LinearPropagator<'a> {
    pub fn new(
        backend: &'a SpectrumBackend,
        kernel: MultiplierKernel,
        data: &CauchyData,
    ) -> Result<Self> {
        let c0 = backend.forward(&data.u0)?.into_coeffs();
        let c1 = backend.forward(&data.u1)?.into_coeffs();
        Ok(LinearPropagator {
            backend,
            kernel,
            c0,
            c1,
        })
    }

    pub fn initial_coeffs(&self) -> (&[f64], &[f64]) {
        (&self.c0, &self.c1)
    }

    /// Coefficients of `(u(t), ∂t u(t))`.
    pub fn coeffs_at(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let lam = self.backend.eigenvalues();
        let mut u = Vec::with_capacity(lam.len());
        let mut v = Vec::with_capacity(lam.len());
        for (k, &l) in lam.iter().enumerate() {
            let (d, dt, dt2) = (
                self.kernel.d(t, l),
                self.kernel.dt_d(t, l),
                self.kernel.dt2_d(t, l),
            );
            let sum = self.c0[k] + self.c1[k];
            u.push(d * sum + dt * self.c0[k]);
            v.push(dt * sum + dt2 * self.c0[k]);
        }
        (u, v)
    }

    pub fn state_at(&self, t: f64) -> Result<(SpectralCoeffs, SpectralCoeffs)> {
        let (u, v) = self.coeffs_at(t);
        Ok((self.backend.coefficients(u)?, self.backend.coefficients(v)?))
    }
}

/// Linear damped-wave solution `D(t,A)(u0 + u1) + ∂tD(t,A) u0` at the given times.
pub fn linear_solve(
    backend: &SpectrumBackend,
    kernel: MultiplierKernel,
    data: &CauchyData,
    times: &[f64],
    opts: TraceOptions,
) -> Result<EvolutionTrace> {
    opts.validate()?;
    check_times(times)?;
    let prop = LinearPropagator::new(backend, kernel, data)?;
    let rows: Vec<(NormRecord, Option<Snapshot>)> = times
        .par_iter()
        .map(|&t| {
            let (u, v) = prop.coeffs_at(t);
            let samples = backend.inverse_raw(&u);
            let rec = record_norms(backend, &u, &samples, Some(&v), &opts);
            let snap = opts
                .keep_snapshots
                .then(|| backend.grid_function(samples).map(|u| Snapshot { time: t, u }))
                .transpose();
            snap.map(|s| (rec, s))
        })
        .collect::<Result<_>>()?;
    let (norms, snaps): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(EvolutionTrace {
        times: times.to_vec(),
        norms,
        snapshots: snaps.into_iter().flatten().collect(),
        blowup: None,
        lq_exponent: opts.q,
        sobolev_s: opts.sobolev_s,
    })
}

/// Heat flow `e^{-tA} f`; the `ut_l2` channel holds `‖A e^{-tA} f‖_{L²}`.
pub fn heat_solve(
    backend: &SpectrumBackend,
    f: &GridFunction,
    times: &[f64],
    opts: TraceOptions,
) -> Result<EvolutionTrace> {
    opts.validate()?;
    check_times(times)?;
    let c = backend.forward(f)?.into_coeffs();
    let lam = backend.eigenvalues();
    let rows: Vec<(NormRecord, Option<Snapshot>)> = times
        .par_iter()
        .map(|&t| {
            let u: Vec<f64> = c
                .iter()
                .zip(lam)
                .map(|(c, &l)| c * (-t * l).exp())
                .collect();
            let ut: Vec<f64> = u.iter().zip(lam).map(|(c, &l)| -l * c).collect();
            let samples = backend.inverse_raw(&u);
            let rec = record_norms(backend, &u, &samples, Some(&ut), &opts);
            let snap = opts
                .keep_snapshots
                .then(|| backend.grid_function(samples).map(|u| Snapshot { time: t, u }))
                .transpose();
            snap.map(|s| (rec, s))
        })
        .collect::<Result<_>>()?;
    let (norms, snaps): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(EvolutionTrace {
        times: times.to_vec(),
        norms,
        snapshots: snaps.into_iter().flatten().collect(),
        blowup: None,
        lq_exponent: opts.q,
        sobolev_s: opts.sobolev_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Forcing frozen at the start of the step; first order.
    ExponentialEuler,
    /// Forcing frozen at a predicted half step; second order.
    ExponentialMidpoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearOptions {
    pub step: f64,
    pub horizon: f64,
    pub scheme: Scheme,
    pub blowup_cap: f64,
    /// Record norms every this many steps (the final step is always recorded).
    pub record_every: usize,
    /// Keep a snapshot every this many steps, plus the initial and final states.
    pub snapshot_every: Option<usize>,
    pub trace: TraceOptions,
}

impl Default for NonlinearOptions {
    fn default() -> Self {
        NonlinearOptions {
            step: DEFAULT_STEP,
            horizon: 1.0,
            scheme: Scheme::ExponentialMidpoint,
            blowup_cap: DEFAULT_BLOWUP_CAP,
            record_every: 1,
            snapshot_every: None,
            trace: TraceOptions::default(),
        }
    }
}

/// Per-mode multipliers for one step size.
struct StepMultipliers {
    d: Vec<f64>,
    dt: Vec<f64>,
    dt2: Vec<f64>,
    integral: Vec<f64>,
}

impl StepMultipliers {
    fn new(kernel: &MultiplierKernel, h: f64, lam: &[f64]) -> Self {
        StepMultipliers {
            d: lam.iter().map(|&l| kernel.d(h, l)).collect(),
            dt: lam.iter().map(|&l| kernel.dt_d(h, l)).collect(),
            dt2: lam.iter().map(|&l| kernel.dt2_d(h, l)).collect(),
            integral: lam.iter().map(|&l| kernel.step_integral(h, l)).collect(),
        }
    }

    /// Variation-of-constants update with frozen forcing coefficients `f`.
    fn advance(&self, u: &[f64], v: &[f64], f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = u.len();
        let mut un = Vec::with_capacity(n);
        let mut vn = Vec::with_capacity(n);
        for k in 0..n {
            let s = u[k] + v[k];
            un.push(self.d[k] * s + self.dt[k] * u[k] + self.integral[k] * f[k]);
            vn.push(self.dt[k] * s + self.dt2[k] * u[k] + self.d[k] * f[k]);
        }
        (un, vn)
    }
}

fn forcing_coeffs(backend: &SpectrumBackend, forcing: &impl Forcing, samples: &[f64]) -> Vec<f64> {
    let fu: Vec<f64> = samples.iter().map(|&u| forcing.apply(u)).collect();
    backend.forward_raw(&fu)
}

/// Semilinear damped-wave evolution by an exponential integrator whose
/// linear part is exact. Crossing the blow-up cap (or producing non-finite
/// values) ends the trace with a [`BlowUp`] record rather than an error.
pub fn nonlinear_evolve(
    backend: &SpectrumBackend,
    kernel: MultiplierKernel,
    data: &CauchyData,
    forcing: &impl Forcing,
    opts: NonlinearOptions,
) -> Result<EvolutionTrace> {
    opts.trace.validate()?;
    let h = opts.step;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::param("step", format!("must be positive, got {h}")));
    }
    if !(opts.horizon.is_finite() && opts.horizon >= h) {
        return Err(Error::param(
            "horizon",
            format!("must be at least the step {h}, got {}", opts.horizon),
        ));
    }
    let ratio = opts.horizon / h;
    let steps = ratio.round() as usize;
    if (ratio - steps as f64).abs() > 1e-6 * ratio.max(1.0) {
        return Err(Error::param(
            "horizon",
            format!("{} is not an integer multiple of the step {h}", opts.horizon),
        ));
    }
    if opts.record_every == 0 || opts.snapshot_every == Some(0) {
        return Err(Error::param("record_every", "strides must be positive"));
    }
    if !(opts.blowup_cap > 0.0) {
        return Err(Error::param("blowup_cap", "must be positive"));
    }

    let lam = backend.eigenvalues();
    let full = StepMultipliers::new(&kernel, h, lam);
    let half = match opts.scheme {
        Scheme::ExponentialMidpoint => Some(StepMultipliers::new(&kernel, 0.5 * h, lam)),
        Scheme::ExponentialEuler => None,
    };

    let mut u = backend.forward(&data.u0)?.into_coeffs();
    let mut v = backend.forward(&data.u1)?.into_coeffs();
    let mut samples = data.u0.samples().to_vec();

    let mut trace = EvolutionTrace {
        times: vec![0.0],
        norms: vec![record_norms(backend, &u, &samples, Some(&v), &opts.trace)],
        snapshots: Vec::new(),
        blowup: None,
        lq_exponent: opts.trace.q,
        sobolev_s: opts.trace.sobolev_s,
    };
    if opts.snapshot_every.is_some() {
        trace.snapshots.push(Snapshot {
            time: 0.0,
            u: data.u0.clone(),
        });
    }

    for n in 1..=steps {
        let f_start = forcing_coeffs(backend, forcing, &samples);
        let f_bar = match &half {
            None => f_start,
            Some(half) => {
                let (uh, _) = half.advance(&u, &v, &f_start);
                let mid = backend.inverse_raw(&uh);
                forcing_coeffs(backend, forcing, &mid)
            }
        };
        let (un, vn) = full.advance(&u, &v, &f_bar);
        u = un;
        v = vn;
        samples = backend.inverse_raw(&u);
        let t = n as f64 * h;

        let linf = samples.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let finite = samples.iter().all(|x| x.is_finite()) && v.iter().all(|x| x.is_finite());
        if !finite || linf > opts.blowup_cap {
            trace.times.push(t);
            trace
                .norms
                .push(record_norms(backend, &u, &samples, Some(&v), &opts.trace));
            trace.blowup = Some(BlowUp {
                time: t,
                reason: if finite {
                    BlowUpReason::CapExceeded {
                        linf,
                        cap: opts.blowup_cap,
                    }
                } else {
                    BlowUpReason::NonFinite
                },
            });
            return Ok(trace);
        }

        if n % opts.record_every == 0 || n == steps {
            trace.times.push(t);
            trace
                .norms
                .push(record_norms(backend, &u, &samples, Some(&v), &opts.trace));
        }
        if let Some(stride) = opts.snapshot_every {
            if n % stride == 0 || n == steps {
                trace.snapshots.push(Snapshot {
                    time: t,
                    u: backend.grid_function(samples.clone())?,
                });
            }
        }
    }
    Ok(trace)
}

/// A posteriori check of the mild-solution equation
/// `u(t) = u_L(t) + ∫_0^t D(t-τ, A) F(u(τ)) dτ`, with trapezoidal quadrature
/// over the stored snapshots. Returns the largest `L²` defect over `sample_times`.
pub fn duhamel_residual(
    backend: &SpectrumBackend,
    kernel: MultiplierKernel,
    data: &CauchyData,
    trace: &EvolutionTrace,
    forcing: &impl Forcing,
    sample_times: &[f64],
) -> Result<f64> {
    let snaps = &trace.snapshots;
    if snaps.len() < 2 {
        return Err(Error::param(
            "snapshots",
            format!("at least 2 snapshots required, trace has {}", snaps.len()),
        ));
    }
    if snaps[0].time != 0.0 {
        return Err(Error::param("snapshots", "first snapshot must be at t = 0"));
    }
    if sample_times.is_empty() {
        return Err(Error::param("sample_times", "no sample times given"));
    }
    let index_of = |t: f64| {
        snaps
            .iter()
            .position(|s| (s.time - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or_else(|| Error::param("sample_times", format!("no snapshot at t = {t}")))
    };
    let indices: Vec<usize> = sample_times
        .iter()
        .map(|&t| index_of(t))
        .collect::<Result<_>>()?;

    let prop = LinearPropagator::new(backend, kernel, data)?;
    let forcing_hat: Vec<Vec<f64>> = snaps
        .par_iter()
        .map(|s| forcing_coeffs(backend, forcing, s.u.samples()))
        .collect();
    let lam = backend.eigenvalues();

    let defects: Vec<f64> = indices
        .par_iter()
        .map(|&m| -> Result<f64> {
            let t = snaps[m].time;
            let (ul, _) = prop.coeffs_at(t);
            let u = backend.forward(&snaps[m].u)?.into_coeffs();
            let mut quad = vec![0.0; lam.len()];
            for i in 0..m {
                let (ta, tb) = (snaps[i].time, snaps[i + 1].time);
                let w = 0.5 * (tb - ta);
                for (k, &l) in lam.iter().enumerate() {
                    quad[k] += w
                        * (kernel.d(t - ta, l) * forcing_hat[i][k]
                            + kernel.d(t - tb, l) * forcing_hat[i + 1][k]);
                }
            }
            Ok(u.iter()
                .zip(&ul)
                .zip(&quad)
                .map(|((u, l), q)| {
                    let r = u - l - q;
                    r * r
                })
                .sum::<f64>()
                .sqrt())
        })
        .collect::<Result<_>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn single_mode(lambda: f64) -> SpectrumBackend {
        SpectrumBackend::from_matrix(&DMatrix::from_element(1, 1, lambda), &[1.0], None).unwrap()
    }

    #[test]
    fn nonlinearity_forms() {
        let p = 3.0;
        let f = |form| Nonlinearity::new(p, form).unwrap();
        assert_eq!(f(NonlinearForm::PlusAbs).apply(-2.0), 8.0);
        assert_eq!(f(NonlinearForm::MinusAbs).apply(-2.0), -8.0);
        assert_eq!(f(NonlinearForm::PlusSigned).apply(-2.0), -8.0);
        assert_eq!(f(NonlinearForm::MinusSigned).apply(-2.0), 8.0);
        assert!(Nonlinearity::new(1.0, NonlinearForm::PlusAbs).is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let b = SpectrumBackend::dirichlet_1d(10.0, 32).unwrap();
        let data = CauchyData::new(b.zeros(), b.zeros()).unwrap();
        let tr = linear_solve(&b, MultiplierKernel::default(), &data, &[0.0, 1.0, 5.0], TraceOptions::default()).unwrap();
        assert!(tr.norms.iter().all(|r| r.l2 == 0.0 && r.linf == 0.0));
    }

    #[test]
    fn time_zero_returns_initial_data() {
        let b = SpectrumBackend::dirichlet_1d(10.0, 64).unwrap();
        let u0 = b.sample(|x| (-(x - 5.0) * (x - 5.0)).exp()).unwrap();
        let u1 = b.sample(|x| x * (10.0 - x) / 25.0).unwrap();
        let data = CauchyData::new(u0.clone(), u1.clone()).unwrap();
        let prop = LinearPropagator::new(&b, MultiplierKernel::default(), &data).unwrap();
        let (u, v) = prop.state_at(0.0).unwrap();
        let c0 = b.forward(&u0).unwrap();
        let c1 = b.forward(&u1).unwrap();
        assert_eq!(u.coeffs(), c0.coeffs());
        for (a, b) in v.coeffs().iter().zip(c1.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let b = single_mode(1.0);
        let data = CauchyData::new(b.zeros(), b.zeros()).unwrap();
        let k = MultiplierKernel::default();
        assert!(linear_solve(&b, k, &data, &[1.0, 0.5], TraceOptions::default()).is_err());
        assert!(linear_solve(&b, k, &data, &[-1.0], TraceOptions::default()).is_err());
        let mut opts = NonlinearOptions { horizon: 1.0, step: 0.0, ..Default::default() };
        assert!(nonlinear_evolve(&b, k, &data, &NoForcing, opts).is_err());
        opts.step = 0.3;
        assert!(nonlinear_evolve(&b, k, &data, &NoForcing, opts).is_err());
        opts.step = 2.0;
        assert!(nonlinear_evolve(&b, k, &data, &NoForcing, opts).is_err());
        let other = single_mode(1.0);
        assert!(CauchyData::new(b.zeros(), other.zeros()).is_err());
    }

    #[test]
    fn blowup_terminates_trace() {
        let b = single_mode(0.5);
        let u0 = b.grid_function(vec![2.0]).unwrap();
        let data = CauchyData::new(u0, b.zeros()).unwrap();
        let f = Nonlinearity::new(2.0, NonlinearForm::PlusAbs).unwrap();
        let opts = NonlinearOptions {
            horizon: 50.0,
            step: 0.01,
            ..Default::default()
        };
        let tr = nonlinear_evolve(&b, MultiplierKernel::default(), &data, &f, opts).unwrap();
        let bu = tr.blowup.expect("blow-up expected");
        assert!(bu.time < 50.0);
        assert_eq!(*tr.times.last().unwrap(), bu.time);
    }

    #[test]
    fn duhamel_needs_snapshots() {
        let b = single_mode(1.0);
        let data = CauchyData::new(b.grid_function(vec![0.1]).unwrap(), b.zeros()).unwrap();
        let k = MultiplierKernel::default();
        let opts = NonlinearOptions { horizon: 1.0, step: 0.1, ..Default::default() };
        let tr = nonlinear_evolve(&b, k, &data, &NoForcing, opts).unwrap();
        assert!(duhamel_residual(&b, k, &data, &tr, &NoForcing, &[1.0]).is_err());
        let opts = NonlinearOptions { snapshot_every: Some(2), ..opts };
        let tr = nonlinear_evolve(&b, k, &data, &NoForcing, opts).unwrap();
        assert!(duhamel_residual(&b, k, &data, &tr, &NoForcing, &[0.3]).is_err());
        assert!(duhamel_residual(&b, k, &data, &tr, &NoForcing, &[1.0]).unwrap() < 1e-12);
    }
}
