//! Time-weighted supremum norms of a solution trace and of its forcing.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{EvolutionTrace, Forcing, NormRecord, NormSelector, Snapshot};
use crate::spectral::{lq_norm_raw, SpectrumBackend};

use super::predict::check_q;

/// `⟨t⟩ = (1 + t²)^{1/2}`.
pub fn japanese(t: f64) -> f64 {
    t.hypot(1.0)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    Ok(())
}

/// `sup_t [⟨t⟩^{a+1} log(2+t)^{-δ} ‖u_t‖₂ + ⟨t⟩^{a+1/2} ‖A^{1/2}u‖₂ + ⟨t⟩^a ‖u‖₂]`
/// with `a = 2α(1/q − 1/2)`.
pub fn weighted_x_norm(trace: &EvolutionTrace, q: f64, alpha: f64, delta: u8) -> Result<f64> {
    check_q(q)?;
    check_alpha(alpha)?;
    if delta > 1 {
        return Err(Error::param("delta", format!("must be 0 or 1, got {delta}")));
    }
    let ut = trace.channel(NormSelector::UtL2)?;
    let grad = trace.channel(NormSelector::H1dot)?;
    let l2 = trace.channel(NormSelector::L2)?;
    let a = 2.0 * alpha * (1.0 / q - 0.5);
    let mut sup = 0.0_f64;
    for (i, &t) in trace.times.iter().enumerate() {
        let jt = japanese(t);
        let log_w = (2.0 + t).ln().powi(-(delta as i32));
        let v = jt.powf(a + 1.0) * log_w * ut[i] + jt.powf(a + 0.5) * grad[i] + jt.powf(a) * l2[i];
        sup = sup.max(v);
    }
    Ok(sup)
}

/// `sup_t [⟨t⟩^{2α(1/q − 1/(2p))p} ‖ψ‖₂ + ⟨t⟩^{2α(1/q − 1/(σp))p} ‖ψ‖_σ]`
/// for a trace of `ψ = F(u)` whose `lq` channel holds `‖ψ‖_σ`.
pub fn weighted_y_norm(
    forcing: &EvolutionTrace,
    p: f64,
    q: f64,
    alpha: f64,
    sigma: f64,
) -> Result<f64> {
    check_q(q)?;
    check_alpha(alpha)?;
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::param("p", format!("must exceed 1, got {p}")));
    }
    if !(1.0..=2.0).contains(&sigma) {
        return Err(Error::param("sigma", format!("σ ∈ [1,2] required, got {sigma}")));
    }
    if forcing.lq_exponent != sigma {
        return Err(Error::Data(format!(
            "forcing trace records L^{} norms, L^{sigma} required",
            forcing.lq_exponent
        )));
    }
    let l2 = forcing.channel(NormSelector::L2)?;
    let ls = forcing.channel(NormSelector::Lq)?;
    let e2 = 2.0 * alpha * (1.0 / q - 1.0 / (2.0 * p)) * p;
    let es = 2.0 * alpha * (1.0 / q - 1.0 / (sigma * p)) * p;
    let mut sup = 0.0_f64;
    for (i, &t) in forcing.times.iter().enumerate() {
        let jt = japanese(t);
        sup = sup.max(jt.powf(e2) * l2[i] + jt.powf(es) * ls[i]);
    }
    Ok(sup)
}

/// Trace of `ψ = F(u)` at the snapshot times of `trace`, recording `‖ψ‖_σ` in the `lq` channel.
pub fn forcing_trace(
    backend: &SpectrumBackend,
    trace: &EvolutionTrace,
    forcing: &impl Forcing,
    sigma: f64,
) -> Result<EvolutionTrace> {
    if trace.snapshots.is_empty() {
        return Err(Error::param("snapshots", "trace has no snapshots"));
    }
    let w = backend.weights();
    let norms: Vec<NormRecord> = trace
        .snapshots
        .par_iter()
        .map(|Snapshot { u, .. }| -> Result<NormRecord> {
            let psi: Vec<f64> = u.samples().iter().map(|&v| forcing.apply(v)).collect();
            Ok(NormRecord {
                l1: lq_norm_raw(&psi, w, 1.0)?,
                lq: lq_norm_raw(&psi, w, sigma)?,
                l2: lq_norm_raw(&psi, w, 2.0)?,
                linf: lq_norm_raw(&psi, w, f64::INFINITY)?,
                h1dot: None,
                ut_l2: None,
                hs: None,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EvolutionTrace {
        times: trace.snapshots.iter().map(|s| s.time).collect(),
        norms,
        snapshots: Vec::new(),
        blowup: None,
        lq_exponent: sigma,
        sobolev_s: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(times: Vec<f64>, f: impl Fn(f64) -> (f64, f64, f64)) -> EvolutionTrace {
        let norms = times
            .iter()
            .map(|&t| {
                let (l2, grad, ut) = f(t);
                NormRecord {
                    l1: l2,
                    lq: l2,
                    l2,
                    linf: l2,
                    h1dot: Some(grad),
                    ut_l2: Some(ut),
                    hs: None,
                }
            })
            .collect();
        EvolutionTrace {
            times,
            norms,
            snapshots: vec![],
            blowup: None,
            lq_exponent: 2.0,
            sobolev_s: None,
        }
    }

    #[test]
    fn exact_weights_give_three() {
        let (alpha, q) = (0.25, 1.0);
        let a = 2.0 * alpha * (1.0 / q - 0.5);
        for delta in [0u8, 1] {
            let tr = trace((0..50).map(|i| i as f64 * 7.5).collect(), |t| {
                let jt = japanese(t);
                (
                    jt.powf(-a),
                    jt.powf(-a - 0.5),
                    jt.powf(-a - 1.0) * (2.0 + t).ln().powi(delta as i32),
                )
            });
            let x = weighted_x_norm(&tr, q, alpha, delta).unwrap();
            assert!((x - 3.0).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn q_two_has_trivial_l2_weight() {
        let tr = trace(vec![0.0, 1.0, 3.0], |_| (1.0, 0.5, 0.25));
        let x = weighted_x_norm(&tr, 2.0, 0.25, 0).unwrap();
        let expect = 3.0f64.hypot(1.0) * 0.25 + 3.0f64.hypot(1.0).sqrt() * 0.5 + 1.0;
        assert!((x - expect).abs() < 1e-12);
    }

    #[test]
    fn missing_channel_is_a_data_error() {
        let mut tr = trace(vec![0.0, 1.0], |_| (1.0, 1.0, 1.0));
        tr.norms[1].ut_l2 = None;
        assert!(matches!(weighted_x_norm(&tr, 1.0, 0.25, 0), Err(Error::Data(_))));
    }

    #[test]
    fn y_norm_checks_sigma_channel() {
        let tr = trace(vec![0.0, 1.0], |_| (1.0, 1.0, 1.0));
        assert!(weighted_y_norm(&tr, 4.0, 1.0, 0.25, 1.0).is_err());
        let y = weighted_y_norm(&tr, 4.0, 1.0, 0.25, 2.0).unwrap();
        assert!(y.is_finite() && y >= 2.0);
    }
}
