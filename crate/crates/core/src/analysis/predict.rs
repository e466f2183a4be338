//! Decay exponents predicted by the linear estimates and the admissibility
//! conditions for small-data global existence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentTarget {
    Linf,
    L2,
    /// `u_lin − e^{-tA}(u0 + u1)` in `L^∞`.
    DiffLinf,
    /// `u_lin − e^{-tA}(u0 + u1)` in `L²`.
    DiffL2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPrediction {
    pub alpha: f64,
    pub q: f64,
    pub k: u8,
    pub s: f64,
    pub target: ExponentTarget,
    pub predicted: f64,
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::param("q", format!("q ∈ [1,2] required, got {q}")));
    }
    Ok(())
}

/// Predicted `t`-decay exponent of `‖∂t^k A^{s/2} u(t)‖` for `L^q` data.
pub fn predict_exponent(
    alpha: f64,
    q: f64,
    k: u8,
    s: f64,
    target: ExponentTarget,
) -> Result<ExponentPrediction> {
    check_q(q)?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    if k > 1 {
        return Err(Error::param("k", format!("must be 0 or 1, got {k}")));
    }
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::param("s", format!("must be >= 0, got {s}")));
    }
    let base = match target {
        ExponentTarget::Linf | ExponentTarget::DiffLinf => 2.0 * alpha / q,
        ExponentTarget::L2 | ExponentTarget::DiffL2 => 2.0 * alpha * (1.0 / q - 0.5),
    };
    let extra = match target {
        ExponentTarget::DiffLinf | ExponentTarget::DiffL2 => 1.0,
        _ => 0.0,
    };
    Ok(ExponentPrediction {
        alpha,
        q,
        k,
        s,
        target,
        predicted: base + k as f64 + s / 2.0 + extra,
    })
}

/// Relative tolerance for deciding `q = 2α(p−1)`.
const BOUNDARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalityRecord {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    /// `1 + q/(2α)`.
    #[serde(rename = "p_F")]
    pub p_fujita: f64,
    pub admissible: bool,
    /// 0 when `q < 2α(p−1)`, 1 when `q = 2α(p−1)`, absent otherwise.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<u8>,
    /// `max{1, 2/p}`.
    pub sigma: f64,
    /// `[max{1, 2/p}, min{2, 2α(p−1)}]` when nonempty.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q_range: Option<(f64, f64)>,
    /// Conditions that fail, empty when admissible.
    pub violations: Vec<String>,
}

impl CriticalityRecord {
    pub fn on_delta_boundary(&self) -> bool {
        self.delta == Some(1)
    }
}

/// Evaluates the exponent conditions for `(p, q, α)`. Inadmissible triples
/// are a valid result and list the violated conditions.
pub fn criticality(p: f64, q: f64, alpha: f64) -> Result<CriticalityRecord> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::param("p", format!("must exceed 1, got {p}")));
    }
    check_q(q)?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    let two_a = 2.0 * alpha;
    let p_fujita = 1.0 + q / two_a;
    let p_fujita_one = 1.0 + 1.0 / two_a;
    let sigma = f64::max(1.0, 2.0 / p);
    let upper = two_a * (p - 1.0);
    let on_boundary = (q - upper).abs() <= BOUNDARY_TOLERANCE * upper.max(1.0);
    let delta = if on_boundary {
        Some(1)
    } else if q < upper {
        Some(0)
    } else {
        None
    };

    let mut violations = Vec::new();
    if p <= p_fujita_one {
        violations.push(format!("p = {p} must exceed 1 + 1/(2α) = {p_fujita_one}"));
    }
    if 2.0 / p >= upper {
        violations.push(format!("2/p = {} must be < 2α(p−1) = {upper}", 2.0 / p));
    }
    let lo = f64::max(1.0, 2.0 / p);
    let hi = f64::min(2.0, upper);
    let q_range = (lo <= hi + BOUNDARY_TOLERANCE).then_some((lo, hi));
    let in_range = q >= lo && (q <= hi || on_boundary);
    if !in_range {
        violations.push(format!("q = {q} must lie in [max{{1, 2/p}}, min{{2, 2α(p−1)}}] = [{lo}, {hi}]"));
    }
    if alpha > 0.5 {
        let cap = two_a / (two_a - 1.0);
        if p > cap {
            violations.push(format!("p = {p} must be <= 2α/(2α−1) = {cap} when α > 1/2"));
        }
    }
    Ok(CriticalityRecord {
        p,
        q,
        alpha,
        p_fujita,
        admissible: violations.is_empty(),
        delta,
        sigma,
        q_range,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicted_exponents() {
        let p = |t| predict_exponent(0.25, 1.0, 0, 0.0, t).unwrap().predicted;
        assert_eq!(p(ExponentTarget::L2), 0.25);
        assert_eq!(p(ExponentTarget::Linf), 0.5);
        assert_eq!(p(ExponentTarget::DiffL2), 1.25);
        assert_eq!(p(ExponentTarget::DiffLinf), 1.5);
        let ut = predict_exponent(0.25, 1.0, 1, 0.0, ExponentTarget::L2).unwrap();
        assert_eq!(ut.predicted, 1.25);
        let grad = predict_exponent(0.25, 1.0, 0, 1.0, ExponentTarget::L2).unwrap();
        assert_eq!(grad.predicted, 0.75);
        assert_eq!(predict_exponent(0.25, 2.0, 0, 0.0, ExponentTarget::L2).unwrap().predicted, 0.0);
    }

    #[test]
    fn prediction_rejects_bad_q() {
        let err = predict_exponent(0.25, 2.5, 0, 0.0, ExponentTarget::L2).unwrap_err();
        assert!(err.to_string().contains("q ∈ [1,2]"));
        assert!(predict_exponent(0.25, 0.5, 0, 0.0, ExponentTarget::L2).is_err());
        assert!(predict_exponent(0.25, 1.0, 2, 0.0, ExponentTarget::L2).is_err());
    }

    #[test]
    fn admissible_supercritical() {
        let r = criticality(4.0, 1.0, 0.25).unwrap();
        assert_eq!(r.p_fujita, 3.0);
        assert!(r.admissible, "{:?}", r.violations);
        assert_eq!(r.q_range, Some((1.0, 1.5)));
        assert_eq!(r.delta, Some(0));
        assert_eq!(r.sigma, 1.0);
    }

    #[test]
    fn delta_boundary() {
        let r = criticality(4.0, 1.5, 0.25).unwrap();
        assert!(r.admissible);
        assert_eq!(r.delta, Some(1));
    }

    #[test]
    fn q_above_range_is_inadmissible() {
        let r = criticality(3.0, 1.5, 0.25).unwrap();
        assert!(!r.admissible);
        assert_eq!(r.delta, None);
    }

    #[test]
    fn sub_fujita_is_inadmissible() {
        let r = criticality(2.0, 1.0, 0.25).unwrap();
        assert_eq!(r.p_fujita, 3.0);
        assert!(!r.admissible);
    }

    #[test]
    fn large_alpha_caps_p() {
        let r = criticality(5.0, 1.0, 1.0).unwrap();
        assert!(!r.admissible);
        assert!(criticality(1.8, 1.2, 1.0).unwrap().admissible);
    }
}
