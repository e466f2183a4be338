//! Scalar multipliers of the damped wave flow.
//!
//! `D(t, λ)` solves `y'' + y' + λ y = 0`, `y(0) = 0`, `y'(0) = 1`:
//!
//! ```text
//! D(t, λ) = e^{-t/2} sinh(t ω) / ω,   ω = √(1/4 - λ),   λ < 1/4
//!         = t e^{-t/2},                                  λ = 1/4
//!         = e^{-t/2} sin(t ω̃) / ω̃,    ω̃ = √(λ - 1/4),   λ > 1/4
//! ```
//!
//! Near `λ = 1/4` both outer branches are evaluated through the entire series
//! `sinh(tω)/(tω) = Σ z^n / (2n+1)!` in `z = t²(1/4 - λ)`, which continues them
//! analytically through the middle point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BRANCH_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_SERIES_TERMS: usize = 12;

/// `-ln(f64::MIN_POSITIVE)`, rounded down.
const UNDERFLOW_EXPONENT: f64 = 708.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierKernel {
    /// Half-width of the series window around `λ = 1/4`.
    pub branch_threshold: f64,
    pub series_terms: usize,
}

impl Default for MultiplierKernel {
    fn default() -> Self {
        MultiplierKernel {
            branch_threshold: DEFAULT_BRANCH_THRESHOLD,
            series_terms: DEFAULT_SERIES_TERMS,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Branch {
    /// `λ < 1/4`; the exponents are `a = ω - 1/2 = -λ/(ω + 1/2)` and `-(ω + 1/2)`.
    Hyperbolic { omega: f64, a: f64 },
    Series { z: f64 },
    Oscillatory { omega: f64 },
}

fn check(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::param(name, format!("must be finite and non-negative, got {v}")));
    }
    Ok(())
}

fn expm1_over(x: f64, h: f64) -> f64 {
    // expm1(h x) / x with the x -> 0 limit h
    let hx = h * x;
    if hx.abs() < 1e-9 {
        h * (1.0 + 0.5 * hx)
    } else {
        hx.exp_m1() / x
    }
}

impl MultiplierKernel {
    pub fn new(branch_threshold: f64, series_terms: usize) -> Result<Self> {
        if !(branch_threshold.is_finite() && branch_threshold > 0.0 && branch_threshold < 0.25) {
            return Err(Error::param(
                "branch_threshold",
                format!("must lie in (0, 1/4), got {branch_threshold}"),
            ));
        }
        if series_terms == 0 {
            return Err(Error::param("series_terms", "must be positive"));
        }
        Ok(MultiplierKernel {
            branch_threshold,
            series_terms,
        })
    }

    fn branch(&self, t: f64, lambda: f64) -> Branch {
        let gap = 0.25 - lambda;
        if gap.abs() < self.branch_threshold {
            Branch::Series { z: t * t * gap }
        } else if gap > 0.0 {
            let omega = gap.sqrt();
            Branch::Hyperbolic {
                omega,
                a: -lambda / (omega + 0.5),
            }
        } else {
            Branch::Oscillatory {
                omega: (-gap).sqrt(),
            }
        }
    }

    /// `(Σ z^n/(2n+1)!, Σ z^n/(2n)!)`.
    fn series(&self, z: f64) -> (f64, f64) {
        let mut odd_term = 1.0;
        let mut even_term = 1.0;
        let mut odd = 1.0;
        let mut even = 1.0;
        for n in 1..self.series_terms {
            let k = (2 * n) as f64;
            even_term *= z / (k * (k - 1.0));
            odd_term *= z / (k * (k + 1.0));
            even += even_term;
            odd += odd_term;
        }
        (odd, even)
    }

    /// True when `e^{-t/2}` times the branch growth is below the smallest normal
    /// double, so the kernels return (or are indistinguishable from) zero.
    pub fn underflows(&self, t: f64, lambda: f64) -> bool {
        let rate = match self.branch(t, lambda) {
            Branch::Hyperbolic { a, .. } => -a,
            Branch::Series { .. } | Branch::Oscillatory { .. } => 0.5,
        };
        rate * t - (1.0 + t).ln() > UNDERFLOW_EXPONENT
    }

    pub fn eval_d(&self, t: f64, lambda: f64) -> Result<f64> {
        check("t", t)?;
        check("lambda", lambda)?;
        Ok(self.d(t, lambda))
    }

    pub fn eval_dt_d(&self, t: f64, lambda: f64) -> Result<f64> {
        check("t", t)?;
        check("lambda", lambda)?;
        Ok(self.dt_d(t, lambda))
    }

    /// Second time derivative; equals `-∂tD - λ D`.
    pub fn eval_dt2_d(&self, t: f64, lambda: f64) -> Result<f64> {
        check("t", t)?;
        check("lambda", lambda)?;
        Ok(self.dt2_d(t, lambda))
    }

    pub fn eval_heat(&self, t: f64, lambda: f64) -> Result<f64> {
        check("t", t)?;
        check("lambda", lambda)?;
        Ok((-t * lambda).exp())
    }

    /// `I(h, λ) = ∫_0^h D(σ, λ) dσ`.
    pub fn eval_step_integral(&self, h: f64, lambda: f64) -> Result<f64> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::param("h", format!("must be positive, got {h}")));
        }
        check("lambda", lambda)?;
        Ok(self.step_integral(h, lambda))
    }

    /// `e^{tλ/2}(D(t, λ) - e^{-tλ})` on `0 ≤ λ < 1/8`.
    pub fn eval_diff_symbol(&self, t: f64, lambda: f64) -> Result<f64> {
        check("t", t)?;
        check("lambda", lambda)?;
        if lambda >= 0.125 {
            return Err(Error::Domain {
                name: "diff_symbol",
                reason: format!("requires 0 ≤ λ < 1/8, got {lambda}"),
            });
        }
        Ok(self.diff_symbol(t, lambda))
    }

    pub(crate) fn d(&self, t: f64, lambda: f64) -> f64 {
        match self.branch(t, lambda) {
            Branch::Hyperbolic { omega, a } => {
                -(t * a).exp() * (-2.0 * t * omega).exp_m1() / (2.0 * omega)
            }
            Branch::Series { z } => {
                let (odd, _) = self.series(z);
                (-0.5 * t).exp() * t * odd
            }
            Branch::Oscillatory { omega } => (-0.5 * t).exp() * (t * omega).sin() / omega,
        }
    }

    pub(crate) fn dt_d(&self, t: f64, lambda: f64) -> f64 {
        match self.branch(t, lambda) {
            Branch::Hyperbolic { omega, a } => {
                let b = omega + 0.5;
                (a * (t * a).exp() + b * (-t * b).exp()) / (2.0 * omega)
            }
            Branch::Series { z } => {
                let (odd, even) = self.series(z);
                (-0.5 * t).exp() * (even - 0.5 * t * odd)
            }
            Branch::Oscillatory { omega } => {
                let (s, c) = (t * omega).sin_cos();
                (-0.5 * t).exp() * (c - 0.5 * s / omega)
            }
        }
    }

    pub(crate) fn dt2_d(&self, t: f64, lambda: f64) -> f64 {
        match self.branch(t, lambda) {
            Branch::Hyperbolic { omega, a } => {
                let b = omega + 0.5;
                (a * a * (t * a).exp() - b * b * (-t * b).exp()) / (2.0 * omega)
            }
            _ => -self.dt_d(t, lambda) - lambda * self.d(t, lambda),
        }
    }

    pub(crate) fn step_integral(&self, h: f64, lambda: f64) -> f64 {
        if h * lambda.sqrt().max(1.0) <= 2.0 {
            return taylor_step_integral(h, lambda);
        }
        match self.branch(h, lambda) {
            Branch::Hyperbolic { omega, a } => {
                let b = omega + 0.5;
                (expm1_over(a, h) - expm1_over(-b, h)) / (2.0 * omega)
            }
            _ => (1.0 - self.dt_d(h, lambda) - self.d(h, lambda)) / lambda,
        }
    }

    pub(crate) fn diff_symbol(&self, t: f64, lambda: f64) -> f64 {
        let s = (1.0 - 4.0 * lambda).sqrt();
        let e = -4.0 * t * lambda * lambda / ((1.0 + s) * (1.0 + s));
        let near = (-0.5 * t * lambda).exp()
            * (4.0 * lambda / (s * (1.0 + s)) * e.exp() + e.exp_m1());
        let far = (0.5 * t * lambda - t * (0.5 + 0.5 * s)).exp() / s;
        near - far
    }
}

/// `Σ_{m≥1} D^{(m)}(0) h^{m+1}/(m+1)!` with `D'(0) = 1`, `D''(0) = -1` and
/// `D^{(m+2)}(0) = -D^{(m+1)}(0) - λ D^{(m)}(0)`.
fn taylor_step_integral(h: f64, lambda: f64) -> f64 {
    let (mut prev, mut cur) = (0.0_f64, 1.0_f64);
    let mut power = h * h / 2.0;
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for m in 1..80 {
        let term = cur * power;
        sum += term;
        if m > 3 && term.abs() + last.abs() <= 1e-18 * sum.abs() {
            break;
        }
        last = term;
        let next = -cur - lambda * prev;
        prev = cur;
        cur = next;
        power *= h / (m + 2) as f64;
    }
    sum
}
