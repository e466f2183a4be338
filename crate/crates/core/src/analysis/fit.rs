//! Least-squares power-law fits `norm ≈ C t^{-exponent}` in log-log coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{EvolutionTrace, NormSelector};

/// Fewer points than this make a window degenerate.
pub const MIN_FIT_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub lo: f64,
    pub hi: f64,
}

impl TimeWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return Err(Error::param(
                "window",
                format!("need 0 < lo < hi, got [{lo}, {hi}]"),
            ));
        }
        Ok(TimeWindow { lo, hi })
    }

    pub fn contains(&self, t: f64) -> bool {
        let slack = 1e-12 * self.hi;
        t >= self.lo - slack && t <= self.hi + slack
    }

    /// `n` logarithmically spaced times from `lo` to `hi` inclusive.
    pub fn log_spaced(&self, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![self.lo];
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        (0..n)
            .map(|i| {
                if i == 0 {
                    self.lo
                } else if i == n - 1 {
                    self.hi
                } else {
                    (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                }
            })
            .collect()
    }
}

/// Whether the data look like a power law or like exponential decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecayRegime {
    PowerLaw,
    /// Semi-log fit `log norm ≈ c - rate t` explains the data better.
    Exponential { rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `norm ≈ exp(intercept) · t^{-exponent}`.
    pub exponent: f64,
    pub intercept: f64,
    pub window: TimeWindow,
    pub r_squared: f64,
    pub n_points: usize,
    pub regime: DecayRegime,
}

impl DecayFit {
    pub fn is_power_law(&self) -> bool {
        matches!(self.regime, DecayRegime::PowerLaw)
    }
}

struct LineFit {
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let r_squared = if syy <= f64::MIN_POSITIVE {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Fits `values ≈ C t^{-exponent}` over the samples whose time falls in `window`.
pub fn fit_power_law(times: &[f64], values: &[f64], window: TimeWindow) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::Shape {
            expected: times.len(),
            got: values.len(),
        });
    }
    let mut lt = Vec::new();
    let mut ly = Vec::new();
    let mut raw_t = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if !window.contains(t) {
            continue;
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Data(format!(
                "norm value {v} at t = {t} is not positive; cannot take logarithms"
            )));
        }
        lt.push(t.ln());
        ly.push(v.ln());
        raw_t.push(t);
    }
    if lt.len() < MIN_FIT_POINTS {
        return Err(Error::param(
            "window",
            format!(
                "[{}, {}] holds {} samples, at least {MIN_FIT_POINTS} required",
                window.lo,
                window.hi,
                lt.len()
            ),
        ));
    }
    let loglog = least_squares(&lt, &ly);
    let semilog = least_squares(&raw_t, &ly);
    let regime = if semilog.r_squared > loglog.r_squared {
        DecayRegime::Exponential {
            rate: -semilog.slope,
        }
    } else {
        DecayRegime::PowerLaw
    };
    Ok(DecayFit {
        exponent: -loglog.slope,
        intercept: loglog.intercept,
        window,
        r_squared: loglog.r_squared,
        n_points: lt.len(),
        regime,
    })
}

/// Decay fit for one norm channel of a trace.
pub fn fit_decay(
    trace: &EvolutionTrace,
    which: NormSelector,
    window: TimeWindow,
) -> Result<DecayFit> {
    let values = trace.channel(which)?;
    fit_power_law(&trace.times, &values, window)
}
