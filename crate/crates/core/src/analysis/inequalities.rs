//! Ratio scans for the Sobolev, Gagliardo–Nirenberg, critical Sobolev and
//! heat-semigroup inequalities over a sequence of refinement levels.
//!
//! The trial functions are band-limited Gaussian white noise. The band is the
//! lowest quarter of the coarsest level's modes, and trial `i` uses the same
//! coefficients at every level, so a refinement sequence compares the same
//! functions at growing resolution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{lq_norm_raw, SpectrumBackend};

/// Consecutive levels whose maximal ratios differ by less than this are "bounded".
pub const REFINEMENT_TOLERANCE: f64 = 0.20;
pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_BAND_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InequalityOptions {
    /// Mode counts of the refinement levels when the levels are built from a config.
    pub levels: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Fraction of the coarsest level's modes carrying noise.
    pub band_fraction: f64,
    /// Target exponent of the Gagliardo–Nirenberg inequality (may be infinite).
    #[serde(with = "maybe_infinite")]
    pub gn_q: f64,
    /// Target exponent and index of the Sobolev inequality.
    #[serde(with = "maybe_infinite")]
    pub sobolev_q: f64,
    pub sobolev_s: f64,
    /// Times for the heat smoothing check.
    pub heat_times: Vec<f64>,
    /// Log-spaced window and count for `t^α ‖e^{-tA}‖_{2→∞}`.
    pub heat_window: (f64, f64),
    pub heat_points: usize,
}

impl Default for InequalityOptions {
    fn default() -> Self {
        InequalityOptions {
            levels: vec![512, 1024, 2048, 4096],
            trials: DEFAULT_TRIALS,
            seed: 0,
            band_fraction: DEFAULT_BAND_FRACTION,
            gn_q: f64::INFINITY,
            sobolev_q: f64::INFINITY,
            sobolev_s: 0.6,
            heat_times: vec![0.1, 1.0, 10.0, 100.0],
            heat_window: (1.0, 100.0),
            heat_points: 16,
        }
    }
}

/// JSON has no infinity; `"inf"` stands in for it.
mod maybe_infinite {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" || t == "infinity" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got \"{t}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelRatio {
    pub modes: usize,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityResult {
    pub inequality: String,
    /// Largest ratio over all levels.
    pub max_ratio: f64,
    pub per_level: Vec<LevelRatio>,
    /// Largest relative change between consecutive levels.
    pub max_relative_change: f64,
    pub bounded: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub skipped: Option<String>,
}

impl InequalityResult {
    fn skipped(name: &str, reason: String) -> Self {
        InequalityResult {
            inequality: name.to_string(),
            max_ratio: 0.0,
            per_level: Vec::new(),
            max_relative_change: 0.0,
            bounded: true,
            skipped: Some(reason),
        }
    }

    fn from_levels(name: &str, per_level: Vec<LevelRatio>) -> Self {
        let max_ratio = per_level.iter().map(|l| l.max_ratio).fold(0.0, f64::max);
        let max_relative_change = per_level
            .windows(2)
            .map(|w| (w[1].max_ratio - w[0].max_ratio).abs() / w[0].max_ratio)
            .fold(0.0, f64::max);
        InequalityResult {
            inequality: name.to_string(),
            max_ratio,
            per_level,
            max_relative_change,
            bounded: max_relative_change.is_finite() && max_relative_change < REFINEMENT_TOLERANCE,
            skipped: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub alpha: f64,
    pub band_modes: usize,
    pub options: InequalityOptions,
    pub results: Vec<InequalityResult>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.bounded)
    }

    pub fn get(&self, name: &str) -> Option<&InequalityResult> {
        self.results.iter().find(|r| r.inequality == name)
    }
}

pub const GAGLIARDO_NIRENBERG: &str = "gagliardo-nirenberg";
pub const SOBOLEV: &str = "sobolev";
pub const CRITICAL_SOBOLEV: &str = "critical-sobolev";
pub const HEAT_SMOOTHING: &str = "heat-smoothing";
pub const HEAT_L2_LINF: &str = "heat-l2-linf";

/// Trial `i`: Gaussian coefficients on the lowest `band` modes.
fn trial_coeffs(seed: u64, trial: usize, band: usize, modes: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let mut c = vec![0.0; modes];
    for v in c.iter_mut().take(band) {
        *v = StandardNormal.sample(&mut rng);
    }
    c
}

/// Ratio functionals that need only a trial's coefficients and samples.
struct Trial<'a> {
    backend: &'a SpectrumBackend,
    coeffs: Vec<f64>,
    samples: Vec<f64>,
}

impl Trial<'_> {
    fn lq(&self, q: f64) -> f64 {
        lq_norm_raw(&self.samples, self.backend.weights(), q).unwrap_or(f64::NAN)
    }

    fn l2(&self) -> f64 {
        self.backend.symbol_norm(&self.coeffs, |_| 1.0)
    }

    fn grad(&self) -> f64 {
        self.backend.symbol_norm(&self.coeffs, |l| l)
    }

    fn hs(&self, s: f64) -> f64 {
        self.backend.symbol_norm(&self.coeffs, |l| (1.0 + l).powf(s))
    }
}

/// Runs the inequality scans over `levels`, a refinement sequence of backends
/// of one operator family with a shared decay index.
pub fn check_inequalities(levels: &[SpectrumBackend], opts: &InequalityOptions) -> Result<InequalityReport> {
    if levels.is_empty() {
        return Err(Error::param("levels", "at least one refinement level required"));
    }
    if opts.trials == 0 {
        return Err(Error::param("trials", "trials ≥ 1 required"));
    }
    if !(opts.band_fraction > 0.0 && opts.band_fraction <= 1.0) {
        return Err(Error::param("band_fraction", "must lie in (0, 1]"));
    }
    for (name, q) in [("gn_q", opts.gn_q), ("sobolev_q", opts.sobolev_q)] {
        if q.is_nan() || q < 2.0 {
            return Err(Error::param(name, format!("must lie in [2, ∞], got {q}")));
        }
    }
    let alpha = levels[0].alpha().ok_or_else(|| {
        Error::param("levels", "backend has no analytic decay index; inequality exponents need one")
    })?;
    if levels.iter().any(|b| b.alpha().is_none_or(|a| (a - alpha).abs() > 1e-12)) {
        return Err(Error::param("levels", "all levels must share the decay index"));
    }
    let coarsest = levels.iter().map(|b| b.mode_count()).min().unwrap_or(0);
    let band = ((coarsest as f64 * opts.band_fraction).floor() as usize).max(1);

    // per level, per trial: (gn, sobolev, critical)
    let theta = 4.0 * alpha * (0.5 - 1.0 / opts.gn_q);
    let crit_q = (alpha > 0.5).then(|| 4.0 * alpha / (2.0 * alpha - 1.0));
    let sob_threshold = 2.0 * alpha * (1.0 - 2.0 / opts.sobolev_q);
    let sob_ok = opts.sobolev_s > sob_threshold;

    let per_trial: Vec<Vec<[f64; 4]>> = levels
        .iter()
        .map(|b| {
            (0..opts.trials)
                .into_par_iter()
                .map(|i| {
                    let coeffs = trial_coeffs(opts.seed, i, band, b.mode_count());
                    let samples = b.inverse_raw(&coeffs);
                    let tr = Trial { backend: b, coeffs, samples };
                    let (l2, grad) = (tr.l2(), tr.grad());
                    let gn = tr.lq(opts.gn_q) / (l2.powf(1.0 - theta) * grad.powf(theta));
                    let sob = tr.lq(opts.sobolev_q) / tr.hs(opts.sobolev_s);
                    let crit = crit_q.map_or(f64::NAN, |q| tr.lq(q) / grad);
                    let smooth = heat_smoothing_ratio(b, &tr.coeffs, l2, &opts.heat_times);
                    [gn, sob, crit, smooth]
                })
                .collect()
        })
        .collect();

    let level_max = |col: usize| -> Vec<LevelRatio> {
        levels
            .iter()
            .zip(&per_trial)
            .map(|(b, rows)| LevelRatio {
                modes: b.mode_count(),
                max_ratio: rows.iter().map(|r| r[col]).fold(0.0, f64::max),
            })
            .collect()
    };

    let mut results = Vec::new();
    if theta <= 1.0 {
        results.push(InequalityResult::from_levels(GAGLIARDO_NIRENBERG, level_max(0)));
    } else {
        results.push(InequalityResult::skipped(
            GAGLIARDO_NIRENBERG,
            format!("interpolation exponent 4α(1/2 − 1/q) = {theta} exceeds 1"),
        ));
    }
    if sob_ok {
        results.push(InequalityResult::from_levels(SOBOLEV, level_max(1)));
    } else {
        results.push(InequalityResult::skipped(
            SOBOLEV,
            format!("needs s > 2α(1 − 2/q) = {sob_threshold}, got s = {}", opts.sobolev_s),
        ));
    }
    if crit_q.is_some() {
        results.push(InequalityResult::from_levels(CRITICAL_SOBOLEV, level_max(2)));
    } else {
        results.push(InequalityResult::skipped(
            CRITICAL_SOBOLEV,
            format!("needs α > 1/2, backend has α = {alpha}"),
        ));
    }
    let mut smoothing = InequalityResult::from_levels(HEAT_SMOOTHING, level_max(3));
    smoothing.bounded &= smoothing.max_ratio <= 1.0 + 1e-12;
    results.push(smoothing);

    let (lo, hi) = opts.heat_window;
    let window = super::fit::TimeWindow::new(lo, hi)?;
    let heat_levels: Vec<LevelRatio> = levels
        .iter()
        .map(|b| LevelRatio {
            modes: b.mode_count(),
            max_ratio: window
                .log_spaced(opts.heat_points.max(2))
                .iter()
                .map(|&t| t.powf(alpha) * b.heat_l2_linf_norm(t))
                .fold(0.0, f64::max),
        })
        .collect();
    results.push(InequalityResult::from_levels(HEAT_L2_LINF, heat_levels));

    Ok(InequalityReport {
        alpha,
        band_modes: band,
        options: opts.clone(),
        results,
    })
}

/// `max_t ‖A^{1/2} e^{-tA} f‖₂ / ((2et)^{-1/2} ‖f‖₂)`, at most 1.
fn heat_smoothing_ratio(b: &SpectrumBackend, coeffs: &[f64], l2: f64, times: &[f64]) -> f64 {
    times
        .iter()
        .map(|&t| {
            let lhs = b.symbol_norm(coeffs, |l| l * (-2.0 * t * l).exp());
            lhs * (2.0 * std::f64::consts::E * t).sqrt() / l2
        })
        .fold(0.0, f64::max)
}
