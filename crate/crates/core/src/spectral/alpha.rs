use super::SpectrumBackend;
use crate::error::{Error, Result};

pub use crate::analysis::fit::TimeWindow;
use crate::analysis::fit::{fit_power_law, DecayFit, MIN_FIT_POINTS};

/// Fits the empirical decay index in `‖e^{-tA}‖_{L²→L^∞} ≈ C t^{-α}` over
/// `samples` log-spaced times in `window`.
///
/// The operator norm at each time is exact for the discrete operator: the
/// largest weighted `ℓ²` norm over grid points of a heat kernel row.
pub fn measure_alpha(
    backend: &SpectrumBackend,
    window: TimeWindow,
    samples: usize,
) -> Result<DecayFit> {
    if samples < MIN_FIT_POINTS {
        return Err(Error::param(
            "samples",
            format!("at least {MIN_FIT_POINTS} sample times required, got {samples}"),
        ));
    }
    if let Some(guard) = backend.guard_time() {
        if window.hi > guard {
            return Err(Error::param(
                "window",
                format!(
                    "upper end {} exceeds the boundary guard time {guard:.6} of this backend",
                    window.hi
                ),
            ));
        }
    }
    let times = window.log_spaced(samples);
    let norms: Vec<f64> = times.iter().map(|&t| backend.heat_l2_linf_norm(t)).collect();
    fit_power_law(&times, &norms, window)
}
