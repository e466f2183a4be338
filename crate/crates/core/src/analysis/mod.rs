//! Decay fits, predicted exponents, criticality conditions, weighted norms,
//! kernel bound scans and numerical inequality checks.

pub mod fit;
pub mod inequalities;
pub mod predict;
pub mod scan;
pub mod weighted;

pub use fit::{fit_decay, fit_power_law, DecayFit, DecayRegime, TimeWindow, MIN_FIT_POINTS};
pub use inequalities::{check_inequalities, InequalityOptions, InequalityReport, InequalityResult};
pub use predict::{criticality, predict_exponent, CriticalityRecord, ExponentPrediction, ExponentTarget};
pub use scan::{scan_kernel_bounds, KernelBoundReport, KernelScanGrid};
pub use weighted::{forcing_trace, japanese, weighted_x_norm, weighted_y_norm};
