use crate::analysis::{check_inequalities, scan_kernel_bounds, InequalityReport, KernelBoundReport};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{format_float, table_csv};
use crate::spectral::SpectrumBackend;

/// Kernel bound scan over the config's `scan` grid.
pub fn run_kernel_scan(cfg: &ExperimentConfig) -> Result<KernelBoundReport> {
    cfg.validate()?;
    scan_kernel_bounds(cfg.kernel()?, cfg.scan)
}

/// `(t, λ, D, dtD, diff_symbol)` over the config's `table` grid; `diff_symbol`
/// is empty where `λ ≥ 1/8`.
pub fn kernel_table(cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    let kernel = cfg.kernel()?;
    let g = cfg.table;
    let mut rows = Vec::with_capacity(g.t_points * g.lambda_points);
    for i in 1..=g.t_points {
        let t = g.t_max * i as f64 / g.t_points as f64;
        for j in 0..g.lambda_points {
            let l = g.lambda_max * j as f64 / (g.lambda_points - 1) as f64;
            let diff = kernel.eval_diff_symbol(t, l).map(format_float).unwrap_or_default();
            rows.push(vec![
                format_float(t),
                format_float(l),
                format_float(kernel.eval_d(t, l)?),
                format_float(kernel.eval_dt_d(t, l)?),
                diff,
            ]);
        }
    }
    table_csv(&["t", "lambda", "D", "dtD", "diff_symbol"], rows)
}

/// Inequality scans over the refinement levels `inequalities.levels` of the config's backend family.
pub fn run_inequalities(cfg: &ExperimentConfig, seed: u64) -> Result<InequalityReport> {
    cfg.validate()?;
    let levels: Vec<SpectrumBackend> = if cfg.inequalities.levels.is_empty() {
        vec![cfg.backend.build()?]
    } else {
        cfg.inequalities
            .levels
            .iter()
            .map(|&n| cfg.backend.with_modes(n)?.build())
            .collect::<Result<_>>()?
    };
    let mut opts = cfg.inequalities.clone();
    opts.seed = seed;
    check_inequalities(&levels, &opts)
}
