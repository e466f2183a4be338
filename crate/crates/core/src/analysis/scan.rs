//! Grid scans of the multiplier bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::MultiplierKernel;

use super::fit::TimeWindow;
use super::weighted::japanese;

/// Bound asserted for `sup |D|` and `sup |∂tD|`, from the explicit branch estimates.
pub const UNIFORM_KERNEL_BOUND: f64 = 3.0;
/// Allowed spread of the per-decade maxima of `⟨t⟩ sup_λ |symbol|`.
pub const DIFF_STABILITY_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelScanGrid {
    /// `t_i = t_max · i / t_points`, `i = 1..=t_points`.
    pub t_max: f64,
    pub t_points: usize,
    /// `λ_j = lambda_max · j / (lambda_points − 1)`, `j = 0..lambda_points`.
    pub lambda_max: f64,
    pub lambda_points: usize,
    /// Log-spaced rows for the difference symbol.
    pub diff_t_lo: f64,
    pub diff_t_hi: f64,
    pub diff_t_points: usize,
    /// `λ_j = j / (8 · diff_lambda_points)` on `[0, 1/8)`.
    pub diff_lambda_points: usize,
}

impl Default for KernelScanGrid {
    fn default() -> Self {
        KernelScanGrid {
            t_max: 100.0,
            t_points: 2000,
            lambda_max: 100.0,
            lambda_points: 2000,
            diff_t_lo: 10.0,
            diff_t_hi: 1e4,
            diff_t_points: 301,
            diff_lambda_points: 200_000,
        }
    }
}

impl KernelScanGrid {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive and finite, got {v}")))
            }
        };
        pos("t_max", self.t_max)?;
        pos("lambda_max", self.lambda_max)?;
        pos("diff_t_lo", self.diff_t_lo)?;
        if self.t_points == 0 || self.lambda_points < 2 || self.diff_lambda_points == 0 {
            return Err(Error::param("points", "grids need at least one t and two λ points"));
        }
        if self.diff_t_points < 2 || !(self.diff_t_hi > self.diff_t_lo) {
            return Err(Error::param("diff_t_hi", "needs diff_t_lo < diff_t_hi and 2 or more rows"));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        (1..=self.t_points)
            .map(|i| self.t_max * i as f64 / self.t_points as f64)
            .collect()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        let n = self.lambda_points - 1;
        (0..=n).map(|j| self.lambda_max * j as f64 / n as f64).collect()
    }

    pub fn diff_times(&self) -> Vec<f64> {
        TimeWindow {
            lo: self.diff_t_lo,
            hi: self.diff_t_hi,
        }
        .log_spaced(self.diff_t_points)
    }

    pub fn diff_lambdas(&self) -> Vec<f64> {
        let n = self.diff_lambda_points;
        (0..n).map(|j| j as f64 / (8.0 * n as f64)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMax {
    pub value: f64,
    pub t: f64,
    pub lambda: f64,
}

impl GridMax {
    fn zero() -> Self {
        GridMax {
            value: 0.0,
            t: f64::NAN,
            lambda: f64::NAN,
        }
    }

    fn merge(self, other: GridMax) -> GridMax {
        // ties keep the earlier grid point so the result does not depend on scheduling
        if other.value > self.value || self.t.is_nan() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffRow {
    pub t: f64,
    /// `⟨t⟩ · sup_λ |e^{tλ/2}(D − e^{-tλ})|`
    pub weighted_sup: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecadeMax {
    pub t_lo: f64,
    pub t_hi: f64,
    pub max: f64,
    pub relative_to_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundReport {
    pub grid: KernelScanGrid,
    pub sup_d: GridMax,
    pub sup_dt_d: GridMax,
    pub uniform_bound: f64,
    pub uniform_bound_holds: bool,
    /// `sup_t t e^{-t/2}` along the `λ = 1/4` column of the `t` grid.
    pub quarter_column_sup: f64,
    pub diff_rows: Vec<DiffRow>,
    /// Certified constant: the largest weighted row supremum.
    pub diff_constant: f64,
    pub diff_decades: Vec<DecadeMax>,
    pub diff_stable: bool,
}

impl KernelBoundReport {
    pub fn passed(&self) -> bool {
        self.uniform_bound_holds && self.diff_stable
    }
}

/// Scans `|D|`, `|∂tD|` over the `(t, λ)` grid and `⟨t⟩ |symbol|` over the
/// difference-symbol rows. Rows run in parallel; maxima are merged in grid order.
pub fn scan_kernel_bounds(kernel: MultiplierKernel, grid: KernelScanGrid) -> Result<KernelBoundReport> {
    grid.validate()?;
    let times = grid.times();
    let lambdas = grid.lambdas();

    let row_max: Vec<(GridMax, GridMax)> = times
        .par_iter()
        .map(|&t| {
            let mut md = GridMax::zero();
            let mut mdt = GridMax::zero();
            for &l in &lambdas {
                let d = GridMax { value: kernel.d(t, l).abs(), t, lambda: l };
                let dt = GridMax { value: kernel.dt_d(t, l).abs(), t, lambda: l };
                md = md.merge(d);
                mdt = mdt.merge(dt);
            }
            (md, mdt)
        })
        .collect();
    let (sup_d, sup_dt_d) = row_max
        .into_iter()
        .fold((GridMax::zero(), GridMax::zero()), |(a, b), (c, d)| (a.merge(c), b.merge(d)));

    let quarter_column_sup = times
        .iter()
        .map(|&t| kernel.d(t, 0.25).abs())
        .fold(0.0, f64::max);

    let diff_lambdas = grid.diff_lambdas();
    let diff_rows: Vec<DiffRow> = grid
        .diff_times()
        .par_iter()
        .map(|&t| {
            let sup = diff_lambdas
                .iter()
                .map(|&l| kernel.diff_symbol(t, l).abs())
                .fold(0.0, f64::max);
            DiffRow {
                t,
                weighted_sup: japanese(t) * sup,
            }
        })
        .collect();
    let diff_constant = diff_rows.iter().map(|r| r.weighted_sup).fold(0.0, f64::max);
    let diff_decades = decade_maxima(&diff_rows, diff_constant);
    let diff_stable = !diff_decades.is_empty()
        && diff_decades
            .iter()
            .all(|d| (1.0 - d.relative_to_constant).abs() <= DIFF_STABILITY_TOLERANCE);

    let uniform_bound_holds =
        sup_d.value <= UNIFORM_KERNEL_BOUND && sup_dt_d.value <= UNIFORM_KERNEL_BOUND;
    Ok(KernelBoundReport {
        grid,
        sup_d,
        sup_dt_d,
        uniform_bound: UNIFORM_KERNEL_BOUND,
        uniform_bound_holds,
        quarter_column_sup,
        diff_rows,
        diff_constant,
        diff_decades,
        diff_stable,
    })
}

fn decade_maxima(rows: &[DiffRow], constant: f64) -> Vec<DecadeMax> {
    let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut lo = first.t;
    while lo < last.t * (1.0 - 1e-12) {
        let hi = (lo * 10.0).min(last.t);
        let max = rows
            .iter()
            .filter(|r| r.t >= lo * (1.0 - 1e-12) && r.t <= hi * (1.0 + 1e-12))
            .map(|r| r.weighted_sup)
            .fold(0.0, f64::max);
        out.push(DecadeMax {
            t_lo: lo,
            t_hi: hi,
            max,
            relative_to_constant: if constant > 0.0 { max / constant } else { 0.0 },
        });
        lo = hi;
    }
    out
}
