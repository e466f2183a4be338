//! JSON experiment configuration with dotted `key=value` overrides.
//!
//! Files are parsed to a JSON tree, overrides are applied to the tree, and only
//! then is the result deserialized, so an override can touch any nested key.
//! Unknown keys are rejected at every level.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::inequalities::InequalityOptions;
use crate::analysis::predict::check_q;
use crate::analysis::scan::KernelScanGrid;
use crate::analysis::TimeWindow;
use crate::error::{Error, Result};
use crate::evolution::{NonlinearForm, Scheme, DEFAULT_BLOWUP_CAP, DEFAULT_STEP};
use crate::kernels::{MultiplierKernel, DEFAULT_BRANCH_THRESHOLD, DEFAULT_SERIES_TERMS};
use crate::spectral::{matrix_file, SpectrumBackend};

fn default_length() -> f64 {
    200.0 * PI
}

fn default_modes() -> usize {
    4096
}

/// Operator backend to build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BackendSpec {
    #[serde(rename = "dirichlet-1d")]
    Dirichlet1d {
        #[serde(default = "default_length")]
        length: f64,
        #[serde(default = "default_modes")]
        modes: usize,
    },
    /// `A^{ν/2}` for the Dirichlet Laplacian on `(0, length)`.
    Fractional {
        #[serde(default = "default_length")]
        length: f64,
        #[serde(default = "default_modes")]
        modes: usize,
        nu: f64,
    },
    /// Energy matrix from a file; unit weights unless a weights file is given.
    Matrix {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
    },
    Sierpinski { level: u32 },
}

impl Default for BackendSpec {
    fn default() -> Self {
        BackendSpec::Dirichlet1d {
            length: default_length(),
            modes: default_modes(),
        }
    }
}

impl BackendSpec {
    pub fn build(&self) -> Result<SpectrumBackend> {
        match self {
            BackendSpec::Dirichlet1d { length, modes } => SpectrumBackend::dirichlet_1d(*length, *modes),
            BackendSpec::Fractional { length, modes, nu } => {
                let base = SpectrumBackend::dirichlet_1d(*length, *modes)?;
                SpectrumBackend::fractional(&base, *nu)
            }
            BackendSpec::Matrix { path, weights, alpha } => {
                let m = matrix_file::read_matrix(path)?;
                let w = match weights {
                    Some(p) => matrix_file::read_values(p)?,
                    None => vec![1.0; m.nrows()],
                };
                SpectrumBackend::from_matrix(&m, &w, *alpha)
            }
            BackendSpec::Sierpinski { level } => SpectrumBackend::sierpinski(*level),
        }
    }

    /// The same family at a different resolution, for refinement studies.
    pub fn with_modes(&self, n: usize) -> Result<BackendSpec> {
        match self {
            BackendSpec::Dirichlet1d { length, .. } => Ok(BackendSpec::Dirichlet1d {
                length: *length,
                modes: n,
            }),
            BackendSpec::Fractional { length, nu, .. } => Ok(BackendSpec::Fractional {
                length: *length,
                modes: n,
                nu: *nu,
            }),
            _ => Err(Error::config(
                "inequalities.levels",
                "refinement by mode count needs a dirichlet-1d or fractional backend",
            )),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BackendSpec::Dirichlet1d { length, modes } | BackendSpec::Fractional { length, modes, .. } => {
                if !(length.is_finite() && *length > 0.0) {
                    return Err(Error::config("backend.length", format!("must be positive, got {length}")));
                }
                if *modes < 2 {
                    return Err(Error::config("backend.modes", format!("must be at least 2, got {modes}")));
                }
                if let BackendSpec::Fractional { nu, .. } = self {
                    if !(nu.is_finite() && *nu > 0.0) {
                        return Err(Error::config("backend.nu", format!("must be positive, got {nu}")));
                    }
                }
            }
            BackendSpec::Matrix { alpha: Some(a), .. } if !(a.is_finite() && *a > 0.0) => {
                return Err(Error::config("backend.alpha", format!("must be positive, got {a}")));
            }
            BackendSpec::Sierpinski { level } if *level > crate::spectral::MAX_SIERPINSKI_LEVEL => {
                return Err(Error::config(
                    "backend.level",
                    format!("must be at most {}", crate::spectral::MAX_SIERPINSKI_LEVEL),
                ));
            }
            _ => {}
        }
        Ok(())
    }
}

fn default_width() -> f64 {
    1.0
}

fn default_one() -> f64 {
    1.0
}

fn default_band() -> usize {
    32
}

/// Initial data, before scaling by the amplitude `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSpec {
    /// `u0 = exp(-((x - center)/width)²)`, `u1 = u1_scale · u0`; the center
    /// defaults to the middle of the domain (or node list).
    Bump {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<f64>,
        #[serde(default = "default_width")]
        width: f64,
        #[serde(default = "default_one")]
        u1_scale: f64,
    },
    /// Finite combinations of eigenfunctions, `modes[i]` with weights `u0[i]`, `u1[i]`.
    EigenMix {
        modes: Vec<usize>,
        u0: Vec<f64>,
        u1: Vec<f64>,
    },
    /// Gaussian noise on the lowest `band` modes; the run seed is used when `seed` is absent.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default = "default_band")]
        band: usize,
    },
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec::Bump {
            center: None,
            width: default_width(),
            u1_scale: default_one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub l2: f64,
    pub linf: f64,
    pub derivative: f64,
    pub diff: f64,
    pub smalldata_l2: f64,
    pub x_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            l2: 0.05,
            linf: 0.1,
            derivative: 0.1,
            diff: 0.1,
            smalldata_l2: 0.07,
            x_ratio: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub eps: Vec<f64>,
    pub forms: Vec<NonlinearForm>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            p: vec![2.0, 2.5, 3.5, 4.0],
            q: vec![1.0],
            eps: vec![1e-2],
            forms: vec![NonlinearForm::PlusAbs],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSpec {
    pub branch_threshold: f64,
    pub series_terms: usize,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec {
            branch_threshold: DEFAULT_BRANCH_THRESHOLD,
            series_terms: DEFAULT_SERIES_TERMS,
        }
    }
}

/// Grid for the `kernel-scan` CSV table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableGrid {
    pub t_max: f64,
    pub t_points: usize,
    pub lambda_max: f64,
    pub lambda_points: usize,
}

impl Default for TableGrid {
    fn default() -> Self {
        TableGrid {
            t_max: 100.0,
            t_points: 100,
            lambda_max: 2.0,
            lambda_points: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub backend: BackendSpec,
    pub data: DataSpec,
    /// Amplitude `ε`; each experiment picks its own default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub p: f64,
    pub q: f64,
    pub form: NonlinearForm,
    pub horizon: f64,
    pub step: f64,
    pub scheme: Scheme,
    pub blowup_cap: f64,
    pub record_every: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    pub fit_window: (f64, f64),
    pub fit_points: usize,
    /// Sobolev index recorded in traces, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sobolev_s: Option<f64>,
    /// Explicit output times for `linear` and `heat`; log-spaced over the fit window otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    pub tolerances: Tolerances,
    pub kernel: KernelSpec,
    pub sweep: SweepSpec,
    pub inequalities: InequalityOptions,
    pub scan: KernelScanGrid,
    pub table: TableGrid,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            backend: BackendSpec::default(),
            data: DataSpec::default(),
            epsilon: None,
            p: 4.0,
            q: 1.0,
            form: NonlinearForm::PlusAbs,
            horizon: 400.0,
            step: DEFAULT_STEP,
            scheme: Scheme::ExponentialMidpoint,
            blowup_cap: DEFAULT_BLOWUP_CAP,
            record_every: 20,
            snapshot_every: None,
            fit_window: (10.0, 200.0),
            fit_points: 40,
            sobolev_s: None,
            times: None,
            tolerances: Tolerances::default(),
            kernel: KernelSpec::default(),
            sweep: SweepSpec::default(),
            inequalities: InequalityOptions::default(),
            scan: KernelScanGrid::default(),
            table: TableGrid::default(),
        }
    }
}

/// One applied `key=value` override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedOverride {
    pub key: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub previous: Option<Value>,
    pub value: Value,
}

impl ExperimentConfig {
    pub fn kernel(&self) -> Result<MultiplierKernel> {
        MultiplierKernel::new(self.kernel.branch_threshold, self.kernel.series_terms)
            .map_err(|e| Error::config("kernel", e.to_string()))
    }

    pub fn window(&self) -> Result<TimeWindow> {
        TimeWindow::new(self.fit_window.0, self.fit_window.1)
            .map_err(|e| Error::config("fit_window", e.to_string()))
    }

    /// Checks every constraint, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        self.backend.validate()?;
        check_q(self.q).map_err(|_| Error::config("q", format!("q ∈ [1,2] required, got {}", self.q)))?;
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::config("p", format!("p > 1 required, got {}", self.p)));
        }
        if let Some(e) = self.epsilon {
            if !(e.is_finite() && e >= 0.0) {
                return Err(Error::config("epsilon", format!("must be finite and >= 0, got {e}")));
            }
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::config("step", format!("h > 0 required, got {}", self.step)));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.step) {
            return Err(Error::config("horizon", format!("T ≥ h required, got {}", self.horizon)));
        }
        if !(self.blowup_cap > 0.0) {
            return Err(Error::config("blowup_cap", "must be positive"));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every", "must be positive"));
        }
        if self.snapshot_every == Some(0) {
            return Err(Error::config("snapshot_every", "must be positive"));
        }
        self.window()?;
        if self.fit_points < crate::analysis::MIN_FIT_POINTS {
            return Err(Error::config(
                "fit_points",
                format!("at least {} required", crate::analysis::MIN_FIT_POINTS),
            ));
        }
        if let Some(s) = self.sobolev_s {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::config("sobolev_s", "must be >= 0"));
            }
        }
        if let Some(t) = &self.times {
            if t.is_empty() || t.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || t.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config("times", "must be non-empty, >= 0 and strictly increasing"));
            }
        }
        self.kernel()?;
        match &self.data {
            DataSpec::Bump { width, .. } if !(width.is_finite() && *width > 0.0) => {
                return Err(Error::config("data.width", "must be positive"));
            }
            DataSpec::EigenMix { modes, u0, u1 } if modes.len() != u0.len() || modes.len() != u1.len() => {
                return Err(Error::config("data.modes", "modes, u0 and u1 must have equal lengths"));
            }
            DataSpec::Random { band: 0, .. } => {
                return Err(Error::config("data.band", "must be positive"));
            }
            _ => {}
        }
        let t = self.tolerances;
        for (key, v) in [
            ("tolerances.l2", t.l2),
            ("tolerances.linf", t.linf),
            ("tolerances.derivative", t.derivative),
            ("tolerances.diff", t.diff),
            ("tolerances.smalldata_l2", t.smalldata_l2),
            ("tolerances.x_ratio", t.x_ratio),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, format!("must be positive, got {v}")));
            }
        }
        let s = &self.sweep;
        if s.p.iter().any(|p| !(p.is_finite() && *p > 1.0)) {
            return Err(Error::config("sweep.p", "every p must exceed 1"));
        }
        if s.q.iter().any(|q| !(1.0..=2.0).contains(q)) {
            return Err(Error::config("sweep.q", "every q ∈ [1,2]"));
        }
        if s.eps.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::config("sweep.eps", "every ε must be finite and >= 0"));
        }
        if self.inequalities.levels.is_empty() || self.inequalities.levels.iter().any(|&n| n < 2) {
            return Err(Error::config("inequalities.levels", "needs one or more levels of at least 2 modes"));
        }
        if self.inequalities.trials == 0 {
            return Err(Error::config("inequalities.trials", "trials ≥ 1 required"));
        }
        self.scan.validate().map_err(|e| Error::config("scan", e.to_string()))?;
        let g = self.table;
        if g.t_points == 0 || g.lambda_points < 2 || !(g.t_max > 0.0) || !(g.lambda_max > 0.0) {
            return Err(Error::config("table", "needs positive extents, t_points ≥ 1 and lambda_points ≥ 2"));
        }
        Ok(())
    }

    /// Parses JSON text, applies overrides and validates.
    pub fn from_json_str(text: &str, overrides: &[String]) -> Result<(Self, Vec<AppliedOverride>)> {
        let tree: Value = serde_json::from_str(text)
            .map_err(|e| Error::config("<file>", format!("malformed JSON: {e}")))?;
        Self::from_value(tree, overrides)
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<(Self, Vec<AppliedOverride>)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text, overrides)
    }

    pub fn from_value(mut tree: Value, overrides: &[String]) -> Result<(Self, Vec<AppliedOverride>)> {
        if !tree.is_object() {
            return Err(Error::config("<file>", "top level must be a JSON object"));
        }
        let defaults = serde_json::to_value(ExperimentConfig::default())?;
        let mut applied = Vec::new();
        for raw in overrides {
            let o = apply_override(&mut tree, &defaults, raw)?;
            match &o.previous {
                Some(prev) => log::info!("override {}: {} -> {}", o.key, prev, o.value),
                None => log::info!("override {}: (unset) -> {}", o.key, o.value),
            }
            applied.push(o);
        }
        let cfg: ExperimentConfig = serde_json::from_value(tree).map_err(|e| Error::config(field_hint(&e), e.to_string()))?;
        cfg.validate()?;
        Ok((cfg, applied))
    }
}

fn field_hint(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    msg.split('`').nth(1).map_or_else(|| "<file>".to_string(), str::to_string)
}

/// Applies `a.b.c=value`. The value is parsed as JSON and taken as a string
/// otherwise. Missing intermediate objects are seeded from `defaults`, so
/// `backend.modes=512` on an empty file keeps the default backend kind.
pub fn apply_override(tree: &mut Value, defaults: &Value, raw: &str) -> Result<AppliedOverride> {
    let (key, text) = raw
        .split_once('=')
        .ok_or_else(|| Error::config(raw, "override must have the form key=value"))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::config(raw, "override key is empty"));
    }
    let value: Value = serde_json::from_str(text.trim()).unwrap_or_else(|_| Value::String(text.trim().to_string()));
    let mut node = tree;
    let mut default_node = Some(defaults);
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        default_node = default_node.and_then(|d| d.get(part));
        let seed = default_node
            .filter(|d| d.is_object())
            .cloned()
            .unwrap_or_else(|| Value::Object(Default::default()));
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::config(key, format!("`{part}` is not inside an object")))?;
        node = obj.entry(part.to_string()).or_insert(seed);
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| Error::config(key, "parent is not an object"))?;
    let leaf = parts[parts.len() - 1].to_string();
    let previous = obj.insert(leaf, value.clone());
    Ok(AppliedOverride {
        key: key.to_string(),
        previous,
        value,
    })
}
