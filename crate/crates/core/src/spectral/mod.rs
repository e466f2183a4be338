//! Discretized non-negative self-adjoint operators with unitary spectral transforms.
//!
//! Every backend carries a finite spectrum `λ_1 ≤ … ≤ λ_N`, quadrature weights
//! `w_j` for the sample points, and an orthonormal eigenbasis `φ_k` with respect
//! to the weighted inner product `<f, g> = Σ_j w_j f_j g_j`. The forward transform
//! `c_k = <f, φ_k>` is therefore unitary and Parseval holds exactly up to rounding.

mod alpha;
mod dense;
pub mod matrix_file;
mod sierpinski;
mod sine;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use dense::DenseBasis;
use sine::SineTransform;

pub use alpha::{measure_alpha, TimeWindow};
pub use sierpinski::{sierpinski_alpha, SierpinskiGraph, MAX_SIERPINSKI_LEVEL};

/// Free-space decay on the interval only holds before the boundary is felt.
pub const BOUNDARY_GUARD_FACTOR: f64 = 0.05;

/// Tolerance for symmetry and for clamping slightly negative eigenvalues.
pub const CLAMP_TOLERANCE: f64 = 1e-10;

static NEXT_BASIS: AtomicU64 = AtomicU64::new(1);

/// Identifies a sampling grid together with its eigenbasis. Fractional powers
/// share the basis of the operator they are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisId(u64);

impl BasisId {
    fn fresh() -> Self {
        BasisId(NEXT_BASIS.fetch_add(1, Ordering::Relaxed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Dirichlet1d,
    FractionalOfBase,
    DenseMatrix,
}

enum Transform {
    Sine {
        kernel: SineTransform,
        length: f64,
    },
    Dense(DenseBasis),
}

/// A real-valued state sampled at the backend's grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    samples: Vec<f64>,
    basis: BasisId,
}

impl GridFunction {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn basis(&self) -> BasisId {
        self.basis
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Pointwise map, staying on the same grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            samples: self.samples.iter().map(|&v| f(v)).collect(),
            basis: self.basis,
        }
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }
}

/// Coefficients of a state in the backend's orthonormal eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    coeffs: Vec<f64>,
    basis: BasisId,
}

impl SpectralCoeffs {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn basis(&self) -> BasisId {
        self.basis
    }
}

/// A discretized non-negative self-adjoint operator.
///
/// Backends are immutable once built and can be shared freely between threads.
#[derive(Clone)]
pub struct SpectrumBackend {
    kind: BackendKind,
    basis: BasisId,
    eigenvalues: Vec<f64>,
    weights: Vec<f64>,
    domain_length: Option<f64>,
    alpha: Option<f64>,
    fractional_power: Option<f64>,
    guard_time: Option<f64>,
    clamped: f64,
    transform: Arc<Transform>,
}

impl std::fmt::Debug for SpectrumBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectrumBackend")
            .field("kind", &self.kind)
            .field("mode_count", &self.eigenvalues.len())
            .field("domain_length", &self.domain_length)
            .field("alpha", &self.alpha)
            .field("fractional_power", &self.fractional_power)
            .finish()
    }
}

impl SpectrumBackend {
    /// Dirichlet Laplacian `-d²/dx²` on `(0, L)` with `N` sine modes.
    ///
    /// Eigenvalues are `(kπ/L)²`, samples sit at `x_j = jL/(N+1)` with equal
    /// weights `L/(N+1)`, and the decay index is `α = 1/4`.
    pub fn dirichlet_1d(length: f64, modes: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Construction(format!(
                "domain length must be positive, got {length}"
            )));
        }
        if modes < 2 {
            return Err(Error::Construction(format!(
                "at least 2 modes required, got {modes}"
            )));
        }
        let h = length / (modes + 1) as f64;
        let eigenvalues = (1..=modes)
            .map(|k| {
                let xi = k as f64 * std::f64::consts::PI / length;
                xi * xi
            })
            .collect();
        Ok(SpectrumBackend {
            kind: BackendKind::Dirichlet1d,
            basis: BasisId::fresh(),
            eigenvalues,
            weights: vec![h; modes],
            domain_length: Some(length),
            alpha: Some(0.25),
            fractional_power: None,
            guard_time: Some(BOUNDARY_GUARD_FACTOR * length * length),
            clamped: 0.0,
            transform: Arc::new(Transform::Sine {
                kernel: SineTransform::new(modes),
                length,
            }),
        })
    }

    /// Spectral fractional power `A^{ν/2}` of `base`, sharing its transform.
    pub fn fractional(base: &SpectrumBackend, nu: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::Construction(format!(
                "fractional power must be positive, got {nu}"
            )));
        }
        let half = nu / 2.0;
        Ok(SpectrumBackend {
            kind: BackendKind::FractionalOfBase,
            basis: base.basis,
            eigenvalues: base.eigenvalues.iter().map(|&l| l.powf(half)).collect(),
            weights: base.weights.clone(),
            domain_length: base.domain_length,
            alpha: base.alpha.map(|a| a * 2.0 / nu),
            fractional_power: Some(nu),
            guard_time: base.guard_time.map(|g| g.powf(half)),
            clamped: base.clamped,
            transform: Arc::clone(&base.transform),
        })
    }

    /// Operator `A = W⁻¹M` for a symmetric positive semi-definite energy matrix `M`
    /// and positive point masses `W = diag(weights)`. `A` is self-adjoint in the
    /// weighted inner product; with unit weights `A = M`.
    pub fn from_matrix(
        matrix: &DMatrix<f64>,
        weights: &[f64],
        alpha_hint: Option<f64>,
    ) -> Result<Self> {
        if let Some(a) = alpha_hint {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::Construction(format!(
                    "alpha hint must be positive, got {a}"
                )));
            }
        }
        let basis = DenseBasis::new(matrix, weights)?;
        if basis.clamped > 0.0 {
            log::debug!(
                "clamped negative eigenvalues of magnitude up to {:e}",
                basis.clamped
            );
        }
        let clamped = basis.clamped;
        let eigenvalues = basis.eigenvalues.clone();
        Ok(SpectrumBackend {
            kind: BackendKind::DenseMatrix,
            basis: BasisId::fresh(),
            eigenvalues,
            weights: weights.to_vec(),
            domain_length: None,
            alpha: alpha_hint,
            fractional_power: None,
            guard_time: None,
            clamped,
            transform: Arc::new(Transform::Dense(basis)),
        })
    }

    /// Renormalized graph Laplacian on the level-`level` Sierpinski prefractal.
    pub fn sierpinski(level: u32) -> Result<Self> {
        let graph = SierpinskiGraph::new(level)?;
        let (matrix, weights) = graph.energy_and_masses();
        SpectrumBackend::from_matrix(&matrix, &weights, Some(sierpinski_alpha(2)))
    }

    pub fn kind(&self) -> BackendKind {
        self.kind
    }

    pub fn basis(&self) -> BasisId {
        self.basis
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn mode_count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain_length(&self) -> Option<f64> {
        self.domain_length
    }

    /// Analytic decay index in `‖e^{-tA}‖_{L²→L^∞} ≲ t^{-α}`, when known.
    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn fractional_power(&self) -> Option<f64> {
        self.fractional_power
    }

    /// Latest time at which power-law decay fits are trusted, if the backend has one.
    pub fn guard_time(&self) -> Option<f64> {
        self.guard_time
    }

    /// Largest magnitude of a negative eigenvalue that was clamped to zero.
    pub fn clamped_magnitude(&self) -> f64 {
        self.clamped
    }

    /// Sample positions: `x_j` on the interval, vertex indices for matrix backends.
    pub fn node_coordinates(&self) -> Vec<f64> {
        match &*self.transform {
            Transform::Sine { length, .. } => {
                let n = self.mode_count();
                (1..=n).map(|j| j as f64 * length / (n + 1) as f64).collect()
            }
            Transform::Dense(_) => (0..self.mode_count()).map(|j| j as f64).collect(),
        }
    }

    pub fn grid_function(&self, samples: Vec<f64>) -> Result<GridFunction> {
        self.check_len(samples.len())?;
        if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite sample at index {j}")));
        }
        Ok(GridFunction {
            samples,
            basis: self.basis,
        })
    }

    /// Samples `f` at the node coordinates.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        self.grid_function(self.node_coordinates().into_iter().map(f).collect())
    }

    pub fn zeros(&self) -> GridFunction {
        GridFunction {
            samples: vec![0.0; self.mode_count()],
            basis: self.basis,
        }
    }

    pub fn coefficients(&self, coeffs: Vec<f64>) -> Result<SpectralCoeffs> {
        self.check_len(coeffs.len())?;
        if let Some(j) = coeffs.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite coefficient at index {j}")));
        }
        Ok(SpectralCoeffs {
            coeffs,
            basis: self.basis,
        })
    }

    /// Eigenfunction `φ_k` (zero-based mode index) sampled on the grid.
    pub fn eigenfunction(&self, k: usize) -> Result<GridFunction> {
        if k >= self.mode_count() {
            return Err(Error::param(
                "k",
                format!("mode {k} out of range 0..{}", self.mode_count()),
            ));
        }
        let mut c = vec![0.0; self.mode_count()];
        c[k] = 1.0;
        Ok(GridFunction {
            samples: self.inverse_raw(&c),
            basis: self.basis,
        })
    }

    pub fn forward(&self, f: &GridFunction) -> Result<SpectralCoeffs> {
        self.check_basis(f.basis, f.len())?;
        Ok(SpectralCoeffs {
            coeffs: self.forward_raw(&f.samples),
            basis: self.basis,
        })
    }

    pub fn inverse(&self, c: &SpectralCoeffs) -> Result<GridFunction> {
        self.check_basis(c.basis, c.coeffs.len())?;
        Ok(GridFunction {
            samples: self.inverse_raw(&c.coeffs),
            basis: self.basis,
        })
    }

    pub(crate) fn forward_raw(&self, samples: &[f64]) -> Vec<f64> {
        match &*self.transform {
            Transform::Sine { kernel, length } => {
                let n = samples.len();
                let scale = (self.weights[0] * 2.0 / (n + 1) as f64).sqrt();
                debug_assert!((self.weights[0] - length / (n + 1) as f64).abs() < 1e-12 * length);
                let mut c = kernel.dst1(samples);
                c.iter_mut().for_each(|v| *v *= scale);
                c
            }
            Transform::Dense(basis) => basis.forward(samples),
        }
    }

    pub(crate) fn inverse_raw(&self, coeffs: &[f64]) -> Vec<f64> {
        match &*self.transform {
            Transform::Sine { kernel, .. } => {
                let n = coeffs.len();
                let scale = (2.0 / ((n + 1) as f64 * self.weights[0])).sqrt();
                let mut f = kernel.dst1(coeffs);
                f.iter_mut().for_each(|v| *v *= scale);
                f
            }
            Transform::Dense(basis) => basis.inverse(coeffs),
        }
    }

    /// `Σ_k a_k φ_k(x_j)²` at every grid point.
    pub(crate) fn eigen_square_sum(&self, a: &[f64]) -> Vec<f64> {
        match &*self.transform {
            Transform::Sine { kernel, length } => {
                // sin² = (1 - cos 2θ) / 2 and φ_k² = (2/L) sin²
                let total: f64 = a.iter().sum();
                kernel
                    .cos_sum(a)
                    .into_iter()
                    .map(|g| ((total - g) / length).max(0.0))
                    .collect()
            }
            Transform::Dense(basis) => basis.eigen_square_sum(a),
        }
    }

    /// `(Σ_j w_j |f_j|^q)^{1/q}`, or `max_j |f_j|` for `q = ∞`.
    pub fn lq_norm(&self, f: &GridFunction, q: f64) -> Result<f64> {
        self.check_basis(f.basis, f.len())?;
        lq_norm_raw(&f.samples, &self.weights, q)
    }

    /// `‖(I + A)^{s/2} f‖_{L²}`.
    pub fn sobolev_norm(&self, f: &GridFunction, s: f64) -> Result<f64> {
        if !s.is_finite() {
            return Err(Error::param("s", "must be finite"));
        }
        let c = self.forward(f)?;
        Ok(self.symbol_norm(&c.coeffs, |l| (1.0 + l).powf(s)))
    }

    /// `‖A^{s/2} f‖_{L²}`.
    pub fn homogeneous_norm(&self, f: &GridFunction, s: f64) -> Result<f64> {
        let c = self.forward(f)?;
        Ok(self.symbol_norm(&c.coeffs, |l| power_symbol(l, s)))
    }

    /// `(Σ_k m(λ_k) c_k²)^{1/2}` for a non-negative symbol `m`.
    pub fn symbol_norm(&self, coeffs: &[f64], m: impl Fn(f64) -> f64) -> f64 {
        self.eigenvalues
            .iter()
            .zip(coeffs)
            .map(|(&l, &c)| m(l) * c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// Exact `‖e^{-tA}‖_{L²→L^∞}`: the largest weighted `ℓ²` norm of a heat kernel row.
    pub fn heat_l2_linf_norm(&self, t: f64) -> f64 {
        let a: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&l| (-2.0 * t * l).exp())
            .collect();
        self.eigen_square_sum(&a)
            .into_iter()
            .fold(0.0_f64, f64::max)
            .sqrt()
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.mode_count() {
            return Err(Error::Shape {
                expected: self.mode_count(),
                got,
            });
        }
        Ok(())
    }

    fn check_basis(&self, basis: BasisId, len: usize) -> Result<()> {
        if basis != self.basis {
            return Err(Error::BackendMismatch);
        }
        self.check_len(len)
    }
}

/// `λ^{s/2}` with the convention `0^0 = 1`.
pub(crate) fn power_symbol(l: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        l.powf(s / 2.0)
    }
}

pub(crate) fn lq_norm_raw(samples: &[f64], weights: &[f64], q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::param("q", format!("q must lie in [1, ∞], got {q}")));
    }
    if q.is_infinite() {
        return Ok(samples.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    }
    let sum: f64 = if q == 1.0 {
        samples.iter().zip(weights).map(|(v, w)| w * v.abs()).sum()
    } else if q == 2.0 {
        samples.iter().zip(weights).map(|(v, w)| w * v * v).sum()
    } else {
        samples
            .iter()
            .zip(weights)
            .map(|(v, w)| w * v.abs().powf(q))
            .sum()
    };
    Ok(sum.powf(1.0 / q))
}
