use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::CLAMP_TOLERANCE;
use crate::error::{Error, Result};

/// Orthonormal eigenbasis of `W^{-1/2} M W^{-1/2}`, stored in `√w`-scaled coordinates.
pub(crate) struct DenseBasis {
    pub(crate) eigenvalues: Vec<f64>,
    /// Columns are `ℓ²`-orthonormal eigenvectors; `φ_k = W^{-1/2} v_k`.
    vectors: DMatrix<f64>,
    sqrt_w: Vec<f64>,
    pub(crate) clamped: f64,
}

impl DenseBasis {
    pub(crate) fn new(matrix: &DMatrix<f64>, weights: &[f64]) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::Construction(format!(
                "matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if weights.len() != n {
            return Err(Error::Construction(format!(
                "expected {n} weights, got {}",
                weights.len()
            )));
        }
        if let Some(j) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Construction(format!(
                "weights must be positive, index {j} is {}",
                weights[j]
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Construction("matrix has non-finite entries".into()));
        }
        let scale = matrix.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let mut asym = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((matrix[(i, j)] - matrix[(j, i)]).abs());
            }
        }
        if asym > CLAMP_TOLERANCE * scale {
            return Err(Error::Construction(format!(
                "symmetry check failed: max |M_ij - M_ji| = {asym:e} exceeds {:e}",
                CLAMP_TOLERANCE * scale
            )));
        }

        let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let scaled = DMatrix::from_fn(n, n, |i, j| {
            0.5 * (matrix[(i, j)] + matrix[(j, i)]) / (sqrt_w[i] * sqrt_w[j])
        });
        let eig = SymmetricEigen::new(scaled);

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let smallest = eig.eigenvalues[order[0]];
        let eig_scale = eig.eigenvalues.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if smallest < -CLAMP_TOLERANCE * eig_scale {
            return Err(Error::Construction(format!(
                "positive semi-definiteness check failed: smallest eigenvalue {smallest:e}"
            )));
        }

        let mut clamped = 0.0_f64;
        let eigenvalues: Vec<f64> = order
            .iter()
            .map(|&k| {
                let l = eig.eigenvalues[k];
                if l < 0.0 {
                    clamped = clamped.max(-l);
                    0.0
                } else {
                    l
                }
            })
            .collect();

        let mut vectors = DMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(k).clone_owned();
            // fix the sign so that the largest component is positive
            let (imax, _) = v
                .iter()
                .enumerate()
                .fold((0, 0.0_f64), |(bi, bv), (i, x)| {
                    if x.abs() > bv + 1e-14 {
                        (i, x.abs())
                    } else {
                        (bi, bv)
                    }
                });
            if v[imax] < 0.0 {
                v.neg_mut();
            }
            vectors.set_column(col, &v);
        }

        Ok(DenseBasis {
            eigenvalues,
            vectors,
            sqrt_w,
            clamped,
        })
    }

    pub(crate) fn forward(&self, samples: &[f64]) -> Vec<f64> {
        let g = DVector::from_iterator(
            samples.len(),
            samples.iter().zip(&self.sqrt_w).map(|(f, s)| f * s),
        );
        (self.vectors.tr_mul(&g)).iter().copied().collect()
    }

    pub(crate) fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        let c = DVector::from_column_slice(coeffs);
        let g = &self.vectors * c;
        g.iter().zip(&self.sqrt_w).map(|(v, s)| v / s).collect()
    }

    pub(crate) fn eigen_square_sum(&self, a: &[f64]) -> Vec<f64> {
        let n = self.sqrt_w.len();
        (0..n)
            .map(|j| {
                let row: f64 = (0..n)
                    .map(|k| a[k] * self.vectors[(j, k)] * self.vectors[(j, k)])
                    .sum();
                row / (self.sqrt_w[j] * self.sqrt_w[j])
            })
            .collect()
    }
}
