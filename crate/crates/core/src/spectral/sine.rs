use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// DST-I kernels for the Dirichlet interval, backed by complex FFTs.
pub(crate) struct SineTransform {
    n: usize,
    odd_fft: Arc<dyn Fft<f64>>,
    cos_fft: Arc<dyn Fft<f64>>,
}

impl SineTransform {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let odd_fft = planner.plan_fft_forward(2 * (n + 1));
        let cos_fft = planner.plan_fft_forward(n + 1);
        SineTransform {
            n,
            odd_fft,
            cos_fft,
        }
    }

    /// Unnormalized DST-I: `y_k = sum_j x_j sin(pi j k / (n + 1))`, `j, k = 1..n`.
    pub(crate) fn dst1(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let m = 2 * (n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (j, &v) in x.iter().enumerate() {
            buf[j + 1].re = v;
            buf[m - 1 - j].re = -v;
        }
        self.odd_fft.process(&mut buf);
        buf[1..=n].iter().map(|z| -0.5 * z.im).collect()
    }

    /// `g_j = sum_k a_k cos(2 pi k j / (n + 1))` for `j = 1..n`.
    pub(crate) fn cos_sum(&self, a: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); n + 1];
        for (k, &v) in a.iter().enumerate() {
            buf[k + 1].re = v;
        }
        self.cos_fft.process(&mut buf);
        buf[1..=n].iter().map(|z| z.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dst(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (1..=n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| v * (PI * ((j + 1) * k) as f64 / (n + 1) as f64).sin())
                    .sum()
            })
            .collect()
    }

    #[test]
    fn fft_dst_matches_direct_sum() {
        for n in [2usize, 3, 7, 16, 33] {
            let x: Vec<f64> = (0..n).map(|j| ((j * 7 + 3) % 11) as f64 - 4.5).collect();
            let fast = SineTransform::new(n).dst1(&x);
            let slow = naive_dst(&x);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-11, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn cos_sum_matches_direct_sum() {
        let n = 12;
        let a: Vec<f64> = (1..=n).map(|k| 1.0 / k as f64).collect();
        let fast = SineTransform::new(n).cos_sum(&a);
        for j in 1..=n {
            let slow: f64 = (1..=n)
                .map(|k| a[k - 1] * (2.0 * PI * (k * j) as f64 / (n + 1) as f64).cos())
                .sum();
            assert!((fast[j - 1] - slow).abs() < 1e-12);
        }
    }
}
