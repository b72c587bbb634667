use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng::PathStream;

/// Variance floor applied to every coordinate. Keeps scores finite for
/// near-degenerate data distributions (e.g. points on a line); the effect on
/// any distance used here is at most `sqrt(VAR_FLOOR)`.
pub const VAR_FLOOR: f64 = 1e-6;

/// Diagonal-covariance Gaussian: per-coordinate mean and variance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl GaussianSpec {
    /// Build from per-coordinate mean and variance. Variances must be strictly
    /// positive; entries below [`VAR_FLOOR`] are clamped to it.
    pub fn new(mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        if mean.len() != var.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                got: var.len(),
            });
        }
        if mean.is_empty() {
            return Err(Error::domain("dimension must be >= 1"));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite { context: "gaussian mean" });
        }
        if var.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::domain("variances must be strictly positive"));
        }
        let var = var.into_iter().map(|v| v.max(VAR_FLOOR)).collect();
        Ok(GaussianSpec { mean, var })
    }

    /// Standard Gaussian in `d` dimensions: mean 0, unit variance.
    pub fn standard(d: usize) -> Self {
        GaussianSpec {
            mean: vec![0.0; d],
            var: vec![1.0; d],
        }
    }

    /// Scalar (d = 1) Gaussian.
    pub fn scalar(mean: f64, var: f64) -> Result<Self> {
        GaussianSpec::new(vec![mean], vec![var])
    }

    /// Per-coordinate moment fit of a sample cloud (rows of dimension `d`),
    /// with the variance floor added isotropically.
    pub fn moment_fit(samples: &[f64], d: usize) -> Result<Self> {
        if d == 0 || samples.is_empty() || samples.len() % d != 0 {
            return Err(Error::domain("samples must be a nonempty n x d array"));
        }
        let n = samples.len() / d;
        if n < 2 {
            return Err(Error::domain("need at least two samples to fit moments"));
        }
        let mut mean = vec![0.0; d];
        for row in samples.chunks_exact(d) {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut var = vec![0.0; d];
        for row in samples.chunks_exact(d) {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        for v in &mut var {
            *v = *v / (n - 1) as f64 + VAR_FLOOR;
        }
        GaussianSpec::new(mean, var)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn var(&self) -> &[f64] {
        &self.var
    }

    /// Draw one sample into `out` using normals `start..start+d` of `stream`.
    pub fn sample_into(&self, stream: &PathStream, start: u64, out: &mut [f64]) {
        for (j, slot) in out.iter_mut().enumerate() {
            let z = stream.normal(start + j as u64);
            *slot = self.mean[j] + self.var[j].sqrt() * z;
        }
    }

    /// Log density at `x`.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((xi, m), v) in x.iter().zip(&self.mean).zip(&self.var) {
            let d = xi - m;
            acc += -0.5 * ((2.0 * PI * v).ln() + d * d / v);
        }
        acc
    }

    /// Density at scalar `x` (d = 1 only).
    pub fn density_1d(&self, x: f64) -> f64 {
        debug_assert_eq!(self.dim(), 1);
        let v = self.var[0];
        (-(x - self.mean[0]).powi(2) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
    }
}
