//! Score functions `∇ ln q_t` for Gaussian marginals of the forward process,
//! and perturbed variants with a controlled pointwise error budget.
//!
//! The exact score of a diagonal Gaussian marginal is `(μ_t - x) / σ_t²`
//! coordinatewise. A perturbed model adds `eps * u(t)` for a unit direction
//! `u`, so its L2 deviation from the exact score is exactly `eps` everywhere.

use crate::error::{Error, Result};
use crate::gaussian::GaussianSpec;
use crate::rng::PathStream;
use crate::stats::McEstimate;
use crate::trajectory::PathBatch;

/// How a perturbed score deviates from the exact one.
#[derive(Debug, Clone, PartialEq)]
pub enum PerturbationMode {
    /// Fixed unit direction `(1, ..., 1) / sqrt(d)`.
    ConstantOffset,
    /// Unit direction redrawn per time bucket, deterministically from `seed`.
    /// `bucket_width` is typically the step size of the simulation grid.
    RandomDirection { seed: u64, bucket_width: f64 },
}

#[derive(Debug, Clone, PartialEq)]
struct Perturbation {
    eps: f64,
    mode: PerturbationMode,
}

/// Exact or perturbed score for the forward-process marginals of `q0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreModel {
    q0: GaussianSpec,
    perturbation: Option<Perturbation>,
}

impl ScoreModel {
    /// Exact score of the marginal flow started at `q0`.
    pub fn exact(q0: GaussianSpec) -> Self {
        ScoreModel {
            q0,
            perturbation: None,
        }
    }

    /// A model whose pointwise L2 deviation from this (exact) model is `eps`.
    pub fn perturbed(&self, eps: f64, mode: PerturbationMode) -> Result<ScoreModel> {
        if self.perturbation.is_some() {
            return Err(Error::domain("base score model must be exact"));
        }
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::domain(format!("eps must be >= 0, got {eps}")));
        }
        if let PerturbationMode::RandomDirection { bucket_width, .. } = &mode {
            if !(*bucket_width > 0.0) {
                return Err(Error::domain("bucket width must be positive"));
            }
        }
        Ok(ScoreModel {
            q0: self.q0.clone(),
            perturbation: Some(Perturbation { eps, mode }),
        })
    }

    pub fn q0(&self) -> &GaussianSpec {
        &self.q0
    }

    pub fn dim(&self) -> usize {
        self.q0.dim()
    }

    pub fn is_exact(&self) -> bool {
        self.perturbation.is_none()
    }

    pub fn eps(&self) -> f64 {
        self.perturbation.as_ref().map_or(0.0, |p| p.eps)
    }

    pub fn label(&self) -> String {
        match &self.perturbation {
            None => "exact".to_string(),
            Some(p) => format!("perturbed(eps={})", p.eps),
        }
    }

    /// Evaluate the score at time `t` and state `x` into `out`.
    pub fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        let emt = (-t).exp();
        let e2 = emt * emt;
        let mean = self.q0.mean();
        let var = self.q0.var();
        for j in 0..x.len() {
            let m = mean[j] * emt;
            let v = 1.0 + (var[j] - 1.0) * e2;
            out[j] = (m - x[j]) / v;
        }
        if let Some(p) = &self.perturbation {
            if p.eps > 0.0 {
                add_deviation(p, t, out);
            }
        }
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.eval_into(t, x, &mut out);
        out
    }
}

fn add_deviation(p: &Perturbation, t: f64, out: &mut [f64]) {
    let d = out.len();
    match &p.mode {
        PerturbationMode::ConstantOffset => {
            let u = 1.0 / (d as f64).sqrt();
            for o in out.iter_mut() {
                *o += p.eps * u;
            }
        }
        PerturbationMode::RandomDirection { seed, bucket_width } => {
            let bucket = (t / bucket_width).round();
            let stream = PathStream::new(*seed, bucket as i64 as u64);
            let mut dir = vec![0.0; d];
            stream.fill_normal(0, &mut dir);
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-12 {
                out[0] += p.eps;
                return;
            }
            for (o, u) in out.iter_mut().zip(&dir) {
                *o += p.eps * u / norm;
            }
        }
    }
}

/// Exact score `(μ_t - x) / σ_t²` of the forward marginal at time `t`.
pub fn exact_score(q0: &GaussianSpec, t: f64, x: &[f64]) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    if x.len() != q0.dim() {
        return Err(Error::DimensionMismatch {
            expected: q0.dim(),
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "score input" });
    }
    Ok(ScoreModel::exact(q0.clone()).eval(t, x))
}

/// Monte Carlo estimate of `E[ ||a - b||² ]` over the step states of `paths`,
/// with the score evaluated on the reverse clock `t = T - k h`.
pub fn score_error_norm(a: &ScoreModel, b: &ScoreModel, paths: &PathBatch) -> Result<McEstimate> {
    if paths.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let grid = paths.grid();
    let d = paths.dim();
    if a.dim() != d || b.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: a.dim().max(b.dim()),
        });
    }
    let n_steps = grid.steps();
    let mut per_path = Vec::with_capacity(paths.len());
    let mut sa = vec![0.0; d];
    let mut sb = vec![0.0; d];
    for traj in paths.iter() {
        let mut acc = 0.0;
        for k in 0..n_steps {
            let x = traj.state(k);
            let t = grid.reverse_time(k);
            a.eval_into(t, x, &mut sa);
            b.eval_into(t, x, &mut sb);
            acc += sa
                .iter()
                .zip(&sb)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>();
        }
        per_path.push(acc / n_steps as f64);
    }
    Ok(McEstimate::from_samples(&per_path))
}

/// Convenience wrapper used by tests: sup over a (t, x) lattice of the L2
/// deviation between two score models.
pub fn sup_deviation_on_lattice(
    a: &ScoreModel,
    b: &ScoreModel,
    times: &[f64],
    xs: &[f64],
) -> f64 {
    let d = a.dim();
    let mut sup: f64 = 0.0;
    let mut pa = vec![0.0; d];
    let mut pb = vec![0.0; d];
    for &t in times {
        for &x in xs {
            let point = vec![x; d];
            a.eval_into(t, &point, &mut pa);
            b.eval_into(t, &point, &mut pb);
            let norm = pa
                .iter()
                .zip(&pb)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt();
            sup = sup.max(norm);
        }
    }
    sup
}
