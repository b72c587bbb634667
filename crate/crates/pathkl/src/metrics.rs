//! Distribution distances (KL, Wasserstein-2, total variation) for diagonal
//! Gaussians and samples, plus the bound calculators that chain them:
//! Pinsker, Talagrand, exponential contraction of the forward flow, and the
//! composite total-variation bound for score-based samplers.

use crate::error::{Error, Result};
use crate::gaussian::GaussianSpec;
use crate::rng::PathStream;
use crate::sde::forward_marginal;
use crate::stats::McEstimate;

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn check_dims(p: &GaussianSpec, q: &GaussianSpec) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    Ok(())
}

/// `KL(p || q)` between diagonal Gaussians, in nats.
pub fn gaussian_kl(p: &GaussianSpec, q: &GaussianSpec) -> Result<f64> {
    check_dims(p, q)?;
    let mut acc = 0.0;
    for j in 0..p.dim() {
        let vp = p.var()[j];
        let vq = q.var()[j];
        let dm = p.mean()[j] - q.mean()[j];
        acc += 0.5 * (vp / vq + dm * dm / vq - 1.0 - (vp / vq).ln());
    }
    Ok(acc)
}

/// Wasserstein-2 distance between diagonal Gaussians:
/// `sqrt(||μ_p - μ_q||² + Σ (σ_p - σ_q)²)`.
pub fn gaussian_w2(p: &GaussianSpec, q: &GaussianSpec) -> Result<f64> {
    check_dims(p, q)?;
    let mut acc = 0.0;
    for j in 0..p.dim() {
        let dm = p.mean()[j] - q.mean()[j];
        let ds = p.var()[j].sqrt() - q.var()[j].sqrt();
        acc += dm * dm + ds * ds;
    }
    Ok(acc.sqrt())
}

/// Total variation between scalar Gaussians, `½ ∫ |p - q|`.
///
/// The density log-ratio is a quadratic, so the densities cross at most
/// twice; the integral is evaluated exactly as CDF differences over the
/// sign-constant segments. For equal variances this reduces to
/// `2 Φ(|Δμ| / 2σ) - 1`.
pub fn gaussian_tv_1d(p: &GaussianSpec, q: &GaussianSpec) -> Result<f64> {
    check_dims(p, q)?;
    if p.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: p.dim(),
        });
    }
    let (m1, v1) = (p.mean()[0], p.var()[0]);
    let (m2, v2) = (q.mean()[0], q.var()[0]);
    if m1 == m2 && v1 == v2 {
        return Ok(0.0);
    }
    // ln p - ln q = a x² + b x + c
    let a = 0.5 / v2 - 0.5 / v1;
    let b = m1 / v1 - m2 / v2;
    let c = -m1 * m1 / (2.0 * v1) + m2 * m2 / (2.0 * v2) + 0.5 * (v2 / v1).ln();
    let g = |x: f64| normal_cdf((x - m1) / v1.sqrt()) - normal_cdf((x - m2) / v2.sqrt());
    let tv = if a == 0.0 {
        // equal variances: single crossing at the midpoint
        g(-c / b).abs()
    } else {
        let disc = (b * b - 4.0 * a * c).max(0.0);
        let s = -0.5 * (b + b.signum() * disc.sqrt());
        let (mut r1, mut r2) = if s == 0.0 {
            (0.0, 0.0)
        } else {
            (s / a, c / s)
        };
        if r1 > r2 {
            std::mem::swap(&mut r1, &mut r2);
        }
        0.5 * (g(r1).abs() + (g(r2) - g(r1)).abs() + g(r2).abs())
    };
    Ok(tv.clamp(0.0, 1.0))
}

/// Monte Carlo total variation between diagonal Gaussians in any dimension:
/// `TV = E_p[ max(0, 1 - q(x)/p(x)) ]`, with standard error.
pub fn gaussian_tv_mc(
    p: &GaussianSpec,
    q: &GaussianSpec,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_dims(p, q)?;
    if n_samples == 0 {
        return Err(Error::domain("n_samples must be >= 1"));
    }
    let d = p.dim();
    let stream = PathStream::new(seed, 0);
    let mut x = vec![0.0; d];
    let mut terms = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        p.sample_into(&stream, (i * d) as u64, &mut x);
        let w = (q.log_density(&x) - p.log_density(&x)).exp();
        terms.push((1.0 - w).max(0.0));
    }
    Ok(McEstimate::from_samples(&terms))
}

/// Empirical Wasserstein-2 between two equally sized 1D sample sets via the
/// sorted (comonotone) coupling, which is optimal in one dimension.
pub fn empirical_w2_1d(samples_a: &[f64], samples_b: &[f64]) -> Result<f64> {
    if samples_a.len() != samples_b.len() {
        return Err(Error::DimensionMismatch {
            expected: samples_a.len(),
            got: samples_b.len(),
        });
    }
    if samples_a.len() < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let mut a = samples_a.to_vec();
    let mut b = samples_b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let sq: Vec<f64> = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y) * (x - y))
        .collect();
    Ok((crate::stats::pairwise_sum(&sq) / sq.len() as f64).sqrt())
}

/// Pinsker's inequality: `TV <= sqrt(KL / 2)`.
pub fn pinsker_bound(kl: f64) -> Result<f64> {
    if !(kl >= 0.0) {
        return Err(Error::domain(format!("kl must be >= 0, got {kl}")));
    }
    Ok((kl / 2.0).sqrt())
}

/// Talagrand's transport inequality for the Gaussian measure:
/// `W2(q, γ) <= sqrt(2 KL(q || γ))`.
pub fn talagrand_bound(kl_to_gamma: f64) -> Result<f64> {
    if !(kl_to_gamma >= 0.0) {
        return Err(Error::domain(format!("kl must be >= 0, got {kl_to_gamma}")));
    }
    Ok((2.0 * kl_to_gamma).sqrt())
}

/// One row of a contraction check: does the forward flow satisfy
/// `W2(q_t, γ) <= e^{-t} W2(q_0, γ)`?
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionRow {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Check the exponential W2 contraction of the forward flow toward the
/// standard Gaussian at each requested time.
pub fn contraction_check(q0: &GaussianSpec, times: &[f64]) -> Result<Vec<ContractionRow>> {
    let gamma = GaussianSpec::standard(q0.dim());
    let w0 = gaussian_w2(q0, &gamma)?;
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("time must be >= 0, got {t}")));
        }
        let qt = forward_marginal(q0, t)?;
        let lhs = gaussian_w2(&qt, &gamma)?;
        let rhs = (-t).exp() * w0;
        rows.push(ContractionRow {
            t,
            lhs,
            rhs,
            ok: lhs <= rhs * (1.0 + 1e-9),
        });
    }
    Ok(rows)
}

/// The composite total-variation error bound of a score-based sampler run to
/// horizon `T`: a score term growing like `sqrt(T) eps` and an initialization
/// term decaying like `e^{-T} sqrt(2 KL(q || γ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub tv_score_term: f64,
    pub tv_init_term: f64,
    pub tv_total_bound: f64,
    pub measured_tv: Option<f64>,
    pub satisfied: Option<bool>,
}

impl BoundReport {
    /// Attach a measured total variation and evaluate the bound against it.
    pub fn with_measurement(mut self, measured_tv: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&measured_tv) {
            return Err(Error::domain(format!(
                "measured TV must lie in [0, 1], got {measured_tv}"
            )));
        }
        self.satisfied = Some(measured_tv <= self.tv_total_bound);
        self.measured_tv = Some(measured_tv);
        Ok(self)
    }
}

/// Evaluate the composite bound `c_score sqrt(T) eps + c_init e^{-T} sqrt(2 KL)`.
pub fn composite_tv_bound(
    horizon: f64,
    eps: f64,
    kl_q_gamma: f64,
    c_score: f64,
    c_init: f64,
) -> Result<BoundReport> {
    for (name, v) in [
        ("T", horizon),
        ("eps", eps),
        ("kl", kl_q_gamma),
        ("c_score", c_score),
        ("c_init", c_init),
    ] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::domain(format!("{name} must be >= 0, got {v}")));
        }
    }
    let tv_score_term = c_score * horizon.sqrt() * eps;
    let tv_init_term = c_init * (-horizon).exp() * (2.0 * kl_q_gamma).sqrt();
    Ok(BoundReport {
        tv_score_term,
        tv_init_term,
        tv_total_bound: tv_score_term + tv_init_term,
        measured_tv: None,
        satisfied: None,
    })
}
