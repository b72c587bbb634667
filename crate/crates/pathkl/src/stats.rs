//! Small numeric helpers: deterministic summation, moments, least squares.

/// Pairwise (cascade) summation. Deterministic for a given slice and more
/// accurate than a running sum on long inputs.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BASE: usize = 64;
    if xs.len() <= BASE {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance (ddof = 1). Zero for singleton slices.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (xs.len() - 1) as f64
}

/// Mean and its Monte Carlo standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    let se = (sample_variance(xs) / xs.len() as f64).sqrt();
    (m, se)
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let (value, std_error) = mean_and_se(xs);
        McEstimate {
            value,
            std_error,
            n: xs.len(),
        }
    }
}

/// Ordinary least squares fit `y ~ slope * x + intercept`.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0 // perfectly flat data is fit exactly by the constant line
    } else {
        let ss_res: f64 = x
            .iter()
            .zip(y)
            .map(|(xi, yi)| {
                let e = yi - (slope * xi + intercept);
                e * e
            })
            .sum();
        1.0 - ss_res / syy
    };
    let _ = n;
    LinearFit {
        slope,
        intercept,
        r2,
    }
}
