use std::fmt;
use std::sync::Arc;

use crate::grid::TimeGrid;
use crate::score::ScoreModel;

type DriftFn = dyn Fn(usize, &[f64], &mut [f64]) + Send + Sync;

/// Time-indexed drift `b_k(x)`: a deterministic map from (step index, state)
/// to a drift vector. Instances are cheap to clone and safe to share across
/// threads.
#[derive(Clone)]
pub struct DriftField {
    label: String,
    grid: Option<TimeGrid>,
    dim: Option<usize>,
    f: Arc<DriftFn>,
}

impl fmt::Debug for DriftField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriftField")
            .field("label", &self.label)
            .finish()
    }
}

impl DriftField {
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(usize, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        DriftField {
            label: label.into(),
            grid: None,
            dim: None,
            f: Arc::new(f),
        }
    }

    /// Mean-reverting drift `b(x) = -x` of the forward noising process.
    pub fn ou() -> Self {
        DriftField::from_fn("ou", |_, x, out| {
            for (o, xi) in out.iter_mut().zip(x) {
                *o = -xi;
            }
        })
    }

    pub fn zero() -> Self {
        DriftField::from_fn("zero", |_, _, out| out.fill(0.0))
    }

    /// Drift of the time-reversed chain under `score`, stepped on `grid`:
    /// `b_k(x) = x + 2 s(T - k h, x)`.
    pub fn reverse_em(score: ScoreModel, grid: TimeGrid) -> Self {
        let label = format!("reverse[{}]", score.label());
        let dim = Some(score.dim());
        let f = move |k: usize, x: &[f64], out: &mut [f64]| {
            score.eval_into(grid.reverse_time(k), x, out);
            for (o, xi) in out.iter_mut().zip(x) {
                *o = xi + 2.0 * *o;
            }
        };
        DriftField {
            label,
            grid: Some(grid),
            dim,
            f: Arc::new(f),
        }
    }

    /// This drift plus a constant offset vector.
    pub fn offset(&self, delta: Vec<f64>) -> Self {
        let base = self.clone();
        let label = format!("{}+offset", self.label);
        let dim = self.dim.or(Some(delta.len()));
        let f = move |k: usize, x: &[f64], out: &mut [f64]| {
            (base.f)(k, x, out);
            for (o, d) in out.iter_mut().zip(&delta) {
                *o += d;
            }
        };
        DriftField {
            label,
            grid: self.grid,
            dim,
            f: Arc::new(f),
        }
    }

    /// This drift plus the pointwise gap between two score models at the
    /// reverse clock of `grid`: `b'(k, x) = b(k, x) + (s'(t_k, x) - s(t_k, x))`.
    ///
    /// This is how a score-estimation error of size eps enters the drift with
    /// unit coefficient, so a constant-offset error eps yields a path KL of
    /// exactly `T eps^2 / 4`.
    pub fn with_score_gap(&self, exact: ScoreModel, perturbed: ScoreModel, grid: TimeGrid) -> Self {
        let base = self.clone();
        let label = format!("{}+score_gap", self.label);
        let dim = self.dim.or(Some(exact.dim()));
        let f = move |k: usize, x: &[f64], out: &mut [f64]| {
            (base.f)(k, x, out);
            let t = grid.reverse_time(k);
            let mut a = vec![0.0; x.len()];
            let mut b = vec![0.0; x.len()];
            exact.eval_into(t, x, &mut a);
            perturbed.eval_into(t, x, &mut b);
            for ((o, pa), pb) in out.iter_mut().zip(&a).zip(&b) {
                *o += pb - pa;
            }
        };
        DriftField {
            label,
            grid: self.grid.or(Some(grid)),
            dim,
            f: Arc::new(f),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// Grid this drift was built against, if any. Girsanov operations check it
    /// against the trajectory's grid.
    pub fn grid(&self) -> Option<&TimeGrid> {
        self.grid.as_ref()
    }

    #[inline]
    pub fn eval_into(&self, k: usize, x: &[f64], out: &mut [f64]) {
        (self.f)(k, x, out);
    }

    pub fn eval(&self, k: usize, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.eval_into(k, x, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianSpec;

    #[test]
    fn ou_drift_negates_state() {
        let b = DriftField::ou();
        assert_eq!(b.eval(0, &[1.5, -2.0]), vec![-1.5, 2.0]);
    }

    #[test]
    fn drift_is_deterministic() {
        let b = DriftField::reverse_em(
            ScoreModel::exact(GaussianSpec::scalar(2.0, 4.0).unwrap()),
            TimeGrid::new(1.0, 10).unwrap(),
        );
        let x = [0.3];
        assert_eq!(b.eval(3, &x), b.eval(3, &x));
    }

    #[test]
    fn offset_adds_constant() {
        let b = DriftField::zero().offset(vec![0.2]);
        assert_eq!(b.eval(5, &[9.0]), vec![0.2]);
    }

    #[test]
    fn reverse_drift_at_stationarity_is_minus_x() {
        // score of the standard Gaussian is -x, so x + 2(-x) = -x
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let b = DriftField::reverse_em(ScoreModel::exact(GaussianSpec::standard(1)), grid);
        let out = b.eval(2, &[1.0]);
        assert!((out[0] + 1.0).abs() < 1e-12);
    }
}
