use crate::error::{Error, Result};

/// Uniform discretization of `[0, T]` into `N` steps of size `h = T / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
    step_size: f64,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() || steps == 0 {
            return Err(Error::InvalidGrid { horizon, steps });
        }
        Ok(TimeGrid {
            horizon,
            steps,
            step_size: horizon / steps as f64,
        })
    }

    /// Grid with the same step size, truncated/extended to cover `[0, horizon]`.
    pub fn with_step_size(horizon: f64, step_size: f64) -> Result<Self> {
        if !(step_size > 0.0) || !step_size.is_finite() {
            return Err(Error::domain(format!("invalid step size {step_size}")));
        }
        let steps = (horizon / step_size).round().max(1.0) as usize;
        TimeGrid::new(steps as f64 * step_size, steps)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    /// Time of grid node `k`, for `k` in `0..=N`.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step_size
    }

    /// Remaining time `T - k h`: where a reverse chain at step `k` sits on the
    /// forward clock.
    pub fn reverse_time(&self, k: usize) -> f64 {
        self.horizon - self.time(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_size_times_steps_recovers_horizon() {
        for (t, n) in [(1.0, 100), (5.0, 500), (0.7, 3), (10.0, 7)] {
            let g = TimeGrid::new(t, n).unwrap();
            let err = (g.step_size() * n as f64 - t).abs();
            assert!(err <= f64::EPSILON * t, "T={t} N={n} err={err}");
        }
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(-1.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(f64::NAN, 10).is_err());
    }

    #[test]
    fn reverse_time_runs_back_to_zero() {
        let g = TimeGrid::new(2.0, 4).unwrap();
        assert_eq!(g.reverse_time(0), 2.0);
        assert!((g.reverse_time(4)).abs() < 1e-15);
    }

    #[test]
    fn with_step_size_keeps_h() {
        let base = TimeGrid::new(5.0, 500).unwrap();
        let g = TimeGrid::with_step_size(8.0, base.step_size()).unwrap();
        assert_eq!(g.steps(), 800);
        assert_eq!(g.step_size(), base.step_size());
    }
}
