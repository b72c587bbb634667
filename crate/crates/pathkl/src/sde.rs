//! Discrete-time dynamics: the forward mean-reverting chain, two reverse
//! samplers (Euler-Maruyama and exponential-integrator), and deterministic
//! batch simulation.
//!
//! All chains share the same shape: from state `x_k`, draw `g_k ~ N(0, I_d)`
//! and move to `x_{k+1}`. The Euler-Maruyama family is
//!
//! ```text
//! x_{k+1} = x_k + h b_k(x_k) + sqrt(2h) g_k
//! ```
//!
//! for an arbitrary drift field `b`, which covers the forward chain
//! (`b(x) = -x`) and the score-driven reverse chain
//! (`b_k(x) = x + 2 s(T - kh, x)`). The exponential-integrator sampler solves
//! the linear part of the reverse dynamics exactly over each step:
//!
//! ```text
//! x_{k+1} = e^h x_k + 2 (e^h - 1) s(T - kh, x_k) + g,   g ~ N(0, (e^{2h}-1) I_d)
//! ```

use rayon::prelude::*;

use crate::drift::DriftField;
use crate::error::{Error, Result};
use crate::gaussian::GaussianSpec;
use crate::grid::TimeGrid;
use crate::rng::PathStream;
use crate::score::ScoreModel;
use crate::trajectory::{PathBatch, Trajectory};

/// Closed-form marginal of the forward chain's continuous limit at time `t`:
/// mean shrinks by `e^{-t}`, variance relaxes to 1 at rate `e^{-2t}`.
pub fn forward_marginal(q0: &GaussianSpec, t: f64) -> Result<GaussianSpec> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    let emt = (-t).exp();
    let e2 = emt * emt;
    let mean = q0.mean().iter().map(|m| m * emt).collect();
    // 1 + (v - 1) e^{-2t}: exact at v = 1, so the stationary law stays fixed
    let var = q0.var().iter().map(|v| 1.0 + (v - 1.0) * e2).collect();
    GaussianSpec::new(mean, var)
}

fn check_state(x: &[f64], context: &'static str) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context });
    }
    Ok(())
}

/// One forward step `x + h (-x) + sqrt(2h) g`.
pub fn forward_ou_step(x: &[f64], grid: &TimeGrid, g: &[f64]) -> Result<Vec<f64>> {
    check_state(x, "forward step input")?;
    if g.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: g.len(),
        });
    }
    let h = grid.step_size();
    let s2h = (2.0 * h).sqrt();
    Ok(x.iter()
        .zip(g)
        .map(|(xi, gi)| xi + h * (-xi) + s2h * gi)
        .collect())
}

/// One Euler-Maruyama reverse step `x + h (x + 2 s(T - kh, x)) + sqrt(2h) g`.
pub fn em_reverse_step(
    x: &[f64],
    k: usize,
    score: &ScoreModel,
    grid: &TimeGrid,
    g: &[f64],
) -> Result<Vec<f64>> {
    check_state(x, "reverse step input")?;
    if x.len() != score.dim() || g.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: score.dim(),
            got: x.len().max(g.len()),
        });
    }
    let h = grid.step_size();
    let s2h = (2.0 * h).sqrt();
    let mut s = vec![0.0; x.len()];
    score.eval_into(grid.reverse_time(k), x, &mut s);
    Ok(x.iter()
        .zip(&s)
        .zip(g)
        .map(|((xi, si), gi)| xi + h * (xi + 2.0 * si) + s2h * gi)
        .collect())
}

/// One exponential-integrator reverse step
/// `e^h x + 2 (e^h - 1) s(T - kh, x) + sqrt(e^{2h} - 1) g`.
pub fn ddpm_reverse_step(
    x: &[f64],
    k: usize,
    score: &ScoreModel,
    grid: &TimeGrid,
    g: &[f64],
) -> Result<Vec<f64>> {
    check_state(x, "reverse step input")?;
    if x.len() != score.dim() || g.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: score.dim(),
            got: x.len().max(g.len()),
        });
    }
    let h = grid.step_size();
    let eh = h.exp();
    let noise_sd = (eh * eh - 1.0).sqrt();
    let score_scale = 2.0 * (eh - 1.0);
    let mut s = vec![0.0; x.len()];
    score.eval_into(grid.reverse_time(k), x, &mut s);
    Ok(x.iter()
        .zip(&s)
        .zip(g)
        .map(|((xi, si), gi)| eh * xi + score_scale * si + noise_sd * gi)
        .collect())
}

/// The update rule driving a simulated chain.
#[derive(Debug, Clone)]
pub enum Dynamics {
    /// Euler-Maruyama chain under an arbitrary drift field.
    Em(DriftField),
    /// Exponential-integrator reverse sampler under a score model.
    Ddpm(ScoreModel),
}

impl Dynamics {
    /// Forward noising chain (Euler-Maruyama with drift `-x`).
    pub fn forward() -> Self {
        Dynamics::Em(DriftField::ou())
    }

    /// Score-driven reverse chain stepped with Euler-Maruyama.
    pub fn reverse_em(score: ScoreModel, grid: TimeGrid) -> Self {
        Dynamics::Em(DriftField::reverse_em(score, grid))
    }

    /// Score-driven reverse chain stepped with the exponential integrator.
    pub fn ddpm(score: ScoreModel) -> Self {
        Dynamics::Ddpm(score)
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Dynamics::Em(b) => b.dim(),
            Dynamics::Ddpm(s) => Some(s.dim()),
        }
    }
}

/// Per-grid constants of the update rule, hoisted out of the step loop.
struct Kernel<'a> {
    dynamics: &'a Dynamics,
    grid: TimeGrid,
    h: f64,
    sqrt_2h: f64,
    eh: f64,
    ddpm_score_scale: f64,
    ddpm_noise_sd: f64,
}

impl<'a> Kernel<'a> {
    fn new(dynamics: &'a Dynamics, grid: TimeGrid) -> Self {
        let h = grid.step_size();
        let eh = h.exp();
        Kernel {
            dynamics,
            grid,
            h,
            sqrt_2h: (2.0 * h).sqrt(),
            eh,
            ddpm_score_scale: 2.0 * (eh - 1.0),
            ddpm_noise_sd: (eh * eh - 1.0).sqrt(),
        }
    }

    #[inline]
    fn step_into(&self, k: usize, x: &[f64], g: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        match self.dynamics {
            Dynamics::Em(b) => {
                b.eval_into(k, x, scratch);
                for j in 0..x.len() {
                    out[j] = x[j] + self.h * scratch[j] + self.sqrt_2h * g[j];
                }
            }
            Dynamics::Ddpm(s) => {
                s.eval_into(self.grid.reverse_time(k), x, scratch);
                for j in 0..x.len() {
                    out[j] = self.eh * x[j] + self.ddpm_score_scale * scratch[j]
                        + self.ddpm_noise_sd * g[j];
                }
            }
        }
    }
}

/// Initial condition of a batch.
#[derive(Debug, Clone, Copy)]
pub enum BatchInit<'a> {
    /// Draw `x_0` from a diagonal Gaussian using the path's own stream.
    Gaussian(&'a GaussianSpec),
    /// Use explicit samples, one row of length `dim` per path.
    Samples { data: &'a [f64], dim: usize },
}

impl BatchInit<'_> {
    fn dim(&self) -> usize {
        match self {
            BatchInit::Gaussian(g) => g.dim(),
            BatchInit::Samples { dim, .. } => *dim,
        }
    }
}

/// Noise index layout: indices `0..d` seed the initial draw (whether used or
/// not), step `k` coordinate `j` uses index `d + k d + j`.
#[inline]
fn noise_index(d: usize, k: usize) -> u64 {
    (d + k * d) as u64
}

fn init_state(init: &BatchInit, stream: &PathStream, path: usize, out: &mut [f64]) {
    match init {
        BatchInit::Gaussian(g) => g.sample_into(stream, 0, out),
        BatchInit::Samples { data, dim } => {
            out.copy_from_slice(&data[path * dim..(path + 1) * dim]);
        }
    }
}

fn run_path(
    kernel: &Kernel,
    stream: &PathStream,
    d: usize,
    x0: &[f64],
    mut store: Option<(&mut Vec<f64>, &mut Vec<f64>)>,
) -> Result<Vec<f64>> {
    check_state(x0, "initial state")?;
    let n = kernel.grid.steps();
    let mut x = x0.to_vec();
    let mut next = vec![0.0; d];
    let mut g = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    if let Some((states, _)) = store.as_mut() {
        states.extend_from_slice(&x);
    }
    for k in 0..n {
        stream.fill_normal(noise_index(d, k), &mut g);
        kernel.step_into(k, &x, &g, &mut scratch, &mut next);
        check_state(&next, "simulated state")?;
        if let Some((states, noises)) = store.as_mut() {
            states.extend_from_slice(&next);
            noises.extend_from_slice(&g);
        }
        std::mem::swap(&mut x, &mut next);
    }
    Ok(x)
}

fn validate_batch(init: &BatchInit, dynamics: &Dynamics, n_paths: usize) -> Result<usize> {
    if n_paths == 0 {
        return Err(Error::domain("n_paths must be >= 1"));
    }
    let d = init.dim();
    if d == 0 {
        return Err(Error::domain("dimension must be >= 1"));
    }
    if let BatchInit::Samples { data, dim } = init {
        if data.len() != n_paths * dim {
            return Err(Error::DimensionMismatch {
                expected: n_paths * dim,
                got: data.len(),
            });
        }
    }
    if let Some(dd) = dynamics.dim() {
        if dd != d {
            return Err(Error::DimensionMismatch {
                expected: dd,
                got: d,
            });
        }
    }
    Ok(d)
}

/// Simulate `n_paths` trajectories with full path and noise storage.
///
/// Paths may run on any number of threads; the result depends only on
/// `(master_seed, path index, config)`.
pub fn simulate_batch(
    init: BatchInit,
    dynamics: &Dynamics,
    grid: TimeGrid,
    n_paths: usize,
    master_seed: u64,
) -> Result<PathBatch> {
    let d = validate_batch(&init, dynamics, n_paths)?;
    let kernel = Kernel::new(dynamics, grid);
    let trajectories: Result<Vec<Trajectory>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let stream = PathStream::new(master_seed, i as u64);
            let mut x0 = vec![0.0; d];
            init_state(&init, &stream, i, &mut x0);
            let mut states = Vec::with_capacity((grid.steps() + 1) * d);
            let mut noises = Vec::with_capacity(grid.steps() * d);
            run_path(&kernel, &stream, d, &x0, Some((&mut states, &mut noises)))?;
            Ok(Trajectory::from_parts(grid, d, states, noises))
        })
        .collect();
    Ok(PathBatch::new(grid, master_seed, trajectories?))
}

/// Initial and terminal states of a streamed batch (no path storage).
#[derive(Debug, Clone)]
pub struct TerminalBatch {
    pub dim: usize,
    pub initial: Vec<f64>,
    pub terminal: Vec<f64>,
}

/// Simulate `n_paths` chains keeping only initial and terminal states.
/// Produces bit-identical endpoints to [`simulate_batch`] for the same seed.
pub fn simulate_terminal(
    init: BatchInit,
    dynamics: &Dynamics,
    grid: TimeGrid,
    n_paths: usize,
    master_seed: u64,
) -> Result<TerminalBatch> {
    let d = validate_batch(&init, dynamics, n_paths)?;
    let kernel = Kernel::new(dynamics, grid);
    let rows: Result<Vec<(Vec<f64>, Vec<f64>)>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let stream = PathStream::new(master_seed, i as u64);
            let mut x0 = vec![0.0; d];
            init_state(&init, &stream, i, &mut x0);
            let end = run_path(&kernel, &stream, d, &x0, None)?;
            Ok((x0, end))
        })
        .collect();
    let rows = rows?;
    let mut initial = Vec::with_capacity(n_paths * d);
    let mut terminal = Vec::with_capacity(n_paths * d);
    for (x0, end) in rows {
        initial.extend_from_slice(&x0);
        terminal.extend_from_slice(&end);
    }
    Ok(TerminalBatch {
        dim: d,
        initial,
        terminal,
    })
}

/// Re-run `dynamics` from `x0` consuming the given noises. Returns all
/// `(N + 1) * d` states; bitwise equal to the original simulation.
pub fn replay(
    dynamics: &Dynamics,
    grid: TimeGrid,
    x0: &[f64],
    noises: &[f64],
) -> Result<Vec<f64>> {
    let d = x0.len();
    if noises.len() != grid.steps() * d {
        return Err(Error::DimensionMismatch {
            expected: grid.steps() * d,
            got: noises.len(),
        });
    }
    let kernel = Kernel::new(dynamics, grid);
    let mut states = Vec::with_capacity((grid.steps() + 1) * d);
    states.extend_from_slice(x0);
    let mut x = x0.to_vec();
    let mut next = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    for k in 0..grid.steps() {
        let g = &noises[k * d..(k + 1) * d];
        kernel.step_into(k, &x, g, &mut scratch, &mut next);
        check_state(&next, "replayed state")?;
        states.extend_from_slice(&next);
        std::mem::swap(&mut x, &mut next);
    }
    Ok(states)
}

/// Which reverse update rule to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepperKind {
    Em,
    Ddpm,
}

/// Exact output law of a score-driven reverse chain started from a Gaussian.
///
/// Both reverse samplers are affine in the state when the score model is
/// exact-or-perturbed for a Gaussian `q0` (the perturbation is state
/// independent), so the chain maps Gaussians to Gaussians and the output
/// moments follow a closed recursion. This is the discretized sampler's true
/// output distribution, discretization bias included.
pub fn reverse_output_law(
    score: &ScoreModel,
    init: &GaussianSpec,
    grid: TimeGrid,
    stepper: StepperKind,
) -> Result<GaussianSpec> {
    let d = score.dim();
    if init.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: init.dim(),
        });
    }
    let h = grid.step_size();
    let eh = h.exp();
    let (x_gain, score_gain, noise_var) = match stepper {
        StepperKind::Em => (1.0 + h, 2.0 * h, 2.0 * h),
        StepperKind::Ddpm => (eh, 2.0 * (eh - 1.0), eh * eh - 1.0),
    };
    let q0 = score.q0();
    let mut mean = init.mean().to_vec();
    let mut var = init.var().to_vec();
    let mut dev = vec![0.0; d];
    let mut zero = vec![0.0; d];
    for k in 0..grid.steps() {
        let t = grid.reverse_time(k);
        let emt = (-t).exp();
        let e2 = emt * emt;
        // state-independent part of the score: s(t, 0)
        zero.fill(0.0);
        score.eval_into(t, &zero, &mut dev);
        for j in 0..d {
            let v_t = 1.0 + (q0.var()[j] - 1.0) * e2;
            let a = x_gain - score_gain / v_t;
            let c = score_gain * dev[j];
            mean[j] = a * mean[j] + c;
            var[j] = a * a * var[j] + noise_var;
        }
    }
    GaussianSpec::new(mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    #[test]
    fn marginal_identity_at_zero() {
        let q0 = GaussianSpec::scalar(2.0, 4.0).unwrap();
        let m = forward_marginal(&q0, 0.0).unwrap();
        assert_eq!(m, q0);
    }

    #[test]
    fn marginal_reaches_stationarity() {
        let q0 = GaussianSpec::scalar(2.0, 4.0).unwrap();
        let m = forward_marginal(&q0, 50.0).unwrap();
        assert!(m.mean()[0].abs() < 1e-15);
        assert!((m.var()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn marginal_rejects_negative_time() {
        let q0 = GaussianSpec::standard(1);
        assert!(forward_marginal(&q0, -0.5).is_err());
    }

    #[test]
    fn marginal_halflife_example() {
        // N(2, 4) at t = ln 2 relaxes to N(1, 1.75); cross-checked by Monte
        // Carlo simulation of the forward chain in `marginal_matches_simulation`
        let q0 = GaussianSpec::scalar(2.0, 4.0).unwrap();
        let m = forward_marginal(&q0, std::f64::consts::LN_2).unwrap();
        assert!((m.mean()[0] - 1.0).abs() < 1e-12);
        assert!((m.var()[0] - 1.75).abs() < 1e-12);
    }

    #[test]
    fn marginal_matches_simulation() {
        // Monte Carlo oracle for the closed-form marginal: simulate the
        // forward chain to t = ln 2 with a fine grid and compare moments.
        let q0 = GaussianSpec::scalar(2.0, 4.0).unwrap();
        let t = std::f64::consts::LN_2;
        let n_paths = 10_000;
        let grid = TimeGrid::with_step_size(t, 1e-3).unwrap();
        let out = simulate_terminal(
            BatchInit::Gaussian(&q0),
            &Dynamics::forward(),
            grid,
            n_paths,
            20_260_101,
        )
        .unwrap();
        let m = stats::mean(&out.terminal);
        let v = stats::sample_variance(&out.terminal);
        let expect = forward_marginal(&q0, grid.horizon()).unwrap();
        let se_mean = (expect.var()[0] / n_paths as f64).sqrt();
        let se_var = expect.var()[0] * (2.0 / n_paths as f64).sqrt();
        assert!(
            (m - expect.mean()[0]).abs() < 3.0 * se_mean,
            "mean {m} vs {}",
            expect.mean()[0]
        );
        assert!(
            (v - expect.var()[0]).abs() < 3.0 * se_var,
            "var {v} vs {}",
            expect.var()[0]
        );
    }

    #[test]
    fn forward_step_hand_values() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        // origin is the drift fixed point
        assert_eq!(forward_ou_step(&[0.0], &grid, &[0.0]).unwrap(), vec![0.0]);
        // deterministic shrink by (1 - h)
        let y = forward_ou_step(&[1.0], &grid, &[0.0]).unwrap();
        assert!((y[0] - 0.9).abs() < 1e-15);
        // independent scalar evaluation: 2 - 0.02 + sqrt(0.02)
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let y = forward_ou_step(&[2.0], &grid, &[1.0]).unwrap();
        let expected = 2.0 - 0.02 + 0.02_f64.sqrt();
        assert!((y[0] - expected).abs() < 1e-15);
        assert!((y[0] - 2.121_421_356_237_309_5).abs() < 1e-12);
    }

    #[test]
    fn forward_step_rejects_non_finite() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        assert!(forward_ou_step(&[f64::NAN], &grid, &[0.0]).is_err());
        assert!(forward_ou_step(&[f64::INFINITY], &grid, &[0.0]).is_err());
    }

    #[test]
    fn em_step_hand_values() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let stationary = ScoreModel::exact(GaussianSpec::standard(1));
        // fixed point at the origin
        let y = em_reverse_step(&[0.0], 0, &stationary, &grid, &[0.0]).unwrap();
        assert_eq!(y, vec![0.0]);
        // stationary score -x gives drift x - 2x = -x: 1 + 0.1 (1 - 2) = 0.9
        let y = em_reverse_step(&[1.0], 0, &stationary, &grid, &[0.0]).unwrap();
        assert!((y[0] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn em_step_with_zero_score_is_pure_expansion() {
        // zero score leaves the reverse drift at x + 2*0 = x: 1 + 0.1 = 1.1
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let dynamics = Dynamics::Em(DriftField::from_fn("expansion", |_, x, out| {
            for (o, xi) in out.iter_mut().zip(x) {
                *o = *xi;
            }
        }));
        let states = replay(&dynamics, grid, &[1.0], &vec![0.0; 10]).unwrap();
        assert!((states[1] - 1.1).abs() < 1e-15);
    }

    #[test]
    fn ddpm_step_hand_values() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let stationary = ScoreModel::exact(GaussianSpec::standard(1));
        let y = ddpm_reverse_step(&[0.0], 0, &stationary, &grid, &[0.0]).unwrap();
        assert_eq!(y, vec![0.0]);
        // e^h - 2 (e^h - 1) = 2 - e^h
        let y = ddpm_reverse_step(&[1.0], 0, &stationary, &grid, &[0.0]).unwrap();
        let expected = 2.0 - 0.1_f64.exp();
        assert!((y[0] - expected).abs() < 1e-15);
        assert!((y[0] - 0.894_829_081_924_352_3).abs() < 1e-12);
    }

    #[test]
    fn steppers_agree_to_second_order() {
        // Richardson check: halving h shrinks |ddpm - em| by ~4x.
        let score = ScoreModel::exact(GaussianSpec::scalar(1.0, 2.0).unwrap());
        let stream = PathStream::new(77, 0);
        let mut ratio_num = 0.0;
        let mut ratio_den = 0.0;
        for i in 0..1000 {
            let x = [2.0 * stream.normal(i)];
            let g = [0.0];
            let d_h = {
                let grid = TimeGrid::new(1.0, 10).unwrap();
                let a = em_reverse_step(&x, 0, &score, &grid, &g).unwrap();
                let b = ddpm_reverse_step(&x, 0, &score, &grid, &g).unwrap();
                (a[0] - b[0]).abs()
            };
            let d_h2 = {
                let grid = TimeGrid::new(1.0, 20).unwrap();
                let a = em_reverse_step(&x, 0, &score, &grid, &g).unwrap();
                let b = ddpm_reverse_step(&x, 0, &score, &grid, &g).unwrap();
                (a[0] - b[0]).abs()
            };
            ratio_num += d_h;
            ratio_den += d_h2;
        }
        let ratio = ratio_num / ratio_den;
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn ddpm_one_step_variance_bias_is_second_order() {
        // Pushing N(0,1) through one exponential step with the stationary
        // score gives variance (2 - e^h)^2 + e^{2h} - 1 = 1 + O(h^2);
        // halving h quarters the deviation.
        let dev = |h: f64| {
            let a: f64 = 2.0 - h.exp();
            let v = a * a + (2.0 * h).exp_m1();
            (v - 1.0).abs()
        };
        let r = dev(0.02) / dev(0.01);
        assert!((3.5..=4.5).contains(&r), "ratio {r}");
    }

    #[test]
    fn replay_reproduces_stored_states_bitwise() {
        let q0 = GaussianSpec::new(vec![1.0, -1.0], vec![2.0, 0.5]).unwrap();
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let dynamics = Dynamics::forward();
        let batch =
            simulate_batch(BatchInit::Gaussian(&q0), &dynamics, grid, 8, 404).unwrap();
        for traj in batch.iter() {
            let mut noises = Vec::new();
            for k in 0..grid.steps() {
                noises.extend_from_slice(traj.noise(k));
            }
            let states = replay(&dynamics, grid, traj.state(0), &noises).unwrap();
            assert_eq!(states.len(), traj.states().len());
            for (a, b) in states.iter().zip(traj.states()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn constant_path_under_zero_drift_and_zero_noise() {
        let grid = TimeGrid::new(1.0, 7).unwrap();
        let dynamics = Dynamics::Em(DriftField::zero());
        let states = replay(&dynamics, grid, &[1.25], &vec![0.0; 7]).unwrap();
        for s in states {
            assert_eq!(s, 1.25);
        }
    }

    #[test]
    fn batch_prefix_is_stable_in_n_paths() {
        // path i depends only on (seed, i)
        let q0 = GaussianSpec::standard(1);
        let grid = TimeGrid::new(0.5, 20).unwrap();
        let small =
            simulate_batch(BatchInit::Gaussian(&q0), &Dynamics::forward(), grid, 3, 9).unwrap();
        let large =
            simulate_batch(BatchInit::Gaussian(&q0), &Dynamics::forward(), grid, 10, 9).unwrap();
        for i in 0..3 {
            assert_eq!(small.get(i).states(), large.get(i).states());
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let q0 = GaussianSpec::standard(2);
        let grid = TimeGrid::new(1.0, 30).unwrap();
        let here = simulate_batch(BatchInit::Gaussian(&q0), &Dynamics::forward(), grid, 64, 5)
            .unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| {
                simulate_batch(BatchInit::Gaussian(&q0), &Dynamics::forward(), grid, 64, 5)
                    .unwrap()
            });
        for (a, b) in here.iter().zip(single.iter()) {
            assert_eq!(a.states(), b.states());
            for k in 0..grid.steps() {
                assert_eq!(a.noise(k), b.noise(k));
            }
        }
    }

    #[test]
    fn terminal_matches_full_batch() {
        let q0 = GaussianSpec::scalar(2.0, 4.0).unwrap();
        let grid = TimeGrid::new(1.0, 25).unwrap();
        let dynamics = Dynamics::forward();
        let full =
            simulate_batch(BatchInit::Gaussian(&q0), &dynamics, grid, 40, 123).unwrap();
        let slim =
            simulate_terminal(BatchInit::Gaussian(&q0), &dynamics, grid, 40, 123).unwrap();
        assert_eq!(full.terminal_samples(), slim.terminal);
        assert_eq!(full.initial_samples(), slim.initial);
    }

    #[test]
    fn forward_batch_matches_marginal_at_every_node() {
        let q0 = GaussianSpec::scalar(2.0, 4.0).unwrap();
        let grid = TimeGrid::new(5.0, 100).unwrap();
        let n_paths = 10_000;
        let batch = simulate_batch(
            BatchInit::Gaussian(&q0),
            &Dynamics::forward(),
            grid,
            n_paths,
            31_415,
        )
        .unwrap();
        let mut column = vec![0.0; n_paths];
        for k in 0..=grid.steps() {
            for (i, traj) in batch.iter().enumerate() {
                column[i] = traj.state(k)[0];
            }
            let expect = forward_marginal(&q0, grid.time(k)).unwrap();
            let m = stats::mean(&column);
            let v = stats::sample_variance(&column);
            let se_mean = (expect.var()[0] / n_paths as f64).sqrt();
            let se_var = expect.var()[0] * (2.0 / n_paths as f64).sqrt();
            assert!(
                (m - expect.mean()[0]).abs() < 4.0 * se_mean,
                "k={k} mean {m} vs {}",
                expect.mean()[0]
            );
            assert!(
                (v - expect.var()[0]).abs() < 4.0 * se_var,
                "k={k} var {v} vs {}",
                expect.var()[0]
            );
        }
    }

    #[test]
    fn explicit_samples_init_roundtrip() {
        let grid = TimeGrid::new(0.1, 2).unwrap();
        let data = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let batch = simulate_batch(
            BatchInit::Samples {
                data: &data,
                dim: 2,
            },
            &Dynamics::forward(),
            grid,
            3,
            0,
        )
        .unwrap();
        assert_eq!(batch.initial_samples(), data);
        // wrong row count is rejected
        assert!(simulate_batch(
            BatchInit::Samples {
                data: &data,
                dim: 2
            },
            &Dynamics::forward(),
            grid,
            4,
            0,
        )
        .is_err());
    }

    #[test]
    fn dimension_mismatch_between_init_and_dynamics() {
        let q0 = GaussianSpec::standard(2);
        let score = ScoreModel::exact(GaussianSpec::standard(1));
        let grid = TimeGrid::new(1.0, 5).unwrap();
        let err = simulate_batch(
            BatchInit::Gaussian(&q0),
            &Dynamics::ddpm(score),
            grid,
            2,
            0,
        );
        assert!(err.is_err());
    }

    #[test]
    fn output_law_matches_sampled_reverse_moments() {
        let q0 = GaussianSpec::scalar(2.0, 4.0).unwrap();
        let grid = TimeGrid::new(2.0, 200).unwrap();
        let score = ScoreModel::exact(q0.clone());
        let q_t = forward_marginal(&q0, grid.horizon()).unwrap();
        for stepper in [StepperKind::Em, StepperKind::Ddpm] {
            let law = reverse_output_law(&score, &q_t, grid, stepper).unwrap();
            let dynamics = match stepper {
                StepperKind::Em => Dynamics::reverse_em(score.clone(), grid),
                StepperKind::Ddpm => Dynamics::ddpm(score.clone()),
            };
            let n = 20_000;
            let out =
                simulate_terminal(BatchInit::Gaussian(&q_t), &dynamics, grid, n, 808).unwrap();
            let m = stats::mean(&out.terminal);
            let v = stats::sample_variance(&out.terminal);
            let se_mean = (law.var()[0] / n as f64).sqrt();
            let se_var = law.var()[0] * (2.0 / n as f64).sqrt();
            assert!(
                (m - law.mean()[0]).abs() < 4.0 * se_mean,
                "{stepper:?} mean {m} vs {}",
                law.mean()[0]
            );
            assert!(
                (v - law.var()[0]).abs() < 4.0 * se_var,
                "{stepper:?} var {v} vs {}",
                law.var()[0]
            );
            // both samplers approximately recover q0
            assert!((law.mean()[0] - 2.0).abs() < 0.05);
            assert!((law.var()[0] - 4.0).abs() < 0.15);
        }
    }
}
