use crate::grid::TimeGrid;

/// One sampled discrete path: states `x_0 .. x_{Nh}` ((N+1) x d, row-major)
/// together with the standard-normal draws that generated it (N x d).
///
/// Replaying the generating dynamics from `state(0)` with the stored noises
/// reproduces the states bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    dim: usize,
    states: Vec<f64>,
    noises: Vec<f64>,
}

impl Trajectory {
    pub(crate) fn from_parts(
        grid: TimeGrid,
        dim: usize,
        states: Vec<f64>,
        noises: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(states.len(), (grid.steps() + 1) * dim);
        debug_assert_eq!(noises.len(), grid.steps() * dim);
        Trajectory {
            grid,
            dim,
            states,
            noises,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// State at grid node `k`, for `k` in `0..=N`.
    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    /// Noise vector consumed by step `k`, for `k` in `0..N`.
    pub fn noise(&self, k: usize) -> &[f64] {
        &self.noises[k * self.dim..(k + 1) * self.dim]
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn terminal(&self) -> &[f64] {
        self.state(self.grid.steps())
    }
}

/// A batch of trajectories sharing one grid. Path `i` is a pure function of
/// `(master_seed, i)`, independent of simulation order or thread count.
#[derive(Debug, Clone)]
pub struct PathBatch {
    grid: TimeGrid,
    master_seed: u64,
    trajectories: Vec<Trajectory>,
}

impl PathBatch {
    pub(crate) fn new(grid: TimeGrid, master_seed: u64, trajectories: Vec<Trajectory>) -> Self {
        PathBatch {
            grid,
            master_seed,
            trajectories,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.trajectories.first().map_or(0, Trajectory::dim)
    }

    pub fn get(&self, i: usize) -> &Trajectory {
        &self.trajectories[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Trajectory> {
        self.trajectories.iter()
    }

    /// Terminal states flattened into an n x d row-major array.
    pub fn terminal_samples(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * self.dim());
        for t in &self.trajectories {
            out.extend_from_slice(t.terminal());
        }
        out
    }

    /// Initial states flattened into an n x d row-major array.
    pub fn initial_samples(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * self.dim());
        for t in &self.trajectories {
            out.extend_from_slice(t.state(0));
        }
        out
    }
}
