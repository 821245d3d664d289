//! Shared fixtures for the criterion benchmarks.

use qpisde::{BrownianPath, GbmParams, TimeGrid};

/// The reference experiment: mu = -1, sigma = 0.5, x0 = 1 on [0, 1].
pub fn reference_params() -> GbmParams {
    GbmParams::new(-1.0, 0.5, 1.0).expect("reference parameters are valid")
}

pub fn grid_and_path(n_steps: usize, seed: u64) -> (TimeGrid, BrownianPath) {
    let grid = TimeGrid::new(1.0, n_steps).expect("valid grid");
    let path = BrownianPath::generate(seed, 1.0, n_steps).expect("valid path");
    (grid, path)
}
