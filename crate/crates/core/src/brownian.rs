//! Seeded Wiener paths.
//!
//! A path is drawn once at the finest resolution of an experiment and
//! coarsened for every other grid, so all schemes and all step counts see the
//! same underlying randomness. The path keeps its node values `W(t_i)` as the
//! canonical representation: coarsening is a subsampling of nodes and is
//! therefore exact, and the coarse increments are differences of shared nodes.
//!
//! Normal variates come from the Box–Muller transform applied to a ChaCha8
//! uniform stream. Both outputs of each transform are used, in the order
//! `(r cos θ, r sin θ)`. The mapping from seed to increments is fixed; a
//! change to it invalidates every golden value in the test suite.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::output::fmt_f64;

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th independent stream under `master`.
pub fn path_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

/// Standard normal variates from a seeded ChaCha8 stream via Box–Muller.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn next_normal(&mut self, std_dev: f64) -> f64 {
        std_dev * self.next_standard()
    }
}

/// A Wiener path sampled on a uniform grid over `[0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    seed: u64,
    t_end: f64,
    increments: Vec<f64>,
    nodes: Vec<f64>,
}

impl BrownianPath {
    /// Draws `n_fine` independent `N(0, t_end / n_fine)` increments.
    pub fn generate(seed: u64, t_end: f64, n_fine: usize) -> Result<Self> {
        if n_fine == 0 {
            return Err(Error::invalid("n_fine must be at least 1"));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::invalid(format!(
                "t_end must be finite and positive, got {t_end}"
            )));
        }
        let std_dev = (t_end / n_fine as f64).sqrt();
        let mut normals = NormalStream::new(seed);
        let increments = (0..n_fine).map(|_| normals.next_normal(std_dev)).collect();
        let mut path = Self::from_increments(t_end, increments)?;
        path.seed = seed;
        Ok(path)
    }

    /// Wraps caller-provided increments. An empty increment list gives the
    /// degenerate single-node path.
    pub fn from_increments(t_end: f64, increments: Vec<f64>) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::invalid(format!(
                "t_end must be finite and positive, got {t_end}"
            )));
        }
        let mut nodes = Vec::with_capacity(increments.len() + 1);
        let mut w = 0.0;
        nodes.push(w);
        for &dw in &increments {
            w += dw;
            nodes.push(w);
        }
        Ok(Self {
            seed: 0,
            t_end,
            increments,
            nodes,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_fine(&self) -> usize {
        self.increments.len()
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_fine() as f64
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `W(t_0) = 0, W(t_1), ..., W(t_end)`.
    pub fn node_values(&self) -> &[f64] {
        &self.nodes
    }

    /// Path on the grid with `n_fine / factor` steps. Coarse nodes are the
    /// fine nodes at multiples of `factor`.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.n_fine().is_multiple_of(factor) {
            return Err(Error::invalid(format!(
                "coarsening factor {factor} does not divide {} steps",
                self.n_fine()
            )));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let nodes: Vec<f64> = self.nodes.iter().step_by(factor).copied().collect();
        let increments = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self {
            seed: self.seed,
            t_end: self.t_end,
            increments,
            nodes,
        })
    }

    /// Coarsens to exactly `n_steps` steps.
    pub fn restrict_to(&self, n_steps: usize) -> Result<Self> {
        if n_steps == 0 || !self.n_fine().is_multiple_of(n_steps) {
            return Err(Error::invalid(format!(
                "{n_steps} steps is not a divisor of the path resolution {}",
                self.n_fine()
            )));
        }
        self.coarsen(self.n_fine() / n_steps)
    }

    /// CSV dump with header `t,w`, one row per node.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,w")?;
        let n = self.n_fine();
        for (i, w) in self.nodes.iter().enumerate() {
            let t = if i == n {
                self.t_end
            } else {
                i as f64 * self.t_end / n as f64
            };
            writeln!(out, "{},{}", fmt_f64(t), fmt_f64(*w))?;
        }
        Ok(())
    }
}
