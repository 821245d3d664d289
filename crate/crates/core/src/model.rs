//! The GBM problem instance `dX = mu X dt + sigma X dW` and its closed-form
//! solution along a sampled Wiener path.

use crate::error::{Error, Result};

/// Drift, volatility and initial value of a geometric Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams {
    mu: f64,
    sigma: f64,
    x0: f64,
}

impl GbmParams {
    pub fn new(mu: f64, sigma: f64, x0: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::invalid(format!("mu must be finite, got {mu}")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::invalid(format!(
                "sigma must be finite and non-negative, got {sigma}"
            )));
        }
        if !x0.is_finite() {
            return Err(Error::invalid(format!("x0 must be finite, got {x0}")));
        }
        Ok(Self { mu, sigma, x0 })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Same dynamics, different starting value.
    pub fn with_x0(self, x0: f64) -> Result<Self> {
        Self::new(self.mu, self.sigma, x0)
    }

    /// Drift coefficient `f(x) = mu x`.
    pub fn drift(&self, x: f64) -> f64 {
        self.mu * x
    }

    /// Diffusion coefficient `g(x) = sigma x`.
    pub fn diffusion(&self, x: f64) -> f64 {
        self.sigma * x
    }

    /// `dg/dx`, used by the Milstein correction.
    pub fn diffusion_derivative(&self, _x: f64) -> f64 {
        self.sigma
    }
}

/// Uniform grid `t_i = i * dt` on `[0, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::invalid(format!(
                "t_end must be finite and positive, got {t_end}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::invalid("n_steps must be positive"));
        }
        Ok(Self {
            t_end,
            n_steps,
            dt: t_end / n_steps as f64,
        })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn is_even(&self) -> bool {
        self.n_steps.is_multiple_of(2)
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.t_end
        } else {
            i as f64 * self.dt
        }
    }

    /// Node times `t_0 .. t_N`; the last node is exactly `t_end`.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|i| self.time(i)).collect()
    }
}

/// Values of a solution at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid(format!(
                "trajectory has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::invalid("trajectory needs at least two nodes"));
        }
        if times[0] != 0.0 {
            return Err(Error::invalid("trajectory must start at t = 0"));
        }
        if times.windows(2).any(|w| w[1].is_nan() || w[1] <= w[0]) {
            return Err(Error::invalid(
                "trajectory times must be strictly increasing",
            ));
        }
        Ok(Self { times, values })
    }

    pub(crate) fn from_grid(grid: &TimeGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_steps() + 1);
        Self {
            times: grid.times(),
            values,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// `X(t_i) = x0 exp((mu - sigma^2/2) t_i + sigma W(t_i))` at every node.
///
/// `w_values` are the Wiener values at the grid nodes, starting with `W(0) = 0`.
pub fn exact_solution(params: &GbmParams, grid: &TimeGrid, w_values: &[f64]) -> Result<Trajectory> {
    if w_values.len() != grid.n_steps() + 1 {
        return Err(Error::invalid(format!(
            "expected {} Wiener values for {} steps, got {}",
            grid.n_steps() + 1,
            grid.n_steps(),
            w_values.len()
        )));
    }
    if w_values[0] != 0.0 {
        return Err(Error::invalid("Wiener path must start at W(0) = 0"));
    }
    let rate = params.mu() - 0.5 * params.sigma() * params.sigma();
    let values = w_values
        .iter()
        .enumerate()
        .map(|(i, &w)| params.x0() * (rate * grid.time(i) + params.sigma() * w).exp())
        .collect();
    Ok(Trajectory::from_grid(grid, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_solution_initial_condition() {
        let p = GbmParams::new(-1.0, 0.5, 1.0).unwrap();
        let g = TimeGrid::new(1.0, 1).unwrap();
        let traj = exact_solution(&p, &g, &[0.0, 0.0]).unwrap();
        assert_eq!(traj.values()[0], 1.0);
        // e^{-1.125}
        assert_relative_eq!(
            traj.values()[1],
            0.324_652_467_358_349_9,
            max_relative = 1e-12
        );
    }

    #[test]
    fn exact_solution_constant_when_degenerate() {
        let p = GbmParams::new(0.0, 0.0, 1.0).unwrap();
        let g = TimeGrid::new(2.0, 3).unwrap();
        let traj = exact_solution(&p, &g, &[0.0, 0.7, -1.2, 3.0]).unwrap();
        assert!(traj.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn exact_solution_rejects_length_mismatch() {
        let p = GbmParams::new(-1.0, 0.5, 1.0).unwrap();
        let g = TimeGrid::new(1.0, 4).unwrap();
        let err = exact_solution(&p, &g, &[0.0, 0.1, 0.2]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn exact_solution_deterministic_limit() {
        let p = GbmParams::new(-0.7, 0.0, 1.0).unwrap();
        let g = TimeGrid::new(1.0, 8).unwrap();
        let traj = exact_solution(&p, &g, &[0.0, 1.0, 2.0, -1.0, 0.3, 0.0, 4.0, 5.0, 6.0]).unwrap();
        for (t, v) in traj.times().iter().zip(traj.values()) {
            assert_relative_eq!(*v, (-0.7 * t).exp(), max_relative = 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn drift_and_diffusion_are_linear() {
        let p = GbmParams::new(-1.0, 0.5, 1.0).unwrap();
        assert_eq!(p.drift(2.0), -2.0);
        assert_eq!(p.diffusion(4.0), 2.0);
        let z = GbmParams::new(0.0, 0.5, 1.0).unwrap();
        assert_eq!(z.drift(123.4), 0.0);
    }

    #[test]
    fn params_validation() {
        assert!(GbmParams::new(f64::NAN, 0.5, 1.0).is_err());
        assert!(GbmParams::new(-1.0, -0.1, 1.0).is_err());
        assert!(GbmParams::new(-1.0, 0.5, f64::INFINITY).is_err());
        assert!(TimeGrid::new(0.0, 4).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn grid_times_end_exactly() {
        for n in [3, 7, 10, 255, 1000] {
            let g = TimeGrid::new(1.3, n).unwrap();
            let t = g.times();
            assert_eq!(t.len(), n + 1);
            assert_eq!(t[0], 0.0);
            assert_eq!(t[n], 1.3);
            assert!(t.windows(2).all(|w| w[1] > w[0]));
            assert_relative_eq!(g.dt() * n as f64, 1.3, max_relative = 2.0 * f64::EPSILON);
        }
    }

    #[test]
    fn trajectory_validation() {
        assert!(Trajectory::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Trajectory::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Trajectory::new(vec![0.5, 1.0], vec![1.0, 1.0]).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_ok());
    }
}
