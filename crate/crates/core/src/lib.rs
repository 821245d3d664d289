//! Numerical integration of geometric Brownian motion with a two-step
//! quadratic-interpolation (QPI) scheme.
//!
//! The drift integral over a double step `[t_{2n}, t_{2n+2}]` and a single
//! step `[t_{2n}, t_{2n+1}]` is replaced by quadratic Lagrange interpolation,
//! which turns each block into a 2x2 linear system for the two unknown
//! values. For GBM the system has the closed-form solution
//!
//! ```text
//! X_{2n+1} = alpha_n * X_{2n}
//! X_{2n+2} = beta_n  * X_{2n}
//! ```
//!
//! Alongside the QPI scheme the crate ships the usual reference schemes
//! (explicit and drift-implicit Euler–Maruyama, Milstein), mean-square
//! stability conditions, and a strong-convergence harness that drives every
//! scheme and every resolution from one shared fine Brownian path.

pub mod analysis;
pub mod brownian;
pub mod error;
pub mod model;
pub mod output;
pub mod schemes;
pub mod stability;

pub use analysis::{
    convergence_study, error_norms, estimate_order, local_error_slope, local_error_study,
    loglog_slope, terminal_second_moment, ConvergenceConfig, ConvergenceTable, ErrorNorms,
    ErrorReport, LocalErrorPoint, Norm,
};
pub use brownian::{path_seed, BrownianPath, NormalStream};
pub use error::{Error, Result};
pub use model::{exact_solution, GbmParams, TimeGrid, Trajectory};
pub use schemes::{
    em_step, implicit_em_step, integrate, integrate_with_sign, milstein_step, qpi_block_coeffs,
    qpi_block_solve_oracle, MilsteinSign, QpiBlockCoeffs, SchemeId,
};
pub use stability::{region_scan, RegionGrid, StabilityCondition, StabilityVerdict};
