//! Time-stepping schemes for GBM.
//!
//! One-step schemes (`em`, `iem`, `milstein`) advance a single node. The QPI
//! scheme advances a block of two nodes at once: given `X_{2n}` and the two
//! Wiener increments `dWa = W(t_{2n+1}) - W(t_{2n})`,
//! `dWb = W(t_{2n+2}) - W(t_{2n+1})` it produces
//!
//! ```text
//! X_{2n+1} = alpha * X_{2n},   X_{2n+2} = beta * X_{2n}
//! ```
//!
//! with, for `h = mu dt` and `S = dWa + dWb`,
//!
//! ```text
//! alpha = [1 - h^2/6 - sigma (h/12) S + sigma (1 - h/3) dWa] / [1 - h + h^2/3]
//! beta  = [1 + h/3 + (4h/3) alpha + sigma S] / [1 - h/3]
//! ```
//!
//! These are the solution of the two block equations obtained by integrating
//! the drift with quadratic interpolation over `[t_{2n}, t_{2n+2}]` (Simpson
//! weights `dt/3, 4dt/3, dt/3`) and over `[t_{2n}, t_{2n+1}]` (weights
//! `dt/6, 2dt/3, dt/6` on the half-step midpoint), the midpoint being
//! eliminated through the first interpolant (`3/8, 3/4, -1/8`). The diffusion
//! integrand is frozen at `X_{2n}` over the whole block.

use std::fmt;
use std::str::FromStr;

use crate::brownian::BrownianPath;
use crate::error::{Error, Result};
use crate::model::{GbmParams, TimeGrid, Trajectory};

const SINGULAR_TOL: f64 = 8.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    Qpi,
    EulerMaruyama,
    ImplicitEm,
    Milstein,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [
        SchemeId::Qpi,
        SchemeId::EulerMaruyama,
        SchemeId::ImplicitEm,
        SchemeId::Milstein,
    ];

    /// Short name used on the command line and in CSV output.
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeId::Qpi => "qpi",
            SchemeId::EulerMaruyama => "em",
            SchemeId::ImplicitEm => "iem",
            SchemeId::Milstein => "milstein",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SchemeId::Qpi => "QPI",
            SchemeId::EulerMaruyama => "Euler-Maruyama",
            SchemeId::ImplicitEm => "Implicit EM",
            SchemeId::Milstein => "Milstein",
        }
    }

    pub fn needs_even_steps(&self) -> bool {
        matches!(self, SchemeId::Qpi)
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qpi" => Ok(SchemeId::Qpi),
            "em" => Ok(SchemeId::EulerMaruyama),
            "iem" => Ok(SchemeId::ImplicitEm),
            "milstein" => Ok(SchemeId::Milstein),
            other => Err(Error::invalid(format!(
                "unknown scheme '{other}' (expected qpi, em, iem or milstein)"
            ))),
        }
    }
}

/// Sign in front of the Milstein correction `(1/2) g g' (dW^2 - dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MilsteinSign {
    /// `+1/2`, the usual Itô–Taylor truncation.
    #[default]
    Standard,
    /// `-1/2`, as printed in some references.
    Paper,
}

impl MilsteinSign {
    pub fn as_str(&self) -> &'static str {
        match self {
            MilsteinSign::Standard => "standard",
            MilsteinSign::Paper => "paper",
        }
    }

    fn factor(&self) -> f64 {
        match self {
            MilsteinSign::Standard => 0.5,
            MilsteinSign::Paper => -0.5,
        }
    }
}

impl fmt::Display for MilsteinSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MilsteinSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" => Ok(MilsteinSign::Standard),
            "paper" => Ok(MilsteinSign::Paper),
            other => Err(Error::invalid(format!(
                "unknown Milstein sign convention '{other}' (expected standard or paper)"
            ))),
        }
    }
}

/// Block multipliers `X_{2n+1} = alpha X_{2n}`, `X_{2n+2} = beta X_{2n}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpiBlockCoeffs {
    pub alpha: f64,
    pub beta: f64,
}

pub fn em_step(params: &GbmParams, dt: f64, x: f64, dw: f64) -> f64 {
    x + params.drift(x) * dt + params.diffusion(x) * dw
}

/// Drift-implicit Euler–Maruyama: solves `y = x + mu y dt + sigma x dW`.
pub fn implicit_em_step(params: &GbmParams, dt: f64, x: f64, dw: f64) -> Result<f64> {
    let den = 1.0 - params.mu() * dt;
    if den.abs() < SINGULAR_TOL {
        return Err(Error::SingularStep {
            scheme: "implicit EM",
            mu_dt: params.mu() * dt,
        });
    }
    Ok((x + params.diffusion(x) * dw) / den)
}

pub fn milstein_step(params: &GbmParams, dt: f64, x: f64, dw: f64, sign: MilsteinSign) -> f64 {
    let g = params.diffusion(x);
    x + params.drift(x) * dt
        + g * dw
        + sign.factor() * g * params.diffusion_derivative(x) * (dw * dw - dt)
}

/// Closed-form QPI block multipliers.
pub fn qpi_block_coeffs(params: &GbmParams, dt: f64, dwa: f64, dwb: f64) -> Result<QpiBlockCoeffs> {
    let h = params.mu() * dt;
    let sigma = params.sigma();
    let two_step = dwa + dwb;

    let den_alpha = 1.0 - h + h * h / 3.0;
    let den_beta = 1.0 - h / 3.0;
    if den_alpha.abs() < SINGULAR_TOL || den_beta.abs() < SINGULAR_TOL {
        return Err(Error::SingularBlock { mu_dt: h });
    }

    let alpha = (1.0 - h * h / 6.0 - sigma * (h / 12.0) * two_step + sigma * (1.0 - h / 3.0) * dwa)
        / den_alpha;
    let beta = (1.0 + h / 3.0 + (4.0 * h / 3.0) * alpha + sigma * two_step) / den_beta;
    Ok(QpiBlockCoeffs { alpha, beta })
}

/// Lagrange basis polynomials on three nodes, evaluated at `t`.
fn lagrange_basis(nodes: [f64; 3], t: f64) -> [f64; 3] {
    let mut out = [1.0; 3];
    for (j, l) in out.iter_mut().enumerate() {
        for (m, &tm) in nodes.iter().enumerate() {
            if m != j {
                *l *= (t - tm) / (nodes[j] - tm);
            }
        }
    }
    out
}

/// `int_a^b l_j(t) dt` for the quadratic Lagrange basis, by 3-point
/// Gauss–Legendre (exact for polynomials up to degree 5).
fn lagrange_weights(nodes: [f64; 3], a: f64, b: f64) -> [f64; 3] {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let r = (0.6f64).sqrt();
    let gauss = [(-r, 5.0 / 9.0), (0.0, 8.0 / 9.0), (r, 5.0 / 9.0)];
    let mut w = [0.0; 3];
    for (x, gw) in gauss {
        let l = lagrange_basis(nodes, mid + half * x);
        for j in 0..3 {
            w[j] += half * gw * l[j];
        }
    }
    w
}

/// Reference solution of the QPI block: assembles the two integral
/// equations from the interpolating polynomials and solves the resulting
/// 2x2 system for `(X_{2n+1}, X_{2n+2})` with `X_{2n} = 1` by Gaussian
/// elimination with partial pivoting.
pub fn qpi_block_solve_oracle(
    params: &GbmParams,
    dt: f64,
    dwa: f64,
    dwb: f64,
) -> Result<QpiBlockCoeffs> {
    let mu = params.mu();
    let sigma = params.sigma();

    // Work on the block [0, 2dt]; the scheme is translation invariant.
    let full = [0.0, dt, 2.0 * dt];
    let half = [0.0, 0.5 * dt, dt];
    let w_full = lagrange_weights(full, 0.0, 2.0 * dt);
    let w_half = lagrange_weights(half, 0.0, dt);
    let mid = lagrange_basis(full, 0.5 * dt);

    // Unknowns u = (X1, X2); X0 = 1.
    // Double step: X2 - 1 = mu (w0 + w1 X1 + w2 X2) + sigma (dWa + dWb)
    let row_full = [-mu * w_full[1], 1.0 - mu * w_full[2]];
    let rhs_full = 1.0 + mu * w_full[0] + sigma * (dwa + dwb);

    // Single step with the midpoint X_{1/2} = m0 + m1 X1 + m2 X2:
    // X1 - 1 = mu (v0 + v1 X_{1/2} + v2 X1) + sigma dWa
    let row_half = [
        1.0 - mu * (w_half[2] + w_half[1] * mid[1]),
        -mu * w_half[1] * mid[2],
    ];
    let rhs_half = 1.0 + mu * (w_half[0] + w_half[1] * mid[0]) + sigma * dwa;

    let (x1, x2) = solve_2x2([row_full, row_half], [rhs_full, rhs_half])
        .ok_or(Error::SingularBlock { mu_dt: mu * dt })?;
    Ok(QpiBlockCoeffs {
        alpha: x1,
        beta: x2,
    })
}

fn solve_2x2(mut m: [[f64; 2]; 2], mut r: [f64; 2]) -> Option<(f64, f64)> {
    let scale = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    if m[1][0].abs() > m[0][0].abs() {
        m.swap(0, 1);
        r.swap(0, 1);
    }
    if m[0][0].abs() <= 1e-14 * scale {
        return None;
    }
    let f = m[1][0] / m[0][0];
    let m11 = m[1][1] - f * m[0][1];
    let r1 = r[1] - f * r[0];
    if m11.abs() <= 1e-14 * scale {
        return None;
    }
    let x1 = r1 / m11;
    let x0 = (r[0] - m[0][1] * x1) / m[0][0];
    Some((x0, x1))
}

/// Integrates with the standard Milstein sign.
pub fn integrate(
    scheme: SchemeId,
    params: &GbmParams,
    grid: &TimeGrid,
    path: &BrownianPath,
) -> Result<Trajectory> {
    integrate_with_sign(scheme, MilsteinSign::Standard, params, grid, path)
}

/// Runs `scheme` over `grid` driven by `path`, which must already be at the
/// grid's resolution.
pub fn integrate_with_sign(
    scheme: SchemeId,
    sign: MilsteinSign,
    params: &GbmParams,
    grid: &TimeGrid,
    path: &BrownianPath,
) -> Result<Trajectory> {
    let n = grid.n_steps();
    if path.n_fine() != n {
        return Err(Error::invalid(format!(
            "path has {} increments but the grid has {n} steps",
            path.n_fine()
        )));
    }
    if (path.t_end() - grid.t_end()).abs() > 1e-12 * grid.t_end() {
        return Err(Error::invalid(format!(
            "path horizon {} does not match grid horizon {}",
            path.t_end(),
            grid.t_end()
        )));
    }
    if scheme.needs_even_steps() && !grid.is_even() {
        return Err(Error::invalid(format!("N must be even for qpi (got {n})")));
    }

    let dt = grid.dt();
    let dw = path.increments();
    let mut values = Vec::with_capacity(n + 1);
    values.push(params.x0());

    match scheme {
        SchemeId::Qpi => {
            for block in dw.chunks_exact(2) {
                let x = values[values.len() - 1];
                let c = qpi_block_coeffs(params, dt, block[0], block[1])?;
                values.push(c.alpha * x);
                values.push(c.beta * x);
            }
        }
        SchemeId::EulerMaruyama => {
            for &d in dw {
                let x = values[values.len() - 1];
                values.push(em_step(params, dt, x, d));
            }
        }
        SchemeId::ImplicitEm => {
            for &d in dw {
                let x = values[values.len() - 1];
                values.push(implicit_em_step(params, dt, x, d)?);
            }
        }
        SchemeId::Milstein => {
            for &d in dw {
                let x = values[values.len() - 1];
                values.push(milstein_step(params, dt, x, d, sign));
            }
        }
    }
    Ok(Trajectory::from_grid(grid, values))
}
