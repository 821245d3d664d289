//! Mean-square stability of the schemes on the linear test equation.
//!
//! Every scheme applied to GBM is `X_{k+1} = M_k X_k` with i.i.d. random
//! multipliers, so `E|X_k|^2 -> 0` iff `E[M^2] < 1`. For the QPI scheme the
//! multiplier of one block is `beta_n` and two conditions are offered:
//!
//! * [`qpi_paper_lhs`]: the published sufficient condition, term by term as
//!   printed (absolute values on the cross term, unit weight on the
//!   two-step increment variance).
//! * [`qpi_exact_amplification`]: the exact second moment `E[beta_n^2]`.
//!
//! Both are written in terms of `h = mu dt`.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::output::fmt_f64;
use crate::schemes::MilsteinSign;

const SINGULAR_TOL: f64 = 8.0 * f64::EPSILON;

fn qpi_denominators(h: f64, condition: &'static str) -> Result<(f64, f64)> {
    let d_alpha = 1.0 - h + h * h / 3.0;
    let d_beta = 1.0 - h / 3.0;
    if d_alpha.abs() < SINGULAR_TOL || d_beta.abs() < SINGULAR_TOL {
        return Err(Error::SingularCondition {
            condition,
            mu_dt: h,
        });
    }
    Ok((d_alpha, d_beta))
}

/// Left-hand side of the published QPI mean-square stability inequality;
/// stable iff the value is below 1.
pub fn qpi_paper_lhs(mu: f64, sigma: f64, dt: f64) -> Result<f64> {
    let h = mu * dt;
    let (d_alpha, d_beta) = qpi_denominators(h, "qpi-paper")?;
    let den = (d_alpha * d_beta).powi(2);

    let det = 1.0 + 2.0 * h / 3.0 - h.powi(3) / 9.0;
    let two_step = 1.0 - h + 2.0 * h * h / 9.0;
    let one_step = (4.0 * h / 3.0) * (1.0 - h / 3.0);

    let numer = det.powi(2) + dt * (sigma * two_step).powi(2) + dt * (sigma * one_step).powi(2);
    let cross = dt * (sigma * sigma * one_step * two_step).abs();
    Ok(numer / den + cross / den)
}

/// Exact `E[beta_n^2]` for the QPI block multiplier.
///
/// Writing `alpha = a0 + a1 dWa + a2 dWb` and
/// `beta = A + B dWa + C dWb` with independent `dWa, dWb ~ N(0, dt)` gives
/// `E[beta^2] = A^2 + (B^2 + C^2) dt`.
pub fn qpi_exact_amplification(mu: f64, sigma: f64, dt: f64) -> Result<f64> {
    let h = mu * dt;
    let (d, d_beta) = qpi_denominators(h, "qpi-exact")?;

    let a0 = (1.0 - h * h / 6.0) / d;
    let a1 = sigma * (1.0 - 5.0 * h / 12.0) / d;
    let a2 = -sigma * h / (12.0 * d);

    let a = (1.0 + h / 3.0 + (4.0 * h / 3.0) * a0) / d_beta;
    let b = (sigma + (4.0 * h / 3.0) * a1) / d_beta;
    let c = (sigma + (4.0 * h / 3.0) * a2) / d_beta;
    Ok(a * a + (b * b + c * c) * dt)
}

/// `E[M^2] = (1 + sigma^2 dt) / (1 - mu dt)^2` for drift-implicit EM.
pub fn iem_amplification(mu: f64, sigma: f64, dt: f64) -> Result<f64> {
    let den = 1.0 - mu * dt;
    if den.abs() < SINGULAR_TOL {
        return Err(Error::SingularCondition {
            condition: "iem",
            mu_dt: mu * dt,
        });
    }
    Ok((1.0 + sigma * sigma * dt) / (den * den))
}

/// `E[M^2] = (1 + mu dt)^2 + sigma^2 dt + sigma^4 dt^2 / 2`.
///
/// The sign of the correction does not enter: its square is sign-free and
/// its covariance with `dW` vanishes because `E[dW (dW^2 - dt)] = 0`.
pub fn milstein_amplification(mu: f64, sigma: f64, dt: f64, _sign: MilsteinSign) -> f64 {
    let s2 = sigma * sigma;
    (1.0 + mu * dt).powi(2) + s2 * dt + 0.5 * s2 * s2 * dt * dt
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict {
    pub lhs: f64,
    pub stable: bool,
}

impl StabilityVerdict {
    pub fn from_lhs(lhs: f64) -> Self {
        Self {
            lhs,
            stable: lhs < 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityCondition {
    QpiPaper,
    QpiExact,
    Iem,
    Milstein(MilsteinSign),
}

impl StabilityCondition {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityCondition::QpiPaper => "qpi-paper",
            StabilityCondition::QpiExact => "qpi-exact",
            StabilityCondition::Iem => "iem",
            StabilityCondition::Milstein(_) => "milstein",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            StabilityCondition::QpiPaper => "QPI (published condition)",
            StabilityCondition::QpiExact => "QPI (exact second moment)",
            StabilityCondition::Iem => "Implicit EM",
            StabilityCondition::Milstein(_) => "Milstein",
        }
    }

    pub fn evaluate(&self, mu: f64, sigma: f64, dt: f64) -> Result<f64> {
        match *self {
            StabilityCondition::QpiPaper => qpi_paper_lhs(mu, sigma, dt),
            StabilityCondition::QpiExact => qpi_exact_amplification(mu, sigma, dt),
            StabilityCondition::Iem => iem_amplification(mu, sigma, dt),
            StabilityCondition::Milstein(sign) => Ok(milstein_amplification(mu, sigma, dt, sign)),
        }
    }

    pub fn verdict(&self, mu: f64, sigma: f64, dt: f64) -> Result<StabilityVerdict> {
        self.evaluate(mu, sigma, dt).map(StabilityVerdict::from_lhs)
    }
}

impl fmt::Display for StabilityCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StabilityCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qpi-paper" => Ok(StabilityCondition::QpiPaper),
            "qpi-exact" => Ok(StabilityCondition::QpiExact),
            "iem" => Ok(StabilityCondition::Iem),
            "milstein" => Ok(StabilityCondition::Milstein(MilsteinSign::Standard)),
            other => Err(Error::invalid(format!(
                "unknown stability condition '{other}' (expected qpi-paper, qpi-exact, iem or milstein)"
            ))),
        }
    }
}

/// Stability verdicts over a `(mu, dt)` lattice at fixed `sigma`.
///
/// Cells are stored row-major with `mu` as the slow index. Cells where the
/// condition is singular hold `lhs = inf` and are unstable.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub condition: StabilityCondition,
    pub sigma: f64,
    pub mu_axis: Vec<f64>,
    pub dt_axis: Vec<f64>,
    lhs: Vec<f64>,
}

impl RegionGrid {
    fn index(&self, i: usize, j: usize) -> usize {
        i * self.dt_axis.len() + j
    }

    pub fn lhs(&self, i: usize, j: usize) -> f64 {
        self.lhs[self.index(i, j)]
    }

    pub fn is_stable(&self, i: usize, j: usize) -> bool {
        self.lhs(i, j) < 1.0
    }

    pub fn is_singular(&self, i: usize, j: usize) -> bool {
        self.lhs(i, j).is_infinite()
    }

    pub fn n_cells(&self) -> usize {
        self.lhs.len()
    }

    pub fn stable_fraction(&self) -> f64 {
        self.lhs.iter().filter(|&&v| v < 1.0).count() as f64 / self.lhs.len() as f64
    }

    /// CSV with header `mu,dt,lhs,stable`, one row per cell.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "mu,dt,lhs,stable")?;
        for (i, &mu) in self.mu_axis.iter().enumerate() {
            for (j, &dt) in self.dt_axis.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_f64(mu),
                    fmt_f64(dt),
                    fmt_f64(self.lhs(i, j)),
                    u8::from(self.is_stable(i, j))
                )?;
            }
        }
        Ok(())
    }
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| if k == n - 1 { hi } else { lo + k as f64 * step })
        .collect()
}

pub fn region_scan(
    condition: StabilityCondition,
    sigma: f64,
    mu_range: (f64, f64),
    dt_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<RegionGrid> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid(format!(
            "sigma must be non-negative, got {sigma}"
        )));
    }
    let (mu_lo, mu_hi) = mu_range;
    let (dt_lo, dt_hi) = dt_range;
    if !(mu_lo.is_finite() && mu_hi.is_finite() && mu_lo < mu_hi) {
        return Err(Error::invalid(format!("invalid mu range {mu_lo}:{mu_hi}")));
    }
    if !(dt_lo.is_finite() && dt_hi.is_finite() && 0.0 < dt_lo && dt_lo < dt_hi) {
        return Err(Error::invalid(format!(
            "invalid dt range {dt_lo}:{dt_hi} (need 0 < lo < hi)"
        )));
    }
    if resolution.0 < 2 || resolution.1 < 2 {
        return Err(Error::invalid(
            "grid resolution must be at least 2 per axis",
        ));
    }

    let mu_axis = linspace(mu_lo, mu_hi, resolution.0);
    let dt_axis = linspace(dt_lo, dt_hi, resolution.1);
    let lhs = mu_axis
        .par_iter()
        .flat_map_iter(|&mu| {
            dt_axis.iter().map(move |&dt| {
                condition
                    .evaluate(mu, sigma, dt)
                    .ok()
                    .filter(|v| !v.is_nan())
                    .unwrap_or(f64::INFINITY)
            })
        })
        .collect();
    Ok(RegionGrid {
        condition,
        sigma,
        mu_axis,
        dt_axis,
        lhs,
    })
}
