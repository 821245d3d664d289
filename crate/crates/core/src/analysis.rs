//! Strong-error measurement.
//!
//! Errors are measured pathwise against the closed-form GBM solution on the
//! same Wiener path. A convergence study draws each path once at the finest
//! resolution and restricts it to every coarser grid, so differences between
//! rows of a table reflect the step size and not the noise.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::brownian::{path_seed, BrownianPath, NormalStream};
use crate::error::{Error, Result};
use crate::model::{exact_solution, GbmParams, TimeGrid, Trajectory};
use crate::output::fmt_f64;
use crate::schemes::{integrate_with_sign, qpi_block_coeffs, MilsteinSign, SchemeId};

/// Samples per independent stream in the Monte Carlo loops.
const CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::L1, Norm::L2, Norm::Linf];

    pub fn as_str(&self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

impl ErrorNorms {
    pub fn get(&self, norm: Norm) -> f64 {
        match norm {
            Norm::L1 => self.l1,
            Norm::L2 => self.l2,
            Norm::Linf => self.linf,
        }
    }
}

/// Discrete error norms over the nodes `i = 0..=N`.
///
/// The sums run over all `N + 1` nodes and are normalized by `N`:
///
/// ```text
/// l1   = (1/N) sum |e_i|
/// l2   = sqrt((1/N) sum |e_i|^2)
/// linf = max |e_i|
/// ```
pub fn error_norms(exact: &Trajectory, approx: &Trajectory) -> Result<ErrorNorms> {
    if exact.times() != approx.times() {
        return Err(Error::invalid("trajectories are not on the same time grid"));
    }
    let n = exact.n_steps() as f64;
    let mut sum_abs = 0.0;
    let mut sum_sq = 0.0;
    let mut max_abs = 0.0f64;
    for (x, y) in exact.values().iter().zip(approx.values()) {
        let e = (x - y).abs();
        sum_abs += e;
        sum_sq += e * e;
        max_abs = max_abs.max(e);
    }
    Ok(ErrorNorms {
        l1: sum_abs / n,
        l2: (sum_sq / n).sqrt(),
        linf: max_abs,
    })
}

/// Mean errors of one scheme at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub scheme: SchemeId,
    pub n_steps: usize,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub n_paths: usize,
}

impl ErrorReport {
    pub fn get(&self, norm: Norm) -> f64 {
        match norm {
            Norm::L1 => self.l1,
            Norm::L2 => self.l2,
            Norm::Linf => self.linf,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    pub schemes: Vec<SchemeId>,
    pub params: GbmParams,
    pub t_end: f64,
    pub n_list: Vec<usize>,
    pub n_paths: usize,
    pub master_seed: u64,
    pub milstein_sign: MilsteinSign,
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::invalid("no schemes selected"));
        }
        if self.n_list.is_empty() {
            return Err(Error::invalid("empty list of step counts"));
        }
        if self.n_paths == 0 {
            return Err(Error::invalid("need at least one path"));
        }
        if self.n_list.contains(&0) {
            return Err(Error::invalid("step counts must be positive"));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("step counts must be strictly ascending"));
        }
        let finest = *self.n_list.last().unwrap();
        if let Some(n) = self.n_list.iter().find(|&&n| !finest.is_multiple_of(n)) {
            return Err(Error::invalid(format!(
                "step count {n} does not divide the finest resolution {finest}"
            )));
        }
        if self.schemes.iter().any(SchemeId::needs_even_steps) {
            if let Some(n) = self.n_list.iter().find(|&&n| n % 2 != 0) {
                return Err(Error::invalid(format!("N must be even for qpi (got {n})")));
            }
        }
        TimeGrid::new(self.t_end, finest)?;
        Ok(())
    }
}

/// Rows of a convergence study, grouped by scheme in the configured order
/// and ascending in `n_steps` within a scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ErrorReport>,
    pub t_end: f64,
}

impl ConvergenceTable {
    pub fn schemes(&self) -> Vec<SchemeId> {
        let mut out: Vec<SchemeId> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.scheme) {
                out.push(r.scheme);
            }
        }
        out
    }

    pub fn rows_for(&self, scheme: SchemeId) -> impl Iterator<Item = &ErrorReport> {
        self.rows.iter().filter(move |r| r.scheme == scheme)
    }

    pub fn errors(&self, scheme: SchemeId, norm: Norm) -> Vec<f64> {
        self.rows_for(scheme).map(|r| r.get(norm)).collect()
    }

    pub fn get(&self, scheme: SchemeId, n_steps: usize) -> Option<&ErrorReport> {
        self.rows_for(scheme).find(|r| r.n_steps == n_steps)
    }

    /// Fitted strong order of `scheme` in `norm`.
    pub fn estimated_order(&self, scheme: SchemeId, norm: Norm) -> Result<f64> {
        let ns: Vec<usize> = self.rows_for(scheme).map(|r| r.n_steps).collect();
        estimate_order(&ns, &self.errors(scheme, norm))
    }

    /// Long format: `scheme,n,l1,l2,linf,n_paths`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "scheme,n,l1,l2,linf,n_paths")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.scheme,
                r.n_steps,
                fmt_f64(r.l1),
                fmt_f64(r.l2),
                fmt_f64(r.linf),
                r.n_paths
            )?;
        }
        Ok(())
    }

    /// Wide format for a single norm: `n,<scheme>,<scheme>,...`.
    pub fn write_norm_csv<W: Write>(&self, norm: Norm, mut out: W) -> io::Result<()> {
        let schemes = self.schemes();
        let header: Vec<&str> = schemes.iter().map(|s| s.as_str()).collect();
        writeln!(out, "n,{}", header.join(","))?;
        let ns: Vec<usize> = self.rows_for(schemes[0]).map(|r| r.n_steps).collect();
        for n in ns {
            let cells: Vec<String> = schemes
                .iter()
                .map(|&s| {
                    self.get(s, n)
                        .map(|r| fmt_f64(r.get(norm)))
                        .unwrap_or_default()
                })
                .collect();
            writeln!(out, "{},{}", n, cells.join(","))?;
        }
        Ok(())
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Errors of one path for every (scheme, n) pair, scheme-major.
fn path_errors(cfg: &ConvergenceConfig, index: u64) -> Result<Vec<ErrorNorms>> {
    let finest = *cfg.n_list.last().unwrap();
    let fine = BrownianPath::generate(path_seed(cfg.master_seed, index), cfg.t_end, finest)?;
    let mut per_n = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let grid = TimeGrid::new(cfg.t_end, n)?;
        let path = fine.restrict_to(n)?;
        let exact = exact_solution(&cfg.params, &grid, path.node_values())?;
        let mut row = Vec::with_capacity(cfg.schemes.len());
        for &scheme in &cfg.schemes {
            let approx = integrate_with_sign(scheme, cfg.milstein_sign, &cfg.params, &grid, &path)?;
            row.push(error_norms(&exact, &approx)?);
        }
        per_n.push(row);
    }
    let mut out = Vec::with_capacity(cfg.schemes.len() * cfg.n_list.len());
    for s in 0..cfg.schemes.len() {
        for row in &per_n {
            out.push(row[s]);
        }
    }
    Ok(out)
}

/// Mean pathwise error norms of every scheme at every step count.
///
/// Path `k` is drawn from the stream `path_seed(master_seed, k)` at the
/// finest step count and restricted to each coarser one. Paths run in
/// parallel; the reduction is sequential in path order, so the result does
/// not depend on the number of worker threads.
pub fn convergence_study(cfg: &ConvergenceConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    let per_path: Vec<Vec<ErrorNorms>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|k| path_errors(cfg, k))
        .collect::<Result<_>>()?;

    let cells = cfg.schemes.len() * cfg.n_list.len();
    let mut sums = vec![[CompensatedSum::default(); 3]; cells];
    for errs in &per_path {
        for (acc, e) in sums.iter_mut().zip(errs) {
            acc[0].add(e.l1);
            acc[1].add(e.l2);
            acc[2].add(e.linf);
        }
    }

    let count = cfg.n_paths as f64;
    let mut rows = Vec::with_capacity(cells);
    for (s, &scheme) in cfg.schemes.iter().enumerate() {
        for (j, &n) in cfg.n_list.iter().enumerate() {
            let acc = &sums[s * cfg.n_list.len() + j];
            rows.push(ErrorReport {
                scheme,
                n_steps: n,
                l1: acc[0].value() / count,
                l2: acc[1].value() / count,
                linf: acc[2].value() / count,
                n_paths: cfg.n_paths,
            });
        }
    }
    Ok(ConvergenceTable {
        rows,
        t_end: cfg.t_end,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(
            "slope fit needs equally many x and y values",
        ));
    }
    if xs.len() < 2 {
        return Err(Error::invalid("slope fit needs at least two points"));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("slope fit needs finite positive values"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid(
            "slope fit needs at least two distinct x values",
        ));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Fitted order `p` in `error ~ dt^p` with `dt = T / N`. The horizon
/// cancels in the slope, so only the step counts are needed.
pub fn estimate_order(n_list: &[usize], errors: &[f64]) -> Result<f64> {
    if let Some(e) = errors.iter().find(|&&e| e.is_nan() || e <= 0.0) {
        return Err(Error::invalid(format!("errors must be positive, got {e}")));
    }
    let dts: Vec<f64> = n_list.iter().map(|&n| 1.0 / n as f64).collect();
    loglog_slope(&dts, errors)
}

/// Mean-square one-block error of the QPI scheme at one step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalErrorPoint {
    pub dt: f64,
    /// `E|X(2dt) - beta X0|^2`.
    pub mean_sq_end: f64,
    /// `E|X(dt) - alpha X0|^2`.
    pub mean_sq_mid: f64,
}

/// One QPI block started from the exact state `x0`, compared with the exact
/// solution at `dt` and `2 dt` on the same Wiener increments.
///
/// Every step size reuses the same standard-normal stream (scaled by
/// `sqrt(dt)`), so the estimates along `dt_list` share their randomness.
pub fn local_error_study(
    params: &GbmParams,
    dt_list: &[f64],
    n_samples: usize,
    master_seed: u64,
) -> Result<Vec<LocalErrorPoint>> {
    if dt_list.is_empty() {
        return Err(Error::invalid("empty dt list"));
    }
    if let Some(dt) = dt_list.iter().find(|&&dt| !(dt > 0.0 && dt.is_finite())) {
        return Err(Error::invalid(format!(
            "step sizes must be positive, got {dt}"
        )));
    }
    if n_samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    dt_list
        .iter()
        .map(|&dt| local_error_at(params, dt, n_samples, master_seed))
        .collect()
}

fn local_error_at(
    params: &GbmParams,
    dt: f64,
    n_samples: usize,
    master_seed: u64,
) -> Result<LocalErrorPoint> {
    let n_chunks = n_samples.div_ceil(CHUNK);
    let sqrt_dt = dt.sqrt();
    let x0 = params.x0();
    let rate = params.mu() - 0.5 * params.sigma() * params.sigma();

    let partial: Vec<(f64, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(n_samples - c * CHUNK);
            let mut normals = NormalStream::new(path_seed(master_seed, c as u64));
            let mut end = CompensatedSum::default();
            let mut mid = CompensatedSum::default();
            for _ in 0..len {
                let dwa = sqrt_dt * normals.next_standard();
                let dwb = sqrt_dt * normals.next_standard();
                let coeffs = qpi_block_coeffs(params, dt, dwa, dwb)?;
                let exact_mid = x0 * (rate * dt + params.sigma() * dwa).exp();
                let exact_end = x0 * (rate * 2.0 * dt + params.sigma() * (dwa + dwb)).exp();
                mid.add((exact_mid - coeffs.alpha * x0).powi(2));
                end.add((exact_end - coeffs.beta * x0).powi(2));
            }
            Ok((end.value(), mid.value()))
        })
        .collect::<Result<_>>()?;

    let mut end = CompensatedSum::default();
    let mut mid = CompensatedSum::default();
    for (e, m) in partial {
        end.add(e);
        mid.add(m);
    }
    Ok(LocalErrorPoint {
        dt,
        mean_sq_end: end.value() / n_samples as f64,
        mean_sq_mid: mid.value() / n_samples as f64,
    })
}

/// Fitted slope of `log E|delta|^2` against `log dt` at the block end.
pub fn local_error_slope(points: &[LocalErrorPoint]) -> Result<f64> {
    let dts: Vec<f64> = points.iter().map(|p| p.dt).collect();
    let errs: Vec<f64> = points.iter().map(|p| p.mean_sq_end).collect();
    loglog_slope(&dts, &errs)
}

/// Sample mean of `|X_N|^2` over `n_paths` independent paths.
pub fn terminal_second_moment(
    scheme: SchemeId,
    params: &GbmParams,
    grid: &TimeGrid,
    n_paths: usize,
    master_seed: u64,
) -> Result<f64> {
    if n_paths == 0 {
        return Err(Error::invalid("need at least one path"));
    }
    let finals: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|k| {
            let path =
                BrownianPath::generate(path_seed(master_seed, k), grid.t_end(), grid.n_steps())?;
            let traj = integrate_with_sign(scheme, MilsteinSign::Standard, params, grid, &path)?;
            Ok(traj.last().powi(2))
        })
        .collect::<Result<_>>()?;
    let mut acc = CompensatedSum::default();
    for v in finals {
        acc.add(v);
    }
    Ok(acc.value() / n_paths as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn traj(values: &[f64]) -> Trajectory {
        let n = values.len() - 1;
        let times = (0..=n).map(|i| i as f64 / n as f64).collect();
        Trajectory::new(times, values.to_vec()).unwrap()
    }

    #[test]
    fn norms_examples() {
        let a = traj(&[1.0, 2.0, 3.0]);
        assert_eq!(error_norms(&a, &a).unwrap(), ErrorNorms::default());

        let e = error_norms(&traj(&[1.0, 2.0]), &traj(&[1.0, 1.5])).unwrap();
        assert_eq!((e.l1, e.l2, e.linf), (0.5, 0.5, 0.5));

        let e = error_norms(&traj(&[1.0, 1.0, 1.0]), &traj(&[1.0, 0.9, 1.1])).unwrap();
        assert_relative_eq!(e.l1, 0.1, max_relative = 1e-14);
        assert_relative_eq!(e.l2, 0.1, max_relative = 1e-14);
        assert_relative_eq!(e.linf, 0.1, max_relative = 1e-14);
    }

    #[test]
    fn norms_reject_mismatched_grids() {
        assert!(error_norms(&traj(&[1.0, 2.0]), &traj(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn order_examples() {
        assert_relative_eq!(
            estimate_order(&[4, 8, 16], &[0.1, 0.05, 0.025]).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            estimate_order(&[4, 8], &[0.1, 0.025]).unwrap(),
            2.0,
            max_relative = 1e-12
        );
        assert!(estimate_order(&[4, 8], &[0.1, 0.0]).is_err());
        assert!(estimate_order(&[4], &[0.1]).is_err());
    }

    #[test]
    fn order_of_published_reference_column() {
        // Least squares over five published L1 values at N = 4 .. 1024.
        let errs = [5.1669e-03, 2.3844e-03, 6.9950e-04, 1.9056e-04, 5.0966e-05];
        let p = estimate_order(&[4, 16, 64, 256, 1024], &errs).unwrap();
        assert!((p - 0.8486).abs() < 1e-3, "{p}");
    }

    fn small_config(schemes: Vec<SchemeId>, sigma: f64, n_paths: usize) -> ConvergenceConfig {
        ConvergenceConfig {
            schemes,
            params: GbmParams::new(-1.0, sigma, 1.0).unwrap(),
            t_end: 1.0,
            n_list: vec![4, 16, 64],
            n_paths,
            master_seed: 7,
            milstein_sign: MilsteinSign::Standard,
        }
    }

    #[test]
    fn deterministic_refinement_decreases_error() {
        let cfg = small_config(vec![SchemeId::Qpi, SchemeId::ImplicitEm], 0.0, 1);
        let table = convergence_study(&cfg).unwrap();
        for s in [SchemeId::Qpi, SchemeId::ImplicitEm] {
            for norm in Norm::ALL {
                let e = table.errors(s, norm);
                assert!(e.windows(2).all(|w| w[1] < w[0]), "{s} {norm:?} {e:?}");
            }
        }
    }

    #[test]
    fn study_is_deterministic() {
        let cfg = small_config(vec![SchemeId::Qpi, SchemeId::Milstein], 0.5, 20);
        assert_eq!(
            convergence_study(&cfg).unwrap(),
            convergence_study(&cfg).unwrap()
        );
    }

    #[test]
    fn study_validation() {
        let mut cfg = small_config(vec![SchemeId::Qpi], 0.5, 2);
        cfg.n_list = vec![3, 9];
        let err = convergence_study(&cfg).unwrap_err();
        assert!(err.to_string().contains("N must be even for qpi"));
        cfg.schemes = vec![SchemeId::EulerMaruyama];
        assert!(convergence_study(&cfg).is_ok());
        cfg.n_list = vec![4, 6];
        assert!(convergence_study(&cfg).is_err());
        cfg.n_list = vec![8, 4];
        assert!(convergence_study(&cfg).is_err());
        cfg.n_list = vec![];
        assert!(convergence_study(&cfg).is_err());
    }

    #[test]
    fn csv_layouts() {
        let cfg = small_config(vec![SchemeId::Qpi, SchemeId::ImplicitEm], 0.5, 3);
        let table = convergence_study(&cfg).unwrap();
        let mut long = Vec::new();
        table.write_csv(&mut long).unwrap();
        let long = String::from_utf8(long).unwrap();
        assert_eq!(long.lines().next(), Some("scheme,n,l1,l2,linf,n_paths"));
        assert_eq!(long.lines().count(), 7);
        assert!(long.lines().nth(1).unwrap().starts_with("qpi,4,"));

        let mut wide = Vec::new();
        table.write_norm_csv(Norm::L2, &mut wide).unwrap();
        let wide = String::from_utf8(wide).unwrap();
        assert_eq!(wide.lines().next(), Some("n,qpi,iem"));
        assert_eq!(wide.lines().count(), 4);
    }

    #[test]
    fn local_error_validation_and_determinism() {
        let p = GbmParams::new(-1.0, 0.5, 1.0).unwrap();
        assert!(local_error_study(&p, &[], 100, 1).is_err());
        assert!(local_error_study(&p, &[0.1, -0.1], 100, 1).is_err());
        let pts = local_error_study(&p, &[0.125, 0.125], 10_000, 3).unwrap();
        assert_eq!(pts[0], pts[1]);
    }

    #[test]
    fn local_error_deterministic_superconvergence() {
        let p = GbmParams::new(-1.0, 0.0, 1.0).unwrap();
        let dts: Vec<f64> = (3..=8).map(|k| 2f64.powi(-k)).collect();
        let pts = local_error_study(&p, &dts, 16, 1).unwrap();
        let slope = local_error_slope(&pts).unwrap();
        assert!(slope >= 4.0, "slope {slope}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn norm_inequalities(values in prop::collection::vec(-5.0f64..5.0, 2..40)) {
            let exact = traj(&vec![0.0; values.len()]);
            let approx = traj(&values);
            let e = error_norms(&exact, &approx).unwrap();
            let n = (values.len() - 1) as f64;
            let k = ((n + 1.0) / n).sqrt();
            prop_assert!(e.l1 <= e.l2 * k * (1.0 + 1e-12) + 1e-300);
            prop_assert!(e.l2 <= e.linf * k * (1.0 + 1e-12) + 1e-300);
        }
    }
}
