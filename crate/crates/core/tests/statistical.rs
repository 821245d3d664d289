//! Statistical checks on path generation and the stability formulas.

use qpisde::stability::{qpi_exact_amplification, StabilityCondition};
use qpisde::{
    path_seed, qpi_block_coeffs, terminal_second_moment, BrownianPath, GbmParams, NormalStream,
    SchemeId, TimeGrid,
};
use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided Kolmogorov–Smirnov critical value at significance 0.001.
fn ks_critical_001(n: usize) -> f64 {
    1.9495 / (n as f64).sqrt()
}

#[test]
fn standardized_increments_pass_ks_normality() {
    let n = 100_000;
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    for seed in [0u64, 1, 7, 42, 2024] {
        let path = BrownianPath::generate(seed, 1.0, n).unwrap();
        let scale = (n as f64).sqrt();
        let mut z: Vec<f64> = path.increments().iter().map(|d| d * scale).collect();
        z.sort_by(f64::total_cmp);
        let d = z
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = std_normal.cdf(x);
                (f - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - f)
            })
            .fold(0.0f64, f64::max);
        assert!(d < ks_critical_001(n), "seed {seed}: D = {d}");
    }
}

/// Monte Carlo estimate of E[beta^2] and its standard error.
fn mc_block_second_moment(params: &GbmParams, dt: f64, n: usize, seed: u64) -> (f64, f64) {
    let mut normals = NormalStream::new(seed);
    let sd = dt.sqrt();
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let c = qpi_block_coeffs(
            params,
            dt,
            sd * normals.next_standard(),
            sd * normals.next_standard(),
        )
        .unwrap();
        let b2 = c.beta * c.beta;
        s1 += b2;
        s2 += b2 * b2;
    }
    let mean = s1 / n as f64;
    let var = (s2 / n as f64 - mean * mean).max(0.0);
    (mean, (var / n as f64).sqrt())
}

#[test]
fn exact_amplification_matches_monte_carlo() {
    let mut pick = NormalStream::new(99);
    for k in 0..10 {
        let u = |z: f64| 0.5 * (1.0 + libm_erf(z / std::f64::consts::SQRT_2));
        let dt = 0.01 + 0.99 * u(pick.next_standard());
        let mu = (-1.5 + 3.0 * u(pick.next_standard())) / dt.max(1.0);
        let sigma = 1.5 * u(pick.next_standard());
        let p = GbmParams::new(mu, sigma, 1.0).unwrap();
        let exact = qpi_exact_amplification(mu, sigma, dt).unwrap();
        let (mc, se) = mc_block_second_moment(&p, dt, 200_000, path_seed(5, k));
        assert!(
            (exact - mc).abs() <= 3.0 * se + 1e-12,
            "mu={mu} sigma={sigma} dt={dt}: exact {exact} mc {mc} se {se}"
        );
    }
}

// Abramowitz–Stegun 7.1.26 is plenty for picking random parameters.
fn libm_erf(x: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.327_591_1 * x.abs());
    let y = 1.0
        - (((((1.061_405_429 * t - 1.453_152_027) * t) + 1.421_413_741) * t - 0.284_496_736) * t
            + 0.254_829_592)
            * t
            * (-x * x).exp();
    y.copysign(x)
}

#[test]
fn terminal_moment_follows_stability_verdict() {
    let grid = TimeGrid::new(5.0, 80).unwrap();
    let stable = GbmParams::new(-1.0, 0.5, 1.0).unwrap();
    assert!(
        StabilityCondition::QpiExact
            .verdict(-1.0, 0.5, grid.dt())
            .unwrap()
            .stable
    );
    let m = terminal_second_moment(SchemeId::Qpi, &stable, &grid, 2000, 3).unwrap();
    assert!(m < 0.1, "{m}");

    let unstable = GbmParams::new(1.0, 0.5, 1.0).unwrap();
    let m = terminal_second_moment(SchemeId::Qpi, &unstable, &grid, 2000, 3).unwrap();
    assert!(m > 10.0, "{m}");
}
