use qpisde::analysis::Norm;
use qpisde::{
    convergence_study, error_norms, exact_solution, integrate, path_seed, BrownianPath,
    ConvergenceConfig, GbmParams, MilsteinSign, SchemeId, TimeGrid,
};

#[test]
fn coarse_grids_are_restrictions_of_the_fine_path() {
    let fine = BrownianPath::generate(path_seed(7, 3), 1.0, 1024).unwrap();
    for n in [4, 16, 64, 256, 1024] {
        let coarse = fine.restrict_to(n).unwrap();
        let f = 1024 / n;
        for (j, w) in coarse.node_values().iter().enumerate() {
            assert_eq!(*w, fine.node_values()[j * f]);
        }
    }
}

#[test]
fn single_path_error_at_256_steps() {
    let p = GbmParams::new(-1.0, 0.5, 1.0).unwrap();
    let grid = TimeGrid::new(1.0, 256).unwrap();
    let path = BrownianPath::generate(42, 1.0, 256).unwrap();
    let exact = exact_solution(&p, &grid, path.node_values()).unwrap();
    let approx = integrate(SchemeId::Qpi, &p, &grid, &path).unwrap();
    let e = error_norms(&exact, &approx).unwrap();
    // Golden values for this build's generator; the strong order of the
    // block scheme is 1/2, so errors at this resolution are of order 1e-2.
    assert!(
        (e.l2 - 3.797_800_905_244_496_6e-3).abs() < 1e-12 * e.l2,
        "l2 = {:e}",
        e.l2
    );
    assert!(
        (e.linf - 1.094_874_095_228_959_3e-2).abs() < 1e-12 * e.linf,
        "linf = {:e}",
        e.linf
    );
}

#[test]
fn study_rows_reproduce_manual_path_loop() {
    let p = GbmParams::new(-1.0, 0.5, 1.0).unwrap();
    let cfg = ConvergenceConfig {
        schemes: vec![SchemeId::Qpi, SchemeId::ImplicitEm],
        params: p,
        t_end: 1.0,
        n_list: vec![8, 32],
        n_paths: 5,
        master_seed: 11,
        milstein_sign: MilsteinSign::Standard,
    };
    let table = convergence_study(&cfg).unwrap();
    for scheme in [SchemeId::Qpi, SchemeId::ImplicitEm] {
        for n in [8, 32] {
            let grid = TimeGrid::new(1.0, n).unwrap();
            let mut sum = 0.0;
            for k in 0..5 {
                let fine = BrownianPath::generate(path_seed(11, k), 1.0, 32).unwrap();
                let path = fine.restrict_to(n).unwrap();
                let exact = exact_solution(&p, &grid, path.node_values()).unwrap();
                let approx = integrate(scheme, &p, &grid, &path).unwrap();
                sum += error_norms(&exact, &approx).unwrap().l2;
            }
            let got = table.get(scheme, n).unwrap().get(Norm::L2);
            assert!(
                (got - sum / 5.0).abs() <= 1e-15 * got.max(1e-300),
                "{scheme} {n}"
            );
        }
    }
}
