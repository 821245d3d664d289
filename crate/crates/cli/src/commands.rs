use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use qpisde::analysis::{local_error_slope, Norm};
use qpisde::output::fmt_f64;
use qpisde::stability::StabilityCondition;
use qpisde::{
    convergence_study, exact_solution, integrate_with_sign, local_error_study, path_seed,
    region_scan, BrownianPath, ConvergenceConfig, GbmParams, MilsteinSign, TimeGrid,
};

use crate::args::{
    Command, ConvergeArgs, Format, LocalErrorArgs, ModelArgs, PathArgs, SimulateArgs, StabilityArgs,
};
use crate::error::CliError;
use crate::svg;

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(a) => simulate(&a),
        Command::Converge(a) => converge(&a),
        Command::Stability(a) => stability(&a),
        Command::LocalError(a) => local_error(&a),
        Command::Path(a) => path(&a),
    }
}

fn params(m: &ModelArgs) -> Result<GbmParams, CliError> {
    if !(m.t_end.is_finite() && m.t_end > 0.0) {
        return Err(CliError::Usage(format!(
            "--t-end must be positive, got {}",
            m.t_end
        )));
    }
    Ok(GbmParams::new(m.mu, m.sigma, m.x0)?)
}

fn write_to(output: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => io::stdout().write_all(bytes).map_err(|e| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
    }
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let params = params(&a.model)?;
    if a.scheme.needs_even_steps() && !a.n.is_multiple_of(2) {
        return Err(CliError::Usage(format!(
            "N must be even for qpi (got {})",
            a.n
        )));
    }
    if a.paths == 0 {
        return Err(CliError::Usage("--paths must be at least 1".into()));
    }
    let grid = TimeGrid::new(a.model.t_end, a.n)?;
    let sign = MilsteinSign::from(a.milstein_sign);

    let mut exact = Vec::new();
    let mut approx = Vec::with_capacity(a.paths);
    for k in 0..a.paths {
        let path =
            BrownianPath::generate(path_seed(a.seed, k as u64), grid.t_end(), grid.n_steps())?;
        if a.paths == 1 {
            exact = exact_solution(&params, &grid, path.node_values())?
                .values()
                .to_vec();
        }
        approx.push(integrate_with_sign(a.scheme, sign, &params, &grid, &path)?);
    }
    let times = grid.times();

    let bytes = match a.format {
        Format::Csv => {
            let mut out = Vec::new();
            if a.paths == 1 {
                writeln!(out, "t,exact,approx").unwrap();
                for (i, t) in times.iter().enumerate() {
                    writeln!(
                        out,
                        "{},{},{}",
                        fmt_f64(*t),
                        fmt_f64(exact[i]),
                        fmt_f64(approx[0].values()[i])
                    )
                    .unwrap();
                }
            } else {
                let names: Vec<String> = (1..=a.paths).map(|k| format!("path_{k}")).collect();
                writeln!(out, "t,{}", names.join(",")).unwrap();
                for (i, t) in times.iter().enumerate() {
                    let row: Vec<String> =
                        approx.iter().map(|tr| fmt_f64(tr.values()[i])).collect();
                    writeln!(out, "{},{}", fmt_f64(*t), row.join(",")).unwrap();
                }
            }
            out
        }
        Format::Svg => {
            let title = format!(
                "{} paths, \u{3bc} = {}, \u{3c3} = {}, N = {}",
                a.scheme.label(),
                params.mu(),
                params.sigma(),
                a.n
            );
            let series: Vec<svg::Series<'_>> = if a.paths == 1 {
                vec![
                    svg::Series {
                        name: "exact".into(),
                        values: &exact,
                        dashed: true,
                    },
                    svg::Series {
                        name: a.scheme.label().into(),
                        values: approx[0].values(),
                        dashed: false,
                    },
                ]
            } else {
                approx
                    .iter()
                    .enumerate()
                    .map(|(k, tr)| svg::Series {
                        name: format!("path {}", k + 1),
                        values: tr.values(),
                        dashed: false,
                    })
                    .collect()
            };
            svg::line_chart(&title, &times, &series).into_bytes()
        }
    };
    write_to(a.common.output.as_deref(), &bytes)
}

fn norm_file(base: &Path, norm: Norm) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "converge".into());
    base.with_file_name(format!("{stem}_{}.csv", norm.as_str()))
}

fn converge(a: &ConvergeArgs) -> Result<(), CliError> {
    let cfg = ConvergenceConfig {
        schemes: a.schemes.0.clone(),
        params: params(&a.model)?,
        t_end: a.model.t_end,
        n_list: a.n_list.0.clone(),
        n_paths: a.paths,
        master_seed: a.seed,
        milstein_sign: a.milstein_sign.into(),
    };
    cfg.validate()?;
    if a.split_norms && a.common.output.is_none() {
        return Err(CliError::Usage("--split-norms needs --output".into()));
    }

    let table = convergence_study(&cfg)?;
    let mut out = Vec::new();
    table.write_csv(&mut out).unwrap();
    write_to(a.common.output.as_deref(), &out)?;

    if a.split_norms {
        let base = a.common.output.as_deref().unwrap();
        for norm in Norm::ALL {
            let mut buf = Vec::new();
            table.write_norm_csv(norm, &mut buf).unwrap();
            write_to(Some(&norm_file(base, norm)), &buf)?;
        }
    }

    if cfg.n_list.len() >= 2 {
        for scheme in table.schemes() {
            if let Ok(order) = table.estimated_order(scheme, Norm::L2) {
                eprintln!("{scheme}: fitted L2 order {order:.3}");
            }
        }
    }
    Ok(())
}

fn stability(a: &StabilityArgs) -> Result<(), CliError> {
    let condition = match a.scheme {
        StabilityCondition::Milstein(_) => StabilityCondition::Milstein(a.milstein_sign.into()),
        c => c,
    };
    let region = region_scan(
        condition,
        a.sigma,
        (a.mu_range.lo, a.mu_range.hi),
        (a.dt_range.lo, a.dt_range.hi),
        (a.grid, a.grid),
    )?;
    let bytes = match a.format {
        Format::Csv => {
            let mut out = Vec::new();
            region.write_csv(&mut out).unwrap();
            out
        }
        Format::Svg => svg::stability_region(&region).into_bytes(),
    };
    write_to(a.common.output.as_deref(), &bytes)
}

fn local_error(a: &LocalErrorArgs) -> Result<(), CliError> {
    let params = params(&a.model)?;
    let points = local_error_study(&params, &a.dt_list.0, a.samples, a.seed)?;
    let mut out = Vec::new();
    writeln!(out, "dt,mean_sq_local_error").unwrap();
    for p in &points {
        writeln!(out, "{},{}", fmt_f64(p.dt), fmt_f64(p.mean_sq_end)).unwrap();
    }
    let slope = local_error_slope(&points).unwrap_or(f64::NAN);
    writeln!(out, "# slope={}", fmt_f64(slope)).unwrap();
    write_to(a.common.output.as_deref(), &out)
}

fn path(a: &PathArgs) -> Result<(), CliError> {
    let p = BrownianPath::generate(a.seed, a.t_end, a.n)?;
    let mut out = Vec::new();
    p.write_csv(&mut out)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_to(a.common.output.as_deref(), &out)
}
