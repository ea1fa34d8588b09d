//! The `manifold`, `simulate`, `analyze` and `sweep` commands. Each has a pure
//! part returning data and a `run_*` wrapper that writes files and returns the
//! text for standard output.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use lcmanifold_core::analysis::{analyze, predict, AnalysisReport, Prediction, TransientCut};
use lcmanifold_core::dynamics::{
    integrate, polar_from_cartesian, polar_rhs, reduced_rhs, restricted_rhs, to_polar, to_polar_projected, PolarSeries,
};
use lcmanifold_core::manifold::{solve_for_spec, ManifoldQuadratic};
use lcmanifold_core::model::{full_rhs, Family, State3, SystemSpec};

use crate::config::{Format, RunConfig, Target, Validated};
use crate::error::{CliError, Result};
use crate::output::{to_json, write_file, Table};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl From<ManifoldQuadratic> for Coefficients {
    fn from(m: ManifoldQuadratic) -> Self {
        Self {
            a0: m.a0,
            a1: m.a1,
            a2: m.a2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldReport {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    pub lambda: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub generic: Coefficients,
    pub closed_form: Coefficients,
    pub max_disc: f64,
}

pub fn manifold(spec: &SystemSpec) -> Result<ManifoldReport> {
    let sol = solve_for_spec(spec)?;
    let (kind, gamma, k) = match spec.family {
        Family::LambdaOmega { gamma } => ("lambda_omega3d", Some(gamma), None),
        Family::Lienard { k, .. } => ("lienard3d", None, Some(k)),
    };
    Ok(ManifoldReport {
        kind,
        gamma,
        k,
        lambda: spec.lambda_stable,
        a0: sol.generic.a0,
        a1: sol.generic.a1,
        a2: sol.generic.a2,
        generic: sol.generic.into(),
        closed_form: sol.closed_form.into(),
        max_disc: sol.discrepancy(),
    })
}

/// A sampled trajectory in both its written and its polar form.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub table: Table,
    pub series: PolarSeries,
}

fn uses_closed_polar_form(spec: &SystemSpec) -> bool {
    matches!(spec.family, Family::LambdaOmega { .. }) && spec.couplings.is_default_profile()
}

pub fn simulate(v: &Validated, target: Target) -> Result<Simulation> {
    let spec = &v.spec;
    let cfg = &v.integrator;
    let [x0, y0, z0] = v.initial_state;
    let nan2 = [f64::NAN; 2];
    match target {
        Target::Full3d => {
            let tr = integrate(
                |s: &[f64; 3]| full_rhs(spec, State3::from_array(*s)).map_or([f64::NAN; 3], State3::to_array),
                [x0, y0, z0],
                cfg,
            )?;
            let mut table = Table::new(vec!["t", "x", "y", "z"]);
            table.rows = tr
                .times
                .iter()
                .zip(&tr.states)
                .map(|(t, s)| vec![*t, s[0], s[1], s[2]])
                .collect();
            Ok(Simulation {
                series: to_polar_projected(&tr),
                table,
            })
        }
        Target::Reduced2d => {
            let m = solve_for_spec(spec)?.generic;
            let tr = match (spec.gamma(), uses_closed_polar_form(spec)) {
                (Some(gamma), true) => integrate(|p: &[f64; 2]| reduced_rhs(gamma, &m, *p), [x0, y0], cfg)?,
                _ => integrate(
                    |p: &[f64; 2]| restricted_rhs(spec, &m, *p).unwrap_or(nan2),
                    [x0, y0],
                    cfg,
                )?,
            };
            let mut table = Table::new(vec!["t", "x", "y", "z"]);
            table.rows = tr
                .times
                .iter()
                .zip(&tr.states)
                .map(|(t, [x, y])| vec![*t, *x, *y, m.eval(*x, *y)])
                .collect();
            Ok(Simulation {
                series: to_polar(&tr),
                table,
            })
        }
        Target::Polar => {
            let start = [x0.hypot(y0), y0.atan2(x0)];
            let tr = if let (Some(gamma), true) = (spec.gamma(), uses_closed_polar_form(spec)) {
                let lambda = spec.lambda_stable;
                integrate(
                    |s: &[f64; 2]| polar_rhs(gamma, lambda, s[0], s[1]).unwrap_or(nan2),
                    start,
                    cfg,
                )?
            } else {
                let m = solve_for_spec(spec)?.generic;
                let lin = spec.linear_part();
                let a = [[lin.xx, lin.xy], [lin.yx, lin.yy]];
                integrate(
                    |s: &[f64; 2]| polar_from_cartesian(|p| restricted_rhs(spec, &m, p), a, s[0], s[1]).unwrap_or(nan2),
                    start,
                    cfg,
                )?
            };
            let mut table = Table::new(vec!["t", "R", "theta"]);
            table.rows = tr
                .times
                .iter()
                .zip(&tr.states)
                .map(|(t, s)| vec![*t, s[0], s[1]])
                .collect();
            let series = PolarSeries {
                times: tr.times,
                radius: tr.states.iter().map(|s| s[0]).collect(),
                theta: tr.states.iter().map(|s| s[1]).collect(),
            };
            Ok(Simulation { table, series })
        }
    }
}

/// Rebuilds the polar series from a trajectory CSV with header `t,x,y,z`,
/// `t,x,y` or `t,R,theta`.
pub fn series_from_csv(header: &[String], rows: &[Vec<f64>], source: &Path) -> Result<PolarSeries> {
    let bad = |msg: &str| CliError::Config(format!("{}: {msg}", source.display()));
    let cols: Vec<&str> = header.iter().map(String::as_str).collect();
    let width = cols.len();
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(bad(&format!("row {} has the wrong number of fields", i + 1)));
    }
    let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(bad("times must be strictly increasing"));
    }
    match cols.as_slice() {
        ["t", "x", "y", "z"] | ["t", "x", "y"] => {
            Ok(PolarSeries::from_points(times, rows.iter().map(|r| [r[1], r[2]])))
        }
        ["t", "R", "theta"] => Ok(PolarSeries {
            times,
            radius: rows.iter().map(|r| r[1]).collect(),
            theta: rows.iter().map(|r| r[2]).collect(),
        }),
        _ => Err(bad("expected header t,x,y,z or t,x,y or t,R,theta")),
    }
}

pub fn read_trajectory(path: &Path) -> Result<PolarSeries> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let (header, rows) = Table::from_csv_reader(file, path)?;
    series_from_csv(&header, &rows, path)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportJson {
    pub measured_mean_radius: f64,
    pub predicted_radius: f64,
    pub base_radius: f64,
    pub measured_angular_velocity: f64,
    pub predicted_angular_velocity: f64,
    pub predicted_period: f64,
    pub oscillations_per_cycle: usize,
    pub radius_relative_error: f64,
    pub angular_velocity_relative_error: f64,
}

impl From<AnalysisReport> for ReportJson {
    fn from(r: AnalysisReport) -> Self {
        Self {
            measured_mean_radius: r.measured_mean_radius,
            predicted_radius: r.predicted_radius,
            base_radius: r.base_radius,
            measured_angular_velocity: r.measured_angular_velocity,
            predicted_angular_velocity: r.predicted_angular_velocity,
            predicted_period: r.predicted_period,
            oscillations_per_cycle: r.oscillations_per_cycle,
            radius_relative_error: r.radius_relative_error,
            angular_velocity_relative_error: r.angular_velocity_relative_error,
        }
    }
}

pub fn analyze_series(series: &PolarSeries, spec: &SystemSpec, cut: &TransientCut) -> Result<ReportJson> {
    let prediction: Prediction = predict(spec)?;
    Ok(analyze(series, &prediction, cut)?.into())
}

/// End-to-end analysis: simulate `target`, then analyze.
pub fn analyze_config(v: &Validated, target: Target) -> Result<ReportJson> {
    // Fail on an unsupported family before spending time integrating.
    predict(&v.spec)?;
    let sim = simulate(v, target)?;
    analyze_series(&sim.series, &v.spec, &v.cut)
}

/// Threads for sweep and verify: `LCMANIFOLD_THREADS` when set, else rayon's
/// default.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("LCMANIFOLD_THREADS") {
        let n: usize =
            raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
                CliError::Config(format!("LCMANIFOLD_THREADS must be a positive integer, got `{raw}`"))
            })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker threads: {e}")))
}

pub const SWEEP_HEADER: [&str; 3] = ["lambda", "predicted_radius", "simulated_radius"];

/// Predicted and simulated (reduced model) mean radius for each λ of the
/// sweep range, in ascending λ.
pub fn sweep(cfg: &RunConfig) -> Result<Table> {
    let lambdas = cfg.sweep.lambdas()?;
    let mut table = Table::new(SWEEP_HEADER.to_vec());
    if lambdas.is_empty() {
        return Ok(table);
    }
    let base = cfg.validate()?;
    let pool = thread_pool()?;
    let rows = pool.install(|| {
        lambdas
            .par_iter()
            .map(|&lambda| {
                let mut v = base.clone();
                v.spec.lambda_stable = lambda;
                v.spec.validate()?;
                let report = analyze_config(&v, Target::Reduced2d)?;
                Ok(vec![lambda, report.predicted_radius, report.measured_mean_radius])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    table.rows = rows;
    Ok(table)
}

fn out_dir(cfg: &RunConfig) -> &Path {
    &cfg.output.directory
}

pub fn run_manifold(cfg: &RunConfig) -> Result<String> {
    let v = cfg.validate()?;
    let r = manifold(&v.spec)?;
    if cfg.output.wants(Format::Json) {
        write_file(out_dir(cfg), "manifold.json", &(to_json(&r) + "\n"))?;
    }
    let row = |name: &str, c: &Coefficients| format!("{name:<12} {:>24.16e} {:>24.16e} {:>24.16e}\n", c.a0, c.a1, c.a2);
    let mut text = format!("{:<12} {:>24} {:>24} {:>24}\n", "path", "a0", "a1", "a2");
    text += &row("generic", &r.generic);
    text += &row("closed_form", &r.closed_form);
    text += &format!("max discrepancy {:.3e}\n", r.max_disc);
    Ok(text)
}

pub fn simulation_file_name(target: Target) -> String {
    format!("{}.csv", target.as_str())
}

fn require_csv(cfg: &RunConfig, command: &str) -> Result<()> {
    if cfg.output.wants(Format::Csv) {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "`{command}` writes CSV; add \"csv\" to output.formats"
        )))
    }
}

pub fn run_simulate(cfg: &RunConfig, target: Target) -> Result<(PathBuf, String)> {
    require_csv(cfg, "simulate")?;
    let v = cfg.validate()?;
    let sim = simulate(&v, target)?;
    let path = write_file(out_dir(cfg), &simulation_file_name(target), &sim.table.to_csv())?;
    let msg = format!("wrote {} rows to {}\n", sim.table.rows.len(), path.display());
    Ok((path, msg))
}

/// Analyzes `trajectory` when given, otherwise simulates `target` first.
pub fn run_analyze(cfg: &RunConfig, target: Target, trajectory: Option<&Path>) -> Result<String> {
    let v = cfg.validate()?;
    let report = match trajectory {
        Some(path) => analyze_series(&read_trajectory(path)?, &v.spec, &v.cut)?,
        None => analyze_config(&v, target)?,
    };
    let json = to_json(&report) + "\n";
    if cfg.output.wants(Format::Json) {
        write_file(out_dir(cfg), "analysis.json", &json)?;
    }
    Ok(json)
}

pub fn run_sweep(cfg: &RunConfig) -> Result<String> {
    require_csv(cfg, "sweep")?;
    let csv = sweep(cfg)?.to_csv();
    write_file(out_dir(cfg), "sweep.csv", &csv)?;
    Ok(csv)
}
