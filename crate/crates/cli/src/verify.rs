//! `verify`: numerical checks over parameter grids with a pass/fail table.

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;

use lcmanifold_core::analysis::{
    averaged_radial_root, predicted_angular_velocity, predicted_period, predicted_radius, vdp_averaged_radius,
    vdp_modified_radius,
};
use lcmanifold_core::dynamics::{integrate, manifold_denominator, IntegratorConfig, Method};
use lcmanifold_core::manifold::{residual_slope, solve_for_spec, solve_lambda_omega_manifold, ManifoldQuadratic};
use lcmanifold_core::model::{Coupling, Couplings, SystemSpec, VdpSpec};

use crate::commands::{analyze_config, analyze_series, series_from_csv, simulate, thread_pool, ReportJson};
use crate::config::{RunConfig, Target, Validated};
use crate::error::{CliError, Result};
use crate::output::Table;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Above(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub point: String,
    pub value: f64,
    pub bound: Bound,
    /// Set when the value could not be computed.
    pub note: Option<String>,
}

impl Sample {
    fn new(point: String, value: f64, bound: Bound) -> Self {
        Self {
            point,
            value,
            bound,
            note: None,
        }
    }

    fn failed(point: String, bound: Bound, err: impl std::fmt::Display) -> Self {
        Self {
            point,
            value: f64::NAN,
            bound,
            note: Some(err.to_string()),
        }
    }

    pub fn passes(&self) -> bool {
        match self.bound {
            Bound::AtMost(l) => self.value <= l,
            Bound::AtLeast(l) => self.value >= l,
            Bound::Above(l) => self.value > l,
        }
    }

    /// Distance to the bound on the passing side, relative to the bound when
    /// it is non-zero. Negative when failing.
    pub fn slack(&self) -> f64 {
        if self.value.is_nan() {
            return f64::NEG_INFINITY;
        }
        let (raw, l) = match self.bound {
            Bound::AtMost(l) => (l - self.value, l),
            Bound::AtLeast(l) | Bound::Above(l) => (self.value - l, l),
        };
        if l != 0.0 {
            raw / l.abs()
        } else {
            raw
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub samples: Vec<Sample>,
}

impl Check {
    pub fn passes(&self) -> bool {
        self.samples.iter().all(Sample::passes)
    }

    pub fn worst(&self) -> Option<&Sample> {
        self.samples
            .iter()
            .min_by(|a, b| a.slack().partial_cmp(&b.slack()).unwrap_or(std::cmp::Ordering::Equal))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.passes()).count()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = format!("{:<8}{:<28}{:>8}  worst\n", "status", "check", "passed");
        for c in &self.checks {
            let passed = c.samples.iter().filter(|s| s.passes()).count();
            let worst = c.worst().map_or_else(String::new, |s| {
                let (op, l) = match s.bound {
                    Bound::AtMost(l) => ("<=", l),
                    Bound::AtLeast(l) => (">=", l),
                    Bound::Above(l) => (">", l),
                };
                match &s.note {
                    Some(n) => format!("{} [{}]", n, s.point),
                    None => format!("{:.6e} {op} {:.6e} [{}]", s.value, l, s.point),
                }
            });
            out += &format!(
                "{:<8}{:<28}{:>8}  {}\n",
                if c.passes() { "PASS" } else { "FAIL" },
                c.name,
                format!("{passed}/{}", c.samples.len()),
                worst
            );
        }
        out += &format!("{} of {} checks failed\n", self.failed(), self.checks.len());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Options {
    /// Negative control: predict radii with `2D` in place of `D`.
    pub doubled_denominator: bool,
}

fn closed_radius(gamma: f64, lambda: f64, opts: Options) -> Result<f64> {
    if !opts.doubled_denominator {
        return Ok(predicted_radius(gamma, lambda)?);
    }
    let s = lambda + 2.0 * gamma;
    let d = 2.0 * manifold_denominator(gamma, lambda);
    Ok((gamma / (1.0 - s / (4.0 * d))).sqrt())
}

fn pt(gamma: f64, lambda: f64) -> String {
    format!("gamma={gamma} lambda={lambda}")
}

fn grid(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn sample_of(point: String, bound: Bound, value: Result<f64>) -> Sample {
    match value {
        Ok(v) => Sample::new(point, v, bound),
        Err(e) => Sample::failed(point, bound, e),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

type CheckFn<'a> = Box<dyn Fn() -> Check + Send + Sync + 'a>;

/// Runs every check. Simulation checks use the integrator, initial state,
/// transient cut and tolerances of `cfg`; the grids come from `cfg.verify`.
pub fn verify(cfg: &RunConfig, opts: Options) -> Result<VerifyReport> {
    cfg.verify.validate()?;
    let base = cfg.validate()?;
    let g = &cfg.verify;
    let tol = &base.analysis;
    let algebra = &grid(&g.gammas, &g.lambdas);
    let sim_g = g.simulation_gamma;

    let with_spec_fn = |spec: SystemSpec| Validated { spec, ..base.clone() };
    let with_spec = &with_spec_fn;
    let reduced_fn = |lambda: f64| -> Result<ReportJson> {
        analyze_config(&with_spec(SystemSpec::lambda_omega(sim_g, lambda)), Target::Reduced2d)
    };
    let reduced = &reduced_fn;

    let mut checks: Vec<CheckFn> = Vec::new();

    checks.push(Box::new(|| Check {
        name: "manifold_lambda_omega",
        samples: algebra
            .iter()
            .map(|&(gm, l)| {
                let d = solve_lambda_omega_manifold(gm, l, &Coupling::unit(Coupling::XY)).map(|s| s.discrepancy());
                sample_of(pt(gm, l), Bound::AtMost(1e-12), d.map_err(Into::into))
            })
            .collect(),
    }));
    checks.push(Box::new(|| {
        let want = ManifoldQuadratic::new(-1.0 / 85.0, 9.0 / 85.0, 1.0 / 85.0);
        let got =
            solve_lambda_omega_manifold(4.0, 1.0, &Coupling::unit(Coupling::XY)).map(|s| s.generic.max_abs_diff(&want));
        Check {
            name: "manifold_spot_value",
            samples: vec![sample_of(pt(4.0, 1.0), Bound::AtMost(1e-12), got.map_err(Into::into))],
        }
    }));
    checks.push(Box::new(|| Check {
        name: "manifold_lienard",
        samples: grid(&g.lienard_ks, &g.lambdas)
            .iter()
            .map(|&(k, l)| {
                let d = solve_for_spec(&SystemSpec::lienard(k, l)).map(|s| s.discrepancy());
                sample_of(format!("k={k} lambda={l}"), Bound::AtMost(1e-12), d.map_err(Into::into))
            })
            .collect(),
    }));
    checks.push(Box::new(|| {
        let want = ManifoldQuadratic::new(0.2, 0.2, -0.2);
        let got = solve_for_spec(&SystemSpec::lienard(1e-8, 1.0)).map(|s| s.generic.max_abs_diff(&want));
        Check {
            name: "centre_manifold_limit",
            samples: vec![sample_of(
                "k=1e-8 lambda=1".into(),
                Bound::AtMost(1e-6),
                got.map_err(Into::into),
            )],
        }
    }));
    checks.push(Box::new(|| {
        let eps = [1e-1, 1e-2, 1e-3];
        let spec = SystemSpec::lambda_omega(4.0, 1.0);
        let slopes = solve_for_spec(&spec).and_then(|s| {
            let m = s.generic;
            let leak = ManifoldQuadratic::new(m.a0, m.a1 + 0.1, m.a2);
            Ok((residual_slope(&spec, &m, &eps)?, residual_slope(&spec, &leak, &eps)?))
        });
        let samples = match slopes {
            Ok((good, bad)) => vec![
                Sample::new("correct coefficients".into(), good, Bound::AtLeast(2.9)),
                Sample::new("a1 + 0.1, |slope - 2|".into(), (bad - 2.0).abs(), Bound::AtMost(0.1)),
            ],
            Err(e) => vec![Sample::failed(pt(4.0, 1.0), Bound::AtLeast(2.9), e)],
        };
        Check {
            name: "invariance_residual",
            samples,
        }
    }));
    checks.push(Box::new(move || {
        let mut samples: Vec<Sample> = algebra
            .iter()
            .map(|&(gm, l)| sample_of(pt(gm, l), Bound::Above(gm.sqrt()), closed_radius(gm, l, opts)))
            .collect();
        samples.push(sample_of(
            "gamma=4 lambda=1000, |R/2 - 1|".into(),
            Bound::AtMost(1e-3),
            closed_radius(4.0, 1000.0, opts).map(|r| rel(r, 2.0)),
        ));
        Check {
            name: "radius_increment",
            samples,
        }
    }));
    checks.push(Box::new(move || Check {
        name: "averaging_oracle",
        samples: algebra
            .iter()
            .map(|&(gm, l)| {
                let diff = closed_radius(gm, l, opts).and_then(|r| Ok((averaged_radial_root(gm, l)? - r).abs()));
                sample_of(pt(gm, l), Bound::AtMost(1e-8), diff)
            })
            .collect(),
    }));
    checks.push(Box::new(move || {
        let r = closed_radius(4.0, 1.0, opts).map(|r| (r - 2.027013).abs());
        let w = predicted_angular_velocity(4.0, 1.0).map(|w| (w - (1.0 - 8.0 / 331.0)).abs());
        let t = predicted_period(4.0, 1.0).map(|t| (t - 6.43885).abs());
        Check {
            name: "closed_form_values",
            samples: vec![
                sample_of("radius vs 2.027013".into(), Bound::AtMost(1e-5), r),
                sample_of("omega vs 1-8/331".into(), Bound::AtMost(1e-12), w.map_err(Into::into)),
                sample_of("period vs 6.43885".into(), Bound::AtMost(5e-5), t.map_err(Into::into)),
            ],
        }
    }));

    checks.push(Box::new(move || Check {
        name: "base_radius",
        samples: g
            .base_gammas
            .par_iter()
            .map(|&gm| {
                let v = with_spec(SystemSpec::lambda_omega(gm, 1.0).with_couplings(Couplings::zero()));
                let r = simulate(&v, Target::Full3d).map(|s| {
                    let last = s.table.rows.last().expect("at least the initial row");
                    rel(last[1].hypot(last[2]), gm.sqrt())
                });
                sample_of(
                    format!("gamma={gm} uncoupled"),
                    Bound::AtMost(tol.base_radius_tolerance),
                    r,
                )
            })
            .collect(),
    }));

    checks.push(Box::new(move || Check {
        name: "reduced_radius",
        samples: g
            .simulation_lambdas
            .par_iter()
            .map(|&l| {
                let v = reduced(l).and_then(|r| Ok(rel(r.measured_mean_radius, closed_radius(sim_g, l, opts)?)));
                sample_of(pt(sim_g, l), Bound::AtMost(tol.radius_tolerance), v)
            })
            .collect(),
    }));
    checks.push(Box::new(move || Check {
        name: "reduced_angular_velocity",
        samples: g
            .simulation_lambdas
            .par_iter()
            .map(|&l| {
                let v = reduced(l).map(|r| r.angular_velocity_relative_error);
                sample_of(pt(sim_g, l), Bound::AtMost(tol.angular_velocity_tolerance), v)
            })
            .collect(),
    }));
    checks.push(Box::new(move || Check {
        name: "oscillations_per_rotation",
        samples: g
            .simulation_lambdas
            .par_iter()
            .map(|&l| {
                let v = reduced(l).map(|r| (r.oscillations_per_cycle as f64 - 4.0).abs());
                sample_of(format!("{}, |count - 4|", pt(sim_g, l)), Bound::AtMost(0.0), v)
            })
            .collect(),
    }));
    checks.push(Box::new(move || Check {
        name: "full_vs_reduced_radius",
        samples: g
            .simulation_lambdas
            .par_iter()
            .map(|&l| {
                let v = with_spec(SystemSpec::lambda_omega(sim_g, l));
                let res = reduced(l).and_then(|red| {
                    let full = simulate(&v, Target::Full3d)?;
                    let r = lcmanifold_core::analysis::estimate_mean_radius(&full.series, &v.cut)?;
                    Ok(rel(r, red.measured_mean_radius))
                });
                sample_of(pt(sim_g, l), Bound::AtMost(tol.full_radius_tolerance), res)
            })
            .collect(),
    }));

    checks.push(Box::new(|| {
        let mut samples: Vec<Sample> = g
            .vdp_mus
            .iter()
            .map(|&mu| {
                let v = VdpSpec::new(mu)
                    .and_then(|s| vdp_averaged_radius(&s))
                    .map(|r| (r - 2.0).abs());
                sample_of(format!("mu={mu}"), Bound::AtMost(1e-6), v.map_err(Into::into))
            })
            .collect();
        samples.extend(g.lambdas.iter().map(|&l| {
            let v = vdp_modified_radius(l).and_then(|a| Ok((a - predicted_radius(4.0, l)?).abs()));
            sample_of(
                format!("modified radius lambda={l}"),
                Bound::AtMost(0.0),
                v.map_err(Into::into),
            )
        }));
        Check {
            name: "van_der_pol",
            samples,
        }
    }));
    checks.push(Box::new(|| Check {
        name: "integrator_quality",
        samples: vec![
            sample_of("rk4 order on z' = -z".into(), Bound::AtLeast(3.9), rk4_order()),
            sample_of(
                "harmonic return at tol 1e-10".into(),
                Bound::AtMost(1e-6),
                harmonic_return(),
            ),
        ],
    }));
    checks.push(Box::new(move || {
        let v = with_spec(SystemSpec::lambda_omega(sim_g, g.simulation_lambdas[0]));
        Check {
            name: "determinism_round_trip",
            samples: vec![
                sample_of(
                    "repeat simulate, differing bytes".into(),
                    Bound::AtMost(0.0),
                    repeat_mismatch(&v),
                ),
                sample_of(
                    "simulate -> analyze vs analyze".into(),
                    Bound::AtMost(1e-12),
                    round_trip(&v),
                ),
            ],
        }
    }));

    let pool = thread_pool()?;
    let checks = pool.install(|| checks.par_iter().map(|f| f()).collect());
    Ok(VerifyReport { checks })
}

fn rk4_order() -> Result<f64> {
    let err = |step: f64| -> Result<f64> {
        let cfg = IntegratorConfig {
            method: Method::Rk4 { step },
            t_end: 1.0,
            sample_interval: 1.0,
        };
        let tr = integrate(|y: &[f64; 1]| [-y[0]], [1.0], &cfg)?;
        Ok((tr.states[tr.len() - 1][0] - (-1f64).exp()).abs())
    };
    let steps = [0.1, 0.05, 0.025];
    let errs = steps.iter().map(|&h| err(h)).collect::<Result<Vec<_>>>()?;
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(orders.into_iter().fold(f64::INFINITY, f64::min))
}

fn harmonic_return() -> Result<f64> {
    let cfg = IntegratorConfig {
        method: Method::Rk45 { tolerance: 1e-10 },
        t_end: 2.0 * PI,
        sample_interval: 0.01,
    };
    let tr = integrate(|s: &[f64; 2]| [s[1], -s[0]], [1.0, 0.0], &cfg)?;
    let (_, y) = tr.last().expect("non-empty trajectory");
    Ok((y[0] - 1.0).abs().max(y[1].abs()))
}

fn repeat_mismatch(v: &Validated) -> Result<f64> {
    let a = simulate(v, Target::Reduced2d)?.table.to_csv();
    let b = simulate(v, Target::Reduced2d)?.table.to_csv();
    Ok(a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count() as f64 + a.len().abs_diff(b.len()) as f64)
}

fn round_trip(v: &Validated) -> Result<f64> {
    let direct = analyze_config(v, Target::Reduced2d)?;
    let csv = simulate(v, Target::Reduced2d)?.table.to_csv();
    let src = Path::new("<memory>");
    let (header, rows) = Table::from_csv_reader(csv.as_bytes(), src)?;
    let via_csv = analyze_series(&series_from_csv(&header, &rows, src)?, &v.spec, &v.cut)?;
    Ok(report_distance(&direct, &via_csv))
}

/// Largest field-wise difference between two reports.
pub fn report_distance(a: &ReportJson, b: &ReportJson) -> f64 {
    let fields = |r: &ReportJson| {
        [
            r.measured_mean_radius,
            r.predicted_radius,
            r.base_radius,
            r.measured_angular_velocity,
            r.predicted_angular_velocity,
            r.predicted_period,
            r.oscillations_per_cycle as f64,
            r.radius_relative_error,
            r.angular_velocity_relative_error,
        ]
    };
    fields(a)
        .iter()
        .zip(fields(b))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Runs [`verify`] and returns the table; any failed check is an error
/// carrying the count.
pub fn run_verify(cfg: &RunConfig, opts: Options) -> Result<(String, Result<()>)> {
    let report = verify(cfg, opts)?;
    let text = report.render();
    let status = match report.failed() {
        0 => Ok(()),
        n => Err(CliError::Verification(n)),
    };
    Ok((text, status))
}
