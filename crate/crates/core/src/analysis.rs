//! Limit-cycle statistics: closed-form predictions, averaging oracles and
//! estimators over simulated polar series.

use std::f64::consts::PI;

use crate::dynamics::{manifold_denominator, polar_from_cartesian, polar_rhs, restricted_rhs};
use crate::error::{ensure_finite, Error, Result};
use crate::manifold::solve_for_spec;
use crate::model::{Family, SystemSpec, VdpSpec};

pub use crate::dynamics::PolarSeries;

/// θ-samples for periodic trapezoid averages.
pub const QUADRATURE_POINTS: usize = 4096;
/// Bracket width at which bisection stops.
pub const BISECTION_TOL: f64 = 1e-12;
/// Maxima smaller than this fraction of the mean radius are ripple.
pub const PROMINENCE_FLOOR: f64 = 1e-4;
/// Full rotations required after the transient for radius/velocity estimates.
pub const MIN_ROTATIONS: usize = 3;

/// Portion of a series treated as transient: the first `fraction` of samples
/// or the first `min_time` time units, whichever is longer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientCut {
    pub fraction: f64,
    pub min_time: f64,
}

impl Default for TransientCut {
    fn default() -> Self {
        Self {
            fraction: 0.5,
            min_time: 20.0,
        }
    }
}

impl TransientCut {
    /// Keep everything.
    pub const NONE: Self = Self {
        fraction: 0.0,
        min_time: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.fraction) {
            return Err(Error::Domain(format!(
                "transient fraction must be in [0, 1), got {}",
                self.fraction
            )));
        }
        if !(self.min_time.is_finite() && self.min_time >= 0.0) {
            return Err(Error::Domain(format!(
                "transient time must be >= 0, got {}",
                self.min_time
            )));
        }
        Ok(())
    }

    /// First retained sample index.
    pub fn start_index(&self, times: &[f64]) -> usize {
        let n = times.len();
        let by_fraction = (self.fraction * n as f64).ceil() as usize;
        let t0 = times.first().copied().unwrap_or(0.0);
        let by_time = times.partition_point(|&t| t - t0 < self.min_time);
        by_fraction.max(by_time)
    }
}

fn check_series(series: &PolarSeries) -> Result<()> {
    let n = series.times.len();
    if series.radius.len() != n || series.theta.len() != n {
        return Err(Error::Domain("polar series columns differ in length".into()));
    }
    if series.times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("times must be strictly increasing".into()));
    }
    ensure_finite(&series.radius, "radius")?;
    ensure_finite(&series.theta, "theta")?;
    Ok(())
}

/// Integer number of full rotations measured from the first retained sample.
#[derive(Debug, Clone, Copy)]
struct RotationSpan {
    start: usize,
    turns: usize,
    /// +1 for counter-clockwise rotation.
    direction: f64,
}

impl RotationSpan {
    fn new(series: &PolarSeries, cut: &TransientCut, min_turns: usize) -> Result<Self> {
        check_series(series)?;
        cut.validate()?;
        let start = cut.start_index(&series.times);
        let n = series.len();
        if start + 2 > n {
            return Err(Error::InsufficientData(format!(
                "{} samples remain after the transient",
                n.saturating_sub(start)
            )));
        }
        let sweep = series.theta[n - 1] - series.theta[start];
        let turns = (sweep.abs() / (2.0 * PI)).floor() as usize;
        if turns < min_turns {
            return Err(Error::InsufficientData(format!(
                "{turns} full rotation(s) after the transient, need {min_turns}"
            )));
        }
        Ok(Self {
            start,
            turns,
            direction: if sweep >= 0.0 { 1.0 } else { -1.0 },
        })
    }

    fn theta_at(&self, series: &PolarSeries, turns: usize) -> f64 {
        series.theta[self.start] + self.direction * 2.0 * PI * turns as f64
    }

    /// Segment `j` containing the crossing of `target` and the interpolation fraction.
    fn crossing(&self, series: &PolarSeries, target: f64) -> (usize, f64) {
        let th = &series.theta;
        let reached = |v: f64| self.direction * (v - target) >= 0.0;
        let j = (self.start..th.len() - 1)
            .find(|&j| !reached(th[j]) && reached(th[j + 1]))
            .unwrap_or(th.len() - 2);
        let f = ((target - th[j]) / (th[j + 1] - th[j])).clamp(0.0, 1.0);
        (j, f)
    }
}

/// Time-averaged radius over an integer number of rotations after the
/// transient. The radial ripple repeats every quarter turn, so whole turns
/// hold whole ripple periods.
pub fn estimate_mean_radius(series: &PolarSeries, cut: &TransientCut) -> Result<f64> {
    let span = RotationSpan::new(series, cut, MIN_ROTATIONS)?;
    let (t, r) = (&series.times, &series.radius);
    let (j, f) = span.crossing(series, span.theta_at(series, span.turns));
    let mut area = 0.0;
    for i in span.start..j {
        area += 0.5 * (r[i] + r[i + 1]) * (t[i + 1] - t[i]);
    }
    let t_end = t[j] + f * (t[j + 1] - t[j]);
    let r_end = r[j] + f * (r[j + 1] - r[j]);
    area += 0.5 * (r[j] + r_end) * (t_end - t[j]);
    Ok(area / (t_end - t[span.start]))
}

/// Mean angular velocity `Δθ / Δt` over whole rotations after the transient.
pub fn measure_angular_velocity(series: &PolarSeries, cut: &TransientCut) -> Result<f64> {
    let span = RotationSpan::new(series, cut, MIN_ROTATIONS)?;
    let target = span.theta_at(series, span.turns);
    let (j, f) = span.crossing(series, target);
    let t = &series.times;
    let t_end = t[j] + f * (t[j + 1] - t[j]);
    Ok((target - series.theta[span.start]) / (t_end - t[span.start]))
}

/// Number of prominent radial maxima during the last complete rotation
/// after the transient.
pub fn count_radial_oscillations(series: &PolarSeries, cut: &TransientCut) -> Result<usize> {
    let span = RotationSpan::new(series, cut, 1)?;
    let lo = span.theta_at(series, span.turns - 1);
    let hi = span.theta_at(series, span.turns);
    let r = &series.radius[span.start..];
    let th = &series.theta[span.start..];
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let floor = PROMINENCE_FLOOR * mean.abs();
    let in_window = |v: f64| {
        let (a, b) = (span.direction * (v - lo), span.direction * (v - hi));
        a >= 0.0 && b < 0.0
    };
    let count = (1..r.len() - 1)
        .filter(|&i| in_window(th[i]))
        .filter(|&i| r[i] > r[i - 1] && r[i] > r[i + 1])
        .filter(|&i| prominence(r, i) >= floor)
        .count();
    Ok(count)
}

/// Height of `r[peak]` above the higher of the two lowest points reached
/// before climbing above it on either side.
fn prominence(r: &[f64], peak: usize) -> f64 {
    let h = r[peak];
    let side_min = |it: &mut dyn Iterator<Item = usize>| {
        let mut m = h;
        for i in it {
            if r[i] > h {
                break;
            }
            m = m.min(r[i]);
        }
        m
    };
    let left = side_min(&mut (0..peak).rev());
    let right = side_min(&mut (peak + 1..r.len()));
    h - left.max(right)
}

/// Limit-cycle radius of the planar λ–ω system, `√γ`.
pub fn base_radius(gamma: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::Domain(format!("gamma must be >= 0, got {gamma}")));
    }
    Ok(gamma.sqrt())
}

fn check_positive(gamma: f64, lambda: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be > 0, got {gamma}")));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
    }
    Ok(())
}

/// `(λ + 2γ) / (4D)`, the relative strengthening of the cubic saturation.
fn radial_shift(gamma: f64, lambda: f64) -> Result<f64> {
    check_positive(gamma, lambda)?;
    let shift = (lambda + 2.0 * gamma) / (4.0 * manifold_denominator(gamma, lambda));
    if shift >= 1.0 {
        return Err(Error::Domain(format!("radial shift {shift} must be < 1")));
    }
    Ok(shift)
}

/// Mean radius of the modified limit cycle, `√(γ / (1 - (λ+2γ)/(4D)))`.
pub fn predicted_radius(gamma: f64, lambda: f64) -> Result<f64> {
    let shift = radial_shift(gamma, lambda)?;
    Ok((gamma / (1.0 - shift)).sqrt())
}

/// Averaged angular velocity, `1 - 2γ / (4D - (λ + 2γ))`.
pub fn predicted_angular_velocity(gamma: f64, lambda: f64) -> Result<f64> {
    radial_shift(gamma, lambda)?;
    let d = manifold_denominator(gamma, lambda);
    Ok(1.0 - 2.0 * gamma / (4.0 * d - (lambda + 2.0 * gamma)))
}

pub fn predicted_period(gamma: f64, lambda: f64) -> Result<f64> {
    Ok(2.0 * PI / predicted_angular_velocity(gamma, lambda)?)
}

/// Periodic trapezoid mean of `f` over `[0, 2π)`.
pub fn theta_average<F: Fn(f64) -> f64>(f: F) -> f64 {
    let n = QUADRATURE_POINTS;
    let h = 2.0 * PI / n as f64;
    (0..n).map(|i| f(i as f64 * h)).sum::<f64>() / n as f64
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.signum() != fb.signum() && fa.is_finite() && fb.is_finite()) {
        return Err(Error::NoBracket { lo, hi });
    }
    let mut sa = fa.signum();
    while b - a > BISECTION_TOL {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == sa {
            a = mid;
            sa = fm.signum();
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Radius at which the θ-average of the polar `Ṙ` vanishes, by quadrature and
/// bisection on `[√γ/2, 2√γ]`.
pub fn averaged_radial_root(gamma: f64, lambda: f64) -> Result<f64> {
    check_positive(gamma, lambda)?;
    let root = gamma.sqrt();
    bisect(
        |r| theta_average(|th| polar_rhs(gamma, lambda, r, th).map_or(f64::NAN, |v| v[0])),
        0.5 * root,
        2.0 * root,
    )
}

fn polar_field_for(spec: &SystemSpec) -> Result<impl Fn(f64, f64) -> [f64; 2] + '_> {
    let m = solve_for_spec(spec)?.generic;
    let lin = spec.linear_part();
    let a = [[lin.xx, lin.xy], [lin.yx, lin.yy]];
    Ok(move |r: f64, th: f64| polar_from_cartesian(|p| restricted_rhs(spec, &m, p), a, r, th).unwrap_or([f64::NAN; 2]))
}

/// Same root as [`averaged_radial_root`], for any coupling profile of a λ–ω
/// spec, using the reduced field built from `full_rhs`.
pub fn averaged_radial_root_for(spec: &SystemSpec) -> Result<f64> {
    let gamma = lambda_omega_gamma(spec)?;
    check_positive(gamma, spec.lambda_stable)?;
    let field = polar_field_for(spec)?;
    let root = gamma.sqrt();
    bisect(|r| theta_average(|th| field(r, th)[0]), 0.5 * root, 2.0 * root)
}

/// θ-average of the angular rate at fixed radius.
pub fn averaged_angular_velocity_for(spec: &SystemSpec, radius: f64) -> Result<f64> {
    let field = polar_field_for(spec)?;
    Ok(theta_average(|th| field(radius, th)[1]))
}

/// Averaged Van der Pol radius: root of the θ-mean of
/// `ṙ = -μ r³ cos²θ sin²θ + μ r sin²θ`.
pub fn vdp_averaged_radius(spec: &VdpSpec) -> Result<f64> {
    let mu = spec.mu();
    bisect(
        |r| {
            theta_average(|th| {
                let (s, c) = th.sin_cos();
                -mu * r.powi(3) * c * c * s * s + mu * r * s * s
            })
        },
        1.0,
        4.0,
    )
}

/// Modified Van der Pol radius: the λ–ω prediction at `γ = 4` (`R0 = 2`).
pub fn vdp_modified_radius(lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
    }
    predicted_radius(4.0, lambda)
}

fn lambda_omega_gamma(spec: &SystemSpec) -> Result<f64> {
    match spec.family {
        Family::LambdaOmega { gamma } => Ok(gamma),
        Family::Lienard { .. } => Err(Error::Domain(
            "radius predictions are defined for the lambda-omega family".into(),
        )),
    }
}

/// Averaged predictions for a λ–ω spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub base_radius: f64,
    pub radius: f64,
    pub angular_velocity: f64,
    pub period: f64,
}

/// Closed forms for the default coupling profile, the exact `√γ` and unit
/// rotation without couplings, and numerical averaging of the reduced field
/// for anything else.
pub fn predict(spec: &SystemSpec) -> Result<Prediction> {
    spec.validate()?;
    let gamma = lambda_omega_gamma(spec)?;
    let lambda = spec.lambda_stable;
    check_positive(gamma, lambda)?;
    let base = base_radius(gamma)?;
    let (radius, angular_velocity) = if spec.couplings.is_default_profile() {
        (
            predicted_radius(gamma, lambda)?,
            predicted_angular_velocity(gamma, lambda)?,
        )
    } else if spec.couplings.is_zero() {
        (base, 1.0)
    } else {
        let r = averaged_radial_root_for(spec)?;
        (r, averaged_angular_velocity_for(spec, r)?)
    };
    Ok(Prediction {
        base_radius: base,
        radius,
        angular_velocity,
        period: 2.0 * PI / angular_velocity,
    })
}

/// Measured versus predicted limit-cycle statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisReport {
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

pub fn analyze(series: &PolarSeries, prediction: &Prediction, cut: &TransientCut) -> Result<AnalysisReport> {
    let radius = estimate_mean_radius(series, cut)?;
    let omega = measure_angular_velocity(series, cut)?;
    let count = count_radial_oscillations(series, cut)?;
    let rel = |m: f64, p: f64| (m - p).abs() / p.abs();
    Ok(AnalysisReport {
        measured_mean_radius: radius,
        predicted_radius: prediction.radius,
        base_radius: prediction.base_radius,
        measured_angular_velocity: omega,
        predicted_angular_velocity: prediction.angular_velocity,
        predicted_period: prediction.period,
        oscillations_per_cycle: count,
        radius_relative_error: rel(radius, prediction.radius),
        angular_velocity_relative_error: rel(omega, prediction.angular_velocity),
    })
}
