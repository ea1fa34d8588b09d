//! Integration of the full, reduced and polar systems.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::manifold::ManifoldQuadratic;
use crate::model::{full_rhs, State3, SystemSpec};

/// Reduced planar field on the manifold for the default coupling profile:
/// `ẋ = (γ - r²)x - y + y h`, `ẏ = x + (γ - r²)y + x h`.
pub fn reduced_rhs(gamma: f64, m: &ManifoldQuadratic, p: [f64; 2]) -> [f64; 2] {
    let [x, y] = p;
    let g = gamma - (x * x + y * y);
    let h = m.eval(x, y);
    [g * x - y + y * h, x + g * y + x * h]
}

/// Planar part of `full_rhs` restricted to `z = h(x, y)`; valid for any
/// coupling profile and either family.
pub fn restricted_rhs(spec: &SystemSpec, m: &ManifoldQuadratic, p: [f64; 2]) -> Result<[f64; 2]> {
    let [x, y] = p;
    let d = full_rhs(spec, State3::new(x, y, m.eval(x, y)))?;
    Ok([d.x, d.y])
}

/// `λ(λ + 2γ) + 2γ(λ + 2γ) + 4`.
pub fn manifold_denominator(gamma: f64, lambda: f64) -> f64 {
    let s = lambda + 2.0 * gamma;
    lambda * s + 2.0 * gamma * s + 4.0
}

/// Polar form `(Ṙ, θ̇)` of the reduced λ–ω system with the default couplings.
pub fn polar_rhs(gamma: f64, lambda: f64, r: f64, theta: f64) -> Result<[f64; 2]> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius must be >= 0, got {r}")));
    }
    let s = lambda + 2.0 * gamma;
    let d = manifold_denominator(gamma, lambda);
    let (s4, c4) = (4.0 * theta).sin_cos();
    let (s2, c2) = (2.0 * theta).sin_cos();
    let r2 = r * r;
    let r_dot = (gamma - r2) * r + r2 * r * (-s4 / 2.0 - s / 4.0 * c4 + s / 4.0) / d;
    let theta_dot = 1.0 + r2 * c2 * (-c2 + s2 / 2.0 * s) / d;
    Ok([r_dot, theta_dot])
}

/// Polar form of an arbitrary planar field.
///
/// At `R = 0` the angular rate is taken from the linearisation `A`, i.e.
/// `u × A u` with `u = (cos θ, sin θ)`.
pub fn polar_from_cartesian<F>(field: F, linear: [[f64; 2]; 2], r: f64, theta: f64) -> Result<[f64; 2]>
where
    F: Fn([f64; 2]) -> Result<[f64; 2]>,
{
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius must be >= 0, got {r}")));
    }
    let (sn, cs) = theta.sin_cos();
    if r == 0.0 {
        let ax = linear[0][0] * cs + linear[0][1] * sn;
        let ay = linear[1][0] * cs + linear[1][1] * sn;
        return Ok([0.0, cs * ay - sn * ax]);
    }
    let [dx, dy] = field([r * cs, r * sn])?;
    Ok([cs * dx + sn * dy, (cs * dy - sn * dx) / r])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with a maximum step.
    Rk4 { step: f64 },
    /// Dormand–Prince 5(4) with mixed absolute/relative tolerance.
    Rk45 { tolerance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_end: f64,
    pub sample_interval: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk45 { tolerance: 1e-9 },
            t_end: 100.0,
            sample_interval: 0.01,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let (name, v) = match self.method {
            Method::Rk4 { step } => ("step", step),
            Method::Rk45 { tolerance } => ("tolerance", tolerance),
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Domain(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            return Err(Error::Domain(format!(
                "sample_interval must be > 0, got {}",
                self.sample_interval
            )));
        }
        Ok(())
    }

    /// Output times `0, Δ, 2Δ, ...` plus `t_end` if it is not on the grid.
    pub fn sample_times(&self) -> Vec<f64> {
        let dt = self.sample_interval;
        let n = (self.t_end / dt * (1.0 + 1e-12)).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|i| (i as f64 * dt).min(self.t_end)).collect();
        let last = *times.last().unwrap();
        if self.t_end - last > 1e-9 * dt {
            times.push(self.t_end);
        }
        times.dedup();
        times
    }
}

/// Sampled solution of an autonomous ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, [f64; N])> {
        Some((*self.times.last()?, *self.states.last()?))
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

fn finite<const N: usize>(v: &[f64; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn rk4_step<const N: usize, F>(f: &mut F, y: &[f64; N], h: f64) -> [f64; N]
where
    F: FnMut(&[f64; N]) -> [f64; N],
{
    let k1 = f(y);
    let k2 = f(&axpy(y, h, &[(0.5, &k1)]));
    let k3 = f(&axpy(y, h, &[(0.5, &k2)]));
    let k4 = f(&axpy(y, h, &[(1.0, &k3)]));
    axpy(
        y,
        h,
        &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
    )
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One DP5 step: returns the fifth-order solution and the embedded error estimate.
fn dopri_step<const N: usize, F>(f: &mut F, y: &[f64; N], h: f64) -> ([f64; N], [f64; N])
where
    F: FnMut(&[f64; N]) -> [f64; N],
{
    let k1 = f(y);
    let k2 = f(&axpy(y, h, &[(A21, &k1)]));
    let k3 = f(&axpy(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(&axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(&axpy(
        y,
        h,
        &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ));
    let y5 = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(&y5);
    let err = axpy(
        &[0.0; N],
        h,
        &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
    );
    (y5, err)
}

const MAX_STEPS: usize = 50_000_000;

/// Integrates `ẏ = f(y)` from `t = 0`, sampling at `cfg.sample_times()`.
///
/// Adaptive steps are clipped so that every sample time is hit exactly; the
/// unclipped step proposal carries over to the next interval.
pub fn integrate<const N: usize, F>(mut f: F, y0: [f64; N], cfg: &IntegratorConfig) -> Result<Trajectory<N>>
where
    F: FnMut(&[f64; N]) -> [f64; N],
{
    cfg.validate()?;
    if !finite(&y0) {
        return Err(Error::Integration {
            t_last: 0.0,
            reason: "initial state is not finite".into(),
        });
    }
    let times = cfg.sample_times();
    let mut states = Vec::with_capacity(times.len());
    states.push(y0);

    let mut y = y0;
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut h_prop = match cfg.method {
        Method::Rk4 { step } => step,
        Method::Rk45 { tolerance } => (0.1 * tolerance.powf(0.2)).min(cfg.sample_interval),
    };
    let fail = |t: f64, reason: &str| Error::Integration {
        t_last: t,
        reason: reason.to_string(),
    };

    for &t_next in &times[1..] {
        match cfg.method {
            Method::Rk4 { step } => {
                let span = t_next - t;
                let n = (span / step).ceil().max(1.0) as usize;
                let h = span / n as f64;
                for _ in 0..n {
                    let next = rk4_step(&mut f, &y, h);
                    if !finite(&next) {
                        return Err(fail(t, "state became non-finite"));
                    }
                    y = next;
                }
            }
            Method::Rk45 { tolerance } => {
                let mut tc = t;
                while tc < t_next {
                    steps += 1;
                    if steps > MAX_STEPS {
                        return Err(fail(tc, "step budget exhausted"));
                    }
                    let remaining = t_next - tc;
                    let last = h_prop >= remaining;
                    let h = if last { remaining } else { h_prop };
                    if h <= 1e-14 * tc.abs().max(1.0) && !last {
                        return Err(fail(tc, "step size underflow"));
                    }
                    let (y5, e) = dopri_step(&mut f, &y, h);
                    let err = if finite(&y5) && finite(&e) {
                        (0..N)
                            .map(|i| e[i].abs() / (tolerance * (1.0 + y[i].abs().max(y5[i].abs()))))
                            .fold(0.0, f64::max)
                    } else {
                        f64::INFINITY
                    };
                    if err <= 1.0 {
                        y = y5;
                        tc = if last { t_next } else { tc + h };
                        let factor = if err == 0.0 {
                            5.0
                        } else {
                            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        // Do not let a short clipped step shrink the proposal.
                        h_prop = if last { h_prop.max(h * factor) } else { h * factor };
                    } else {
                        let factor = if err.is_finite() {
                            (0.9 * err.powf(-0.2)).max(0.1)
                        } else {
                            0.1
                        };
                        h_prop = h * factor;
                        if h_prop <= 1e-14 * tc.abs().max(1.0) {
                            return Err(fail(tc, "step size underflow"));
                        }
                    }
                }
            }
        }
        t = t_next;
        states.push(y);
    }
    Ok(Trajectory { times, states })
}

/// `(t, R, θ)` samples with θ unwrapped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolarSeries {
    pub times: Vec<f64>,
    pub radius: Vec<f64>,
    pub theta: Vec<f64>,
}

impl PolarSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Builds a series from planar points, unwrapping the angle by
    /// nearest-branch continuation. A sample exactly at the origin keeps the
    /// previous angle.
    pub fn from_points<I>(times: Vec<f64>, points: I) -> Self
    where
        I: IntoIterator<Item = [f64; 2]>,
    {
        let mut radius = Vec::with_capacity(times.len());
        let mut theta: Vec<f64> = Vec::with_capacity(times.len());
        for [x, y] in points {
            let r = x.hypot(y);
            let prev = theta.last().copied();
            let th = if r == 0.0 {
                prev.unwrap_or(0.0)
            } else {
                let raw = y.atan2(x);
                match prev {
                    None => raw,
                    Some(p) => p + wrap_angle(raw - p),
                }
            };
            radius.push(r);
            theta.push(th);
        }
        Self { times, radius, theta }
    }
}

/// Maps an angle into `(-π, π]`.
fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Polar view of a planar trajectory.
pub fn to_polar(traj: &Trajectory<2>) -> PolarSeries {
    PolarSeries::from_points(traj.times.clone(), traj.states.iter().copied())
}

/// Polar view of the `(x, y)` projection of a 3-D trajectory.
pub fn to_polar_projected(traj: &Trajectory<3>) -> PolarSeries {
    PolarSeries::from_points(traj.times.clone(), traj.states.iter().map(|s| [s[0], s[1]]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{solve_lambda_omega_manifold, ManifoldQuadratic};
    use crate::model::{Coupling, Couplings};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn m41() -> ManifoldQuadratic {
        solve_lambda_omega_manifold(4.0, 1.0, &Coupling::unit(Coupling::XY))
            .unwrap()
            .generic
    }

    #[test]
    fn reduced_hand_values() {
        let m = m41();
        assert_eq!(reduced_rhs(4.0, &m, [0.0, 0.0]), [0.0, 0.0]);
        let [dx, dy] = reduced_rhs(4.0, &m, [1.0, 0.0]);
        assert_abs_diff_eq!(dx, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dy, 84.0 / 85.0, epsilon = 1e-15);
        let [dx, dy] = reduced_rhs(4.0, &m, [0.0, 2.0]);
        assert_abs_diff_eq!(dx, -162.0 / 85.0, epsilon = 1e-14);
        assert_abs_diff_eq!(dy, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn restricted_matches_reduced_for_default_profile() {
        let spec = SystemSpec::lambda_omega(4.0, 1.0);
        let m = m41();
        for p in [[0.3, -1.2], [2.0, 0.5], [-1.0, -1.0]] {
            let a = reduced_rhs(4.0, &m, p);
            let b = restricted_rhs(&spec, &m, p).unwrap();
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-14);
            assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-14);
        }
    }

    #[test]
    fn polar_hand_values() {
        assert_eq!(polar_rhs(4.0, 1.0, 0.0, 1.3).unwrap(), [0.0, 1.0]);
        let [r, t] = polar_rhs(4.0, 1.0, 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t, 81.0 / 85.0, epsilon = 1e-15);
        let [r, t] = polar_rhs(4.0, 1.0, 2.0, PI / 4.0).unwrap();
        assert_abs_diff_eq!(r, 36.0 / 85.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t, 1.0, epsilon = 1e-15);
        assert!(polar_rhs(4.0, 1.0, -0.1, 0.0).is_err());
    }

    #[test]
    fn velocity_extrema_quarter_turn_apart() {
        // Ṙ(θ) + Ṙ(θ + π/4) = 2 × (θ-averaged Ṙ), which vanishes on the mean radius.
        let (g, l) = (4.0, 1.0);
        let d = manifold_denominator(g, l);
        let r = (g / (1.0 - (l + 2.0 * g) / (4.0 * d))).sqrt();
        for i in 0..16 {
            let th = i as f64 * 0.37;
            let a = polar_rhs(g, l, r, th).unwrap()[0];
            let b = polar_rhs(g, l, r, th + PI / 4.0).unwrap()[0];
            assert_abs_diff_eq!(a + b, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn polar_from_cartesian_matches_closed_form() {
        let m = m41();
        let lin = [[4.0, -1.0], [1.0, 4.0]];
        for (r, th) in [(0.0, 0.4), (0.5, 1.0), (2.0, 2.5), (3.0, -0.7)] {
            let a = polar_rhs(4.0, 1.0, r, th).unwrap();
            let b = polar_from_cartesian(|p| Ok(reduced_rhs(4.0, &m, p)), lin, r, th).unwrap();
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-12);
            assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn sample_grid() {
        let cfg = IntegratorConfig {
            t_end: 1.0,
            sample_interval: 0.25,
            ..Default::default()
        };
        assert_eq!(cfg.sample_times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let cfg = IntegratorConfig {
            t_end: 0.6,
            sample_interval: 0.25,
            ..Default::default()
        };
        assert_eq!(cfg.sample_times(), vec![0.0, 0.25, 0.5, 0.6]);
        let cfg = IntegratorConfig {
            t_end: 0.0,
            ..Default::default()
        };
        assert_eq!(cfg.sample_times(), vec![0.0]);
    }

    #[test]
    fn exponential_decay_rk45() {
        let cfg = IntegratorConfig {
            method: Method::Rk45 { tolerance: 1e-10 },
            t_end: 2f64.ln(),
            sample_interval: 2f64.ln(),
        };
        let tr = integrate(|y: &[f64; 1]| [-y[0]], [1.0], &cfg).unwrap();
        assert_eq!(tr.len(), 2);
        assert_abs_diff_eq!(tr.states[1][0], 0.5, epsilon = 1e-8);
    }

    #[test]
    fn harmonic_period_return() {
        let cfg = IntegratorConfig {
            method: Method::Rk45 { tolerance: 1e-10 },
            t_end: 2.0 * PI,
            sample_interval: 0.01,
        };
        let tr = integrate(|s: &[f64; 2]| [s[1], -s[0]], [1.0, 0.0], &cfg).unwrap();
        let (t, y) = tr.last().unwrap();
        assert_eq!(t, 2.0 * PI);
        assert!((y[0] - 1.0).abs() <= 1e-6 && y[1].abs() <= 1e-6, "{y:?}");
    }

    fn rk4_error(step: f64) -> f64 {
        let cfg = IntegratorConfig {
            method: Method::Rk4 { step },
            t_end: 1.0,
            sample_interval: 1.0,
        };
        let tr = integrate(|y: &[f64; 1]| [-y[0]], [1.0], &cfg).unwrap();
        (tr.states[1][0] - (-1f64).exp()).abs()
    }

    #[test]
    fn rk4_is_fourth_order() {
        let steps = [0.1, 0.05, 0.025];
        let errs: Vec<f64> = steps.iter().map(|&h| rk4_error(h)).collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 3.9, "order {order}");
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let cfg = IntegratorConfig {
            method: Method::Rk4 { step: 0.01 },
            t_end: 2.0,
            sample_interval: 0.1,
        };
        // ẏ = y², y(0) = 1 explodes at t = 1.
        let err = integrate(|y: &[f64; 1]| [y[0] * y[0]], [1.0], &cfg).unwrap_err();
        match err {
            Error::Integration { t_last, .. } => assert!(t_last > 0.5 && t_last <= 1.1),
            other => panic!("unexpected {other:?}"),
        }
        let cfg = IntegratorConfig {
            method: Method::Rk45 { tolerance: 1e-8 },
            ..cfg
        };
        assert!(matches!(
            integrate(|y: &[f64; 1]| [y[0] * y[0]], [1.0], &cfg),
            Err(Error::Integration { .. })
        ));
    }

    #[test]
    fn invalid_config() {
        let cfg = IntegratorConfig {
            method: Method::Rk45 { tolerance: 0.0 },
            ..Default::default()
        };
        assert!(integrate(|y: &[f64; 1]| [-y[0]], [1.0], &cfg).is_err());
        let cfg = IntegratorConfig {
            sample_interval: -1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn polar_conversion() {
        let tr = Trajectory {
            times: vec![0.0, 1.0, 2.0],
            states: vec![[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]],
        };
        let ps = to_polar(&tr);
        assert_eq!(ps.radius, vec![1.0, 2.0, 0.0]);
        assert_eq!(ps.theta[0], 0.0);
        assert_abs_diff_eq!(ps.theta[1], PI / 2.0);
        // origin carries the previous angle
        assert_eq!(ps.theta[2], ps.theta[1]);
    }

    #[test]
    fn unwrapped_circle() {
        let times: Vec<f64> = (0..=700).map(|i| i as f64 * 0.01).collect();
        let ps = PolarSeries::from_points(times.clone(), times.iter().map(|t| [t.cos(), t.sin()]));
        assert!(ps.theta.windows(2).all(|w| w[1] > w[0]));
        assert!(ps.theta.last().unwrap() - ps.theta[0] > 2.0 * PI);
        for (t, th) in times.iter().zip(&ps.theta) {
            assert_abs_diff_eq!(t, th, epsilon = 1e-12);
        }
    }

    #[test]
    fn cartesian_and_polar_integrations_agree() {
        let (g, l) = (4.0, 1.0);
        let m = m41();
        let cfg = IntegratorConfig {
            method: Method::Rk45 { tolerance: 1e-11 },
            t_end: 50.0,
            sample_interval: 0.01,
        };
        let (r0, th0) = (0.5f64, 0.3f64);
        let cart = integrate(
            |p: &[f64; 2]| reduced_rhs(g, &m, *p),
            [r0 * th0.cos(), r0 * th0.sin()],
            &cfg,
        )
        .unwrap();
        let pol = integrate(
            |s: &[f64; 2]| polar_rhs(g, l, s[0], s[1]).unwrap_or([f64::NAN; 2]),
            [r0, th0],
            &cfg,
        )
        .unwrap();
        let ps = to_polar(&cart);
        for (a, b) in ps.radius.iter().zip(&pol.states) {
            assert!((a - b[0]).abs() <= 1e-4, "{a} vs {}", b[0]);
        }
    }

    #[test]
    fn uncoupled_radius_is_monotone_towards_sqrt_gamma() {
        let spec = SystemSpec::lambda_omega(4.0, 1.0).with_couplings(Couplings::zero());
        let cfg = IntegratorConfig {
            t_end: 10.0,
            sample_interval: 0.05,
            ..Default::default()
        };
        for r0 in [0.1, 1.0, 2.5, 5.9] {
            let tr = integrate(
                |p: &[f64; 2]| restricted_rhs(&spec, &ManifoldQuadratic::ZERO, *p).unwrap(),
                [r0, 0.0],
                &cfg,
            )
            .unwrap();
            let r = to_polar(&tr).radius;
            let up = r0 < 2.0;
            // Integrator noise near the attractor is ~1e-12.
            assert!(r
                .windows(2)
                .all(|w| if up { w[1] >= w[0] - 1e-9 } else { w[1] <= w[0] + 1e-9 }));
            assert_abs_diff_eq!(*r.last().unwrap(), 2.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn rotation_never_reverses_on_attractor() {
        let (g, l) = (4.0, 1.0);
        let d = manifold_denominator(g, l);
        let s = l + 2.0 * g;
        // θ̇ ≥ 1 - R²(1 + s/2)/D on the band swept by the attractor.
        for i in 0..=200 {
            let r = 1.9 + 0.3 * i as f64 / 200.0;
            let bound = 1.0 - r * r * (1.0 + s / 2.0) / d;
            assert!(bound > 0.0);
            for j in 0..64 {
                let th = j as f64 * PI / 32.0;
                let td = polar_rhs(g, l, r, th).unwrap()[1];
                assert!(td >= bound - 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn wrap_stays_in_branch(a in -100.0..100.0f64) {
            let w = wrap_angle(a);
            prop_assert!(w > -PI - 1e-12 && w <= PI + 1e-12);
            let k = ((a - w) / (2.0 * PI)).round();
            prop_assert!((a - w - 2.0 * PI * k).abs() < 1e-9);
        }
    }
}
