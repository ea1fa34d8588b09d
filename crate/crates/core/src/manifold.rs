//! Quadratic invariant manifold `z = h(x, y) = a0 x² + a1 xy + a2 y²`.
//!
//! Substituting `z = h` into `ż - h_x ẋ - h_y ẏ = 0` and collecting the
//! `x², xy, y²` coefficients gives a 3×3 linear system in `(a0, a1, a2)`.
//! Only the linear planar block, λ and the `x², y², xy` entries of `f3`
//! reach that order; every other coupling enters at cubic order or higher.

use nalgebra::{Matrix3, Vector3};

use crate::error::{ensure_finite, Error, Result};
use crate::model::{full_rhs, Coupling, Family, LinearPart, State3, SystemSpec};

/// Generic solve and closed form must agree to this (relative to coefficient size).
pub const CROSS_CHECK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ManifoldQuadratic {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl ManifoldQuadratic {
    pub const ZERO: Self = Self {
        a0: 0.0,
        a1: 0.0,
        a2: 0.0,
    };

    pub const fn new(a0: f64, a1: f64, a2: f64) -> Self {
        Self { a0, a1, a2 }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a0 * x * x + self.a1 * x * y + self.a2 * y * y
    }

    /// `(∂h/∂x, ∂h/∂y)`.
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        (2.0 * self.a0 * x + self.a1 * y, self.a1 * x + 2.0 * self.a2 * y)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.a0, self.a1, self.a2]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Manifold evaluated at a planar point.
pub fn manifold_eval(m: &ManifoldQuadratic, p: [f64; 2]) -> f64 {
    m.eval(p[0], p[1])
}

/// Both routes to the manifold coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldSolution {
    /// From the programmatically assembled 3×3 system.
    pub generic: ManifoldQuadratic,
    /// From the closed-form expressions.
    pub closed_form: ManifoldQuadratic,
}

impl ManifoldSolution {
    fn checked(generic: ManifoldQuadratic, closed_form: ManifoldQuadratic) -> Result<Self> {
        let sol = Self { generic, closed_form };
        let scale = 1.0_f64.max(generic.max_abs());
        if sol.discrepancy() > CROSS_CHECK_TOL * scale {
            return Err(Error::CrossCheck {
                discrepancy: sol.discrepancy(),
            });
        }
        Ok(sol)
    }

    pub fn coefficients(&self) -> ManifoldQuadratic {
        self.generic
    }

    pub fn discrepancy(&self) -> f64 {
        self.generic.max_abs_diff(&self.closed_form)
    }
}

/// Order-two homological operator for the monomial basis `(x², xy, y²)`.
///
/// Column `j` holds the `(x², xy, y²)` coefficients of `-λ m_j - L m_j`,
/// where `L` is the Lie derivative along the planar linear field.
pub fn homological_matrix(linear: &LinearPart, lambda: f64) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for j in 0..3 {
        // m_j = x^p y^q, index of x^a y^(2-a) is 2 - a.
        let p = (2 - j) as f64;
        let q = j as f64;
        m[(j, j)] += -lambda - p * linear.xx - q * linear.yy;
        if j < 2 {
            // p·xy · x^(p-1) y^(q+1)
            m[(j + 1, j)] -= p * linear.xy;
        }
        if j > 0 {
            // q·yx · x^(p+1) y^(q-1)
            m[(j - 1, j)] -= q * linear.yx;
        }
    }
    m
}

fn forcing(e: &Coupling) -> Vector3<f64> {
    Vector3::new(e.0[Coupling::X2], e.0[Coupling::XY], e.0[Coupling::Y2])
}

fn solve_generic(
    linear: &LinearPart,
    lambda: f64,
    e: &Coupling,
    param: &'static str,
    value: f64,
) -> Result<ManifoldQuadratic> {
    let m = homological_matrix(linear, lambda);
    let singular = Error::Singular { param, value, lambda };
    let norm = m.abs().max();
    if m.determinant().abs() <= 1e-13 * norm.powi(3) {
        return Err(singular);
    }
    let a = m.lu().solve(&(-forcing(e))).ok_or(singular)?;
    Ok(ManifoldQuadratic::new(a[0], a[1], a[2]))
}

fn check_inputs(param: &str, value: f64, lambda: f64, e: &Coupling) -> Result<()> {
    ensure_finite(&[value], param)?;
    ensure_finite(&e.0, "e coefficients")?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
    }
    Ok(())
}

/// Closed form for the λ–ω family with general `e0, e1, e3`.
pub fn lambda_omega_closed_form(gamma: f64, lambda: f64, e: &Coupling) -> Result<ManifoldQuadratic> {
    check_inputs("gamma", gamma, lambda, e)?;
    let (e0, e1, e3) = (e.0[Coupling::X2], e.0[Coupling::Y2], e.0[Coupling::XY]);
    let s = lambda + 2.0 * gamma;
    if s == 0.0 {
        return Err(Error::Singular {
            param: "gamma",
            value: gamma,
            lambda,
        });
    }
    let d = lambda * s + 2.0 * gamma * s + 4.0;
    let common = e0 * s * s + 2.0 * (e0 + e1) - e3 * s;
    Ok(ManifoldQuadratic {
        a0: (e0 * s + 2.0 * (e0 + e1) / s - e3) / d,
        a1: e0 - common / d,
        a2: (e0 + e1) / s - common / (s * d),
    })
}

/// Closed form for the Liénard family with general `e0, e1, e3`.
pub fn lienard_closed_form(k: f64, lambda: f64, e: &Coupling) -> Result<ManifoldQuadratic> {
    check_inputs("k", k, lambda, e)?;
    let (e0, e1, e3) = (e.0[Coupling::X2], e.0[Coupling::Y2], e.0[Coupling::XY]);
    let q = lambda + 2.0 * k;
    if q.abs() <= f64::EPSILON * (lambda.abs() + 2.0 * k.abs()) {
        return Err(Error::Pole { k, lambda });
    }
    let delta = lambda * lambda + 2.0 + 2.0 * lambda / q + lambda * k;
    if delta == 0.0 {
        return Err(Error::Singular {
            param: "k",
            value: k,
            lambda,
        });
    }
    Ok(ManifoldQuadratic {
        a0: (lambda * e0 + e3 + 2.0 * (e0 + e1) / q + e0 * k) / delta,
        a1: (lambda * e3 + 2.0 * lambda * e1 / q - 2.0 * e0) / delta,
        a2: (lambda * lambda * e1 + 2.0 * (e0 + e1) + lambda * k * e1 - lambda * e3) / (q * delta),
    })
}

/// Manifold of the λ–ω family. Only `e0 (x²)`, `e1 (y²)` and `e3 (xy)` are read.
pub fn solve_lambda_omega_manifold(gamma: f64, lambda: f64, e: &Coupling) -> Result<ManifoldSolution> {
    let closed = lambda_omega_closed_form(gamma, lambda, e)?;
    let spec = SystemSpec::lambda_omega(gamma, lambda);
    let generic = solve_generic(&spec.linear_part(), lambda, e, "gamma", gamma)?;
    ManifoldSolution::checked(generic, closed)
}

/// Manifold of the Liénard family. The damping nonlinearity `F(x, y) y` is
/// cubic and does not enter.
pub fn solve_lienard_manifold(k: f64, lambda: f64, e: &Coupling) -> Result<ManifoldSolution> {
    let closed = lienard_closed_form(k, lambda, e)?;
    let spec = SystemSpec::lienard(k, lambda);
    let generic = solve_generic(&spec.linear_part(), lambda, e, "k", k)?;
    ManifoldSolution::checked(generic, closed)
}

/// Manifold for whichever family `spec` describes.
pub fn solve_for_spec(spec: &SystemSpec) -> Result<ManifoldSolution> {
    let e = &spec.couplings.e;
    match &spec.family {
        Family::LambdaOmega { gamma } => solve_lambda_omega_manifold(*gamma, spec.lambda_stable, e),
        Family::Lienard { k, .. } => solve_lienard_manifold(*k, spec.lambda_stable, e),
    }
}

/// Invariance defect `ż - h_x ẋ - h_y ẏ` at `(x, y, h(x, y))`.
pub fn manifold_residual(spec: &SystemSpec, m: &ManifoldQuadratic, p: [f64; 2]) -> Result<f64> {
    let [x, y] = p;
    let d = full_rhs(spec, State3::new(x, y, m.eval(x, y)))?;
    let (hx, hy) = m.gradient(x, y);
    Ok(d.z - hx * d.x - hy * d.y)
}

/// Least-squares slope of `log|residual(ε·(1, 1))|` against `log ε`.
///
/// Correct coefficients leave only cubic-and-higher terms, so the slope is ≥ 3;
/// an error in the quadratic coefficients pins it near 2.
pub fn residual_slope(spec: &SystemSpec, m: &ManifoldQuadratic, eps: &[f64]) -> Result<f64> {
    if eps.len() < 2 || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Domain("need at least two positive epsilons".into()));
    }
    let mut pts = Vec::with_capacity(eps.len());
    for &e in eps {
        let r = manifold_residual(spec, m, [e, e])?.abs();
        // An exactly vanishing residual is steeper than any power.
        pts.push((e.ln(), r.max(f64::MIN_POSITIVE).ln()));
    }
    Ok(loglog_slope(&pts))
}

fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
