//! System families and their vector fields.
//!
//! Both 3-D families share the same layout: a planar linear block, a stable
//! third direction `ż = -λz + ...`, and quadratic couplings `f1, f2, f3` over
//! the monomial basis `x², y², z², xy, yz, zx`.

use crate::error::{ensure_finite, Error, Result};

/// Point in phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl State3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Coefficients of one quadratic coupling over `x², y², z², xy, yz, zx`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coupling(pub [f64; 6]);

impl Coupling {
    pub const X2: usize = 0;
    pub const Y2: usize = 1;
    pub const Z2: usize = 2;
    pub const XY: usize = 3;
    pub const YZ: usize = 4;
    pub const ZX: usize = 5;

    pub const ZERO: Self = Self([0.0; 6]);

    /// Coupling with a single unit monomial.
    pub fn unit(index: usize) -> Self {
        let mut c = [0.0; 6];
        c[index] = 1.0;
        Self(c)
    }

    pub fn eval(&self, s: State3) -> f64 {
        let c = &self.0;
        let State3 { x, y, z } = s;
        c[0] * x * x + c[1] * y * y + c[2] * z * z + c[3] * x * y + c[4] * y * z + c[5] * z * x
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

/// The three quadratic couplings `f1` (into ẋ), `f2` (into ẏ) and `f3` (into ż).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub c: Coupling,
    pub d: Coupling,
    pub e: Coupling,
}

impl Couplings {
    pub const fn zero() -> Self {
        Self {
            c: Coupling::ZERO,
            d: Coupling::ZERO,
            e: Coupling::ZERO,
        }
    }

    /// `f1 = yz`, `f2 = zx`, `f3 = xy`: the profile whose reduction gives
    /// `ẋ = ... + y h(x, y)` and `ẏ = ... + x h(x, y)`.
    pub fn default_profile() -> Self {
        Self {
            c: Coupling::unit(Coupling::YZ),
            d: Coupling::unit(Coupling::ZX),
            e: Coupling::unit(Coupling::XY),
        }
    }

    pub fn is_default_profile(&self) -> bool {
        *self == Self::default_profile()
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero() && self.d.is_zero() && self.e.is_zero()
    }

    fn all(&self) -> impl Iterator<Item = f64> + '_ {
        self.c.0.iter().chain(&self.d.0).chain(&self.e.0).copied()
    }
}

impl Default for Couplings {
    fn default() -> Self {
        Self::default_profile()
    }
}

/// One term `coeff · x^x_pow · y^y_pow` of the Liénard damping polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub x_pow: u32,
    pub y_pow: u32,
}

/// Nonlinear part `F(x, y)` of the Liénard damping, after the constant `-k`
/// has been split off. Only terms of total degree ≥ 2 are allowed, so
/// `F(0, 0) = 0` and `F(x, y) y` starts at cubic order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Damping {
    terms: Vec<Monomial>,
}

impl Damping {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(terms: Vec<Monomial>) -> Result<Self> {
        for t in &terms {
            if !t.coeff.is_finite() {
                return Err(Error::Domain("damping coefficient must be finite".into()));
            }
            if t.x_pow + t.y_pow < 2 {
                return Err(Error::Domain(format!(
                    "damping term x^{} y^{} has degree < 2",
                    t.x_pow, t.y_pow
                )));
            }
        }
        Ok(Self { terms })
    }

    /// `F(x, y) = μ x²`; with `k = μ` the Liénard family becomes Van der Pol.
    pub fn van_der_pol(mu: f64) -> Self {
        Self {
            terms: vec![Monomial {
                coeff: mu,
                x_pow: 2,
                y_pow: 0,
            }],
        }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * x.powi(t.x_pow as i32) * y.powi(t.y_pow as i32))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    LambdaOmega3D,
    Lienard3D,
}

/// Planar parameterisation of the 3-D system.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `ẋ = (γ - r²)x - y`, `ẏ = x + (γ - r²)y`.
    LambdaOmega { gamma: f64 },
    /// `ẋ = y`, `ẏ = ky - x - F(x, y) y`.
    Lienard { k: f64, damping: Damping },
}

/// Linear part of the planar block: `ẋ = xx·x + xy·y`, `ẏ = yx·x + yy·y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPart {
    pub xx: f64,
    pub xy: f64,
    pub yx: f64,
    pub yy: f64,
}

impl LinearPart {
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.xx * x + self.xy * y, self.yx * x + self.yy * y)
    }
}

/// Full parameterisation of a 3-D coupled oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub family: Family,
    /// Magnitude λ of the stable eigenvalue `-λ`.
    pub lambda_stable: f64,
    pub couplings: Couplings,
}

impl SystemSpec {
    /// λ–ω system with the default coupling profile.
    pub fn lambda_omega(gamma: f64, lambda_stable: f64) -> Self {
        Self {
            family: Family::LambdaOmega { gamma },
            lambda_stable,
            couplings: Couplings::default_profile(),
        }
    }

    /// Liénard system with no damping nonlinearity and the default coupling profile.
    pub fn lienard(k: f64, lambda_stable: f64) -> Self {
        Self {
            family: Family::Lienard {
                k,
                damping: Damping::none(),
            },
            lambda_stable,
            couplings: Couplings::default_profile(),
        }
    }

    pub fn with_couplings(mut self, couplings: Couplings) -> Self {
        self.couplings = couplings;
        self
    }

    pub fn kind(&self) -> SystemKind {
        match self.family {
            Family::LambdaOmega { .. } => SystemKind::LambdaOmega3D,
            Family::Lienard { .. } => SystemKind::Lienard3D,
        }
    }

    /// γ for the λ–ω family, `None` otherwise.
    pub fn gamma(&self) -> Option<f64> {
        match self.family {
            Family::LambdaOmega { gamma } => Some(gamma),
            Family::Lienard { .. } => None,
        }
    }

    pub fn linear_part(&self) -> LinearPart {
        match self.family {
            Family::LambdaOmega { gamma } => LinearPart {
                xx: gamma,
                xy: -1.0,
                yx: 1.0,
                yy: gamma,
            },
            Family::Lienard { k, .. } => LinearPart {
                xx: 0.0,
                xy: 1.0,
                yx: -1.0,
                yy: k,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_stable.is_finite() && self.lambda_stable > 0.0) {
            return Err(Error::Domain(format!(
                "lambda must be finite and > 0, got {}",
                self.lambda_stable
            )));
        }
        match &self.family {
            Family::LambdaOmega { gamma } => ensure_finite(&[*gamma], "gamma")?,
            Family::Lienard { k, damping } => {
                ensure_finite(&[*k], "k")?;
                // Re-run the constructor checks in case terms were built by hand.
                Damping::new(damping.terms.clone())?;
            }
        }
        if !self.couplings.all().all(f64::is_finite) {
            return Err(Error::Domain("coupling coefficients must be finite".into()));
        }
        Ok(())
    }
}

/// Vector field of the full 3-D system.
pub fn full_rhs(spec: &SystemSpec, s: State3) -> Result<State3> {
    if !s.is_finite() {
        return Err(Error::Domain("state must be finite".into()));
    }
    let State3 { x, y, z } = s;
    let (lx, ly) = spec.linear_part().apply(x, y);
    let (nx, ny) = match &spec.family {
        Family::LambdaOmega { .. } => {
            let r2 = x * x + y * y;
            (-x * r2, -y * r2)
        }
        Family::Lienard { damping, .. } => (0.0, -damping.eval(x, y) * y),
    };
    let cp = &spec.couplings;
    Ok(State3 {
        x: lx + nx + cp.c.eval(s),
        y: ly + ny + cp.d.eval(s),
        z: -spec.lambda_stable * z + cp.e.eval(s),
    })
}

/// Van der Pol damping μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdpSpec {
    mu: f64,
}

impl VdpSpec {
    pub fn new(mu: f64) -> Result<Self> {
        if mu.is_finite() && mu > 0.0 {
            Ok(Self { mu })
        } else {
            Err(Error::Domain(format!("mu must be finite and > 0, got {mu}")))
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// `ẋ = y`, `ẏ = -μ(x² - 1)y - x`.
pub fn vdp_rhs(spec: &VdpSpec, p: [f64; 2]) -> [f64; 2] {
    let [x, y] = p;
    [y, -spec.mu * (x * x - 1.0) * y - x]
}

/// Character of the origin of `ẋ = y, ẏ = ky - x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LienardLimit {
    Centre,
    LimitCycle,
    StableFocus,
}

pub fn classify_lienard(k: f64) -> Result<LienardLimit> {
    ensure_finite(&[k], "k")?;
    Ok(if k == 0.0 {
        LienardLimit::Centre
    } else if k > 0.0 {
        LienardLimit::LimitCycle
    } else {
        LienardLimit::StableFocus
    })
}
