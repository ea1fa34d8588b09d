//! JSON run configuration.
//!
//! Every block is optional and every field has a default; unknown keys are
//! rejected. [`RunConfig::validate`] turns the document into checked core
//! types before any computation starts.

use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use lcmanifold_core::analysis::TransientCut;
use lcmanifold_core::dynamics::{IntegratorConfig, Method};
use lcmanifold_core::model::{Coupling, Couplings, Damping, Family, Monomial, SystemSpec};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub integrator: IntegratorSection,
    pub analysis: AnalysisSection,
    pub output: OutputSection,
    pub verify: VerifySection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SystemKindConfig {
    #[default]
    LambdaOmega3d,
    Lienard3d,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialConfig {
    pub coeff: f64,
    pub x_pow: u32,
    pub y_pow: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub kind: SystemKindConfig,
    /// λ–ω growth parameter; defaults to 4.
    pub gamma: Option<f64>,
    /// Liénard damping offset; defaults to 0.
    pub k: Option<f64>,
    pub lambda: f64,
    /// Couplings over `x², y², z², xy, yz, zx`; each defaults to its entry in
    /// the `f1 = yz, f2 = zx, f3 = xy` profile.
    pub c: Option<[f64; 6]>,
    pub d: Option<[f64; 6]>,
    pub e: Option<[f64; 6]>,
    /// Liénard `F(x, y)` terms of degree ≥ 2.
    pub damping: Vec<MonomialConfig>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            kind: SystemKindConfig::LambdaOmega3d,
            gamma: None,
            k: None,
            lambda: 1.0,
            c: None,
            d: None,
            e: None,
            damping: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MethodConfig {
    Rk4,
    #[default]
    Rk45,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub method: MethodConfig,
    /// RK45 local tolerance.
    pub tolerance: f64,
    /// RK4 maximum step.
    pub step: f64,
    pub t_end: f64,
    pub sample_interval: f64,
    /// `[x, y, z]`; the reduced and polar targets use `(x, y)` only.
    pub initial_state: [f64; 3],
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            method: MethodConfig::Rk45,
            tolerance: 1e-9,
            step: 1e-3,
            t_end: 100.0,
            sample_interval: 0.01,
            initial_state: [0.5, 0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub transient_fraction: f64,
    pub transient_time: f64,
    /// Reduced-model mean radius vs prediction.
    pub radius_tolerance: f64,
    pub angular_velocity_tolerance: f64,
    /// Full 3-D mean radius vs reduced-model mean radius.
    pub full_radius_tolerance: f64,
    /// Uncoupled simulation vs `√γ`.
    pub base_radius_tolerance: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            transient_fraction: 0.5,
            transient_time: 20.0,
            radius_tolerance: 0.02,
            angular_velocity_tolerance: 0.02,
            full_radius_tolerance: 0.05,
            base_radius_tolerance: 0.005,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    /// Which kinds of files are written; stdout output is unaffected.
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("."),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl OutputSection {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// Parameter grids for `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// λ–ω growth values for the algebraic checks.
    pub gammas: Vec<f64>,
    /// Stable rates for the algebraic checks.
    pub lambdas: Vec<f64>,
    pub lienard_ks: Vec<f64>,
    /// γ values for the uncoupled convergence runs.
    pub base_gammas: Vec<f64>,
    pub simulation_gamma: f64,
    pub simulation_lambdas: Vec<f64>,
    pub vdp_mus: Vec<f64>,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            gammas: vec![0.5, 1.0, 2.0, 4.0, 9.0],
            lambdas: vec![0.1, 0.5, 1.0, 2.0, 5.0, 10.0],
            lienard_ks: vec![0.0, 0.5, 1.0, 2.0],
            base_gammas: vec![1.0, 4.0, 9.0],
            simulation_gamma: 4.0,
            simulation_lambdas: vec![1.0, 2.0, 5.0],
            vdp_mus: vec![0.1, 1.0, 5.0],
        }
    }
}

impl VerifySection {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: &f64| v.is_finite() && *v > 0.0;
        for (name, grid, ok) in [
            ("gammas", &self.gammas, &positive as &dyn Fn(&f64) -> bool),
            ("lambdas", &self.lambdas, &positive),
            ("lienard_ks", &self.lienard_ks, &|v: &f64| v.is_finite()),
            ("base_gammas", &self.base_gammas, &positive),
            ("simulation_lambdas", &self.simulation_lambdas, &positive),
            ("vdp_mus", &self.vdp_mus, &positive),
        ] {
            if grid.is_empty() {
                return Err(CliError::Config(format!("verify.{name} is empty")));
            }
            if let Some(v) = grid.iter().find(|v| !ok(v)) {
                return Err(CliError::Config(format!("verify.{name} contains invalid value {v}")));
            }
        }
        if !positive(&self.simulation_gamma) {
            return Err(CliError::Config(format!(
                "verify.simulation_gamma must be > 0, got {}",
                self.simulation_gamma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_steps: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            lambda_min: 1.0,
            lambda_max: 10.0,
            lambda_steps: 10,
        }
    }
}

impl SweepSection {
    /// Evenly spaced λ values, ascending.
    pub fn lambdas(&self) -> Result<Vec<f64>> {
        let (lo, hi, n) = (self.lambda_min, self.lambda_max, self.lambda_steps);
        if n == 0 {
            return Ok(Vec::new());
        }
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
            return Err(CliError::Config(format!(
                "lambda range must satisfy 0 < min <= max, got [{lo}, {hi}]"
            )));
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        let step = (hi - lo) / (n - 1) as f64;
        Ok((0..n)
            .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
            .collect())
    }
}

/// Which system `simulate` integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Full3d,
    #[default]
    Reduced2d,
    Polar,
}

impl std::str::FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full3d" => Ok(Target::Full3d),
            "reduced2d" => Ok(Target::Reduced2d),
            "polar" => Ok(Target::Polar),
            other => Err(format!(
                "unknown target `{other}` (expected full3d, reduced2d or polar)"
            )),
        }
    }
}

impl Target {
    pub fn as_str(&self) -> &'static str {
        match self {
            Target::Full3d => "full3d",
            Target::Reduced2d => "reduced2d",
            Target::Polar => "polar",
        }
    }
}

/// Checked, ready-to-run form of a [`RunConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub spec: SystemSpec,
    pub integrator: IntegratorConfig,
    pub initial_state: [f64; 3],
    pub cut: TransientCut,
    pub analysis: AnalysisSection,
}

/// Angle unwrapping needs fewer than half a turn between samples; rotation
/// rates in these families stay well below 4 rad per time unit.
pub const MAX_SAMPLE_INTERVAL: f64 = std::f64::consts::PI / 4.0;

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a file, or standard input for `-`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = if path == Path::new("-") {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::io("<stdin>", e))?;
            s
        } else {
            std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?
        };
        Self::from_json(&text)
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        let s = &self.system;
        let coupling = |v: Option<[f64; 6]>, default: Coupling| v.map(Coupling).unwrap_or(default);
        let profile = Couplings::default_profile();
        let couplings = Couplings {
            c: coupling(s.c, profile.c),
            d: coupling(s.d, profile.d),
            e: coupling(s.e, profile.e),
        };
        let family = match s.kind {
            SystemKindConfig::LambdaOmega3d => {
                if s.k.is_some() || !s.damping.is_empty() {
                    return Err(CliError::Config("`k` and `damping` apply to lienard3d only".into()));
                }
                Family::LambdaOmega {
                    gamma: s.gamma.unwrap_or(4.0),
                }
            }
            SystemKindConfig::Lienard3d => {
                if s.gamma.is_some() {
                    return Err(CliError::Config("`gamma` applies to lambda_omega3d only".into()));
                }
                let terms = s
                    .damping
                    .iter()
                    .map(|m| Monomial {
                        coeff: m.coeff,
                        x_pow: m.x_pow,
                        y_pow: m.y_pow,
                    })
                    .collect();
                Family::Lienard {
                    k: s.k.unwrap_or(0.0),
                    damping: Damping::new(terms)?,
                }
            }
        };
        let spec = SystemSpec {
            family,
            lambda_stable: s.lambda,
            couplings,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn integrator_config(&self) -> Result<IntegratorConfig> {
        let i = &self.integrator;
        let cfg = IntegratorConfig {
            method: match i.method {
                MethodConfig::Rk4 => Method::Rk4 { step: i.step },
                MethodConfig::Rk45 => Method::Rk45 { tolerance: i.tolerance },
            },
            t_end: i.t_end,
            sample_interval: i.sample_interval,
        };
        cfg.validate()?;
        if cfg.sample_interval > MAX_SAMPLE_INTERVAL {
            return Err(CliError::Config(format!(
                "sample_interval {} exceeds {MAX_SAMPLE_INTERVAL:.4}; angles could not be unwrapped",
                cfg.sample_interval
            )));
        }
        if !i.initial_state.iter().all(|v| v.is_finite()) {
            return Err(CliError::Config("initial_state must be finite".into()));
        }
        Ok(cfg)
    }

    pub fn transient_cut(&self) -> Result<TransientCut> {
        let cut = TransientCut {
            fraction: self.analysis.transient_fraction,
            min_time: self.analysis.transient_time,
        };
        cut.validate()?;
        Ok(cut)
    }

    pub fn validate(&self) -> Result<Validated> {
        let a = &self.analysis;
        for (name, v) in [
            ("radius_tolerance", a.radius_tolerance),
            ("angular_velocity_tolerance", a.angular_velocity_tolerance),
            ("full_radius_tolerance", a.full_radius_tolerance),
            ("base_radius_tolerance", a.base_radius_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Validated {
            spec: self.system_spec()?,
            integrator: self.integrator_config()?,
            initial_state: self.integrator.initial_state,
            cut: self.transient_cut()?,
            analysis: self.analysis.clone(),
        })
    }
}
