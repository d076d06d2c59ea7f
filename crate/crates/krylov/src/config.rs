//! Run configuration (JSON). The full schema is documented in `docs/config.md`.

use std::path::Path;

use krylov_core::solver::HomotopyPlan;
use krylov_core::torus::sample_fourier;
use krylov_core::{
    Coefficients, Complex64, FourierMode, FourierSpec, HermitianField, HermitianForm, Profile, TorusGrid,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const MAX_N: usize = 4;
pub const MAX_POINTS: usize = 64;
pub const MAX_NODES: usize = 1 << 22;
pub const MAX_TRIALS: u64 = 10_000_000;
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_TRIALS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Verify,
    ConeCheck,
    Solve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    /// Master seed of `verify`; [`DEFAULT_SEED`] when omitted.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Cases per suite (per `(n, k)` pair for operator suites); [`DEFAULT_TRIALS`] when omitted.
    #[serde(default)]
    pub trials: Option<u64>,
    /// Restrict `verify` to these suites, in the fixed suite order.
    #[serde(default)]
    pub suites: Option<Vec<String>>,
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub plan: Option<PlanConfig>,
    #[serde(default)]
    pub test_hooks: TestHooks,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestHooks {
    /// Negate the Newton-inequality margin so that its suite fails.
    #[serde(default)]
    pub flip_newton_sign: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub wave: Vec<i64>,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

impl ModeConfig {
    fn to_mode(&self) -> FourierMode {
        FourierMode::new(self.wave.clone(), self.amplitude, self.phase)
    }
}

fn spec(modes: &[ModeConfig]) -> FourierSpec {
    FourierSpec::new(modes.iter().map(ModeConfig::to_mode).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    /// Rows of the real part; must be symmetric.
    pub re: Vec<Vec<f64>>,
    /// Rows of the imaginary part; must be antisymmetric. Zero when omitted.
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chi0Config {
    /// Constant part; the identity when omitted.
    #[serde(default)]
    pub constant: Option<MatrixConfig>,
    /// `∂∂̄` of this potential is added.
    #[serde(default)]
    pub potential: Vec<ModeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaConfig {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub fourier: Vec<ModeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedConfig {
    /// The exact solution `u*`.
    pub potential: Vec<ModeConfig>,
    /// Build `α_{k-1}` from the discrete Hessian of `u*` (exact discrete
    /// solution) instead of the analytic one (truncation error visible).
    #[serde(default)]
    pub discrete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub n: usize,
    pub k: usize,
    /// Grid points per real axis.
    pub points: usize,
    #[serde(default)]
    pub chi0: Option<Chi0Config>,
    /// `α_0 … α_{k-1}`; `α_0 … α_{k-2}` when `manufactured` is set.
    pub alpha: Vec<AlphaConfig>,
    #[serde(default)]
    pub floors: Option<Vec<f64>>,
    #[serde(default)]
    pub manufactured: Option<ManufacturedConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    #[serde(default)]
    pub stage1_steps: Option<usize>,
    #[serde(default)]
    pub stage2_steps: Option<usize>,
    #[serde(default)]
    pub newton_tol: Option<f64>,
    #[serde(default)]
    pub max_newton: Option<usize>,
    #[serde(default)]
    pub min_step: Option<f64>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn finite(what: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be finite")))
    }
}

fn check_modes(what: &str, modes: &[ModeConfig], axes: usize) -> Result<(), CliError> {
    for (i, m) in modes.iter().enumerate() {
        if m.wave.len() != axes {
            return Err(invalid(format!("{what}[{i}].wave needs {axes} components, got {}", m.wave.len())));
        }
        finite(&format!("{what}[{i}].amplitude"), m.amplitude)?;
        finite(&format!("{what}[{i}].phase"), m.phase)?;
    }
    Ok(())
}

/// The validated inputs of a problem, before any mathematical check.
#[derive(Debug, Clone)]
pub struct ProblemData {
    pub grid: TorusGrid,
    pub chi0: HermitianField,
    pub coefficients: Coefficients,
    pub manufactured: Option<FourierSpec>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Range checks that need no mathematics.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.trials.unwrap_or(DEFAULT_TRIALS) > MAX_TRIALS {
            return Err(invalid(format!("trials must be ≤ {MAX_TRIALS}")));
        }
        if let Some(p) = &self.problem {
            p.validate()?;
        }
        if let Some(suites) = &self.suites {
            crate::verify::check_suite_names(suites).map_err(invalid)?;
        }
        if let Some(plan) = &self.plan {
            self.plan_from(plan).validate().map_err(|e| invalid(e.to_string()))?;
        }
        Ok(())
    }

    fn plan_from(&self, plan: &PlanConfig) -> HomotopyPlan {
        let d = HomotopyPlan::default();
        HomotopyPlan {
            stage1_steps: plan.stage1_steps.unwrap_or(d.stage1_steps),
            stage2_steps: plan.stage2_steps.unwrap_or(d.stage2_steps),
            newton_tol: plan.newton_tol.unwrap_or(d.newton_tol),
            max_newton: plan.max_newton.unwrap_or(d.max_newton),
            min_step: plan.min_step.unwrap_or(d.min_step),
        }
    }

    pub fn homotopy_plan(&self) -> HomotopyPlan {
        self.plan.as_ref().map(|p| self.plan_from(p)).unwrap_or_default()
    }

    pub fn check_mode(&self, command: Mode) -> Result<(), CliError> {
        match self.mode {
            Some(m) if m != command => Err(invalid(format!(
                "config mode {} does not match the command {}",
                serde_json::to_string(&m).unwrap_or_default(),
                serde_json::to_string(&command).unwrap_or_default()
            ))),
            _ => Ok(()),
        }
    }

    pub fn problem(&self) -> Result<&ProblemConfig, CliError> {
        self.problem.as_ref().ok_or_else(|| invalid("a problem block is required"))
    }
}

impl ProblemConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let (n, k) = (self.n, self.k);
        if !(2..=MAX_N).contains(&n) {
            return Err(invalid(format!("n must lie in [2, {MAX_N}]")));
        }
        if !(2..=n).contains(&k) {
            return Err(invalid("k must lie in [2, n]"));
        }
        if self.points < 8 || !self.points.is_multiple_of(2) || self.points > MAX_POINTS {
            return Err(invalid(format!("points must be even and in [8, {MAX_POINTS}]")));
        }
        if (self.points as f64).powi(2 * n as i32) > MAX_NODES as f64 {
            return Err(invalid(format!("grid has more than {MAX_NODES} nodes")));
        }
        let axes = 2 * n;
        let expected = if self.manufactured.is_some() { k - 1 } else { k };
        if self.alpha.len() != expected {
            return Err(invalid(format!("alpha needs {expected} entries, got {}", self.alpha.len())));
        }
        for (l, a) in self.alpha.iter().enumerate() {
            finite(&format!("alpha[{l}].constant"), a.constant)?;
            check_modes(&format!("alpha[{l}].fourier"), &a.fourier, axes)?;
        }
        if let Some(f) = &self.floors {
            if f.len() != k {
                return Err(invalid(format!("floors needs {k} entries")));
            }
            for (l, x) in f.iter().enumerate() {
                finite(&format!("floors[{l}]"), *x)?;
            }
        }
        if let Some(chi0) = &self.chi0 {
            check_modes("chi0.potential", &chi0.potential, axes)?;
            if let Some(m) = &chi0.constant {
                let square = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
                if !square(&m.re) || m.im.as_ref().is_some_and(|im| !square(im)) {
                    return Err(invalid(format!("chi0.constant must be {n}×{n}")));
                }
                for rows in std::iter::once(&m.re).chain(m.im.as_ref()) {
                    for x in rows.iter().flatten() {
                        finite("chi0.constant entries", *x)?;
                    }
                }
            }
        }
        if let Some(m) = &self.manufactured {
            check_modes("manufactured.potential", &m.potential, axes)?;
        }
        Ok(())
    }

    fn chi0_constant(&self) -> Result<HermitianForm, CliError> {
        let n = self.n;
        let Some(m) = self.chi0.as_ref().and_then(|c| c.constant.as_ref()) else {
            return Ok(HermitianForm::identity(n));
        };
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let im = m.im.as_ref().map_or(0.0, |im| im[i][j]);
                data.push(Complex64::new(m.re[i][j], im));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if (data[i * n + j] - data[j * n + i].conj()).norm() > 1e-12 {
                    return Err(invalid("chi0.constant is not Hermitian"));
                }
            }
        }
        HermitianForm::new(n, data).map_err(|e| invalid(e.to_string()))
    }

    /// Sample the coefficient and background fields.
    pub fn build(&self) -> Result<ProblemData, CliError> {
        let cfg = |e: krylov_core::Error| invalid(e.to_string());
        let grid = TorusGrid::new(self.n, self.points).map_err(cfg)?;
        let base = HermitianField::constant(grid, &self.chi0_constant()?).map_err(cfg)?;
        let potential = spec(self.chi0.as_ref().map_or(&[][..], |c| &c.potential));
        let chi0 = if potential.modes.is_empty() {
            base
        } else {
            let w = sample_fourier(&potential, &grid).map_err(cfg)?;
            base.add(&krylov_core::torus::complex_hessian(&w)).map_err(cfg)?
        };
        let mut alpha = Vec::with_capacity(self.k);
        for a in &self.alpha {
            if a.fourier.is_empty() {
                alpha.push(Profile::Constant(a.constant));
            } else {
                let f = sample_fourier(&spec(&a.fourier), &grid).map_err(cfg)?;
                alpha.push(Profile::Field(f.values().iter().map(|v| v + a.constant).collect()));
            }
        }
        let manufactured = self.manufactured.as_ref().map(|m| spec(&m.potential));
        if let Some(m) = &manufactured {
            m.check(&grid).map_err(cfg)?;
            alpha.push(Profile::Constant(0.0));
        }
        let coefficients = Coefficients::new(self.n, self.k, alpha, self.floors.clone()).map_err(cfg)?;
        let coefficients = match (&self.manufactured, &manufactured) {
            (Some(m), Some(u_star)) => {
                let top = if m.discrete {
                    let u = sample_fourier(u_star, &grid).map_err(cfg)?;
                    krylov_core::solver::manufactured_coefficients(&u, &chi0, &coefficients)
                } else {
                    krylov_core::solver::manufactured_coefficients_analytic(u_star, &chi0, &coefficients)
                };
                let top = top.map_err(CliError::Math)?;
                coefficients.with_top(Profile::Field(top.into_values())).map_err(cfg)?
            }
            _ => coefficients,
        };
        Ok(ProblemData { grid, chi0, coefficients, manufactured })
    }
}
