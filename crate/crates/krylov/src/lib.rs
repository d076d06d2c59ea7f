//! Configuration, reports, field dumps and the three commands of the
//! `krylov` binary. Exit codes: 0 success, 1 configuration or validation
//! error, 2 mathematical failure.

pub mod config;
pub mod io;
pub mod report;
pub mod verify;

use std::path::Path;
use std::time::Instant;

use krylov_core::krylov::cone_margin;
use krylov_core::solver::{homotopy_solve, Problem};
use krylov_core::symfun::in_gamma;
use krylov_core::torus::{chi_field, integral_condition_gap, sample_fourier};
use krylov_core::{ConeVariant, HermitianField, Profile, Spectrum};

use config::{Mode, ProblemData, RunConfig, DEFAULT_SEED, DEFAULT_TRIALS};
use report::{
    ConeCheckReport, ConeStatus, GapAudit, ManufacturedAudit, NodeList, PathEntry, SolveFiles, SolveReport,
    VerifyReport,
};

/// Environment variable naming the worker-thread count.
pub const THREADS_ENV: &str = "KRYLOV_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("validation: {0}")]
    Validation(krylov_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Math(krylov_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Math(_) => 2,
        }
    }
}

/// A finished command: the JSON report and its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<R> {
    pub report: R,
    pub exit_code: i32,
}

/// Parsed `KRYLOV_THREADS`. Computation is single-threaded; the value is
/// validated and reported only.
pub fn thread_count() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&t| t >= 1)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
    }
}

fn timed<T>(label: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    eprintln!("{label}: {:.3} s", start.elapsed().as_secs_f64());
    out
}

/// Command-line overrides of `seed` and `trials`.
#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOverrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
}

pub fn run_verify(config: &RunConfig, overrides: VerifyOverrides) -> Result<Outcome<VerifyReport>, CliError> {
    config.check_mode(Mode::Verify)?;
    let seed = overrides.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let trials = overrides.trials.or(config.trials).unwrap_or(DEFAULT_TRIALS);
    if trials > config::MAX_TRIALS {
        return Err(CliError::Config(format!("trials must be ≤ {}", config::MAX_TRIALS)));
    }
    let opts = verify::VerifyOptions {
        seed,
        trials,
        suites: config.suites.clone(),
        flip_newton_sign: config.test_hooks.flip_newton_sign,
    };
    let suites = timed("verify", || verify::run_verify(&opts));
    let failed_suites: Vec<String> = suites.iter().filter(|s| !s.passed).map(|s| s.name.clone()).collect();
    let passed = failed_suites.is_empty();
    let report = VerifyReport { command: "verify", seed, trials, passed, failed_suites, suites };
    Ok(Outcome { report, exit_code: if passed { 0 } else { 2 } })
}

fn build(config: &RunConfig) -> Result<ProblemData, CliError> {
    let data = config.problem()?.build()?;
    data.coefficients.validate(data.grid.nodes()).map_err(CliError::Validation)?;
    Ok(data)
}

fn cone_report(data: &ProblemData) -> Result<ConeCheckReport, CliError> {
    let k = data.coefficients.k();
    let nodes = data.grid.nodes();
    let mut min_margin = f64::INFINITY;
    let mut min_node = 0;
    let mut failing = Vec::with_capacity(nodes);
    let mut outside = Vec::with_capacity(nodes);
    for node in 0..nodes {
        let lambda = Spectrum::new(data.chi0.eigenvalues(node).map_err(CliError::Math)?).map_err(CliError::Math)?;
        outside.push(!in_gamma(&lambda, k - 1).map_err(CliError::Math)?.inside);
        let p = data.coefficients.point(node).map_err(CliError::Validation)?;
        let m = cone_margin(krylov_core::krylov::ConeInput::Spectrum(&lambda), &p, ConeVariant::StrictKMinus1)
            .map_err(CliError::Math)?
            .min_margin;
        failing.push(!(m > 0.0));
        if m < min_margin || m.is_nan() {
            min_margin = m;
            min_node = node;
        }
    }
    let outside_cone = NodeList::from_flags(outside.into_iter());
    let failing = NodeList::from_flags(failing.into_iter());
    let status = if outside_cone.count > 0 {
        ConeStatus::PreconditionFailure
    } else if failing.count > 0 {
        ConeStatus::MarginFailure
    } else {
        ConeStatus::Pass
    };
    Ok(ConeCheckReport {
        command: "cone-check",
        status,
        variant: ConeVariant::StrictKMinus1.name(),
        nodes,
        min_margin: min_margin.is_finite().then_some(min_margin),
        min_node,
        failing,
        precondition_degree: k - 1,
        outside_cone,
    })
}

pub fn run_cone_check(config: &RunConfig) -> Result<Outcome<ConeCheckReport>, CliError> {
    config.check_mode(Mode::ConeCheck)?;
    let data = build(config)?;
    let report = cone_report(&data)?;
    let exit_code = if report.status == ConeStatus::Pass { 0 } else { 2 };
    Ok(Outcome { report, exit_code })
}

/// File names written by `solve` into its output directory.
pub const REPORT_FILE: &str = "report.json";
pub const U_FILE: &str = "u.csv";
pub const CHI_FILE: &str = "chi.csv";
pub const EIGEN_RANGE_FILE: &str = "eigen_range.csv";

/// Cone check, continuation, audits and field dumps. The report is written
/// to `out/report.json` and returned; solver failures still write the last
/// converged state.
pub fn run_solve(config: &RunConfig, out: &Path) -> Result<Outcome<SolveReport>, CliError> {
    config.check_mode(Mode::Solve)?;
    let plan = config.homotopy_plan();
    let data = build(config)?;
    let cone = cone_report(&data)?;
    if cone.status != ConeStatus::Pass {
        let (node, margin) = (cone.min_node, cone.min_margin.unwrap_or(f64::NAN));
        return Err(CliError::Math(match cone.status {
            ConeStatus::PreconditionFailure => krylov_core::Error::ConeViolation {
                node: cone.outside_cone.nodes[0],
                eigenvalues: data.chi0.eigenvalues(cone.outside_cone.nodes[0]).unwrap_or_default(),
            },
            _ => krylov_core::Error::ConeCondition { node, margin },
        }));
    }
    std::fs::create_dir_all(out)?;
    let grid = data.grid;
    let h = grid.spacing();
    let bound = 5.0 * h * h;
    let problem = Problem::new(data.chi0.clone(), data.coefficients.clone()).map_err(CliError::Math)?;
    let result = timed("solve", || homotopy_solve(&problem, &plan));
    let (state, path, error, residual) = match result {
        Ok(sol) => (sol.state, sol.path, None, Some(sol.residual)),
        Err(e) => (e.last_good, e.path, Some(e.error), None),
    };
    let a = state.a(&problem);
    let chi = chi_field(&data.chi0, &state.u, problem.k() - 1).map_err(CliError::Math)?;
    let converged = error.is_none();
    let integral_gap = if converged { Some(gap_audit(&chi, &data, a, bound)?) } else { None };
    let manufactured = match (&data.manufactured, config.problem()?.manufactured.as_ref()) {
        (Some(spec), Some(m)) if converged => {
            let exact = sample_fourier(spec, &grid).map_err(CliError::Math)?.recentered();
            let error_linf = state.u.axpy(-1.0, &exact).map_err(CliError::Math)?.linf();
            Some(ManufacturedAudit { error_linf, bound, within_bound: error_linf <= bound, discrete: m.discrete })
        }
        _ => None,
    };
    io::write_scalar(&out.join(U_FILE), &state.u)?;
    io::write_hermitian(&out.join(CHI_FILE), &chi)?;
    io::write_eigen_range(&out.join(EIGEN_RANGE_FILE), &chi)?;
    let last = path.last();
    let report = SolveReport {
        command: "solve",
        converged,
        error: error.as_ref().map(ToString::to_string),
        n: grid.n(),
        k: data.coefficients.k(),
        points: grid.points(),
        spacing: h,
        a,
        a_tilde: state.a_tilde,
        stage: state.stage.number(),
        t: state.t,
        residual_linf: residual.as_ref().map(|r| r.linf),
        residual_l2: residual.as_ref().map(|r| r.l2),
        min_cone_margin: last.map(|r| r.min_cone_margin),
        path: path.iter().map(PathEntry::from).collect(),
        integral_gap,
        manufactured,
        files: SolveFiles { u: U_FILE.into(), chi: CHI_FILE.into(), eigen_range: EIGEN_RANGE_FILE.into() },
    };
    std::fs::write(out.join(REPORT_FILE), report::to_json(&report))?;
    let audits_ok = report.integral_gap.as_ref().is_none_or(|g| g.within_bound)
        && report.manufactured.as_ref().is_none_or(|m| m.within_bound);
    let exit_code = if converged && audits_ok { 0 } else { 2 };
    Ok(Outcome { report, exit_code })
}

fn gap_audit(chi: &HermitianField, data: &ProblemData, a: f64, bound: f64) -> Result<GapAudit, CliError> {
    let c = &data.coefficients;
    let k = c.k();
    let top = match &c.alpha()[k - 1] {
        Profile::Constant(x) => Profile::Constant(x + a),
        Profile::Field(v) => Profile::Field(v.iter().map(|x| x + a).collect()),
    };
    let folded = c.clone().with_top(top).map_err(CliError::Math)?;
    let g = integral_condition_gap(chi, &folded).map_err(CliError::Math)?;
    Ok(GapAudit { gap: g.gap, floor_gap: g.floor_gap, bound, within_bound: g.gap.abs() <= bound })
}
