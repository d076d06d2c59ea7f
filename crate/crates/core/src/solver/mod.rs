//! Damped Newton inside a two-stage continuity method.
//!
//! The discrete equation at a node is `f(λ(χ_u)) = β^path_{k-1}(z) + ã`, with
//! `f` the quotient operator of [`crate::krylov`] and `ã` the unknown constant
//! on the `β`-scale. Writing `γ_β = f(λ(χ_0))` and
//! `α̃_β = max(α_β, γ_β)` (all on the `β`-scale), the two stages follow
//!
//! ```text
//! stage 1: (1−t)·γ_β + t·α̃_β,      stage 2: (1−t)·α̃_β + t·α_β.
//! ```
//!
//! `u ≡ 0, ã = 0` solves stage 1 at `t = 0` exactly. The returned constant on
//! the `α`-scale is `a = k/(n−k+1) · ã`.
//!
//! The gauge is `mean(u) = 0`. Every accepted state lies pointwise in
//! `Γ_{k-1}`.

mod linear;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::krylov::{cone_margins_raw, value_grad_raw, value_raw, Coefficients, KrylovPoint, Profile};
use crate::spectral::{eig_hermitian, eigenvalues, HermitianForm};
use crate::symfun::{elementary, membership};
use crate::torus::{FourierSpec, HermitianField, Neighbors, ScalarField, TorusGrid};
use crate::{Error, Result};

pub use linear::{LaplaceInverse, LinearMethod, LinearStats, DENSE_FALLBACK_MAX};

/// Relative residual demanded of every linear solve.
pub const LINEAR_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    One,
    Two,
}

impl Stage {
    pub fn number(self) -> u8 {
        match self {
            Stage::One => 1,
            Stage::Two => 2,
        }
    }
}

/// `γ` and `α̃_{k-1} = max(α_{k-1}, γ)` on the `α`-scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaField {
    pub gamma: ScalarField,
    pub alpha_tilde: ScalarField,
}

/// `γ = [σ_k/C_n^k − Σ_{l=0}^{k-2} α_l σ_l/C_n^l] / [σ_{k-1}/C_n^{k-1}]` at `χ_0`.
///
/// The `l = 0` term is included so that `u = 0` is an exact solution at the
/// start of stage 1 whenever `α_0 ≠ 0`.
pub fn gamma_field(chi0: &HermitianField, c: &Coefficients) -> Result<GammaField> {
    let grid = *chi0.grid();
    let nodes = grid.nodes();
    if let Some(m) = c.nodes() {
        Error::check_len(nodes, m)?;
    }
    Error::check_len(grid.n(), c.n())?;
    let scale = 1.0 / c.beta_factor(c.k() - 1);
    let mut gamma = Vec::with_capacity(nodes);
    let mut tilde = Vec::with_capacity(nodes);
    for node in 0..nodes {
        let lambda = chi0.eigenvalues(node)?;
        let p = c.point_unchecked(&c.alphas_at(node));
        let g = match value_raw(&lambda, &p) {
            Ok(v) => v * scale,
            Err(Error::OutsideCone { .. }) => return Err(Error::ConeViolation { node, eigenvalues: lambda }),
            Err(e) => return Err(e),
        };
        gamma.push(g);
        tilde.push(c.alpha()[c.k() - 1].at(node).max(g));
    }
    Ok(GammaField { gamma: ScalarField::new(grid, gamma)?, alpha_tilde: ScalarField::new(grid, tilde)? })
}

/// Grid, background form and coefficients, with everything the solver reuses.
#[derive(Debug, Clone)]
pub struct Problem {
    grid: TorusGrid,
    nb: Neighbors,
    laplace: LaplaceInverse,
    chi0: HermitianField,
    coeffs: Coefficients,
    points: Vec<KrylovPoint>,
    gamma: Vec<f64>,
    tilde: Vec<f64>,
    target: Vec<f64>,
    beta_scale: f64,
}

impl Problem {
    /// Validates the coefficient assumptions, `χ_0 ∈ Γ_{k-1}` and the cone
    /// condition of `χ_0` against the target coefficients.
    pub fn new(chi0: HermitianField, coeffs: Coefficients) -> Result<Self> {
        let grid = *chi0.grid();
        let nodes = grid.nodes();
        Error::check_len(grid.n(), coeffs.n())?;
        coeffs.validate(nodes)?;
        let k = coeffs.k();
        let gf = gamma_field(&chi0, &coeffs)?;
        let top_factor = coeffs.beta_factor(k - 1);
        let mut points = Vec::with_capacity(nodes);
        for node in 0..nodes {
            let p = coeffs.point_unchecked(&coeffs.alphas_at(node));
            let (raw, _) = cone_margins_raw(&chi0.eigenvalues(node)?, &p);
            let margin = raw.iter().copied().fold(f64::INFINITY, f64::min);
            if !(margin > 0.0) {
                return Err(Error::ConeCondition { node, margin });
            }
            points.push(p);
        }
        let gamma: Vec<f64> = gf.gamma.values().iter().map(|g| g * top_factor).collect();
        let tilde: Vec<f64> = gf.alpha_tilde.values().iter().map(|g| g * top_factor).collect();
        let target: Vec<f64> = points.iter().map(KrylovPoint::top).collect();
        let beta_scale =
            points.iter().flat_map(|p| p.beta().iter()).chain(&gamma).chain(&tilde).fold(0.0f64, |m, b| m.max(b.abs()));
        Ok(Problem {
            grid,
            nb: grid.neighbors(),
            laplace: LaplaceInverse::new(grid),
            chi0,
            coeffs,
            points,
            gamma,
            tilde,
            target,
            beta_scale,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn chi0(&self) -> &HermitianField {
        &self.chi0
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn k(&self) -> usize {
        self.coeffs.k()
    }

    /// `k/(n−k+1)`, the factor from `ã` to `a`.
    pub fn a_factor(&self) -> f64 {
        1.0 / self.coeffs.beta_factor(self.k() - 1)
    }

    /// Largest `|β|` over nodes, degrees and path endpoints.
    pub fn beta_scale(&self) -> f64 {
        self.beta_scale
    }

    pub fn gamma(&self) -> GammaField {
        let back =
            |v: &[f64]| ScalarField::new(self.grid, v.iter().map(|x| x * self.a_factor()).collect()).expect("finite");
        GammaField { gamma: back(&self.gamma), alpha_tilde: back(&self.tilde) }
    }

    /// `β^path_{k-1}` at `node`.
    pub fn path_top(&self, node: usize, t: f64, stage: Stage) -> f64 {
        match stage {
            Stage::One => (1.0 - t) * self.gamma[node] + t * self.tilde[node],
            Stage::Two => (1.0 - t) * self.tilde[node] + t * self.target[node],
        }
    }

    /// The coefficients of the path equation on the `α`-scale, with `a_tilde`
    /// folded into the top one.
    pub fn path_coefficients(&self, t: f64, stage: Stage, a_tilde: f64) -> Result<Coefficients> {
        let top = (0..self.grid.nodes()).map(|node| (self.path_top(node, t, stage) + a_tilde) * self.a_factor());
        self.coeffs.clone().with_top(Profile::Field(top.collect()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Mean-zero potential.
    pub u: ScalarField,
    /// The constant on the `β`-scale.
    pub a_tilde: f64,
    pub t: f64,
    pub stage: Stage,
}

impl SolverState {
    /// `u = 0, ã = 0` at the start of stage 1.
    pub fn initial(p: &Problem) -> Self {
        SolverState { u: ScalarField::zeros(p.grid), a_tilde: 0.0, t: 0.0, stage: Stage::One }
    }

    /// `a = k/(n−k+1) · ã`.
    pub fn a(&self, p: &Problem) -> f64 {
        p.a_factor() * self.a_tilde
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomotopyPlan {
    pub stage1_steps: usize,
    pub stage2_steps: usize,
    /// Newton stops at `‖r‖_∞ ≤ newton_tol·(1 + β scale)`.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Line-search floor.
    pub min_step: f64,
}

impl Default for HomotopyPlan {
    fn default() -> Self {
        HomotopyPlan { stage1_steps: 10, stage2_steps: 10, newton_tol: 1e-10, max_newton: 40, min_step: 1e-6 }
    }
}

impl HomotopyPlan {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(alloc::format!("homotopy plan: {what}")));
        if self.stage1_steps == 0 || self.stage2_steps == 0 {
            return bad("step counts must be ≥ 1");
        }
        if !(self.newton_tol > 0.0 && self.newton_tol.is_finite()) {
            return bad("newton_tol must be positive");
        }
        if self.max_newton == 0 {
            return bad("max_newton must be ≥ 1");
        }
        if !(self.min_step > 0.0 && self.min_step < 1.0) {
            return bad("min_step must lie in (0, 1)");
        }
        Ok(())
    }

    pub fn tolerance(&self, p: &Problem) -> f64 {
        self.newton_tol * (1.0 + p.beta_scale)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub field: ScalarField,
    pub linf: f64,
    pub l2: f64,
}

/// Pointwise quantities of one state.
struct Evaluation {
    r: Vec<f64>,
    /// `F^{ij̄}` per node, when requested.
    g: Option<Vec<Complex64>>,
    min_sigma: f64,
    min_grad_sum: f64,
    min_margin: f64,
}

fn chi_at(p: &Problem, u: &[f64], node: usize, buf: &mut [Complex64]) {
    p.nb.hessian_at(u, node, buf);
    for (b, c) in buf.iter_mut().zip(p.chi0.entries(node)) {
        *b = c + *b;
    }
}

fn evaluate(s: &SolverState, p: &Problem, with_g: bool) -> Result<Evaluation> {
    let n = p.grid.n();
    let k = p.k();
    let nodes = p.grid.nodes();
    let u = s.u.values();
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
    let mut r = Vec::with_capacity(nodes);
    let mut g = with_g.then(|| Vec::with_capacity(nodes * n * n));
    let (mut min_sigma, mut min_grad_sum, mut min_margin) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for node in 0..nodes {
        chi_at(p, u, node, &mut buf);
        let form = HermitianForm::from_raw(n, buf.clone());
        let point = &p.points[node];
        let top = p.path_top(node, s.t, s.stage);
        let outside = |lambda: Vec<f64>| Error::ConeViolation { node, eigenvalues: lambda };
        let value = if let Some(g) = g.as_mut() {
            let eig = eig_hermitian(&form)?;
            let lambda = eig.eigenvalues.values();
            let (value, grad, sigma) = value_grad_raw(lambda, point).map_err(|_| outside(lambda.to_vec()))?;
            g.extend_from_slice(eig.synthesize(&grad).entries());
            min_sigma = min_sigma.min(sigma);
            min_grad_sum = min_grad_sum.min(grad.iter().sum());
            let (raw, _) = cone_margins_raw(lambda, &point.with_top(top + s.a_tilde));
            min_margin = raw.iter().copied().fold(min_margin, f64::min);
            value
        } else {
            let lambda = eigenvalues(&form)?;
            let value = value_raw(&lambda, point).map_err(|_| outside(lambda.clone()))?;
            min_sigma = min_sigma.min(elementary(&lambda, None)[k - 1]);
            value
        };
        r.push(value - top - s.a_tilde);
    }
    Ok(Evaluation { r, g, min_sigma, min_grad_sum, min_margin })
}

fn residual_of(r: Vec<f64>, grid: TorusGrid) -> Result<Residual> {
    let field = ScalarField::new(grid, r)?;
    Ok(Residual { linf: field.linf(), l2: field.l2(), field })
}

/// `r = f(λ(χ_u)) − β^path_{k-1}(t) − ã`.
pub fn residual(s: &SolverState, p: &Problem) -> Result<Residual> {
    residual_of(evaluate(s, p, false)?.r, p.grid)
}

/// A Newton correction `(v, da)` and how the linear solve went.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonStep {
    pub v: ScalarField,
    pub da: f64,
    pub stats: LinearStats,
}

impl NewtonStep {
    fn is_zero(&self) -> bool {
        self.da == 0.0 && self.v.values().iter().all(|&x| x == 0.0)
    }
}

fn solve_augmented(p: &Problem, g: &[Complex64], r: &[f64]) -> Result<NewtonStep> {
    let n = p.grid.n();
    let nodes = p.grid.nodes();
    let trace: Vec<f64> = (0..nodes).map(|node| (0..n).map(|i| g[node * n * n + i * n + i].re).sum()).collect();
    let scale = crate::torus::pairwise_mean(&trace) / n as f64;
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("linearization has mean trace {scale:e}")));
    }
    let op = linear::Augmented { nb: &p.nb, g, laplace: &p.laplace, scale };
    let mut b: Vec<f64> = r.iter().map(|x| -x).collect();
    b.push(0.0);
    let (x, stats) = op.solve(&b, LINEAR_TOLERANCE)?;
    let da = x[nodes];
    let v = ScalarField::new(p.grid, x[..nodes].to_vec())?.recentered();
    Ok(NewtonStep { v, da, stats })
}

/// Solve `Re tr(F^{ij̄} ∂∂̄v) − da = −r`, `mean(v) = 0` at the current state.
pub fn newton_step(s: &SolverState, p: &Problem) -> Result<NewtonStep> {
    let e = evaluate(s, p, true)?;
    solve_augmented(p, e.g.as_deref().unwrap_or(&[]), &e.r)
}

/// The augmented linear system for a prescribed coefficient field `G`:
/// `Re tr(G ∂∂̄v) − da = rhs`, `mean(v) = 0`. With `G = I` this is the
/// discrete Poisson problem.
pub fn solve_linearized(g: &HermitianField, rhs: &ScalarField) -> Result<NewtonStep> {
    let grid = *g.grid();
    if grid != *rhs.grid() {
        return Err(Error::InvalidArgument("coefficient and right-hand side grids differ".into()));
    }
    let nodes = grid.nodes();
    let n = grid.n();
    let mut flat = Vec::with_capacity(nodes * n * n);
    let mut trace = Vec::with_capacity(nodes);
    for node in 0..nodes {
        let e = g.entries(node);
        flat.extend_from_slice(e);
        trace.push((0..n).map(|i| e[i * n + i].re).sum::<f64>());
    }
    let scale = crate::torus::pairwise_mean(&trace) / n as f64;
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("coefficient field has mean trace {scale:e}")));
    }
    let nb = grid.neighbors();
    let laplace = LaplaceInverse::new(grid);
    let op = linear::Augmented { nb: &nb, g: &flat, laplace: &laplace, scale };
    let mut b = rhs.values().to_vec();
    b.push(0.0);
    let (x, stats) = op.solve(&b, LINEAR_TOLERANCE)?;
    Ok(NewtonStep { da: x[nodes], v: ScalarField::new(grid, x[..nodes].to_vec())?.recentered(), stats })
}

/// Result of a line search.
#[derive(Debug, Clone, PartialEq)]
pub struct Update {
    pub state: SolverState,
    /// Accepted step length.
    pub step: f64,
    pub residual: Residual,
}

/// Backtracking `s = 1, ½, …`: accept the first `s` keeping every node in
/// `Γ_{k-1}` with `‖r_new‖₂ ≤ (1 − s/4)‖r_old‖₂`.
pub fn damped_update(s: &SolverState, step: &NewtonStep, p: &Problem) -> Result<Update> {
    damped_update_with(s, step, p, HomotopyPlan::default().min_step, None)
}

fn damped_update_with(
    s: &SolverState,
    step: &NewtonStep,
    p: &Problem,
    min_step: f64,
    accept_below: Option<f64>,
) -> Result<Update> {
    let old = residual(s, p)?;
    if step.is_zero() {
        return Ok(Update { state: s.clone(), step: 0.0, residual: old });
    }
    let mut len = 1.0;
    while len >= min_step {
        let u = s.u.axpy(len, &step.v)?.recentered();
        let cand = SolverState { u, a_tilde: s.a_tilde + len * step.da, ..s.clone() };
        if let Ok(res) = residual(&cand, p) {
            let converged = accept_below.is_some_and(|tol| res.linf <= tol);
            if converged || res.l2 <= (1.0 - len / 4.0) * old.l2 {
                return Ok(Update { state: cand, step: len, residual: res });
            }
        }
        len *= 0.5;
    }
    let (node, sigma) = worst_node(&s.u.axpy(2.0 * len, &step.v)?, p);
    Err(Error::ConeTrapped { min_step, node, sigma })
}

/// Node of smallest `σ_{k-1}(χ_u)`.
fn worst_node(u: &ScalarField, p: &Problem) -> (usize, f64) {
    let n = p.grid.n();
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
    let mut worst = (0, f64::INFINITY);
    for node in 0..p.grid.nodes() {
        chi_at(p, u.values(), node, &mut buf);
        let sigma = eigenvalues(&HermitianForm::from_raw(n, buf.clone()))
            .map(|l| elementary(&l, None)[p.k() - 1])
            .unwrap_or(f64::NEG_INFINITY);
        if sigma < worst.1 {
            worst = (node, sigma);
        }
    }
    worst
}

/// One accepted point of the continuation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRecord {
    pub stage: Stage,
    pub t: f64,
    pub newton_iterations: usize,
    pub linear_iterations: usize,
    pub residual_linf: f64,
    pub residual_l2: f64,
    /// Smallest `strict-k-1` cone margin of `χ_u` against the path coefficients.
    pub min_cone_margin: f64,
    pub a_tilde: f64,
    pub min_sigma_k_minus_1: f64,
    /// Smallest `Σ_i f_i`.
    pub min_grad_sum: f64,
}

/// Newton iteration at the parameter already stored in `s`.
pub fn newton_solve(s: SolverState, p: &Problem, plan: &HomotopyPlan) -> Result<(SolverState, PathRecord)> {
    let tol = plan.tolerance(p);
    let mut state = s;
    let mut linear_iterations = 0;
    for it in 0..=plan.max_newton {
        let e = evaluate(&state, p, true)?;
        let res = residual_of(e.r.clone(), p.grid)?;
        if res.linf <= tol {
            let record = PathRecord {
                stage: state.stage,
                t: state.t,
                newton_iterations: it,
                linear_iterations,
                residual_linf: res.linf,
                residual_l2: res.l2,
                min_cone_margin: e.min_margin,
                a_tilde: state.a_tilde,
                min_sigma_k_minus_1: e.min_sigma,
                min_grad_sum: e.min_grad_sum,
            };
            return Ok((state, record));
        }
        if it == plan.max_newton {
            return Err(Error::NewtonFailure { stage: state.stage.number(), t: state.t, residual: res.linf });
        }
        let step = solve_augmented(p, e.g.as_deref().unwrap_or(&[]), &e.r)?;
        linear_iterations += step.stats.iterations;
        state = damped_update_with(&state, &step, p, plan.min_step, Some(tol))?.state;
    }
    unreachable!("loop returns")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub state: SolverState,
    /// The constant on the `α`-scale.
    pub a: f64,
    pub residual: Residual,
    pub path: Vec<PathRecord>,
}

/// A failed continuation: the error and the last state that converged.
#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyError {
    pub error: Error,
    pub last_good: SolverState,
    pub path: Vec<PathRecord>,
}

impl fmt::Display for HomotopyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (last converged: stage {}, t = {})", self.error, self.last_good.stage.number(), self.last_good.t)
    }
}

impl core::error::Error for HomotopyError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Check the cone condition of `χ_0` against `α̃`, the largest top coefficient on the path.
fn check_path_cone(p: &Problem) -> Result<()> {
    for node in 0..p.grid.nodes() {
        let (raw, _) = cone_margins_raw(&p.chi0.eigenvalues(node)?, &p.points[node].with_top(p.tilde[node]));
        let margin = raw.iter().copied().fold(f64::INFINITY, f64::min);
        if !(margin > 0.0) {
            return Err(Error::ConeCondition { node, margin });
        }
    }
    Ok(())
}

/// Both continuation stages, warm-starting Newton at each `t`, with one
/// bisection of a failed `t`-step.
pub fn homotopy_solve(p: &Problem, plan: &HomotopyPlan) -> core::result::Result<Solution, HomotopyError> {
    let mut state = SolverState::initial(p);
    let mut path = Vec::new();
    let fail = |error, last_good: &SolverState, path: &Vec<PathRecord>| HomotopyError {
        error,
        last_good: last_good.clone(),
        path: path.clone(),
    };
    if let Err(e) = plan.validate().and_then(|_| check_path_cone(p)) {
        return Err(fail(e, &state, &path));
    }
    let (s0, r0) = newton_solve(state.clone(), p, plan).map_err(|e| fail(e, &state, &path))?;
    state = s0;
    path.push(r0);
    for (stage, steps) in [(Stage::One, plan.stage1_steps), (Stage::Two, plan.stage2_steps)] {
        state.stage = stage;
        state.t = 0.0;
        for i in 1..=steps {
            let t = i as f64 / steps as f64;
            let at = |s: &SolverState, t: f64| SolverState { t, ..s.clone() };
            match newton_solve(at(&state, t), p, plan) {
                Ok((s, r)) => {
                    state = s;
                    path.push(r);
                }
                Err(_) => {
                    let mid = 0.5 * (state.t + t);
                    let (s_mid, r_mid) = newton_solve(at(&state, mid), p, plan).map_err(|e| fail(e, &state, &path))?;
                    state = s_mid;
                    path.push(r_mid);
                    let (s, r) = newton_solve(at(&state, t), p, plan).map_err(|e| fail(e, &state, &path))?;
                    state = s;
                    path.push(r);
                }
            }
        }
    }
    let residual = residual(&state, p).map_err(|e| fail(e, &state, &path))?;
    Ok(Solution { a: state.a(p), state, residual, path })
}

fn top_from_chi(chi: &HermitianField, c: &Coefficients) -> Result<ScalarField> {
    let grid = *chi.grid();
    let k = c.k();
    let scale = 1.0 / c.beta_factor(k - 1);
    let mut top = Vec::with_capacity(grid.nodes());
    for node in 0..grid.nodes() {
        let lambda = chi.eigenvalues(node)?;
        let sigma = elementary(&lambda, None);
        let margin = (1..k).map(|j| sigma[j]).fold(f64::INFINITY, f64::min);
        if !membership(&sigma, k - 1).inside || margin < 1e-6 {
            return Err(Error::ConeViolation { node, eigenvalues: lambda });
        }
        let p = c.point_unchecked(&c.alphas_at(node));
        top.push(value_raw(&lambda, &p)? * scale);
    }
    ScalarField::new(grid, top)
}

/// The `α_{k-1}` for which `u_star` solves the discrete equation with `a = 0`.
/// The top entry of `c` is ignored.
pub fn manufactured_coefficients(u_star: &ScalarField, chi0: &HermitianField, c: &Coefficients) -> Result<ScalarField> {
    let n = chi0.grid().n();
    let nb = chi0.grid().neighbors();
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
    let mut forms = Vec::with_capacity(chi0.grid().nodes());
    if chi0.grid() != u_star.grid() {
        return Err(Error::InvalidArgument("χ_0 and u* live on different grids".into()));
    }
    for node in 0..chi0.grid().nodes() {
        nb.hessian_at(u_star.values(), node, &mut buf);
        for (b, x) in buf.iter_mut().zip(chi0.entries(node)) {
            *b = x + *b;
        }
        forms.push(HermitianForm::from_raw(n, buf.clone()));
    }
    top_from_chi(&HermitianField::from_forms(*chi0.grid(), &forms)?, c)
}

/// As [`manufactured_coefficients`], but from the exact complex Hessian of a
/// Fourier potential, so that the discrete solution differs from `u*` by the
/// truncation error of the stencil.
pub fn manufactured_coefficients_analytic(
    u_star: &FourierSpec,
    chi0: &HermitianField,
    c: &Coefficients,
) -> Result<ScalarField> {
    let chi = chi0.add(&u_star.analytic_hessian(chi0.grid())?)?;
    top_from_chi(&chi, c)
}
