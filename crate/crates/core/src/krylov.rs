//! The quotient operator
//!
//! ```text
//! f(λ) = σ_k/σ_{k-1} − Σ_{l=0}^{k-2} β_l σ_l/σ_{k-1},      f(λ(χ_u)) = β_{k-1},
//! ```
//!
//! with `β_l = (C_n^k / C_n^l) α_l`, together with its derivatives, the
//! cone condition in both normalizations, and the inequality margins that
//! certify ellipticity, concavity and the a priori bounds.

use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

// Float methods for `no_std`; shadowed by inherent ones when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::spectral::{eig_hermitian, EigenDecomposition, HermitianForm};
use crate::symfun::{binomial_f64, elementary, elementary_deleted2, membership, Spectrum};
use crate::{AssumptionClause, Error, Result};

/// A coefficient function: a constant or one value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    Field(Vec<f64>),
}

impl Profile {
    pub fn at(&self, node: usize) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Field(v) => v[node],
        }
    }

    /// Sampled values on `nodes` nodes.
    pub fn to_field(&self, nodes: usize) -> Vec<f64> {
        match self {
            Profile::Constant(c) => vec![*c; nodes],
            Profile::Field(v) => v.clone(),
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            Profile::Constant(c) => *c == 0.0,
            Profile::Field(v) => v.iter().all(|&x| x == 0.0),
        }
    }

    pub fn min(&self) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Field(v) => v.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Field(v) => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    fn len(&self) -> Option<usize> {
        match self {
            Profile::Constant(_) => None,
            Profile::Field(v) => Some(v.len()),
        }
    }
}

/// Degree `k`, coefficient functions `α_0 … α_{k-1}` and optional floors `c_{k,l}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    n: usize,
    k: usize,
    alpha: Vec<Profile>,
    floors: Option<Vec<f64>>,
}

impl Coefficients {
    pub fn new(n: usize, k: usize, alpha: Vec<Profile>, floors: Option<Vec<f64>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: n });
        }
        Error::check_degree(k, 2, n)?;
        Error::check_len(k, alpha.len())?;
        if let Some(f) = &floors {
            Error::check_len(k, f.len())?;
            if f.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        let nodes: Vec<usize> = alpha.iter().filter_map(Profile::len).collect();
        if let Some(&first) = nodes.first() {
            if let Some(&bad) = nodes.iter().find(|&&m| m != first) {
                return Err(Error::DimensionMismatch { expected: first, found: bad });
            }
        }
        let finite = alpha.iter().all(|p| match p {
            Profile::Constant(c) => c.is_finite(),
            Profile::Field(v) => v.iter().all(|x| x.is_finite()),
        });
        if !finite {
            return Err(Error::NonFinite);
        }
        Ok(Coefficients { n, k, alpha, floors })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> &[Profile] {
        &self.alpha
    }

    pub fn floors(&self) -> Option<&[f64]> {
        self.floors.as_deref()
    }

    /// Number of nodes the field profiles are sampled on, if any.
    pub fn nodes(&self) -> Option<usize> {
        self.alpha.iter().find_map(Profile::len)
    }

    /// Replace `α_{k-1}`. No sign constraint applies to it.
    pub fn with_top(mut self, top: Profile) -> Result<Self> {
        let k = self.k;
        self.alpha[k - 1] = top;
        Self::new(self.n, self.k, self.alpha, self.floors)
    }

    pub fn alphas_at(&self, node: usize) -> Vec<f64> {
        self.alpha.iter().map(|p| p.at(node)).collect()
    }

    /// `C_n^k / C_n^l`.
    pub fn beta_factor(&self, l: usize) -> f64 {
        binomial_f64(self.n, self.k) / binomial_f64(self.n, l)
    }

    /// Check the coefficient assumptions at every one of `nodes` nodes.
    pub fn validate(&self, nodes: usize) -> Result<()> {
        if let Some(m) = self.nodes() {
            Error::check_len(nodes, m)?;
        }
        for node in 0..nodes {
            self.check_point(&self.alphas_at(node), Some(node))?;
        }
        Ok(())
    }

    fn check_point(&self, alphas: &[f64], node: Option<usize>) -> Result<()> {
        let k = self.k;
        let fail = |clause, degree| Err(Error::Assumption { clause, degree, node });
        let mut sum = 0.0;
        for l in 0..=(k - 2) {
            let a = alphas[l];
            let vanishing = self.alpha[l].is_identically_zero();
            if a < 0.0 || (!vanishing && a <= 0.0) {
                return fail(AssumptionClause::SignOrVanishing, l);
            }
            sum += a;
        }
        if sum <= 0.0 {
            return fail(AssumptionClause::PositiveSum, k - 2);
        }
        if let Some(floors) = &self.floors {
            if let Some(l) = (0..k).find(|&l| alphas[l] < floors[l]) {
                return fail(AssumptionClause::Floor, l);
            }
        }
        Ok(())
    }

    /// The point of `β` values at `node`, with the assumptions checked.
    pub fn point(&self, node: usize) -> Result<KrylovPoint> {
        let alphas = self.alphas_at(node);
        self.check_point(&alphas, Some(node))?;
        Ok(self.point_unchecked(&alphas))
    }

    pub(crate) fn point_unchecked(&self, alphas: &[f64]) -> KrylovPoint {
        let beta = alphas.iter().enumerate().map(|(l, a)| self.beta_factor(l) * a).collect();
        KrylovPoint { n: self.n, k: self.k, beta }
    }
}

/// `β_l = (C_n^k/C_n^l) α_l` at one point, after checking the assumptions
/// there. `alphas` holds `α_0 … α_{k-1}` at the point.
pub fn betas_from_alphas(c: &Coefficients, alphas: &[f64]) -> Result<KrylovPoint> {
    Error::check_len(c.k, alphas.len())?;
    if alphas.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite);
    }
    c.check_point(alphas, None)?;
    Ok(c.point_unchecked(alphas))
}

/// Pointwise coefficients `β_0 … β_{k-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovPoint {
    n: usize,
    k: usize,
    beta: Vec<f64>,
}

impl KrylovPoint {
    pub fn new(n: usize, k: usize, beta: Vec<f64>) -> Result<Self> {
        Error::check_degree(k, 2, n)?;
        Error::check_len(k, beta.len())?;
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(l) = (0..=(k - 2)).find(|&l| beta[l] < 0.0) {
            return Err(Error::Assumption { clause: AssumptionClause::SignOrVanishing, degree: l, node: None });
        }
        Ok(KrylovPoint { n, k, beta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `β_{k-1}`, the right-hand side of the equation.
    pub fn top(&self) -> f64 {
        self.beta[self.k - 1]
    }

    pub fn with_top(&self, top: f64) -> Self {
        let mut p = self.clone();
        p.beta[self.k - 1] = top;
        p
    }
}

/// Shared evaluation of `f = g/h` with `g = σ_k − Σ_{l≤k-2} β_l σ_l` and `h = σ_{k-1}`.
struct Quotient {
    sigma: Vec<f64>,
    deleted: Vec<Vec<f64>>,
    g: f64,
    h: f64,
}

fn at(v: &[f64], j: isize) -> f64 {
    if j < 0 {
        0.0
    } else {
        v.get(j as usize).copied().unwrap_or(0.0)
    }
}

impl Quotient {
    fn new(lambda: &[f64], p: &KrylovPoint) -> Result<Self> {
        let n = lambda.len();
        Error::check_len(p.n, n)?;
        let k = p.k;
        let sigma = elementary(lambda, None);
        if let Some(failing) = membership(&sigma, k - 1).first_failing_degree {
            return Err(Error::OutsideCone { degree: k - 1, failing });
        }
        let deleted = (0..n).map(|i| elementary(lambda, Some(i))).collect();
        let lower: f64 = (0..=(k - 2)).map(|l| p.beta[l] * sigma[l]).sum();
        Ok(Quotient { g: sigma[k] - lower, h: sigma[k - 1], sigma, deleted })
    }

    fn value(&self) -> f64 {
        self.g / self.h
    }

    fn dg(&self, i: usize, p: &KrylovPoint) -> f64 {
        let k = p.k as isize;
        let d = &self.deleted[i];
        at(d, k - 1) - (0..=(k - 2)).map(|l| p.beta[l as usize] * at(d, l - 1)).sum::<f64>()
    }

    fn dh(&self, i: usize, p: &KrylovPoint) -> f64 {
        at(&self.deleted[i], p.k as isize - 2)
    }

    fn grad(&self, p: &KrylovPoint) -> Vec<f64> {
        let h2 = self.h * self.h;
        (0..self.deleted.len()).map(|i| (self.dg(i, p) * self.h - self.g * self.dh(i, p)) / h2).collect()
    }

    /// `Σ_{l≤k-2} (k−l) β_l σ_l / σ_{k-1}`, the defect in Euler's relation.
    fn euler_defect(&self, p: &KrylovPoint) -> f64 {
        let k = p.k;
        (0..=(k - 2)).map(|l| (k - l) as f64 * p.beta[l] * self.sigma[l]).sum::<f64>() / self.h
    }
}

/// `f(λ)`; the equation holds at a point iff this equals `β_{k-1}`.
pub fn f_value(lambda: &Spectrum, p: &KrylovPoint) -> Result<f64> {
    Ok(Quotient::new(lambda.values(), p)?.value())
}

pub(crate) fn value_raw(lambda: &[f64], p: &KrylovPoint) -> Result<f64> {
    Ok(Quotient::new(lambda, p)?.value())
}

/// `(f, ∇f, σ_{k-1})` in one pass.
pub(crate) fn value_grad_raw(lambda: &[f64], p: &KrylovPoint) -> Result<(f64, Vec<f64>, f64)> {
    let q = Quotient::new(lambda, p)?;
    Ok((q.value(), q.grad(p), q.h))
}

/// `f_i = ∂f/∂λ_i` by the quotient rule on deleted-vector σ's.
pub fn f_grad(lambda: &Spectrum, p: &KrylovPoint) -> Result<Vec<f64>> {
    Ok(Quotient::new(lambda.values(), p)?.grad(p))
}

/// `∂²f/∂λ_p∂λ_q`, row-major `n×n`. Uses `∂²σ_m/∂λ_p∂λ_q = σ_{m-2}(λ|p,q)` off
/// the diagonal and `0` on it.
pub fn f_hessian(lambda: &Spectrum, p: &KrylovPoint) -> Result<Vec<f64>> {
    let v = lambda.values();
    let n = v.len();
    let q = Quotient::new(v, p)?;
    let k = p.k as isize;
    let (g, h) = (q.g, q.h);
    let dg: Vec<f64> = (0..n).map(|i| q.dg(i, p)).collect();
    let dh: Vec<f64> = (0..n).map(|i| q.dh(i, p)).collect();
    let mut out = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let (gab, hab) = if a == b {
                (0.0, 0.0)
            } else {
                let d2 = elementary_deleted2(v, a, b);
                let lower: f64 = (0..=(k - 2)).map(|l| p.beta[l as usize] * at(&d2, l - 2)).sum();
                (at(&d2, k - 2) - lower, at(&d2, k - 3))
            };
            out[a * n + b] = gab / h - (dg[a] * dh[b] + dg[b] * dh[a]) / (h * h) - g * hab / (h * h)
                + 2.0 * g * dh[a] * dh[b] / (h * h * h);
        }
    }
    Ok(out)
}

/// `F(χ)`, its eigen-decomposition and `F^{ij̄} = ∂F/∂χ_{ij̄}`.
#[derive(Debug, Clone)]
pub struct FormEvaluation {
    pub eigen: EigenDecomposition,
    pub value: f64,
    pub grad: Vec<f64>,
    pub derivative: HermitianForm,
}

pub fn evaluate_form(chi: &HermitianForm, p: &KrylovPoint) -> Result<FormEvaluation> {
    let eigen = eig_hermitian(chi)?;
    let q = Quotient::new(eigen.eigenvalues.values(), p)?;
    let grad = q.grad(p);
    let derivative = eigen.synthesize(&grad);
    Ok(FormEvaluation { value: q.value(), grad, derivative, eigen })
}

/// Which normalization of the cone condition a [`ConeReport`] leads with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeVariant {
    /// `σ_{k-1}(χ|i) − Σ_{l=1}^{k-1} β_l σ_{l-1}(χ|i) > 0`
    StrictKMinus1,
    /// `σ_{k-1}(μ|i)/σ_{k-2}(μ|i) − Σ_{l=1}^{k-2} β_l σ_{l-1}(μ|i)/σ_{k-2}(μ|i) − β_{k-1} > 0`
    MuForm,
}

impl ConeVariant {
    pub fn name(self) -> &'static str {
        match self {
            ConeVariant::StrictKMinus1 => "strict-k-1",
            ConeVariant::MuForm => "mu-form",
        }
    }
}

impl FromStr for ConeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict-k-1" => Ok(ConeVariant::StrictKMinus1),
            "mu-form" => Ok(ConeVariant::MuForm),
            _ => Err(Error::UnknownName(s.into())),
        }
    }
}

/// Input to [`cone_margin`]: a matrix is diagonalized first.
#[derive(Debug, Clone, Copy)]
pub enum ConeInput<'a> {
    Form(&'a HermitianForm),
    Spectrum(&'a Spectrum),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeReport {
    pub variant: ConeVariant,
    /// Per-direction margins in the requested normalization.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    /// `strict-k-1` margins.
    pub raw: Vec<f64>,
    /// `mu-form` margins, i.e. `raw_i / σ_{k-2}(χ|i)`; `None` when some
    /// `σ_{k-2}(χ|i) ≤ 0`.
    pub normalized: Option<Vec<f64>>,
    /// Largest `τ` with `χ − τω` and `ω − τχ` both in `Γ_{k-1}`, when `χ ∈ Γ_{k-1}`.
    pub tau: Option<f64>,
}

impl ConeReport {
    pub fn satisfied(&self) -> bool {
        self.min_margin > 0.0
    }
}

pub(crate) fn cone_margins_raw(lambda: &[f64], p: &KrylovPoint) -> (Vec<f64>, Vec<f64>) {
    let k = p.k as isize;
    let n = lambda.len();
    let mut raw = Vec::with_capacity(n);
    let mut denom = Vec::with_capacity(n);
    for i in 0..n {
        let d = elementary(lambda, Some(i));
        let sub: f64 = (1..k).map(|l| p.beta[l as usize] * at(&d, l - 1)).sum();
        raw.push(at(&d, k - 1) - sub);
        denom.push(at(&d, k - 2));
    }
    (raw, denom)
}

/// Per-direction cone margins of `χ` (or a spectrum `μ`) in the eigenframe.
pub fn cone_margin(input: ConeInput<'_>, p: &KrylovPoint, variant: ConeVariant) -> Result<ConeReport> {
    let owned;
    let lambda = match input {
        ConeInput::Spectrum(s) => s,
        ConeInput::Form(chi) => {
            owned = eig_hermitian(chi)?.eigenvalues;
            &owned
        }
    };
    Error::check_len(p.n, lambda.len())?;
    let (raw, denom) = cone_margins_raw(lambda.values(), p);
    let normalized =
        denom.iter().all(|&d| d > 0.0).then(|| raw.iter().zip(&denom).map(|(r, d)| r / d).collect::<Vec<_>>());
    let margins = match variant {
        ConeVariant::StrictKMinus1 => raw.clone(),
        ConeVariant::MuForm => match &normalized {
            Some(m) => m.clone(),
            None => {
                let i = denom.iter().position(|&d| d <= 0.0).unwrap_or(0);
                return Err(Error::InvalidArgument(alloc::format!(
                    "mu-form needs σ_(k-2)(μ|{i}) > 0, got {:e}",
                    denom[i]
                )));
            }
        },
    };
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let tau = uniform_slack(lambda, p.k - 1);
    Ok(ConeReport { variant, margins, min_margin, raw, normalized, tau })
}

/// Largest `τ ≥ 0` with `λ − τ1 ∈ Γ_m` and `1 − τλ ∈ Γ_m`, by bisection.
pub fn uniform_slack(lambda: &Spectrum, m: usize) -> Option<f64> {
    let v = lambda.values();
    let inside = |w: &[f64]| membership(&elementary(w, None), m).inside;
    if !inside(v) {
        return None;
    }
    let n = v.len() as f64;
    let s1: f64 = v.iter().sum();
    let bisect = |hi: f64, test: &dyn Fn(f64) -> bool| {
        let (mut lo, mut hi) = (0.0, hi);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if test(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let shift = bisect(s1 / n, &|t| inside(&v.iter().map(|x| x - t).collect::<Vec<_>>()));
    let damp = bisect(n / s1, &|t| inside(&v.iter().map(|x| 1.0 - t * x).collect::<Vec<_>>()));
    Some(shift.min(damp))
}

/// Inequalities certified by [`inequality_margin`]. Each margin is `≥ 0`
/// (up to rounding) under its stated cone precondition, except
/// [`Inequality::Euler`], which is an identity residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    /// `min_i σ_{k-1}(λ|i)/σ_{l-1}(λ|i) − σ_k/σ_l` for `1 ≤ l ≤ k-1`
    /// (`None` means `l = k-1`). Needs `Γ_k` for `l < k-1`, `Γ_{k-1}` for `l = k-1`.
    QuotientDeleted { lower: Option<usize> },
    /// `Σ f_i − (n−k+1)/k`.
    GradSum,
    /// Upper bound on `σ_l/σ_{k-1}` (`None`: worst `l ≤ k-2`) for a solution
    /// of the equation, i.e. with `β_{k-1} := f(λ)`. Branch `σ_k/σ_{k-1} ≤ 1`
    /// gives `1 + |β_{k-1}| − β_l σ_l/σ_{k-1}`; otherwise
    /// `(C_n^k)^{k-1-l} C_n^l / (C_n^{k-1})^{k-l} − σ_l/σ_{k-1}`.
    RatioUpper { l: Option<usize> },
    /// `−|β_{k-1}| ≤ σ_k/σ_{k-1} ≤ max(1, β_{k-1} + Σ β_l C_l)` with `β_{k-1} := f(λ)`.
    QuotientBounds,
    /// `|Σ f_i λ_i − f − Σ_{l≤k-2} (k−l) β_l σ_l/σ_{k-1}|`.
    Euler,
    /// `Σ f_i(λ) μ_i − f(μ) − Σ_{l≤k-2} (k−l) β_l σ_l(λ)/σ_{k-1}(λ)`.
    Tangent,
    /// `f((λ+μ)/2) − (f(λ) + f(μ))/2`.
    ConcavityMidpoint,
}

impl Inequality {
    pub fn name(self) -> &'static str {
        match self {
            Inequality::QuotientDeleted { .. } => "quotient-deleted",
            Inequality::GradSum => "grad-sum",
            Inequality::RatioUpper { .. } => "ratio-upper",
            Inequality::QuotientBounds => "quotient-bounds",
            Inequality::Euler => "euler",
            Inequality::Tangent => "tangent",
            Inequality::ConcavityMidpoint => "concavity-midpoint",
        }
    }

    fn needs_mu(self) -> bool {
        matches!(self, Inequality::Tangent | Inequality::ConcavityMidpoint)
    }
}

impl FromStr for Inequality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "quotient-deleted" => Inequality::QuotientDeleted { lower: None },
            "grad-sum" => Inequality::GradSum,
            "ratio-upper" => Inequality::RatioUpper { l: None },
            "quotient-bounds" => Inequality::QuotientBounds,
            "euler" => Inequality::Euler,
            "tangent" => Inequality::Tangent,
            "concavity-midpoint" => Inequality::ConcavityMidpoint,
            _ => return Err(Error::UnknownName(s.into())),
        })
    }
}

/// `(C_n^k)^{k-1-l} C_n^l / (C_n^{k-1})^{k-l}`, the Newton–MacLaurin bound on
/// `σ_l/σ_{k-1}` when `σ_k ≥ σ_{k-1}`.
pub fn ratio_bound(n: usize, k: usize, l: usize) -> f64 {
    let ck = binomial_f64(n, k);
    let ck1 = binomial_f64(n, k - 1);
    ck.powi((k - 1 - l) as i32) * binomial_f64(n, l) / ck1.powi((k - l) as i32)
}

pub fn inequality_margin(which: Inequality, lambda: &Spectrum, p: &KrylovPoint, mu: Option<&Spectrum>) -> Result<f64> {
    let n = lambda.len();
    let k = p.k;
    let mu = if which.needs_mu() {
        let m = mu.ok_or_else(|| Error::InvalidArgument(alloc::format!("{} needs μ", which.name())))?;
        Error::check_len(n, m.len())?;
        Some(m)
    } else {
        None
    };
    let q = Quotient::new(lambda.values(), p)?;
    match which {
        Inequality::QuotientDeleted { lower } => {
            let l = lower.unwrap_or(k - 1);
            Error::check_degree(l, 1, k - 1)?;
            let cone = if l == k - 1 { k - 1 } else { k };
            if let Some(failing) = membership(&q.sigma, cone).first_failing_degree {
                return Err(Error::OutsideCone { degree: cone, failing });
            }
            let min = q.deleted.iter().map(|d| d[k - 1] / d[l - 1]).fold(f64::INFINITY, f64::min);
            Ok(min - q.sigma[k] / q.sigma[l])
        }
        Inequality::GradSum => {
            let sum: f64 = q.grad(p).iter().sum();
            Ok(sum - (n - k + 1) as f64 / k as f64)
        }
        Inequality::RatioUpper { l } => {
            let top = q.value();
            let quotient = q.sigma[k] / q.h;
            let margin_for = |l: usize| {
                let ratio = q.sigma[l] / q.h;
                if quotient <= 1.0 {
                    1.0 + top.abs() - p.beta[l] * ratio
                } else {
                    ratio_bound(n, k, l) - ratio
                }
            };
            match l {
                Some(l) => {
                    Error::check_degree(l, 0, k - 2)?;
                    Ok(margin_for(l))
                }
                None => Ok((0..=(k - 2)).map(margin_for).fold(f64::INFINITY, f64::min)),
            }
        }
        Inequality::QuotientBounds => {
            let top = q.value();
            let quotient = q.sigma[k] / q.h;
            let upper = (0..=(k - 2)).map(|l| p.beta[l] * ratio_bound(n, k, l)).sum::<f64>() + top;
            Ok((quotient + top.abs()).min(upper.max(1.0) - quotient))
        }
        Inequality::Euler => {
            let lhs: f64 = q.grad(p).iter().zip(lambda.values()).map(|(f, l)| f * l).sum();
            Ok((lhs - q.value() - q.euler_defect(p)).abs())
        }
        Inequality::Tangent => {
            let mu = mu.unwrap_or(lambda);
            let qm = Quotient::new(mu.values(), p)?;
            let lhs: f64 = q.grad(p).iter().zip(mu.values()).map(|(f, m)| f * m).sum();
            Ok(lhs - qm.value() - q.euler_defect(p))
        }
        Inequality::ConcavityMidpoint => {
            let mu = mu.unwrap_or(lambda);
            let qm = Quotient::new(mu.values(), p)?;
            let mid: Vec<f64> = lambda.values().iter().zip(mu.values()).map(|(a, b)| 0.5 * (a + b)).collect();
            let qmid = Quotient::new(&mid, p)?;
            Ok(qmid.value() - 0.5 * (q.value() + qm.value()))
        }
    }
}
