//! The flat torus `ℂⁿ/(2πℤ)^{2n}` sampled on a uniform periodic grid.
//!
//! Real axes are ordered `(x¹, y¹, …, xⁿ, yⁿ)` with `zⁱ = xⁱ + √−1 yⁱ`, and
//! nodes are indexed row-major (the last axis varies fastest). The complex
//! Hessian uses
//!
//! ```text
//! ∂²u/∂zⁱ∂z̄ʲ = ¼(u_{xⁱxʲ} + u_{yⁱyʲ}) + (√−1/4)(u_{xⁱyʲ} − u_{yⁱxʲ})
//! ```
//!
//! with second-order central differences: the compact 3-point stencil on the
//! diagonal and the 4-point cross stencil for mixed pairs. `χ_u = χ_0 + ∂∂̄u`
//! entrywise, the `√−1/2` of the form normalization being absorbed.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
// Float methods for `no_std`; shadowed by inherent ones when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::krylov::Coefficients;
use crate::spectral::{eigenvalues, HermitianForm};
use crate::symfun::{binomial_f64, elementary, membership};
use crate::{Error, Result};

/// A periodic grid with `points` nodes per real axis on `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    n: usize,
    points: usize,
    h: f64,
}

impl TorusGrid {
    pub fn new(n: usize, points: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: n });
        }
        if points < 8 || !points.is_multiple_of(2) {
            return Err(Error::InvalidArgument(alloc::format!("points per axis must be even and ≥ 8, got {points}")));
        }
        if (points as f64).powi(2 * n as i32) > 1e8 {
            return Err(Error::TooLarge { n: points, max: 0 });
        }
        Ok(TorusGrid { n, points, h: 2.0 * PI / points as f64 })
    }

    /// Complex dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn axes(&self) -> usize {
        2 * self.n
    }

    pub fn nodes(&self) -> usize {
        self.points.pow(self.axes() as u32)
    }

    /// Stride of `axis` in the flat index.
    pub fn stride(&self, axis: usize) -> usize {
        self.points.pow((self.axes() - 1 - axis) as u32)
    }

    /// Integer coordinates of `node`, one per axis.
    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        (0..self.axes()).map(|a| (node / self.stride(a)) % self.points).collect()
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        self.multi_index(node).into_iter().map(|j| j as f64 * self.h).collect()
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().enumerate().map(|(a, &j)| (j % self.points) * self.stride(a)).sum()
    }

    /// Periodic neighbour tables for the stencils.
    pub fn neighbors(&self) -> Neighbors {
        let nodes = self.nodes();
        let axes = self.axes();
        let mut plus = vec![0usize; axes * nodes];
        let mut minus = vec![0usize; axes * nodes];
        for a in 0..axes {
            let s = self.stride(a);
            let span = s * self.points;
            for node in 0..nodes {
                let base = node - node % span;
                let within = node % span;
                plus[a * nodes + node] = base + (within + s) % span;
                minus[a * nodes + node] = base + (within + span - s) % span;
            }
        }
        Neighbors { grid: *self, plus, minus }
    }
}

/// `±1` neighbours of every node along every axis.
#[derive(Debug, Clone)]
pub struct Neighbors {
    grid: TorusGrid,
    plus: Vec<usize>,
    minus: Vec<usize>,
}

impl Neighbors {
    #[inline]
    pub fn plus(&self, axis: usize, node: usize) -> usize {
        self.plus[axis * self.grid.nodes() + node]
    }

    #[inline]
    pub fn minus(&self, axis: usize, node: usize) -> usize {
        self.minus[axis * self.grid.nodes() + node]
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    #[inline]
    fn second(&self, u: &[f64], a: usize, node: usize) -> f64 {
        u[self.plus(a, node)] - 2.0 * u[node] + u[self.minus(a, node)]
    }

    #[inline]
    fn mixed(&self, u: &[f64], a: usize, b: usize, node: usize) -> f64 {
        let (p, m) = (self.plus(a, node), self.minus(a, node));
        0.25 * (u[self.plus(b, p)] - u[self.minus(b, p)] - u[self.plus(b, m)] + u[self.minus(b, m)])
    }

    /// Discrete `∂∂̄u` at `node`, row-major into `out` (`n×n`).
    pub fn hessian_at(&self, u: &[f64], node: usize, out: &mut [Complex64]) {
        let n = self.grid.n;
        let scale = 0.25 / (self.grid.h * self.grid.h);
        for i in 0..n {
            let (xi, yi) = (2 * i, 2 * i + 1);
            let d = scale * (self.second(u, xi, node) + self.second(u, yi, node));
            out[i * n + i] = Complex64::new(d, 0.0);
            for j in (i + 1)..n {
                let (xj, yj) = (2 * j, 2 * j + 1);
                let re = self.mixed(u, xi, xj, node) + self.mixed(u, yi, yj, node);
                let im = self.mixed(u, xi, yj, node) - self.mixed(u, yi, xj, node);
                let z = Complex64::new(scale * re, scale * im);
                out[i * n + j] = z;
                out[j * n + i] = z.conj();
            }
        }
    }

    /// Discrete `tr ∂∂̄u = ¼ Σ_axes D²u` at `node`.
    pub fn laplacian_at(&self, u: &[f64], node: usize) -> f64 {
        let scale = 0.25 / (self.grid.h * self.grid.h);
        scale * (0..self.grid.axes()).map(|a| self.second(u, a, node)).sum::<f64>()
    }
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

pub fn pairwise_mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Real values, one per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        Error::check_len(grid.nodes(), values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        ScalarField { grid, values: vec![c; grid.nodes()] }
    }

    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.nodes()).map(|node| f(&grid.coords(node))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        pairwise_mean(&self.values)
    }

    /// Subtract the mean.
    pub fn recentered(mut self) -> Self {
        let m = self.mean();
        self.values.iter_mut().for_each(|v| *v -= m);
        self
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Root-mean-square norm.
    pub fn l2(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        pairwise_mean(&sq).sqrt()
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &ScalarField) -> Result<Self> {
        Error::check_len(self.values.len(), other.values.len())?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect();
        Ok(ScalarField { grid: self.grid, values })
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One Hermitian form per node, stored flat (`nodes × n × n`).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianField {
    grid: TorusGrid,
    data: Vec<Complex64>,
    cone: Option<(usize, Vec<bool>)>,
}

impl HermitianField {
    pub fn constant(grid: TorusGrid, form: &HermitianForm) -> Result<Self> {
        Error::check_len(grid.n, form.n())?;
        let mut data = Vec::with_capacity(grid.nodes() * form.entries().len());
        for _ in 0..grid.nodes() {
            data.extend_from_slice(form.entries());
        }
        Ok(HermitianField { grid, data, cone: None })
    }

    pub fn from_forms(grid: TorusGrid, forms: &[HermitianForm]) -> Result<Self> {
        Error::check_len(grid.nodes(), forms.len())?;
        let mut data = Vec::with_capacity(grid.nodes() * grid.n * grid.n);
        for f in forms {
            Error::check_len(grid.n, f.n())?;
            data.extend_from_slice(f.entries());
        }
        Ok(HermitianField { grid, data, cone: None })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn entries(&self, node: usize) -> &[Complex64] {
        let m = self.grid.n * self.grid.n;
        &self.data[node * m..(node + 1) * m]
    }

    pub fn form(&self, node: usize) -> HermitianForm {
        HermitianForm::from_raw(self.grid.n, self.entries(node).to_vec())
    }

    pub fn add(&self, other: &HermitianField) -> Result<Self> {
        Error::check_len(self.data.len(), other.data.len())?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(HermitianField { grid: self.grid, data, cone: None })
    }

    /// Eigenvalues (descending) at `node`.
    pub fn eigenvalues(&self, node: usize) -> Result<Vec<f64>> {
        eigenvalues(&self.form(node))
    }

    /// Pointwise `Γ_degree` membership, computed and cached.
    pub fn check_cone(&mut self, degree: usize) -> Result<&[bool]> {
        if self.cone.as_ref().map(|(d, _)| *d) != Some(degree) {
            Error::check_degree(degree, 1, self.grid.n)?;
            let mut flags = Vec::with_capacity(self.grid.nodes());
            for node in 0..self.grid.nodes() {
                let s = elementary(&self.eigenvalues(node)?, None);
                flags.push(membership(&s, degree).inside);
            }
            self.cone = Some((degree, flags));
        }
        Ok(self.cone.as_ref().map(|(_, f)| f.as_slice()).unwrap_or(&[]))
    }

    /// The cached flags, if [`HermitianField::check_cone`] ran for `degree`.
    pub fn cone_flags(&self, degree: usize) -> Option<&[bool]> {
        self.cone.as_ref().filter(|(d, _)| *d == degree).map(|(_, f)| f.as_slice())
    }

    /// Largest pointwise deviation from `A = A*`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n;
        let mut worst: f64 = 0.0;
        for node in 0..self.grid.nodes() {
            let e = self.entries(node);
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((e[i * n + j] - e[j * n + i].conj()).norm());
                }
            }
        }
        worst
    }
}

/// Discrete `∂∂̄u` with periodic wrap. Exactly Hermitian by construction.
pub fn complex_hessian(u: &ScalarField) -> HermitianField {
    complex_hessian_with(&u.grid.neighbors(), u)
}

pub fn complex_hessian_with(nb: &Neighbors, u: &ScalarField) -> HermitianField {
    let grid = u.grid;
    let m = grid.n * grid.n;
    let mut data = vec![Complex64::new(0.0, 0.0); grid.nodes() * m];
    for (node, out) in data.chunks_exact_mut(m).enumerate() {
        nb.hessian_at(&u.values, node, out);
    }
    HermitianField { grid, data, cone: None }
}

/// `χ_u = χ_0 + ∂∂̄u`, with `Γ_cone_degree` membership cached.
pub fn chi_field(chi0: &HermitianField, u: &ScalarField, cone_degree: usize) -> Result<HermitianField> {
    if chi0.grid != u.grid {
        return Err(Error::InvalidArgument("χ_0 and u live on different grids".into()));
    }
    let mut chi = chi0.add(&complex_hessian(u))?;
    chi.check_cone(cone_degree)?;
    Ok(chi)
}

/// Grid mean of `σ_l(χ)/C_n^l`, the discrete `∫ χ^l ∧ ω^{n-l} / ∫ ωⁿ`.
pub fn mean_sigma(chi: &HermitianField, l: usize) -> Result<f64> {
    Ok(mean_sigmas(chi)?[l])
}

/// [`mean_sigma`] for every `l = 0 … n` at once.
pub fn mean_sigmas(chi: &HermitianField) -> Result<Vec<f64>> {
    let n = chi.grid.n;
    let nodes = chi.grid.nodes();
    let mut per_l = vec![Vec::with_capacity(nodes); n + 1];
    for node in 0..nodes {
        let s = elementary(&chi.eigenvalues(node)?, None);
        for (l, acc) in per_l.iter_mut().enumerate() {
            acc.push(s[l] / binomial_f64(n, l));
        }
    }
    Ok(per_l.iter().map(|v| pairwise_mean(v)).collect())
}

/// Discrete form of the integral necessary condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralGap {
    /// `mean(Σ_l α_l σ_l/C_n^l) − mean(σ_k/C_n^k)`; zero when the equality holds.
    pub gap: f64,
    /// `Σ_l c_{k,l} mean(σ_l/C_n^l) − mean(σ_k/C_n^k)`; nonnegative when the
    /// floor inequality holds.
    pub floor_gap: Option<f64>,
}

pub fn integral_condition_gap(chi: &HermitianField, c: &Coefficients) -> Result<IntegralGap> {
    let n = chi.grid.n;
    let k = c.k();
    Error::check_len(n, c.n())?;
    if let Some(m) = c.nodes() {
        Error::check_len(chi.grid.nodes(), m)?;
    }
    let nodes = chi.grid.nodes();
    let mut rhs = Vec::with_capacity(nodes);
    let mut lhs = Vec::with_capacity(nodes);
    let mut per_l = vec![Vec::with_capacity(nodes); k];
    for node in 0..nodes {
        let s = elementary(&chi.eigenvalues(node)?, None);
        let normalized = |l: usize| s[l] / binomial_f64(n, l);
        rhs.push((0..k).map(|l| c.alpha()[l].at(node) * normalized(l)).sum());
        lhs.push(normalized(k));
        for (l, acc) in per_l.iter_mut().enumerate() {
            acc.push(normalized(l));
        }
    }
    let lhs_mean = pairwise_mean(&lhs);
    let floor_gap =
        c.floors().map(|floors| floors.iter().zip(&per_l).map(|(cl, v)| cl * pairwise_mean(v)).sum::<f64>() - lhs_mean);
    Ok(IntegralGap { gap: pairwise_mean(&rhs) - lhs_mean, floor_gap })
}

/// `amplitude · cos(m·x + phase)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMode {
    pub wave: Vec<i64>,
    pub amplitude: f64,
    pub phase: f64,
}

impl FourierMode {
    pub fn new(wave: Vec<i64>, amplitude: f64, phase: f64) -> Self {
        FourierMode { wave, amplitude, phase }
    }

    fn angle(&self, x: &[f64]) -> f64 {
        self.wave.iter().zip(x).map(|(&m, &xi)| m as f64 * xi).sum::<f64>() + self.phase
    }
}

/// A finite real cosine series; smooth periodic data for coefficients,
/// potentials of `χ_0`, and manufactured solutions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FourierSpec {
    pub modes: Vec<FourierMode>,
}

impl FourierSpec {
    pub fn new(modes: Vec<FourierMode>) -> Self {
        FourierSpec { modes }
    }

    pub fn single(wave: Vec<i64>, amplitude: f64, phase: f64) -> Self {
        FourierSpec { modes: vec![FourierMode::new(wave, amplitude, phase)] }
    }

    /// Wave vectors must have one component per real axis, each `|m_a| ≤ N/4`.
    pub fn check(&self, grid: &TorusGrid) -> Result<()> {
        let bound = grid.points / 4;
        for mode in &self.modes {
            Error::check_len(grid.axes(), mode.wave.len())?;
            if !mode.amplitude.is_finite() || !mode.phase.is_finite() {
                return Err(Error::NonFinite);
            }
            if let Some(&m) = mode.wave.iter().find(|m| m.unsigned_abs() as usize > bound) {
                return Err(Error::Aliasing { component: m, bound });
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.modes.iter().map(|m| m.amplitude * m.angle(x).cos()).sum()
    }

    /// Exact `∂²φ/∂zⁱ∂z̄ʲ` at `x`, row-major into `out`.
    pub fn hessian_at(&self, n: usize, x: &[f64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for mode in &self.modes {
            let c = -mode.amplitude * mode.angle(x).cos();
            let m = |a: usize| mode.wave[a] as f64;
            for i in 0..n {
                for j in 0..n {
                    let (xi, yi, xj, yj) = (m(2 * i), m(2 * i + 1), m(2 * j), m(2 * j + 1));
                    let re = 0.25 * (xi * xj + yi * yj);
                    let im = 0.25 * (xi * yj - yi * xj);
                    out[i * n + j] += Complex64::new(re, im) * c;
                }
            }
        }
    }

    /// The exact complex Hessian sampled at the nodes.
    pub fn analytic_hessian(&self, grid: &TorusGrid) -> Result<HermitianField> {
        self.check(grid)?;
        let m = grid.n * grid.n;
        let mut data = vec![Complex64::new(0.0, 0.0); grid.nodes() * m];
        for (node, out) in data.chunks_exact_mut(m).enumerate() {
            self.hessian_at(grid.n, &grid.coords(node), out);
        }
        Ok(HermitianField { grid: *grid, data, cone: None })
    }
}

/// Pointwise synthesis of `spec` on `grid`.
pub fn sample_fourier(spec: &FourierSpec, grid: &TorusGrid) -> Result<ScalarField> {
    spec.check(grid)?;
    ScalarField::from_fn(*grid, |x| spec.value(x))
}
