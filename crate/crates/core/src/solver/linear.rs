//! Linear solves for the Newton correction.
//!
//! The augmented system is
//!
//! ```text
//! Re tr(G(z) ∂∂̄v(z)) − da = y(z),      mean(v) = ζ
//! ```
//!
//! Right-preconditioned restarted GMRES is preconditioned by the exact inverse
//! of the constant-coefficient case `G = c·I`, applied in a real orthonormal
//! trigonometric basis of each axis (the eigenbasis of the periodic 3-point
//! second difference).

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// Float methods for `no_std`; shadowed by inherent ones when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::spectral::pair_raw;
use crate::torus::{pairwise_sum, Neighbors, TorusGrid};
use crate::{Error, Result};

/// Above this many unknowns the dense fallback is not attempted.
pub const DENSE_FALLBACK_MAX: usize = 5000;

const RESTART: usize = 60;
const STAGNATION_WINDOW: usize = 200;
const MAX_ITERATIONS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearMethod {
    Gmres,
    DenseLu,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearStats {
    pub method: LinearMethod,
    pub iterations: usize,
    /// `‖b − Ax‖/‖b‖` of the returned solution, recomputed.
    pub relative_residual: f64,
}

/// Pairwise dot product.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if a.len() <= BLOCK {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    } else {
        let mid = a.len() / 2;
        dot(&a[..mid], &b[..mid]) + dot(&a[mid..], &b[mid..])
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Inverse of the periodic discrete `tr ∂∂̄ = ¼ Σ_a D_a²` on mean-zero fields.
#[derive(Debug, Clone)]
pub struct LaplaceInverse {
    grid: TorusGrid,
    /// `basis[j·N + col]`: orthonormal columns.
    basis: Vec<f64>,
    /// Inverse symbol per tensor index, zero on the constant mode.
    inverse: Vec<f64>,
}

impl LaplaceInverse {
    pub fn new(grid: TorusGrid) -> Self {
        let m = grid.points();
        let h = grid.spacing();
        let freq = |col: usize| col.div_ceil(2);
        let mut basis = vec![0.0; m * m];
        for j in 0..m {
            let x = j as f64 * h;
            for col in 0..m {
                let q = freq(col) as f64;
                basis[j * m + col] = if col == 0 || col == m - 1 {
                    (q * x).cos() / (m as f64).sqrt()
                } else if col % 2 == 1 {
                    (2.0 / m as f64).sqrt() * (q * x).cos()
                } else {
                    (2.0 / m as f64).sqrt() * (q * x).sin()
                };
            }
        }
        let symbol: Vec<f64> = (0..m)
            .map(|col| {
                let s = (freq(col) as f64 * h / 2.0).sin();
                -4.0 * s * s / (h * h)
            })
            .collect();
        let inverse = (0..grid.nodes())
            .map(|node| {
                let idx = grid.multi_index(node);
                if idx.iter().all(|&c| c == 0) {
                    0.0
                } else {
                    1.0 / (0.25 * idx.iter().map(|&c| symbol[c]).sum::<f64>())
                }
            })
            .collect();
        LaplaceInverse { grid, basis, inverse }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    fn transform(&self, data: &mut [f64], forward: bool, line: &mut [f64]) {
        let m = self.grid.points();
        let nodes = self.grid.nodes();
        for axis in 0..self.grid.axes() {
            let s = self.grid.stride(axis);
            for outer in 0..nodes / (s * m) {
                for inner in 0..s {
                    let start = outer * s * m + inner;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[start + j * s];
                    }
                    for out in 0..m {
                        let mut acc = 0.0;
                        for (j, &x) in line.iter().enumerate() {
                            acc += x * if forward { self.basis[j * m + out] } else { self.basis[out * m + j] };
                        }
                        data[start + out * s] = acc;
                    }
                }
            }
        }
    }

    /// `w ↦ Δ⁻¹(w − mean w)`, mean zero.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        let mut data = w.to_vec();
        let mut line = vec![0.0; self.grid.points()];
        self.transform(&mut data, true, &mut line);
        data.iter_mut().zip(&self.inverse).for_each(|(d, s)| *d *= s);
        self.transform(&mut data, false, &mut line);
        data
    }
}

/// The augmented operator at a fixed coefficient field `G`.
pub(crate) struct Augmented<'a> {
    pub nb: &'a Neighbors,
    /// `nodes × n × n`.
    pub g: &'a [Complex64],
    pub laplace: &'a LaplaceInverse,
    /// Preconditioner scale `mean(tr G)/n`.
    pub scale: f64,
}

impl Augmented<'_> {
    fn nodes(&self) -> usize {
        self.nb.grid().nodes()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let grid = self.nb.grid();
        let n = grid.n();
        let nodes = self.nodes();
        let (v, da) = (&x[..nodes], x[nodes]);
        let mut hess = vec![Complex64::new(0.0, 0.0); n * n];
        for node in 0..nodes {
            self.nb.hessian_at(v, node, &mut hess);
            out[node] = pair_raw(n, &self.g[node * n * n..(node + 1) * n * n], &hess) - da;
        }
        out[nodes] = pairwise_sum(v) / nodes as f64;
    }

    pub fn precondition(&self, y: &[f64], out: &mut [f64]) {
        let nodes = self.nodes();
        let mean = pairwise_sum(&y[..nodes]) / nodes as f64;
        let v = self.laplace.apply(&y[..nodes]);
        for (o, vi) in out[..nodes].iter_mut().zip(&v) {
            *o = vi / self.scale + y[nodes];
        }
        out[nodes] = -mean;
    }

    /// Solve to relative residual `tol`, falling back to dense LU on
    /// stagnation when small enough.
    pub fn solve(&self, b: &[f64], tol: f64) -> Result<(Vec<f64>, LinearStats)> {
        let dim = b.len();
        match gmres(|x, o| self.apply(x, o), |y, o| self.precondition(y, o), b, tol) {
            Ok(r) => Ok(r),
            Err(Error::LinearStagnation { .. }) if dim <= DENSE_FALLBACK_MAX => {
                let x = dense_solve(|x, o| self.apply(x, o), b)?;
                let mut ax = vec![0.0; dim];
                self.apply(&x, &mut ax);
                let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
                let rel = norm(&res) / norm(b);
                Ok((x, LinearStats { method: LinearMethod::DenseLu, iterations: 1, relative_residual: rel }))
            }
            Err(e) => Err(e),
        }
    }
}

/// Restarted GMRES with right preconditioning, zero initial guess.
pub(crate) fn gmres(
    apply: impl Fn(&[f64], &mut [f64]),
    precondition: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, LinearStats)> {
    let dim = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; dim];
    if bnorm == 0.0 {
        return Ok((x, LinearStats { method: LinearMethod::Gmres, iterations: 0, relative_residual: 0.0 }));
    }
    let target = tol * bnorm;
    let mut history: Vec<f64> = vec![bnorm];
    let mut r = b.to_vec();
    let mut beta = bnorm;
    let mut z = vec![0.0; dim];
    let mut w = vec![0.0; dim];
    let stagnated = |history: &[f64]| {
        let j = history.len() - 1;
        j >= STAGNATION_WINDOW && history[j] > history[j - STAGNATION_WINDOW] / 10.0
    };
    loop {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(RESTART + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut hess = vec![vec![0.0; RESTART]; RESTART + 1];
        let (mut cs, mut sn) = (vec![0.0; RESTART], vec![0.0; RESTART]);
        let mut g = vec![0.0; RESTART + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..RESTART {
            precondition(&basis[j], &mut z);
            apply(&z, &mut w);
            for (i, vi) in basis.iter().enumerate() {
                let hij = dot(&w, vi);
                hess[i][j] = hij;
                w.iter_mut().zip(vi).for_each(|(wk, vk)| *wk -= hij * vk);
            }
            let wn = norm(&w);
            hess[j + 1][j] = wn;
            for i in 0..j {
                let t = cs[i] * hess[i][j] + sn[i] * hess[i + 1][j];
                hess[i + 1][j] = -sn[i] * hess[i][j] + cs[i] * hess[i + 1][j];
                hess[i][j] = t;
            }
            let d = hess[j][j].hypot(hess[j + 1][j]);
            (cs[j], sn[j]) = if d == 0.0 { (1.0, 0.0) } else { (hess[j][j] / d, hess[j + 1][j] / d) };
            hess[j][j] = d;
            hess[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            history.push(g[j + 1].abs());
            if g[j + 1].abs() <= target || wn == 0.0 || stagnated(&history) || history.len() > MAX_ITERATIONS {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let s: f64 = ((i + 1)..used).map(|c| hess[i][c] * y[c]).sum();
            y[i] = if hess[i][i] == 0.0 { 0.0 } else { (g[i] - s) / hess[i][i] };
        }
        let mut comb = vec![0.0; dim];
        for (yi, vi) in y.iter().zip(&basis) {
            comb.iter_mut().zip(vi).for_each(|(c, v)| *c += yi * v);
        }
        precondition(&comb, &mut z);
        x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi += zi);
        apply(&x, &mut w);
        r.iter_mut().zip(b.iter().zip(&w)).for_each(|(ri, (bi, wi))| *ri = bi - wi);
        beta = norm(&r);
        let iterations = history.len() - 1;
        if beta <= target {
            let stats = LinearStats { method: LinearMethod::Gmres, iterations, relative_residual: beta / bnorm };
            return Ok((x, stats));
        }
        if stagnated(&history) || iterations >= MAX_ITERATIONS {
            return Err(Error::LinearStagnation { iterations, residual: beta / bnorm });
        }
    }
}

/// Assemble the operator column by column and solve by LU with partial pivoting.
pub(crate) fn dense_solve(apply: impl Fn(&[f64], &mut [f64]), b: &[f64]) -> Result<Vec<f64>> {
    let m = b.len();
    // row-major
    let mut a = vec![0.0; m * m];
    let mut e = vec![0.0; m];
    let mut col = vec![0.0; m];
    for j in 0..m {
        e[j] = 1.0;
        apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..m {
            a[i * m + j] = col[i];
        }
    }
    let mut x = b.to_vec();
    for c in 0..m {
        let p = (c..m).max_by(|&i, &j| a[i * m + c].abs().total_cmp(&a[j * m + c].abs())).unwrap_or(c);
        if a[p * m + c] == 0.0 {
            return Err(Error::LinearStagnation { iterations: 0, residual: f64::INFINITY });
        }
        if p != c {
            for j in 0..m {
                a.swap(p * m + j, c * m + j);
            }
            x.swap(p, c);
        }
        let pivot = a[c * m + c];
        let (upper, lower) = a.split_at_mut((c + 1) * m);
        let prow = &upper[c * m..];
        for (r, row) in lower.chunks_exact_mut(m).enumerate() {
            let factor = row[c] / pivot;
            if factor != 0.0 {
                for j in c..m {
                    row[j] -= factor * prow[j];
                }
                x[c + 1 + r] -= factor * x[c];
            }
        }
    }
    for c in (0..m).rev() {
        let s: f64 = ((c + 1)..m).map(|j| a[c * m + j] * x[j]).sum();
        x[c] = (x[c] - s) / a[c * m + c];
    }
    Ok(x)
}
