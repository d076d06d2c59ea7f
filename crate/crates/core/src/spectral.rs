//! Hermitian matrices, their spectra, and derivatives of spectral functions
//! `F(A) = f(λ(A))`.
//!
//! Eigenvalues are always stored in descending order, so for a concave
//! symmetric `f` the gradient `(f_1, …, f_n)` at `λ(A)` is ascending.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// Float methods for `no_std`; shadowed by inherent ones when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::symfun::Spectrum;
use crate::{Error, Result};

/// Largest dimension accepted by [`charpoly_oracle`].
pub const CHARPOLY_MAX_N: usize = 8;

const MAX_SWEEPS: usize = 50;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigenvalue gaps below this use the analytic limit of the divided difference.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// An `n×n` Hermitian matrix, stored row-major.
///
/// Constructors symmetrize their input as `(A + A*)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianForm {
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        Error::check_len(n * n, data.len())?;
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut form = HermitianForm { n, data };
        form.symmetrize();
        Ok(form)
    }

    /// Build from separate real and imaginary parts (row-major).
    pub fn from_parts(n: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        Error::check_len(n * n, re.len())?;
        Error::check_len(n * n, im.len())?;
        Self::new(n, re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
    }

    pub fn from_real(n: usize, re: &[f64]) -> Result<Self> {
        Self::from_parts(n, re, &vec![0.0; n * n])
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, &v) in values.iter().enumerate() {
            data[i * n + i] = Complex64::new(v, 0.0);
        }
        Self::new(n, data)
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = Complex64::new(c, 0.0);
        }
        HermitianForm { n, data }
    }

    pub fn zero(n: usize) -> Self {
        Self::scaled_identity(n, 0.0)
    }

    /// Wrap already Hermitian data without re-symmetrizing.
    pub(crate) fn from_raw(n: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        HermitianForm { n, data }
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in (i + 1)..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg.conj();
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `U A U*` for an arbitrary square `U` (row-major).
    pub fn conjugate_by(&self, u: &[Complex64]) -> Self {
        let n = self.n;
        let ua = matmul(n, u, &self.data);
        let mut data = matmul(n, &ua, &adjoint(n, u));
        let mut out = HermitianForm { n, data: core::mem::take(&mut data) };
        out.symmetrize();
        out
    }

    /// `Q* A Q`.
    pub fn rotate_into(&self, q: &[Complex64]) -> Self {
        let n = self.n;
        let aq = matmul(n, &self.data, q);
        let mut out = HermitianForm { n, data: matmul(n, &adjoint(n, q), &aq) };
        out.symmetrize();
        out
    }

    pub fn add(&self, other: &HermitianForm) -> Result<Self> {
        Error::check_len(self.n, other.n)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(HermitianForm { n: self.n, data })
    }

    pub fn scale(&self, c: f64) -> Self {
        HermitianForm { n: self.n, data: self.data.iter().map(|z| z * c).collect() }
    }

    /// `Re tr(self · other)`, the pairing `Σ_{ij} a_{ij} b_{ji}` (real for Hermitian inputs).
    pub fn pair(&self, other: &HermitianForm) -> f64 {
        pair_raw(self.n, &self.data, &other.data)
    }
}

pub(crate) fn pair_raw(n: usize, a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[i * n + j] * b[j * n + i]).re;
        }
    }
    acc
}

pub(crate) fn matmul(n: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for l in 0..n {
            let x = a[i * n + l];
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += x * b[l * n + j];
            }
        }
    }
    out
}

pub(crate) fn adjoint(n: usize, a: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}

/// Eigenvalues (descending) and the unitary frame of column eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Spectrum,
    /// Row-major `n×n`; column `p` is the eigenvector of `eigenvalues[p]`.
    pub frame: Vec<Complex64>,
}

impl EigenDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Q diag(d) Q*`.
    pub fn synthesize(&self, d: &[f64]) -> HermitianForm {
        let n = self.n();
        let q = &self.frame;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for p in 0..n {
                    acc += q[i * n + p] * q[j * n + p].conj() * d[p];
                }
                data[i * n + j] = acc;
                data[j * n + i] = acc.conj();
            }
            data[i * n + i].im = 0.0;
        }
        HermitianForm::from_raw(n, data)
    }

    pub fn reconstruct(&self) -> HermitianForm {
        self.synthesize(self.eigenvalues.values())
    }
}

/// Cyclic Jacobi on a complex Hermitian matrix. Works for `n = 1` too, though
/// the returned [`Spectrum`] then fails its `n ≥ 2` invariant, so `n ≥ 2` is
/// required here.
pub fn eig_hermitian(a: &HermitianForm) -> Result<EigenDecomposition> {
    let (values, frame) = jacobi(a)?;
    Ok(EigenDecomposition { eigenvalues: Spectrum::new(values)?, frame })
}

/// Eigenvalues only, descending.
pub fn eigenvalues(a: &HermitianForm) -> Result<Vec<f64>> {
    Ok(jacobi(a)?.0)
}

fn jacobi(a: &HermitianForm) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let n = a.n;
    let zero = Complex64::new(0.0, 0.0);
    let mut m = a.data.clone();
    let mut v = vec![zero; n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let norm = a.frobenius_norm();
    let off = |m: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off(&m) <= 1e-15 * norm {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let (app, aqq) = (m[p * n + p].re, m[q * n + q].re);
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = diag(1, conj(phase)) · [[c, s], [-s, c]] on the (p, q) plane
                let j_pp = Complex64::new(c, 0.0);
                let j_pq = Complex64::new(s, 0.0);
                let j_qp = -phase.conj() * s;
                let j_qq = phase.conj() * c;
                for i in 0..n {
                    let (x, y) = (m[i * n + p], m[i * n + q]);
                    m[i * n + p] = x * j_pp + y * j_qp;
                    m[i * n + q] = x * j_pq + y * j_qq;
                }
                for j in 0..n {
                    let (x, y) = (m[p * n + j], m[q * n + j]);
                    m[p * n + j] = j_pp.conj() * x + j_qp.conj() * y;
                    m[q * n + j] = j_pq.conj() * x + j_qq.conj() * y;
                }
                m[p * n + q] = zero;
                m[q * n + p] = zero;
                m[p * n + p].im = 0.0;
                m[q * n + q].im = 0.0;
                for i in 0..n {
                    let (x, y) = (v[i * n + p], v[i * n + q]);
                    v[i * n + p] = x * j_pp + y * j_qp;
                    v[i * n + q] = x * j_pq + y * j_qq;
                }
            }
        }
    }
    if !converged && off(&m) > OFF_DIAGONAL_TOL * norm {
        return Err(Error::EigenNoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].re.total_cmp(&m[i * n + i].re).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[i * n + i].re).collect();
    let mut frame = vec![zero; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            frame[row * n + col] = v[row * n + src];
        }
    }
    Ok((values, frame))
}

/// `[σ_0, …, σ_n]` of `A` as the coefficients of `det(I + tA)`, via the
/// Faddeev–LeVerrier recursion `M_k = A M_{k-1} + c_{n-k+1} I`,
/// `c_{n-k} = −tr(A M_k)/k`. Shares no code with the eigen path.
pub fn charpoly_oracle(a: &HermitianForm) -> Result<Vec<f64>> {
    let n = a.n;
    if n > CHARPOLY_MAX_N {
        return Err(Error::TooLarge { n, max: CHARPOLY_MAX_N });
    }
    let zero = Complex64::new(0.0, 0.0);
    // c[j] is the coefficient of t^j in det(tI − A)
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = vec![zero; n * n];
    for k in 1..=n {
        let mut next = matmul(n, &a.data, &m);
        for i in 0..n {
            next[i * n + i] += c[n - k + 1];
        }
        m = next;
        let am = matmul(n, &a.data, &m);
        let trace: Complex64 = (0..n).map(|i| am[i * n + i]).sum();
        if trace.im.abs() > 1e-10 * trace.re.abs().max(1.0) {
            return Err(Error::ImaginaryResidue { residue: trace.im });
        }
        c[n - k] = -trace.re / k as f64;
    }
    Ok((0..=n).map(|k| if k % 2 == 0 { c[n - k] } else { -c[n - k] }).collect())
}

/// `F^{ij̄} = ∂F/∂a_{ij̄} = Q diag(f_1 … f_n) Q*` where `f = scalar_gradient(λ(A))`.
pub fn matrix_first_derivative<G>(a: &HermitianForm, scalar_gradient: G) -> Result<HermitianForm>
where
    G: FnOnce(&Spectrum) -> Result<Vec<f64>>,
{
    let eig = eig_hermitian(a)?;
    let f = scalar_gradient(&eig.eigenvalues)?;
    Error::check_len(a.n, f.len())?;
    Ok(eig.synthesize(&f))
}

/// Second directional derivative `d²/dt² F(A + tB)` at `t = 0`:
///
/// ```text
/// Σ_{pq} f_pq b_pp b_qq + 2 Σ_{p<q} (f_p − f_q)/(λ_p − λ_q) |b_pq|²
/// ```
///
/// with `B` rotated into the eigenframe of `A`. `f_hessian` is row-major
/// `n×n`; both derivative arrays are evaluated at the descending spectrum.
pub fn second_derivative_contract(
    a: &HermitianForm,
    f_hessian: &[f64],
    f_grad: &[f64],
    b: &HermitianForm,
) -> Result<f64> {
    let eig = eig_hermitian(a)?;
    contract_in_eigenframe(&eig, f_hessian, f_grad, b)
}

/// [`second_derivative_contract`] with the eigen-decomposition supplied.
pub fn contract_in_eigenframe(
    eig: &EigenDecomposition,
    f_hessian: &[f64],
    f_grad: &[f64],
    b: &HermitianForm,
) -> Result<f64> {
    let n = eig.n();
    Error::check_len(n, b.n)?;
    Error::check_len(n * n, f_hessian.len())?;
    Error::check_len(n, f_grad.len())?;
    let lam = eig.eigenvalues.values();
    let bb = b.rotate_into(&eig.frame);
    let mut total = 0.0;
    for p in 0..n {
        for q in 0..n {
            total += f_hessian[p * n + q] * bb.get(p, p).re * bb.get(q, q).re;
        }
    }
    for p in 0..n {
        for q in (p + 1)..n {
            let gap = lam[p] - lam[q];
            // symmetric f: (f_p − f_q)/(λ_p − λ_q) → f_pp − f_pq as λ_p → λ_q
            let quotient = if gap.abs() < DEGENERACY_GAP {
                f_hessian[p * n + p] - f_hessian[p * n + q]
            } else {
                (f_grad[p] - f_grad[q]) / gap
            };
            total += 2.0 * quotient * bb.get(p, q).norm_sqr();
        }
    }
    Ok(total)
}
