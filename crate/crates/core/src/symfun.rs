//! Elementary symmetric functions on real vectors.
//!
//! Every `σ_k(λ|i)` in this crate comes from re-running the product
//! recurrence on the deleted vector. Rearranging `σ_k = σ_k(λ|i) + λ_i σ_{k-1}(λ|i)`
//! to get a deleted value loses everything near the cone boundary.

use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

// Float methods for `no_std`; shadowed by inherent ones when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Largest `n` accepted by [`subset_oracle`].
pub const SUBSET_ORACLE_MAX_N: usize = 12;

/// An ordered real `n`-vector of eigenvalues, `n ≥ 2`, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Spectrum(values))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    /// The constant vector `(c, …, c)`.
    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// All `σ_0 … σ_n`.
    pub fn sigmas(&self) -> Vec<f64> {
        elementary(&self.0, None)
    }

    /// `σ_k`, zero for `k > n`.
    pub fn sigma(&self, k: usize) -> f64 {
        self.sigmas().get(k).copied().unwrap_or(0.0)
    }

    /// `σ_0 … σ_{n-1}` of the vector with entry `i` removed.
    pub fn deleted_sigmas(&self, i: usize) -> Vec<f64> {
        elementary(&self.0, Some(i))
    }

    fn check_same_len(&self, other: &Spectrum) -> Result<()> {
        Error::check_len(self.len(), other.len())
    }
}

/// Product recurrence `e_j ← e_j + λ_i e_{j-1}` over the entries of `values`,
/// skipping `deleted`. Returns `σ_0 …σ_m` where `m` is the number of entries used.
pub(crate) fn elementary(values: &[f64], deleted: Option<usize>) -> Vec<f64> {
    let m = values.len() - usize::from(deleted.is_some());
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    let mut used = 0;
    for (i, &x) in values.iter().enumerate() {
        if Some(i) == deleted {
            continue;
        }
        used += 1;
        for j in (1..=used).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// Same recurrence with two entries removed (`p ≠ q`).
pub(crate) fn elementary_deleted2(values: &[f64], p: usize, q: usize) -> Vec<f64> {
    let m = values.len() - 2;
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    let mut used = 0;
    for (i, &x) in values.iter().enumerate() {
        if i == p || i == q {
            continue;
        }
        used += 1;
        for j in (1..=used).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// `σ_0 … σ_n` of `λ`, or `σ_0 … σ_{n-1}` of `(λ|i)` when `deleted = Some(i)`.
pub fn elementary_all(lambda: &Spectrum, deleted: Option<usize>) -> Result<Vec<f64>> {
    if let Some(i) = deleted {
        if i >= lambda.len() {
            return Err(Error::IndexOutOfRange { index: i, len: lambda.len() });
        }
    }
    Ok(elementary(lambda.values(), deleted))
}

/// `∂σ_k/∂λ_i = σ_{k-1}(λ|i)` for every `i`.
pub fn grad_sigma_k(lambda: &Spectrum, k: usize) -> Result<Vec<f64>> {
    Error::check_degree(k, 1, lambda.len())?;
    Ok((0..lambda.len()).map(|i| lambda.deleted_sigmas(i)[k - 1]).collect())
}

/// Result of a Gårding cone membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Membership {
    pub inside: bool,
    /// Least `i ≤ k` with `σ_i ≤ 0`.
    pub first_failing_degree: Option<usize>,
}

/// `λ ∈ Γ_k`, i.e. `σ_i(λ) > 0` for `1 ≤ i ≤ k`. No tolerance.
pub fn in_gamma(lambda: &Spectrum, k: usize) -> Result<Membership> {
    Error::check_degree(k, 1, lambda.len())?;
    Ok(membership(&lambda.sigmas(), k))
}

pub(crate) fn membership(sigmas: &[f64], k: usize) -> Membership {
    let failing = (1..=k).find(|&i| sigmas[i] <= 0.0);
    Membership { inside: failing.is_none(), first_failing_degree: failing }
}

/// Literal definition `Σ_{i_1<…<i_k} λ_{i_1}⋯λ_{i_k}`, for testing only.
pub fn subset_oracle(lambda: &Spectrum, k: usize) -> Result<f64> {
    let n = lambda.len();
    if n > SUBSET_ORACLE_MAX_N {
        return Err(Error::TooLarge { n, max: SUBSET_ORACLE_MAX_N });
    }
    Error::check_degree(k, 0, n)?;
    let v = lambda.values();
    let mut total = 0.0;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut product = 1.0;
        for (i, x) in v.iter().enumerate() {
            if mask & (1 << i) != 0 {
                product *= x;
            }
        }
        total += product;
    }
    Ok(total)
}

/// `C(n, k)` in exact integer arithmetic.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub(crate) fn binomial_f64(n: usize, k: usize) -> f64 {
    binomial(n, k) as f64
}

/// The identities and inequalities checked by [`identity_margin`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    /// `max_i |σ_k − σ_k(λ|i) − λ_i σ_{k-1}(λ|i)|`
    Decomposition,
    /// `|Σ λ_i σ_{k-1}(λ|i) − k σ_k|`
    Euler,
    /// `|Σ σ_k(λ|i) − (n−k) σ_k|`
    Trace,
    /// `k(n−k) σ_k² − (n−k+1)(k+1) σ_{k-1} σ_{k+1}`, nonnegative on all of ℝⁿ.
    Newton,
    /// `Σ μ_i σ_{k-1}(λ|i) − k σ_k(μ)^{1/k} σ_k(λ)^{1−1/k}`, nonnegative on `Γ_k`.
    Garding,
}

impl Identity {
    pub const ALL: [Identity; 5] =
        [Identity::Decomposition, Identity::Euler, Identity::Trace, Identity::Newton, Identity::Garding];

    pub fn name(self) -> &'static str {
        match self {
            Identity::Decomposition => "decomposition",
            Identity::Euler => "euler",
            Identity::Trace => "trace",
            Identity::Newton => "newton",
            Identity::Garding => "garding",
        }
    }
}

impl FromStr for Identity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Identity::ALL.into_iter().find(|id| id.name() == s).ok_or_else(|| Error::UnknownName(s.into()))
    }
}

/// Residual of an identity (`≈ 0`) or margin of an inequality (`≥ 0`).
///
/// `mu` is required for [`Identity::Garding`] and ignored otherwise.
pub fn identity_margin(identity: Identity, lambda: &Spectrum, k: usize, mu: Option<&Spectrum>) -> Result<f64> {
    let n = lambda.len();
    let s = lambda.sigmas();
    let sig = |j: usize| s.get(j).copied().unwrap_or(0.0);
    let deleted: Vec<Vec<f64>> = (0..n).map(|i| lambda.deleted_sigmas(i)).collect();
    let del = |i: usize, j: usize| deleted[i].get(j).copied().unwrap_or(0.0);
    let v = lambda.values();
    match identity {
        Identity::Decomposition => {
            Error::check_degree(k, 1, n)?;
            Ok((0..n).map(|i| (sig(k) - del(i, k) - v[i] * del(i, k - 1)).abs()).fold(0.0, f64::max))
        }
        Identity::Euler => {
            Error::check_degree(k, 1, n)?;
            let lhs: f64 = (0..n).map(|i| v[i] * del(i, k - 1)).sum();
            Ok((lhs - k as f64 * sig(k)).abs())
        }
        Identity::Trace => {
            Error::check_degree(k, 0, n)?;
            let lhs: f64 = (0..n).map(|i| del(i, k)).sum();
            Ok((lhs - (n - k) as f64 * sig(k)).abs())
        }
        Identity::Newton => {
            Error::check_degree(k, 1, n - 1)?;
            let (kf, nf) = (k as f64, n as f64);
            Ok(kf * (nf - kf) * sig(k) * sig(k) - (nf - kf + 1.0) * (kf + 1.0) * sig(k - 1) * sig(k + 1))
        }
        Identity::Garding => {
            Error::check_degree(k, 1, n)?;
            let mu = mu.ok_or_else(|| Error::InvalidArgument("garding needs a second spectrum".into()))?;
            lambda.check_same_len(mu)?;
            let ms = mu.sigmas();
            for (sigmas, _) in [(&s, lambda), (&ms, mu)] {
                let m = membership(sigmas, k);
                if let Some(failing) = m.first_failing_degree {
                    return Err(Error::OutsideCone { degree: k, failing });
                }
            }
            let lhs: f64 = (0..n).map(|i| mu.values()[i] * del(i, k - 1)).sum();
            let kf = k as f64;
            Ok(lhs - kf * s[k] * (ms[k] / s[k]).powf(1.0 / kf))
        }
    }
}

/// Margin of the generalized Newton–MacLaurin inequality
///
/// ```text
/// [ (σ_r/C_n^r) / (σ_s/C_n^s) ]^{1/(r−s)} − [ (σ_k/C_n^k) / (σ_l/C_n^l) ]^{1/(k−l)}  ≥ 0
/// ```
///
/// for `λ ∈ Γ_k`, `n ≥ k > l ≥ 0`, `r > s ≥ 0`, `k ≥ r`, `l ≥ s`.
pub fn newton_maclaurin_margin(lambda: &Spectrum, k: usize, l: usize, r: usize, s: usize) -> Result<f64> {
    let n = lambda.len();
    if !(n >= k && k > l && r > s && k >= r && l >= s) {
        return Err(Error::InvalidArgument("inadmissible Newton-MacLaurin indices".into()));
    }
    let sig = lambda.sigmas();
    if let Some(failing) = membership(&sig, k.max(1)).first_failing_degree {
        return Err(Error::OutsideCone { degree: k, failing });
    }
    let normalized = |j: usize| sig[j] / binomial_f64(n, j);
    let ratio = |a: usize, b: usize| (normalized(a) / normalized(b)).powf(1.0 / (a - b) as f64);
    Ok(ratio(r, s) - ratio(k, l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::from_slice(v).unwrap()
    }

    #[test]
    fn elementary_examples() {
        assert_eq!(elementary_all(&spec(&[1.0, 2.0, 3.0]), None).unwrap(), [1.0, 6.0, 11.0, 6.0]);
        assert_eq!(elementary_all(&spec(&[1.0; 4]), None).unwrap(), [1.0, 4.0, 6.0, 4.0, 1.0]);
        assert_eq!(elementary_all(&spec(&[1.0, 2.0, 3.0]), Some(0)).unwrap(), [1.0, 5.0, 6.0]);
    }

    #[test]
    fn elementary_rejects_bad_input() {
        assert!(matches!(Spectrum::new(vec![1.0, f64::NAN]), Err(Error::NonFinite)));
        assert!(matches!(Spectrum::new(vec![1.0]), Err(Error::DimensionMismatch { .. })));
        let l = spec(&[1.0, 2.0]);
        assert!(matches!(elementary_all(&l, Some(2)), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn gradient_examples() {
        let l = spec(&[1.0, 2.0, 3.0]);
        assert_eq!(grad_sigma_k(&l, 2).unwrap(), [5.0, 4.0, 3.0]);
        assert_eq!(grad_sigma_k(&spec(&[1.0; 3]), 3).unwrap(), [1.0, 1.0, 1.0]);
        let euler: f64 = l.values().iter().zip(grad_sigma_k(&l, 2).unwrap()).map(|(a, b)| a * b).sum();
        assert_eq!(euler, 22.0);
        assert!(grad_sigma_k(&l, 0).is_err());
        assert!(grad_sigma_k(&l, 4).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let l = spec(&[1.0, 2.0, 3.0]);
        let g = grad_sigma_k(&l, 2).unwrap();
        for i in 0..3 {
            let h = 1e-6;
            let mut up = l.values().to_vec();
            let mut dn = l.values().to_vec();
            up[i] += h;
            dn[i] -= h;
            let fd = (spec(&up).sigma(2) - spec(&dn).sigma(2)) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs());
        }
    }

    #[test]
    fn gamma_examples() {
        assert!(in_gamma(&spec(&[1.0; 3]), 3).unwrap().inside);
        let l = spec(&[-1.0, 3.0, 3.0]);
        assert_eq!(l.sigmas(), [1.0, 5.0, 3.0, -9.0]);
        assert!(in_gamma(&l, 2).unwrap().inside);
        assert_eq!(in_gamma(&l, 3).unwrap(), Membership { inside: false, first_failing_degree: Some(3) });
        let zero = spec(&[0.0; 4]);
        assert_eq!(in_gamma(&zero, 1).unwrap().first_failing_degree, Some(1));
    }

    #[test]
    fn subset_oracle_examples() {
        assert_eq!(subset_oracle(&spec(&[1.0, 2.0, 3.0]), 2).unwrap(), 11.0);
        assert_eq!(subset_oracle(&spec(&[-4.0, 7.5, 0.3]), 0).unwrap(), 1.0);
        assert_eq!(subset_oracle(&spec(&[2.0, 2.0]), 2).unwrap(), 4.0);
        assert!(matches!(subset_oracle(&spec(&[1.0; 13]), 2), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn binomials_are_exact() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(10, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }

    #[test]
    fn margin_examples() {
        let l = spec(&[1.0, 2.0, 3.0]);
        assert_eq!(identity_margin(Identity::Newton, &l, 2, None).unwrap(), 242.0 - 216.0);
        assert!(identity_margin(Identity::Newton, &spec(&[1.7; 5]), 2, None).unwrap().abs() < 1e-12);
        let one = spec(&[1.0; 3]);
        assert_eq!(identity_margin(Identity::Garding, &one, 2, Some(&one)).unwrap(), 0.0);
        for id in [Identity::Decomposition, Identity::Euler, Identity::Trace] {
            assert!(identity_margin(id, &l, 2, None).unwrap() < 1e-12);
        }
    }

    #[test]
    fn garding_requires_cone() {
        let l = spec(&[1.0, 1.0, 1.0]);
        let bad = spec(&[-1.0, 3.0, 3.0]);
        assert!(matches!(
            identity_margin(Identity::Garding, &l, 3, Some(&bad)),
            Err(Error::OutsideCone { failing: 3, .. })
        ));
        assert!(identity_margin(Identity::Garding, &l, 2, None).is_err());
    }

    #[test]
    fn identity_names_round_trip() {
        for id in Identity::ALL {
            assert_eq!(id.name().parse::<Identity>().unwrap(), id);
        }
        assert!(matches!("bogus".parse::<Identity>(), Err(Error::UnknownName(_))));
    }

    #[test]
    fn newton_maclaurin_at_identity_is_tight() {
        let one = spec(&[1.0; 5]);
        let m = newton_maclaurin_margin(&one, 3, 1, 2, 0).unwrap();
        assert!(m.abs() < 1e-14);
        assert!(newton_maclaurin_margin(&one, 3, 1, 4, 0).is_err());
    }
}
