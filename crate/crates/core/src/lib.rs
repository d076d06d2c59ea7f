//! Krylov-type complex Hessian equations
//!
//! ```text
//! σ_k(χ_u) = Σ_{l<k} β_l(z) σ_l(χ_u),   χ_u = χ_0 + ∂∂̄u,
//! ```
//!
//! treated in the quotient form `σ_k/σ_{k-1} − Σ_{l≤k-2} β_l σ_l/σ_{k-1} = β_{k-1}`,
//! which is elliptic and concave on the Gårding cone `Γ_{k-1}` whenever the
//! lower coefficients are nonnegative.
//!
//! The crate is `no_std` (it needs `alloc`) and is split bottom-up:
//!
//! * [`symfun`]: elementary symmetric functions, Gårding cones, identity and
//!   inequality margins, brute-force oracles.
//! * [`spectral`]: Hermitian eigen-decomposition (cyclic Jacobi), the
//!   characteristic-polynomial oracle, first and second derivatives of
//!   spectral functions.
//! * [`krylov`]: the quotient operator, its gradient and Hessian, cone
//!   margins and inequality certificates.
//! * [`torus`]: periodic grids on the flat torus, Wirtinger Hessians, field
//!   assembly and grid integrals.
//! * [`solver`]: damped Newton with a cone-preserving line search inside a
//!   two-stage continuity method that also determines the normalization
//!   constant.

#![no_std]

extern crate alloc;

mod error;
pub mod krylov;
pub mod solver;
pub mod spectral;
pub mod symfun;
pub mod torus;

pub use error::{AssumptionClause, Error, Result};
pub use krylov::{Coefficients, ConeReport, ConeVariant, KrylovPoint, Profile};
pub use spectral::{EigenDecomposition, HermitianForm};
pub use symfun::{binomial, Spectrum};
pub use torus::{FourierMode, FourierSpec, HermitianField, ScalarField, TorusGrid};

pub use num_complex::Complex64;
