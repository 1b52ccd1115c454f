//! Numerical laboratory for the Hessian quotient operator `F = σ_n/σ_k`.
//!
//! The crate covers the symmetric-function calculus behind the operator, its
//! first and second derivatives in a diagonal frame, sampled verifiers for the
//! concavity inequalities, the explicit singular family for `k ≤ n − 3`, and
//! finite-difference machinery on gridded fields (Hessians, eigenframes,
//! `b = ln λ₁`, the Newton tensor divergence and a discrete Legendre transform).
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the width used by the command-line tools.

pub mod concavity;
pub mod error;
pub mod fields;
pub mod linalg;
pub mod operator;
pub mod sampling;
pub mod scalar;
pub mod singular;
pub mod stats;
pub mod symfun;

pub use error::{LabError, Result};
pub use operator::QuotientOperator;
pub use scalar::Scalar;

pub type EigenTuple64 = symfun::EigenTuple<f64>;
pub type Matrix64 = linalg::Matrix<f64>;
pub type SecondDerivativeTensor64 = operator::SecondDerivativeTensor<f64>;
pub type GapReport64 = concavity::GapReport<f64>;
pub type ScalarField64 = fields::ScalarField<f64>;
pub type SpectralPoint64 = fields::SpectralPoint<f64>;
pub type SingularFamily64 = singular::SingularFamily<f64>;
