//! Riemannian gradients, Lagrange multipliers and restricted Hessians on
//! constraint manifolds `S = F⁻¹(c)`, computed entirely in ambient
//! coordinates.
//!
//! Given smooth constraint functions `F₁,…,F_k` on an ambient space and a
//! cost function `G`, the library evaluates
//!
//! * Gramian matrices of constraint gradients and their determinants,
//! * the multipliers `σᵢ` that make `∇G − Σ σᵢ ∇Fᵢ` tangent to `S`,
//! * the standard control vector field `v₀ = Σ·∇G − Σᵢ det(…)·∇Fᵢ`,
//! * the restricted Hessian `Hess G − Σ σᵢ Hess Fᵢ` on a tangent basis,
//!
//! without ever constructing local coordinates on `S`. Closed-form
//! specializations are provided for the orthogonal group `O(n)`
//! ([`orthogonal`]) and for 2-power (Procrustes) costs on `SO(3)`
//! ([`so3`]), together with critical-point classification and Lyapunov
//! stability certificates ([`stability`]).
//!
//! The crate is `no_std` + `alloc`; all floating-point math goes through
//! [`libm`]. File formats and the command-line front-end live in the
//! companion `gramhess-cli` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod field;
pub mod gramian;
pub mod linalg;
pub mod orthogonal;
pub mod rng;
pub mod so3;
pub mod stability;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

pub use field::{ambient_hessian, fd_gradient, fd_hessian, Point, ScalarField};
pub use gramian::{
    gramian, induced_gradient, restricted_hessian, sigma_multipliers, standard_control_field,
    ConstraintSystem, GramianReport, RestrictedHessian, TangentBasis,
};
pub use linalg::Mat;
pub use orthogonal::OrthogonalPoint;
