//! Forward and inverse spectral computations for the integro-differential
//! operator
//!
//! ```text
//! ℓy = −y″ + q(x)y + ∫₀ˣ M(x,t) y(t) dt,   x ∈ [0, π],
//! ```
//!
//! and its adjoint `ℓ*z = −z″ + q(x)z + ∫ₓ^π M(t,x) z(t) dt`.
//!
//! The crate is organised bottom-up:
//!
//! * [`operator`] holds the data `(q, M)` and their representations.
//! * [`solver`] integrates the initial-value problems for a fixed spectral
//!   parameter and produces the fundamental solutions `C`, `S`, `Φ` and their
//!   adjoint counterparts.
//! * [`spectral`] builds characteristic functions, eigenvalue sequences, the
//!   Weyl-type function `N(λ) = Φ′(0, λ)` and its product representation from
//!   two spectra.
//! * [`inverse`] recovers the Taylor coefficients of an analytic potential from
//!   `N(λ)` along a ray in the upper half `ρ`-plane.
//! * [`verify`] bundles the identity checks used by the `verify` subcommand.

pub mod config;
pub mod error;
mod fit;
pub mod format;
pub mod inverse;
pub mod operator;
pub mod quadrature;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use operator::{Kernel, OperatorConfig, Polynomial, Potential};
pub use solver::{Orientation, SolutionTrace, SpectralPoint};
