//! Numerical toolkit for the generalized Fock spaces `F_m` of entire
//! functions with squared monomial norms `(n!)^m`.
//!
//! The crate covers the coefficient-space model and reproducing kernels
//! ([`coeffspace`]), the radial weights `K_m` whose moments are `(n!)^m`
//! ([`radialkernel`]), Stirling numbers and normal ordering ([`stirling`]),
//! the creation/annihilation calculus ([`operators`]), the generalized
//! Bargmann transform ([`bargmann`]), the dual scale `F_{2-m}` with its
//! Cauchy-product algebra ([`dualalgebra`]) and a verification suite
//! ([`verify`]).

pub mod bargmann;
pub mod coeffspace;
pub mod dualalgebra;
pub mod error;
pub mod numeric;
pub mod operators;
pub mod quadrature;
pub mod radialkernel;
pub mod scalar;
pub mod stirling;
pub mod verify;

pub use coeffspace::{inner_product, kernel_eval, norm, Norm, TaylorCoeffs, WeightIndex};
pub use error::{Error, Result};
