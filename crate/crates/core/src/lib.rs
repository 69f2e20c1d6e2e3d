//! Hyperbolic volumes, complex-hyperplane sections and Fourier-analytic
//! positive-definiteness checks for R_θ-invariant star bodies in ℝ²ⁿ ≅ ℂⁿ.
//!
//! Bodies live in the open unit ball, which carries the Bergman volume
//! element `dμ_n = 8ⁿ r^{2n−1} (1−r²)^{−(n+1)} dr dσ` of complex hyperbolic
//! space. The crate evaluates volumes and central section volumes under
//! this element, the complex spherical Radon transform, parallel section
//! functions and their Laplacians, and the Fourier transform of
//! `‖x‖_K^{−2} / (1 − |x|²/‖x‖_K²)` whose sign decides the Busemann–Petty
//! question in complex hyperbolic space.

pub mod analysis;
pub mod bodies;
pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod rng;
pub mod selftest;
pub mod transforms;
pub mod volumes;

pub use error::{Error, Result};

/// Library version, echoed in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
