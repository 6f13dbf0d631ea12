//! Rotationally symmetric, asymptotically hyperbolic manifolds whose radial
//! Laplacian carries a resonant (Kiselev-type) potential, together with the
//! half-line spectral machinery used to check them numerically.
//!
//! Pipeline:
//! 1. [`metric`] builds the warp profile f₁ and the effective potential Ṽ.
//! 2. [`potential`] glues Ṽ to a resonant tail obeying an envelope h(r)/(1+r).
//! 3. [`riccati`] solves for the metric perturbation that reproduces the tail.
//! 4. [`schrodinger`], [`weyl`] and [`classify`] analyse the 1D operator
//!    −d²/dr² + V on (0, ∞).

pub mod bessel;
pub mod classify;
pub mod cli;
pub mod envelope;
pub mod error;
pub mod io;
pub mod metric;
pub mod ode;
pub mod pipeline;
pub mod potential;
pub mod riccati;
pub mod schrodinger;
pub mod smooth;
pub mod weyl;

pub use error::{Error, Result};
