//! Numerical laboratory for the tritronquée solutions of the fourth-order
//! equation
//!
//! ```text
//! u_xxxx + 10 u_x^2 + 20 u u_xx + 40 (u^3 - 6 t u + 6 x) = 0
//! ```
//!
//! (the second member of the Painlevé-I hierarchy).
//!
//! The crate is organised bottom-up:
//!
//! * [`branch`] – points of the complex plane carrying an unwrapped argument,
//!   so that `x^{1/3}` and friends are evaluated on an explicit sheet.
//! * [`series`] – the formal power series in `x^{-1/3}`, its coefficient
//!   recurrences, evaluation and truncation.
//! * [`model_curve`] – branch points of the degenerate spectral curve, the
//!   phase integral and the sector / exponential-rate predictions built on it.
//! * [`stokes_data`] – Stokes multipliers, their cyclic constraints and the
//!   tritronquée presets.
//! * [`spectral`] – Chebyshev grids, differentiation matrices and barycentric
//!   interpolation.
//! * [`bvp`] – collocation residual, Jacobian and the Newton–Armijo driver for
//!   boundary value problems on lines of the complex plane.
//! * [`analysis`] – Hamiltonian, Lax and KdV identities, the exponentially
//!   small Stokes difference and sector fields.
//! * [`io`] – CSV / JSON emitters shared by the command line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod branch;
pub mod bvp;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model_curve;
pub mod series;
pub mod spectral;
pub mod stokes_data;

pub use num_complex::Complex64;

pub use branch::BranchedPoint;
pub use error::{Error, Result};

/// Imaginary unit.
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// `6^{1/3}`, the modulus of the leading series coefficient.
pub fn cbrt6() -> f64 {
    6f64.cbrt()
}
