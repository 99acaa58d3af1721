//! Complex points with an explicit, unwrapped argument.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A nonzero complex number `modulus * e^{i argument}` whose argument is not
/// reduced modulo `2π`. Fractional powers are taken on the sheet selected by
/// the argument, so `(r, θ)` and `(r, θ + 2π)` have different cube roots.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchedPoint {
    pub modulus: f64,
    pub argument: f64,
}

impl BranchedPoint {
    pub fn new(modulus: f64, argument: f64) -> Result<Self> {
        if !(modulus > 0.0) || !modulus.is_finite() || !argument.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "branched point needs finite modulus > 0 and finite argument, got ({modulus}, {argument})"
            )));
        }
        Ok(Self { modulus, argument })
    }

    /// Encodes `z` with the argument congruent to `arg z` that lies closest
    /// to `reference`.
    pub fn from_complex_near(z: Complex64, reference: f64) -> Result<Self> {
        let principal = z.arg();
        let turns = ((reference - principal) / (2.0 * PI)).round();
        Self::new(z.norm(), principal + 2.0 * PI * turns)
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.modulus, self.argument)
    }

    /// `log` on the sheet of this point.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.modulus.ln(), self.argument)
    }

    /// `x^p` on the sheet of this point.
    pub fn powf(&self, p: f64) -> Complex64 {
        Complex64::from_polar(self.modulus.powf(p), p * self.argument)
    }

    pub fn cbrt(&self) -> Complex64 {
        self.powf(1.0 / 3.0)
    }

    /// Multiplies by `e^{i angle}` keeping track of the sheet.
    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            modulus: self.modulus,
            argument: self.argument + angle,
        }
    }

    /// True when `argument` is congruent to the argument of `value()` modulo 2π.
    pub fn consistent_with(&self, z: Complex64, tol: f64) -> bool {
        let d = (z.arg() - self.argument) / (2.0 * PI);
        (d - d.round()).abs() * 2.0 * PI < tol
    }
}
