//! Stokes multipliers `s_k`, `k ∈ Z/7`, of the associated linear system.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, I};

/// Which tritronquée family a preset or sector refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `V_m`: regular in one large sector around `arg x = 3π + 6πm/7`.
    TypeI,
    /// `U_m`: regular around `arg x = 6πm/7` and in a thin sector around `3π + 6πm/7`.
    TypeII,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::TypeI => write!(f, "typeI"),
            Family::TypeII => write!(f, "typeII"),
        }
    }
}

/// A family together with its index `m ∈ 0..7`, parsed from `"typeI:m"` / `"typeII:m"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PresetName {
    pub family: Family,
    pub m: i32,
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family, self.m)
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("expected typeI:m or typeII:m, got {s:?}"));
        let (fam, m) = s.split_once(':').ok_or_else(bad)?;
        let family = match fam.trim() {
            "typeI" | "I" => Family::TypeI,
            "typeII" | "II" => Family::TypeII,
            _ => return Err(bad()),
        };
        let m: i32 = m.trim().parse().map_err(|_| bad())?;
        if !(0..7).contains(&m) {
            return Err(bad());
        }
        Ok(Self { family, m })
    }
}

/// `s_k` for `k ∈ Z/7`; indexing accepts any integer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StokesVector {
    s: [Complex64; 7],
}

fn slot(k: i32) -> usize {
    k.rem_euclid(7) as usize
}

impl StokesVector {
    pub fn zero() -> Self {
        Self { s: [Complex64::new(0.0, 0.0); 7] }
    }

    /// From `[s_{-3}, ..., s_3]`.
    pub fn from_centered(values: [Complex64; 7]) -> Self {
        let mut out = Self::zero();
        for (i, v) in values.into_iter().enumerate() {
            out.set(i as i32 - 3, v);
        }
        out
    }

    /// `[s_{-3}, ..., s_3]`.
    pub fn centered(&self) -> [Complex64; 7] {
        std::array::from_fn(|i| self.get(i as i32 - 3))
    }

    pub fn get(&self, k: i32) -> Complex64 {
        self.s[slot(k)]
    }

    pub fn set(&mut self, k: i32, v: Complex64) {
        self.s[slot(k)] = v;
    }

    /// `s_k + s_{k+2} + s_k s_{k+1} s_{k+2} + i(1 + s_{k+4} s_{k+5})`.
    pub fn constraint(&self, k: i32) -> Complex64 {
        let s = |j: i32| self.get(k + j);
        s(0) + s(2) + s(0) * s(1) * s(2) + I * (1.0 + s(4) * s(5))
    }

    /// Largest constraint violation over the seven cyclic relations.
    pub fn validate(&self) -> f64 {
        (0..7).map(|k| self.constraint(k).norm()).fold(0.0, f64::max)
    }

    /// Relabels `s̃_k = s_{k+2n}`: the data of `u(e^{2πin/7}x, e^{6πin/7}t)` up to the
    /// overall factor, i.e. `s_{k-2n}` of the rotated solution equals `s_k`.
    pub fn rotate(&self, n: i32) -> Self {
        let mut out = Self::zero();
        for k in 0..7 {
            out.set(k, self.get(k + 2 * n));
        }
        out
    }

    /// `-conj(s_{-k})`, the data of the complex-conjugate solution.
    pub fn conjugate(&self) -> Self {
        let mut out = Self::zero();
        for k in 0..7 {
            out.set(k, -self.get(-k).conj());
        }
        out
    }

    pub fn max_difference(&self, other: &Self) -> f64 {
        (0..7).map(|k| (self.get(k) - other.get(k)).norm()).fold(0.0, f64::max)
    }

    /// Tritronquée data; `typeII:m` is `U_m`, `typeI:m` is `V_m`.
    pub fn preset(name: PresetName) -> Self {
        match name.family {
            Family::TypeII => Self::type_ii(name.m),
            Family::TypeI => Self::type_i(name.m),
        }
    }

    /// `s_{m±1} = s_{m±2} = 0`, `s_m = s_{m±3} = -i`.
    pub fn type_ii(m: i32) -> Self {
        let mut out = Self::zero();
        for j in [0, 3, -3] {
            out.set(m + j, -I);
        }
        out
    }

    /// With `m' = m + 3`: `s_{m'-1} = s_{m'} = s_{m'+1} = s_{m'+2} = 0`, the rest `-i`.
    pub fn type_i(m: i32) -> Self {
        let mp = m + 3;
        let mut out = Self::zero();
        for j in [3, 4, 5] {
            out.set(mp + j, -I);
        }
        out
    }

    /// One-parameter family sharing the `U_m` asymptotics near `arg x = 6πm/7`
    /// and the `V_{m-3}` asymptotics near `3π + 6πm/7`; `p = 0` gives `U_m`.
    pub fn bitronquee_left(m: i32, p: Complex64) -> Self {
        let mut out = Self::zero();
        out.set(m + 3, -I);
        out.set(m - 3, -I);
        out.set(m - 2, p);
        out.set(m, -I - p);
        out
    }

    /// Companion family with free `s_{m+1}`; `p = 0` is again a tritronquée point.
    pub fn bitronquee_right(m: i32, p: Complex64) -> Self {
        let mut out = Self::zero();
        out.set(m - 2, -I);
        out.set(m - 3, -I);
        out.set(m + 1, p);
        out.set(m + 3, -I - p);
        out
    }
}

/// All fourteen tritronquée presets in a fixed order.
pub fn all_presets() -> Vec<(PresetName, StokesVector)> {
    [Family::TypeI, Family::TypeII]
        .into_iter()
        .flat_map(|family| {
            (0..7).map(move |m| {
                let name = PresetName { family, m };
                (name, StokesVector::preset(name))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_lie_on_the_manifold() {
        for (name, sv) in all_presets() {
            assert!(sv.validate() < 1e-14, "{name}");
        }
    }

    #[test]
    fn explicit_patterns() {
        let z = Complex64::new(0.0, 0.0);
        let u0 = StokesVector::type_ii(0);
        assert_eq!(u0.centered(), [-I, z, z, -I, z, z, -I]);
        let v0 = StokesVector::type_i(0);
        assert_eq!(v0.centered(), [z, z, -I, -I, -I, z, z]);
    }

    #[test]
    fn perturbation_is_detected() {
        let mut sv = StokesVector::type_ii(0);
        sv.set(2, sv.get(2) + 0.1);
        assert!(sv.validate() > 0.05);
    }

    #[test]
    fn rotation_maps_families() {
        for m in 0..7 {
            assert_eq!(StokesVector::type_ii(m).rotate(3), StokesVector::type_ii(m + 1));
            assert_eq!(StokesVector::type_i(m).rotate(3), StokesVector::type_i(m + 1));
        }
        let sv = StokesVector::type_i(2);
        assert_eq!(sv.rotate(0), sv);
        assert_eq!(sv.rotate(7), sv);
    }

    #[test]
    fn presets_are_self_conjugate_up_to_rotation() {
        assert_eq!(StokesVector::type_ii(0).conjugate(), StokesVector::type_ii(0));
        assert_eq!(StokesVector::type_i(0).conjugate(), StokesVector::type_i(0));
    }

    #[test]
    fn bitronquee_families() {
        for p in [Complex64::new(0.3, -1.2), Complex64::new(-2.0, 0.5)] {
            for m in 0..7 {
                assert!(StokesVector::bitronquee_left(m, p).validate() < 1e-13);
                assert!(StokesVector::bitronquee_right(m, p).validate() < 1e-13);
            }
        }
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(StokesVector::bitronquee_left(0, z), StokesVector::type_ii(0));
        assert_eq!(StokesVector::bitronquee_left(0, -I), StokesVector::type_i(4));
    }

    #[test]
    fn parse_names() {
        let n: PresetName = "typeII:3".parse().unwrap();
        assert_eq!(n, PresetName { family: Family::TypeII, m: 3 });
        assert_eq!(n.to_string(), "typeII:3");
        assert!("typeIII:1".parse::<PresetName>().is_err());
        assert!("typeI:7".parse::<PresetName>().is_err());
    }
}
