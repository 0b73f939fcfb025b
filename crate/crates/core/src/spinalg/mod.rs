//! Spin-J operator algebra in the descending-m basis.
//!
//! Half-integer quantum numbers are carried as doubled integers (`twice_j`,
//! `tm`, ...) so every selection rule is exact.

mod cg;
mod rotation;
mod tensor;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{c, r, ComplexOperator, CMatrix};

pub use cg::clebsch_gordan;
pub use rotation::{
    euler_rotation, su2_conjugate_sa, su2_rotation, wigner_big_d, wigner_d, Euler, SaExpansion,
};
pub use tensor::{
    decompose_in_tensor_basis, sa_basis, spherical_tensor, SaBasis, SaIndex, SaKind, SaPair,
    TensorBasis, TensorCoefficients, TensorIndex,
};

/// Spin quantum number J, stored as 2J.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinValue {
    twice_j: u32,
}

impl SpinValue {
    /// Soft cap on the qudit dimension.
    pub const MAX_DIM: usize = 64;

    pub fn from_twice(twice_j: u32) -> Result<Self> {
        if twice_j == 0 {
            return domain("J must be at least 1/2");
        }
        if twice_j as usize + 1 > Self::MAX_DIM {
            return domain(format!("dimension {} exceeds cap {}", twice_j + 1, Self::MAX_DIM));
        }
        Ok(Self { twice_j })
    }

    /// Spin `num/2`.
    pub fn half(num: u32) -> Self {
        Self::from_twice(num).expect("valid spin")
    }

    pub fn twice(self) -> u32 {
        self.twice_j
    }

    pub fn value(self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.twice_j as usize + 1
    }

    pub fn is_half_integer(self) -> bool {
        self.twice_j % 2 == 1
    }

    /// ⌊(2J−1)/2⌋: highest kitten level and maximal correctable error degree.
    pub fn max_level(self) -> usize {
        (self.twice_j as usize - 1) / 2
    }

    /// Number of kitten levels, d/2 for half-integer J.
    pub fn kitten_levels(self) -> usize {
        self.max_level() + 1
    }

    /// 2m for basis index `i`.
    pub fn twice_m(self, i: usize) -> i32 {
        self.twice_j as i32 - 2 * i as i32
    }

    pub fn m(self, i: usize) -> f64 {
        self.twice_m(i) as f64 / 2.0
    }

    /// Basis index of 2m.
    pub fn index_of(self, twice_m: i32) -> Option<usize> {
        let tj = self.twice_j as i32;
        if twice_m.abs() > tj || (tj - twice_m) % 2 != 0 {
            None
        } else {
            Some(((tj - twice_m) / 2) as usize)
        }
    }

    pub fn require_half_integer(self) -> Result<()> {
        if self.is_half_integer() {
            Ok(())
        } else {
            Err(Error::Unsupported(format!("integer spin J = {self}")))
        }
    }
}

impl fmt::Display for SpinValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice_j.is_multiple_of(2) {
            write!(f, "{}", self.twice_j / 2)
        } else {
            write!(f, "{}/2", self.twice_j)
        }
    }
}

impl FromStr for SpinValue {
    type Err = Error;

    /// Accepts `"p/q"` with q ∈ {1, 2} or an integer string.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid spin '{s}'"));
        let twice = match s.split_once('/') {
            Some((p, q)) => {
                let p: u32 = p.trim().parse().map_err(|_| bad())?;
                let q: u32 = q.trim().parse().map_err(|_| bad())?;
                match q {
                    1 => p * 2,
                    2 => p,
                    _ => return Err(bad()),
                }
            }
            None => s.parse::<u32>().map_err(|_| bad())? * 2,
        };
        Self::from_twice(twice)
    }
}

impl Serialize for SpinValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SpinValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Angular momentum components of a spin-J representation.
#[derive(Clone, Debug)]
pub struct SpinOps {
    pub j: SpinValue,
    pub jx: ComplexOperator,
    pub jy: ComplexOperator,
    pub jz: ComplexOperator,
    pub jplus: ComplexOperator,
    pub jminus: ComplexOperator,
}

impl SpinOps {
    /// `n·J` for an arbitrary (possibly complex-free) 3-vector.
    pub fn along(&self, n: [f64; 3]) -> ComplexOperator {
        &(&(&self.jx * n[0]) + &(&self.jy * n[1])) + &(&self.jz * n[2])
    }

    /// `J_x^l J_y^m J_z^n`
    pub fn monomial(&self, l: u32, m: u32, n: u32) -> ComplexOperator {
        &(&self.jx.pow(l) * &self.jy.pow(m)) * &self.jz.pow(n)
    }

    /// J² = J(J+1)·I
    pub fn casimir(&self) -> ComplexOperator {
        let jv = self.j.value();
        ComplexOperator::identity(self.j.dim()) * (jv * (jv + 1.0))
    }
}

pub fn make_spin_ops(j: SpinValue) -> SpinOps {
    let d = j.dim();
    let jv = j.value();
    let mut jz = CMatrix::zeros(d, d);
    let mut jp = CMatrix::zeros(d, d);
    for i in 0..d {
        let m = j.m(i);
        jz[(i, i)] = r(m);
        // J+|m> lands on index i-1.
        if i > 0 {
            jp[(i - 1, i)] = r((jv * (jv + 1.0) - m * (m + 1.0)).sqrt());
        }
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * r(0.5);
    let jy = (&jp - &jm) * c(0.0, -0.5);
    SpinOps {
        j,
        jx: jx.into(),
        jy: jy.into(),
        jz: jz.into(),
        jplus: jp.into(),
        jminus: jm.into(),
    }
}

/// Basis vector `|J, m>` given 2m.
pub fn basis_state(j: SpinValue, twice_m: i32) -> Result<crate::linalg::CVector> {
    let idx = j
        .index_of(twice_m)
        .ok_or_else(|| Error::Domain(format!("2m = {twice_m} invalid for J = {j}")))?;
    let mut v = crate::linalg::CVector::zeros(j.dim());
    v[idx] = r(1.0);
    Ok(v)
}
