//! Dense complex matrices and the Hermitian-eigendecomposition kernels used
//! for every unitary in the crate.

use std::ops::{Add, AddAssign, Deref, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix. Single-qudit operators use the descending-m basis
/// (row/column `i` is the sublevel `m = J - i`); register operators use the
/// Kronecker order with site 0 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexOperator(CMatrix);

impl ComplexOperator {
    pub fn from_matrix(m: CMatrix) -> Self {
        assert!(m.is_square(), "operator must be square");
        Self(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self(CMatrix::from_diagonal(&CVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(CMatrix::from_fn(diag.len(), diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    /// `|a><b|`
    pub fn outer(a: &CVector, b: &CVector) -> Self {
        Self(a * b.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Hilbert-Schmidt inner product `Tr(self† other)`.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        hs_inner(&self.0, &other.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.0 * v
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.0 - self.0.adjoint()).norm()
    }

    pub fn unitarity_defect(&self) -> f64 {
        (self.0.adjoint() * &self.0 - CMatrix::identity(self.dim(), self.dim())).norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = CMatrix::identity(self.dim(), self.dim());
        for _ in 0..n {
            out *= &self.0;
        }
        Self(out)
    }

    /// Distance to `other` after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &Self) -> f64 {
        let overlap = self.hs_inner(other);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        (&self.0 * phase - &other.0).norm()
    }

    pub fn to_json(&self) -> OperatorJson {
        let d = self.dim();
        OperatorJson {
            dim: d,
            re: (0..d).map(|i| (0..d).map(|j| self.0[(i, j)].re).collect()).collect(),
            im: (0..d).map(|i| (0..d).map(|j| self.0[(i, j)].im).collect()).collect(),
        }
    }

    pub fn from_json(json: &OperatorJson) -> Result<Self> {
        check_dim(json.dim, json.re.len())?;
        check_dim(json.dim, json.im.len())?;
        let mut m = CMatrix::zeros(json.dim, json.dim);
        for i in 0..json.dim {
            check_dim(json.dim, json.re[i].len())?;
            check_dim(json.dim, json.im[i].len())?;
            for j in 0..json.dim {
                m[(i, j)] = C64::new(json.re[i][j], json.im[i][j]);
            }
        }
        Ok(Self(m))
    }
}

/// JSON form: row-major real and imaginary parts.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OperatorJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl Deref for ComplexOperator {
    type Target = CMatrix;
    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

impl From<CMatrix> for ComplexOperator {
    fn from(m: CMatrix) -> Self {
        Self::from_matrix(m)
    }
}

impl<'a> Mul<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;
    fn mul(self, rhs: &ComplexOperator) -> ComplexOperator {
        ComplexOperator(&self.0 * &rhs.0)
    }
}

impl Mul for ComplexOperator {
    type Output = ComplexOperator;
    fn mul(self, rhs: ComplexOperator) -> ComplexOperator {
        ComplexOperator(self.0 * rhs.0)
    }
}

impl<'a> Add<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;
    fn add(self, rhs: &ComplexOperator) -> ComplexOperator {
        ComplexOperator(&self.0 + &rhs.0)
    }
}

impl Add for ComplexOperator {
    type Output = ComplexOperator;
    fn add(self, rhs: ComplexOperator) -> ComplexOperator {
        ComplexOperator(self.0 + rhs.0)
    }
}

impl AddAssign<&ComplexOperator> for ComplexOperator {
    fn add_assign(&mut self, rhs: &ComplexOperator) {
        self.0 += &rhs.0;
    }
}

impl<'a> Sub<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;
    fn sub(self, rhs: &ComplexOperator) -> ComplexOperator {
        ComplexOperator(&self.0 - &rhs.0)
    }
}

impl Sub for ComplexOperator {
    type Output = ComplexOperator;
    fn sub(self, rhs: ComplexOperator) -> ComplexOperator {
        ComplexOperator(self.0 - rhs.0)
    }
}

impl Neg for ComplexOperator {
    type Output = ComplexOperator;
    fn neg(self) -> ComplexOperator {
        ComplexOperator(-self.0)
    }
}

impl Mul<C64> for &ComplexOperator {
    type Output = ComplexOperator;
    fn mul(self, rhs: C64) -> ComplexOperator {
        ComplexOperator(&self.0 * rhs)
    }
}

impl Mul<C64> for ComplexOperator {
    type Output = ComplexOperator;
    fn mul(self, rhs: C64) -> ComplexOperator {
        ComplexOperator(self.0 * rhs)
    }
}

impl Mul<f64> for &ComplexOperator {
    type Output = ComplexOperator;
    fn mul(self, rhs: f64) -> ComplexOperator {
        ComplexOperator(&self.0 * C64::new(rhs, 0.0))
    }
}

impl Mul<f64> for ComplexOperator {
    type Output = ComplexOperator;
    fn mul(self, rhs: f64) -> ComplexOperator {
        ComplexOperator(self.0 * C64::new(rhs, 0.0))
    }
}

/// `Tr(a† b)` without forming the product.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Eigendecomposition `H = V diag(λ) V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// The input is symmetrized first so roundoff asymmetry cannot leak in.
    /// Eigenpairs are sorted by ascending eigenvalue.
    pub fn new(h: &CMatrix) -> Self {
        let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        Self {
            values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
            vectors: eig.eigenvectors.select_columns(&order),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `f(H) = V diag(f(λ)) V†`
    pub fn map(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for j in 0..d {
            let fj = f(self.values[j]);
            for i in 0..d {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(-i t H)`
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.map(|l| C64::from_polar(1.0, -l * t))
    }

    /// Directional derivative of `exp(-i t H)` along the Hermitian direction
    /// `g`, exact via the divided-difference (Daleckii-Krein) formula.
    pub fn propagator_derivative(&self, g: &CMatrix, t: f64) -> CMatrix {
        let d = self.dim();
        let g_eig = self.vectors.adjoint() * g * &self.vectors;
        let phases: Vec<C64> = self.values.iter().map(|&l| C64::from_polar(1.0, -l * t)).collect();
        let mut m = CMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let gap = self.values[a] - self.values[b];
                let kernel = if gap.abs() * t.abs() > 1e-9 {
                    (phases[a] - phases[b]) / gap
                } else {
                    -I * t * phases[a]
                };
                m[(a, b)] = g_eig[(a, b)] * kernel;
            }
        }
        &self.vectors * m * self.vectors.adjoint()
    }
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    HermitianEigen::new(h).propagator(t)
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(h: &CMatrix) -> f64 {
    HermitianEigen::new(h).values.iter().map(|l| l.abs()).sum()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &CMatrix) -> f64 {
    HermitianEigen::new(h)
        .values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `|<a|b>|^2` for normalized vectors.
pub fn state_fidelity(a: &CVector, b: &CVector) -> f64 {
    a.dotc(b).norm_sqr()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}
