//! Irreducible spherical tensors T^(k)_q and the symmetric/antisymmetric
//! S/A error basis built from them.

use serde::{Deserialize, Serialize};

use super::{clebsch_gordan, SpinValue};
use crate::error::{check_dim, domain, Result};
use crate::linalg::{r, ComplexOperator, CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorIndex {
    pub k: u32,
    pub q: i32,
}

impl TensorIndex {
    pub fn new(k: u32, q: i32) -> Result<Self> {
        if q.unsigned_abs() > k {
            return domain(format!("|q| = {} exceeds rank {k}", q.abs()));
        }
        Ok(Self { k, q })
    }

    /// All indices of ranks 0..=2J in (k ascending, q ascending) order.
    pub fn all(j: SpinValue) -> Vec<TensorIndex> {
        (0..=j.twice())
            .flat_map(|k| (-(k as i32)..=k as i32).map(move |q| TensorIndex { k, q }))
            .collect()
    }

    /// Position in [`TensorIndex::all`].
    pub fn position(self) -> usize {
        (self.k * self.k) as usize + (self.q + self.k as i32) as usize
    }
}

fn check_rank(j: SpinValue, k: u32) -> Result<()> {
    if k > j.twice() {
        return domain(format!("rank {k} exceeds 2J = {}", j.twice()));
    }
    Ok(())
}

/// `T^(k)_q` with elements `(m, m') = sqrt((2k+1)/(2J+1)) <J m'; k q | J m>`.
pub fn spherical_tensor(j: SpinValue, k: u32, q: i32) -> Result<ComplexOperator> {
    check_rank(j, k)?;
    TensorIndex::new(k, q)?;
    let d = j.dim();
    let tj = j.twice() as i32;
    let norm = ((2 * k + 1) as f64 / d as f64).sqrt();
    let mut m = CMatrix::zeros(d, d);
    for col in 0..d {
        let tmp = j.twice_m(col);
        let tm = tmp + 2 * q;
        if let Some(row) = j.index_of(tm) {
            let cg = clebsch_gordan(tj, tmp, 2 * k as i32, 2 * q, tj, tm)?;
            m[(row, col)] = r(norm * cg);
        }
    }
    Ok(m.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SaKind {
    Sym,
    Anti,
}

/// Element `S^(k)_q` or `A^(k)_q` of the error basis, `q ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SaIndex {
    pub k: u32,
    pub q: u32,
    pub kind: SaKind,
}

impl SaIndex {
    /// S^(k)_0 is the only q = 0 element; it flips the cat sign iff k is odd.
    pub fn flips_sign(self) -> bool {
        match self.kind {
            SaKind::Anti => true,
            SaKind::Sym => self.q == 0 && self.k % 2 == 1,
        }
    }

    /// Kitten-level displacement |Δl| produced on the cat manifold.
    pub fn level_shift(self) -> u32 {
        self.q
    }
}

#[derive(Clone, Debug)]
pub struct SaPair {
    pub s: ComplexOperator,
    /// Absent for q = 0.
    pub a: Option<ComplexOperator>,
}

/// `S = (T_q + (−1)^k T_−q)/√2`, `A = (T_q − (−1)^k T_−q)/√2` for q > 0, and
/// `S = T_0` for q = 0.
pub fn sa_basis(j: SpinValue, k: u32, q: i32) -> Result<SaPair> {
    if q < 0 {
        return domain("S/A basis is indexed by q ≥ 0");
    }
    let tq = spherical_tensor(j, k, q)?;
    if q == 0 {
        return Ok(SaPair { s: tq, a: None });
    }
    let tmq = spherical_tensor(j, k, -q)?;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s = (&tq + &(&tmq * sign)) * h;
    let a = (&tq - &(&tmq * sign)) * h;
    Ok(SaPair { s, a: Some(a) })
}

/// Cached `{T^(k)_q}` for one J.
#[derive(Clone, Debug)]
pub struct TensorBasis {
    pub j: SpinValue,
    pub indices: Vec<TensorIndex>,
    pub ops: Vec<ComplexOperator>,
}

impl TensorBasis {
    pub fn new(j: SpinValue) -> Self {
        let indices = TensorIndex::all(j);
        let ops = indices
            .iter()
            .map(|ix| spherical_tensor(j, ix.k, ix.q).expect("index in range"))
            .collect();
        Self { j, indices, ops }
    }

    pub fn get(&self, k: u32, q: i32) -> &ComplexOperator {
        &self.ops[TensorIndex { k, q }.position()]
    }
}

/// Cached S/A basis for one J, ordered by (k, q, Sym before Anti).
#[derive(Clone, Debug)]
pub struct SaBasis {
    pub j: SpinValue,
    pub indices: Vec<SaIndex>,
    pub ops: Vec<ComplexOperator>,
}

impl SaBasis {
    pub fn new(j: SpinValue) -> Self {
        let mut indices = Vec::with_capacity(j.dim() * j.dim());
        let mut ops = Vec::with_capacity(j.dim() * j.dim());
        for k in 0..=j.twice() {
            for q in 0..=k {
                let pair = sa_basis(j, k, q as i32).expect("index in range");
                indices.push(SaIndex { k, q, kind: SaKind::Sym });
                ops.push(pair.s);
                if let Some(a) = pair.a {
                    indices.push(SaIndex { k, q, kind: SaKind::Anti });
                    ops.push(a);
                }
            }
        }
        Self { j, indices, ops }
    }

    /// Coefficients `Tr(B† op)` for every basis element `B`.
    pub fn project(&self, op: &ComplexOperator) -> Vec<C64> {
        self.ops.iter().map(|b| b.hs_inner(op)).collect()
    }

    pub fn reconstruct(&self, coeffs: &[C64]) -> ComplexOperator {
        let d = self.j.dim();
        let mut out = ComplexOperator::zeros(d);
        for (b, c) in self.ops.iter().zip(coeffs) {
            out += &(b * *c);
        }
        out
    }
}

/// Coefficients `c_kq = Tr(T^(k)_q† op)`, stored in [`TensorIndex::all`] order.
#[derive(Clone, Debug)]
pub struct TensorCoefficients {
    pub j: SpinValue,
    pub coeffs: Vec<C64>,
}

impl TensorCoefficients {
    pub fn get(&self, k: u32, q: i32) -> C64 {
        self.coeffs[TensorIndex { k, q }.position()]
    }

    /// Squared norm carried by rank k.
    pub fn rank_weight(&self, k: u32) -> f64 {
        (-(k as i32)..=k as i32).map(|q| self.get(k, q).norm_sqr()).sum()
    }

    /// Highest rank with weight above `tol²`.
    pub fn max_rank(&self, tol: f64) -> Option<u32> {
        (0..=self.j.twice()).rev().find(|&k| self.rank_weight(k) > tol * tol)
    }

    /// Indices with |c| > tol.
    pub fn support(&self, tol: f64) -> Vec<TensorIndex> {
        TensorIndex::all(self.j)
            .into_iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| c.norm() > tol)
            .map(|(ix, _)| ix)
            .collect()
    }

    pub fn reconstruct(&self, basis: &TensorBasis) -> ComplexOperator {
        let mut out = ComplexOperator::zeros(self.j.dim());
        for (t, c) in basis.ops.iter().zip(&self.coeffs) {
            out += &(t * *c);
        }
        out
    }
}

pub fn decompose_in_tensor_basis(op: &ComplexOperator, j: SpinValue) -> Result<TensorCoefficients> {
    check_dim(j.dim(), op.dim())?;
    let basis = TensorBasis::new(j);
    Ok(decompose_with(&basis, op))
}

pub(crate) fn decompose_with(basis: &TensorBasis, op: &ComplexOperator) -> TensorCoefficients {
    TensorCoefficients {
        j: basis.j,
        coeffs: basis.ops.iter().map(|t| t.hs_inner(op)).collect(),
    }
}

impl TensorBasis {
    pub fn decompose(&self, op: &ComplexOperator) -> Result<TensorCoefficients> {
        check_dim(self.j.dim(), op.dim())?;
        Ok(decompose_with(self, op))
    }
}

impl From<TensorIndex> for (u32, i32) {
    fn from(ix: TensorIndex) -> Self {
        (ix.k, ix.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinalg::make_spin_ops;

    fn gram_defect(ops: &[ComplexOperator]) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, x) in ops.iter().enumerate() {
            for (b, y) in ops.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((x.hs_inner(y) - r(target)).norm());
            }
        }
        worst
    }

    #[test]
    fn rank_zero_is_scaled_identity() {
        let j = SpinValue::half(9);
        let t = spherical_tensor(j, 0, 0).unwrap();
        let expect = ComplexOperator::identity(10) * (1.0 / 10f64.sqrt());
        assert!((&t - &expect).frobenius_norm() < 1e-15);
    }

    #[test]
    fn rank_one_zero_is_positive_multiple_of_jz() {
        let j = SpinValue::half(9);
        let t = spherical_tensor(j, 1, 0).unwrap();
        let jz = make_spin_ops(j).jz;
        let c = jz.hs_inner(&t) / jz.hs_inner(&jz);
        assert!(c.re > 0.0 && c.im.abs() < 1e-15);
        assert!((&t - &(&jz * c)).frobenius_norm() < 1e-13);
    }

    #[test]
    fn gram_matrices_are_identity() {
        for tj in 1..=9 {
            let j = SpinValue::half(tj);
            assert!(gram_defect(&TensorBasis::new(j).ops) < 1e-12, "T basis J={tj}/2");
            assert!(gram_defect(&SaBasis::new(j).ops) < 1e-12, "S/A basis J={tj}/2");
        }
    }

    #[test]
    fn domain_errors() {
        let j = SpinValue::half(3);
        assert!(spherical_tensor(j, 4, 0).is_err());
        assert!(spherical_tensor(j, 1, 2).is_err());
        assert!(sa_basis(j, 2, -1).is_err());
        assert!(sa_basis(j, 2, 0).unwrap().a.is_none());
    }

    #[test]
    fn decomposition_examples() {
        let j = SpinValue::half(9);
        let basis = TensorBasis::new(j);
        let t21 = basis.get(2, 1).clone();
        let c = basis.decompose(&t21).unwrap();
        assert_eq!(c.support(1e-12), vec![TensorIndex { k: 2, q: 1 }]);
        let jz = make_spin_ops(j).jz;
        let cz = basis.decompose(&jz).unwrap();
        assert_eq!(cz.support(1e-12), vec![TensorIndex { k: 1, q: 0 }]);
        assert!((&cz.reconstruct(&basis) - &jz).frobenius_norm() < 1e-12);
        assert!(decompose_in_tensor_basis(&ComplexOperator::identity(4), j).is_err());
    }
}
