//! SU(2) rotations, Wigner matrices, and the S/A expansion of rotated errors.

use serde::{Deserialize, Serialize};

use super::{make_spin_ops, sa_basis, SaKind, SpinValue};
use crate::error::{domain, Result};
use crate::linalg::{expm_hermitian, ComplexOperator, C64, ZERO};

/// `exp(−iθ n·J)` for a unit axis `n`.
pub fn su2_rotation(j: SpinValue, axis: [f64; 3], theta: f64) -> Result<ComplexOperator> {
    let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return domain("rotation axis is zero");
    }
    if (norm - 1.0).abs() > 1e-12 {
        return domain(format!("rotation axis has norm {norm}, expected 1"));
    }
    let gen = make_spin_ops(j).along(axis);
    Ok(expm_hermitian(gen.matrix(), theta).into())
}

/// Euler angles for `e^{−iαJz} e^{−iβJy} e^{−iγJz}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Euler {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Euler {
    pub const IDENTITY: Euler = Euler { alpha: 0.0, beta: 0.0, gamma: 0.0 };

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }
}

pub fn euler_rotation(j: SpinValue, e: Euler) -> ComplexOperator {
    let ops = make_spin_ops(j);
    let rz = |t: f64| -> ComplexOperator { expm_hermitian(ops.jz.matrix(), t).into() };
    let ry: ComplexOperator = expm_hermitian(ops.jy.matrix(), e.beta).into();
    &(&rz(e.alpha) * &ry) * &rz(e.gamma)
}

fn factorial_f64(n: i32) -> f64 {
    (1..=n).fold(1.0, |acc, x| acc * x as f64)
}

/// `<k, q'| exp(−iβJy) |k, q>`; arguments are doubled.
pub fn wigner_d(tk: u32, tq: i32, tqp: i32, beta: f64) -> Result<f64> {
    let tk = tk as i32;
    for t in [tq, tqp] {
        if t.abs() > tk || (tk - t) % 2 != 0 {
            return domain(format!("2q = {t} invalid for 2k = {tk}"));
        }
    }
    // Standard d^k_{m'm}(β) with m' = q', m = q, all in integer units below.
    let jpm = (tk + tqp) / 2;
    let jmm = (tk - tqp) / 2;
    let jpn = (tk + tq) / 2;
    let jmn = (tk - tq) / 2;
    let diff = (tqp - tq) / 2;
    let pref = (factorial_f64(jpm) * factorial_f64(jmm) * factorial_f64(jpn) * factorial_f64(jmn)).sqrt();
    let (sb, cb) = (beta / 2.0).sin_cos();
    let s_min = 0.max(-diff);
    let s_max = jpn.min(jmm);
    let mut sum = 0.0;
    for s in s_min..=s_max {
        let sign = if (diff + s) % 2 == 0 { 1.0 } else { -1.0 };
        let den = factorial_f64(jpn - s) * factorial_f64(s) * factorial_f64(diff + s) * factorial_f64(jmm - s);
        let cos_pow = tk + (tq - tqp) / 2 - 2 * s;
        let sin_pow = diff + 2 * s;
        sum += sign / den * cb.powi(cos_pow) * sb.powi(sin_pow);
    }
    Ok(pref * sum)
}

/// `<k, q'| e^{−iαJz} e^{−iβJy} e^{−iγJz} |k, q>`; arguments are doubled.
pub fn wigner_big_d(tk: u32, tq: i32, tqp: i32, e: Euler) -> Result<C64> {
    let small = wigner_d(tk, tq, tqp, e.beta)?;
    let phase = -(e.alpha * tqp as f64 + e.gamma * tq as f64) / 2.0;
    Ok(C64::from_polar(small, phase))
}

/// `U B U† = Σ_{q'} sym[q'] S^(k)_{q'} + anti[q'] A^(k)_{q'}` for a rotated
/// basis element `B`. `anti[0]` is always zero.
#[derive(Clone, Debug)]
pub struct SaExpansion {
    pub j: SpinValue,
    pub k: u32,
    pub sym: Vec<C64>,
    pub anti: Vec<C64>,
}

impl SaExpansion {
    pub fn reconstruct(&self) -> ComplexOperator {
        let mut out = ComplexOperator::zeros(self.j.dim());
        for qp in 0..=self.k {
            let pair = sa_basis(self.j, self.k, qp as i32).expect("index in range");
            out += &(&pair.s * self.sym[qp as usize]);
            if let Some(a) = pair.a {
                out += &(&a * self.anti[qp as usize]);
            }
        }
        out
    }
}

/// Expansion of `U S^(k)_q U†` (or `A`) in the rank-k S/A basis, computed from
/// Wigner-D matrix elements rather than by conjugating matrices.
pub fn su2_conjugate_sa(j: SpinValue, k: u32, q: u32, rot: Euler, kind: SaKind) -> Result<SaExpansion> {
    if k > j.twice() {
        return domain(format!("rank {k} exceeds 2J = {}", j.twice()));
    }
    if q > k {
        return domain(format!("q = {q} exceeds rank {k}"));
    }
    if q == 0 && kind == SaKind::Anti {
        return domain("A^(k)_0 does not exist");
    }
    let tk = 2 * k;
    let ki = k as i32;
    let parity = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let dmat = |qp: i32, qq: i32| wigner_big_d(tk, 2 * qq, 2 * qp, rot).expect("index in range");

    // Coefficients on T_{q'}: U T_q U† = Σ_{q'} D_{q'q} T_{q'}.
    let t_coeff: Vec<C64> = (-ki..=ki)
        .map(|qp| {
            if q == 0 {
                dmat(qp, 0)
            } else {
                let sgn = match kind {
                    SaKind::Sym => parity,
                    SaKind::Anti => -parity,
                };
                (dmat(qp, q as i32) + dmat(qp, -(q as i32)) * sgn) * h
            }
        })
        .collect();
    let at = |qp: i32| t_coeff[(qp + ki) as usize];

    let mut sym = vec![ZERO; k as usize + 1];
    let mut anti = vec![ZERO; k as usize + 1];
    sym[0] = at(0);
    for qp in 1..=ki {
        sym[qp as usize] = (at(qp) + at(-qp) * parity) * h;
        anti[qp as usize] = (at(qp) - at(-qp) * parity) * h;
    }
    Ok(SaExpansion { j, k, sym, anti })
}
