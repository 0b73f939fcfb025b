//! Optical-pumping jump operators, simplified and basis-independent forms.

use serde::{Deserialize, Serialize};

use super::lindblad::{kraus_from_superoperator, propagator_superoperator, Hamiltonian};
use crate::error::{domain, Result};
use crate::linalg::{c, r, CMatrix, ComplexOperator, C64, I, ZERO};
use crate::spinalg::{make_spin_ops, spherical_tensor, SpinValue};

pub const OPTICAL_ALPHA: f64 = 0.0137;
pub const OPTICAL_BETA: f64 = 0.2;
/// Default integrated dissipation `Γτ` of one gate for the per-gate channel.
pub const OPTICAL_GAMMA_T: f64 = 1.0;

/// `[W₀, W₊₁, W₋₁]` with `W₀ = βT²₀`, `W₊₁ = iαT¹₋₁ − β√(3/4)T²₋₁`,
/// `W₋₁ = iαT¹₁ + β√(3/4)T²₁`.
pub fn optical_pumping_jumps_simplified(j: SpinValue, alpha: f64, beta: f64) -> Result<[ComplexOperator; 3]> {
    let t = |k: u32, q: i32| spherical_tensor(j, k, q);
    let b34 = beta * 0.75f64.sqrt();
    let w0 = t(2, 0)? * beta;
    let wp = &(t(1, -1)? * c(0.0, alpha)) - &(t(2, -1)? * b34);
    let wm = &(t(1, 1)? * c(0.0, alpha)) + &(t(2, 1)? * b34);
    Ok([w0, wp, wm])
}

/// Cartesian components of the spherical unit vector `e_q`.
pub fn spherical_unit_vector(q: i32) -> Result<[C64; 3]> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match q {
        1 => Ok([r(-h), c(0.0, -h), ZERO]),
        0 => Ok([ZERO, ZERO, r(1.0)]),
        -1 => Ok([r(h), c(0.0, -h), ZERO]),
        _ => domain(format!("spherical index {q} outside -1..=1")),
    }
}

/// Laser polarization `ε_L = Σ_q a_q e_q`, stored as `[a_−1, a_0, a_+1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polarization {
    pub spherical: [C64; 3],
}

impl Polarization {
    pub fn new(spherical: [C64; 3]) -> Result<Self> {
        let n: f64 = spherical.iter().map(|x| x.norm_sqr()).sum();
        if (n - 1.0).abs() > 1e-9 {
            return domain(format!("polarization norm² is {n}, expected 1"));
        }
        Ok(Self { spherical })
    }

    pub fn pure(q: i32) -> Result<Self> {
        let mut s = [ZERO; 3];
        spherical_unit_vector(q)?;
        s[(q + 1) as usize] = r(1.0);
        Ok(Self { spherical: s })
    }

    pub fn cartesian(&self) -> [C64; 3] {
        let mut v = [ZERO; 3];
        for (idx, &a) in self.spherical.iter().enumerate() {
            let e = spherical_unit_vector(idx as i32 - 1).expect("valid index");
            for i in 0..3 {
                v[i] += a * e[i];
            }
        }
        v
    }
}

fn dot(a: &[C64; 3], b: &[C64; 3]) -> C64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[C64; 3], b: &[C64; 3]) -> [C64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// `C⁰ (e_q*·ε) I + iC¹ (e_q*×ε)·F + C² [½{(e_q*·F),(ε·F)} − ⅓|e_q*·ε| F²]`
pub fn optical_pumping_jump_general(
    j: SpinValue,
    q: i32,
    coeffs: [C64; 3],
    polarization: &Polarization,
) -> Result<ComplexOperator> {
    Polarization::new(polarization.spherical)?;
    let eq = spherical_unit_vector(q)?;
    let eq_conj = [eq[0].conj(), eq[1].conj(), eq[2].conj()];
    let eps = polarization.cartesian();
    let ops = make_spin_ops(j);
    let f = [ops.jx.matrix(), ops.jy.matrix(), ops.jz.matrix()];
    let vec_dot_f = |v: &[C64; 3]| -> CMatrix { f[0] * v[0] + f[1] * v[1] + f[2] * v[2] };
    let d = j.dim();
    let id = CMatrix::identity(d, d);

    let scalar = &id * (coeffs[0] * dot(&eq_conj, &eps));
    let vector = vec_dot_f(&cross(&eq_conj, &eps)) * (I * coeffs[1]);
    let a = vec_dot_f(&eq_conj);
    let b = vec_dot_f(&eps);
    let jv = j.value();
    let f2 = &id * r(jv * (jv + 1.0));
    let tensor = ((&a * &b + &b * &a) * r(0.5) - f2 * r(dot(&eq_conj, &eps).norm() / 3.0)) * coeffs[2];
    Ok(ComplexOperator::from_matrix(scalar + vector + tensor))
}

/// Kraus form of `exp(γτ 𝓓)` for the simplified jumps with no Hamiltonian.
pub fn optical_channel_kraus(j: SpinValue, alpha: f64, beta: f64, gamma_t: f64) -> Result<Vec<ComplexOperator>> {
    if gamma_t < 0.0 {
        return domain(format!("dissipation time must be non-negative, got {gamma_t}"));
    }
    let ws: Vec<CMatrix> = optical_pumping_jumps_simplified(j, alpha, beta)?
        .iter()
        .map(|w| w.matrix().clone())
        .collect();
    let s = propagator_superoperator(&Hamiltonian::zero(j.dim()), &ws, 1.0, gamma_t, 1);
    Ok(kraus_from_superoperator(&s, j.dim(), 1e-15))
}
