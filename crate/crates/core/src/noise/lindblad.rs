//! Lindblad propagation with `H_eff = H − (iΓ/2) Σ W†W`.
//!
//! Vectorization is column stacking, `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use crate::error::{check_dim, domain, Result};
use crate::linalg::{CMatrix, ComplexOperator, C64, I};

/// Largest `d²` propagated by dense superoperator exponentiation.
pub const SUPEROP_MAX: usize = 400;

pub enum Hamiltonian<'a> {
    Constant(CMatrix),
    TimeDependent(Box<dyn Fn(f64) -> CMatrix + Sync + 'a>),
}

impl Hamiltonian<'_> {
    pub fn at(&self, t: f64) -> CMatrix {
        match self {
            Hamiltonian::Constant(h) => h.clone(),
            Hamiltonian::TimeDependent(f) => f(t),
        }
    }

    pub fn zero(d: usize) -> Self {
        Hamiltonian::Constant(CMatrix::zeros(d, d))
    }
}

pub fn vec(rho: &CMatrix) -> CMatrix {
    CMatrix::from_column_slice(rho.len(), 1, rho.as_slice())
}

pub fn unvec(v: &CMatrix, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

fn effective_hamiltonian(h: &CMatrix, jumps: &[CMatrix], gamma: f64) -> CMatrix {
    let mut heff = h.clone();
    for w in jumps {
        heff -= (w.adjoint() * w) * C64::new(0.0, 0.5 * gamma);
    }
    heff
}

/// Generator `L` with `d vec(ρ)/dt = L vec(ρ)`.
pub fn lindblad_superoperator(h: &CMatrix, jumps: &[CMatrix], gamma: f64) -> CMatrix {
    let d = h.nrows();
    let id = CMatrix::identity(d, d);
    let heff = effective_hamiltonian(h, jumps, gamma);
    let mut l = id.kronecker(&heff) * (-I) + heff.map(|x| x.conj()).kronecker(&id) * I;
    for w in jumps {
        l += w.map(|x| x.conj()).kronecker(w) * C64::new(gamma, 0.0);
    }
    l
}

fn rhs(rho: &CMatrix, heff: &CMatrix, jumps: &[CMatrix], gamma: f64) -> CMatrix {
    let mut out = (heff * rho - rho * heff.adjoint()) * (-I);
    for w in jumps {
        out += (w * rho * w.adjoint()) * C64::new(gamma, 0.0);
    }
    out
}

fn rk4(rho0: &CMatrix, h: &Hamiltonian, jumps: &[CMatrix], gamma: f64, t: f64, steps: usize) -> CMatrix {
    let dt = t / steps as f64;
    let mut rho = rho0.clone();
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    for s in 0..steps {
        let t0 = s as f64 * dt;
        let h0 = effective_hamiltonian(&h.at(t0), jumps, gamma);
        let hm = effective_hamiltonian(&h.at(t0 + 0.5 * dt), jumps, gamma);
        let h1 = effective_hamiltonian(&h.at(t0 + dt), jumps, gamma);
        let k1 = rhs(&rho, &h0, jumps, gamma);
        let k2 = rhs(&(&rho + &k1 * half), &hm, jumps, gamma);
        let k3 = rhs(&(&rho + &k2 * half), &hm, jumps, gamma);
        let k4 = rhs(&(&rho + &k3 * full), &h1, jumps, gamma);
        rho += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
    }
    rho
}

/// Propagator superoperator over `[0, t]`: one exponential for constant `H`,
/// otherwise a product of midpoint exponentials over `steps` slices.
pub fn propagator_superoperator(h: &Hamiltonian, jumps: &[CMatrix], gamma: f64, t: f64, steps: usize) -> CMatrix {
    match h {
        Hamiltonian::Constant(hc) => (lindblad_superoperator(hc, jumps, gamma) * C64::new(t, 0.0)).exp(),
        Hamiltonian::TimeDependent(_) => {
            let dt = t / steps as f64;
            let n = h.at(0.0).nrows();
            let mut acc = CMatrix::identity(n * n, n * n);
            for s in 0..steps {
                let hm = h.at((s as f64 + 0.5) * dt);
                acc = (lindblad_superoperator(&hm, jumps, gamma) * C64::new(dt, 0.0)).exp() * acc;
            }
            acc
        }
    }
}

/// `ρ(T)` under `dρ/dt = −i(H_eff ρ − ρ H_eff†) + Γ Σ W ρ W†`.
pub fn lindblad_evolve(
    rho0: &CMatrix,
    h: &Hamiltonian,
    jumps: &[ComplexOperator],
    gamma: f64,
    t: f64,
    steps: usize,
) -> Result<CMatrix> {
    let d = rho0.nrows();
    check_dim(d, rho0.ncols())?;
    check_dim(d, h.at(0.0).nrows())?;
    for w in jumps {
        check_dim(d, w.dim())?;
    }
    if gamma < 0.0 {
        return domain(format!("decay rate must be non-negative, got {gamma}"));
    }
    if steps == 0 {
        return domain("at least one step required");
    }
    let ws: Vec<CMatrix> = jumps.iter().map(|w| w.matrix().clone()).collect();
    if d * d <= SUPEROP_MAX {
        let s = propagator_superoperator(h, &ws, gamma, t, steps);
        return Ok(unvec(&(s * vec(rho0)), d));
    }
    // RK4 with step doubling until the trace drift and the refinement change
    // both fall below 1e-8.
    let tr0 = rho0.trace();
    let mut n = steps;
    let mut prev = rk4(rho0, h, &ws, gamma, t, n);
    for _ in 0..12 {
        n *= 2;
        let next = rk4(rho0, h, &ws, gamma, t, n);
        let change = (&next - &prev).norm();
        let drift = (next.trace() - tr0).norm();
        prev = next;
        if change < 1e-8 && drift < 1e-8 {
            break;
        }
    }
    Ok(prev)
}

/// Kraus form of a superoperator via its Choi matrix.
pub fn kraus_from_superoperator(s: &CMatrix, d: usize, tol: f64) -> Vec<ComplexOperator> {
    // choi[(a d + i), (b d + j)] = Λ(|i⟩⟨j|)[a, b]
    let mut choi = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let col = s.column(i + d * j);
            for a in 0..d {
                for b in 0..d {
                    choi[(a * d + i, b * d + j)] = col[a + d * b];
                }
            }
        }
    }
    let eig = crate::linalg::HermitianEigen::new(&choi);
    let mut out = Vec::new();
    for (idx, &lam) in eig.values.iter().enumerate() {
        if lam <= tol {
            continue;
        }
        let v = eig.vectors.column(idx);
        let k = CMatrix::from_fn(d, d, |a, i| v[a * d + i] * lam.sqrt());
        out.push(ComplexOperator::from_matrix(k));
    }
    out
}

/// Superoperator `Σ conj(K) ⊗ K` of a Kraus list.
pub fn superoperator_from_kraus(kraus: &[ComplexOperator]) -> CMatrix {
    let d = kraus.first().map(|k| k.dim()).unwrap_or(0);
    let mut s = CMatrix::zeros(d * d, d * d);
    for k in kraus {
        s += k.matrix().map(|x| x.conj()).kronecker(k.matrix());
    }
    s
}

pub fn apply_kraus(kraus: &[ComplexOperator], rho: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for k in kraus {
        out += k.matrix() * rho * k.matrix().adjoint();
    }
    out
}

/// `‖Σ K†K − I‖_F`
pub fn completeness_defect(kraus: &[ComplexOperator]) -> f64 {
    let d = kraus.first().map(|k| k.dim()).unwrap_or(0);
    let mut acc = CMatrix::zeros(d, d);
    for k in kraus {
        acc += k.matrix().adjoint() * k.matrix();
    }
    (acc - CMatrix::identity(d, d)).norm()
}

pub fn purity(rho: &CMatrix) -> f64 {
    (rho * rho).trace().re
}
