//! Multi-qudit registers. Local operators are applied by gathering the
//! affected amplitudes, never by forming the full Kronecker product.

use crate::error::{check_dim, domain, Error, Result};
use crate::linalg::{min_eigenvalue, trace_norm_hermitian, CMatrix, CVector, ComplexOperator, C64, ONE, ZERO};
use crate::spinalg::SpinValue;

/// Default cap on the register dimension d^n.
pub const DEFAULT_DIM_CAP: usize = 4096;

pub fn check_register_dim(d: usize, n: usize, cap: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..n {
        dim = dim.checked_mul(d).filter(|&x| x <= cap).ok_or(Error::ResourceGuard {
            dim: d.saturating_pow(n as u32),
            cap,
        })?;
    }
    Ok(dim)
}

/// Index arithmetic for a local operator on `sites` of an `n`-site register.
/// `sites[0]` is the most significant factor of the local operator.
#[derive(Clone, Debug)]
pub struct LocalPlan {
    offsets: Vec<usize>,
    bases: Vec<usize>,
}

impl LocalPlan {
    pub fn new(d: usize, n: usize, sites: &[usize]) -> Result<Self> {
        for (i, &s) in sites.iter().enumerate() {
            if s >= n {
                return domain(format!("site {s} out of range for {n} sites"));
            }
            if sites[..i].contains(&s) {
                return domain(format!("site {s} repeated"));
            }
        }
        let stride = |s: usize| d.pow((n - 1 - s) as u32);
        let local = d.pow(sites.len() as u32);
        let offsets = (0..local)
            .map(|a| {
                let mut rem = a;
                let mut off = 0;
                for &s in sites.iter().rev() {
                    off += (rem % d) * stride(s);
                    rem /= d;
                }
                off
            })
            .collect();
        let rest: Vec<usize> = (0..n).filter(|s| !sites.contains(s)).collect();
        let n_rest = d.pow(rest.len() as u32);
        let bases = (0..n_rest)
            .map(|b| {
                let mut rem = b;
                let mut off = 0;
                for &s in rest.iter().rev() {
                    off += (rem % d) * stride(s);
                    rem /= d;
                }
                off
            })
            .collect();
        Ok(Self { offsets, bases })
    }

    pub fn local_dim(&self) -> usize {
        self.offsets.len()
    }

    /// `data ← (O on sites) data` for one state vector stored contiguously.
    pub fn apply_slice(&self, op: &CMatrix, data: &mut [C64], scratch: &mut Vec<C64>) {
        let nz = nonzero_rows(op);
        self.apply_sparse(&nz, data, scratch);
    }

    fn apply_sparse(&self, nz: &[Vec<(usize, C64)>], data: &mut [C64], scratch: &mut Vec<C64>) {
        let k = self.local_dim();
        scratch.resize(2 * k, ZERO);
        let (x, y) = scratch.split_at_mut(k);
        for &base in &self.bases {
            for (a, &off) in self.offsets.iter().enumerate() {
                x[a] = data[base + off];
            }
            for (ya, row) in y.iter_mut().zip(nz) {
                *ya = row.iter().fold(ZERO, |acc, &(col, o)| acc + o * x[col]);
            }
            for (a, &off) in self.offsets.iter().enumerate() {
                data[base + off] = y[a];
            }
        }
    }

    pub fn apply_vector(&self, op: &CMatrix, v: &CVector) -> CVector {
        let mut out = v.clone();
        let mut scratch = Vec::new();
        self.apply_slice(op, out.as_mut_slice(), &mut scratch);
        out
    }

    /// `O ρ`
    pub fn apply_left(&self, op: &CMatrix, rho: &CMatrix) -> CMatrix {
        let nz = nonzero_rows(op);
        let mut out = rho.clone();
        let dim = rho.nrows();
        let mut scratch = Vec::new();
        for col in out.as_mut_slice().chunks_mut(dim) {
            self.apply_sparse(&nz, col, &mut scratch);
        }
        out
    }

    /// `O ρ O†`
    pub fn conjugate(&self, op: &CMatrix, rho: &CMatrix) -> CMatrix {
        let left = self.apply_left(op, rho).adjoint();
        self.apply_left(op, &left).adjoint()
    }

    /// `Σ_i K_i ρ K_i†`
    pub fn apply_kraus(&self, kraus: &[CMatrix], rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        for k in kraus {
            out += self.conjugate(k, rho);
        }
        out
    }
}

/// Nonzero entries of each row, so sparse gates cost only their support.
fn nonzero_rows(op: &CMatrix) -> Vec<Vec<(usize, C64)>> {
    (0..op.nrows())
        .map(|r| (0..op.ncols()).filter(|&c| op[(r, c)] != ZERO).map(|c| (c, op[(r, c)])).collect())
        .collect()
}

/// Full-register embedding of a local operator (reference route, small n only).
pub fn embed(op: &ComplexOperator, d: usize, n: usize, sites: &[usize]) -> Result<ComplexOperator> {
    check_dim(d.pow(sites.len() as u32), op.dim())?;
    let plan = LocalPlan::new(d, n, sites)?;
    let dim = d.pow(n as u32);
    Ok(plan.apply_left(op.matrix(), &CMatrix::identity(dim, dim)).into())
}

pub fn kron_vectors(vs: &[CVector]) -> CVector {
    vs.iter().fold(CVector::from_element(1, ONE), |acc, v| acc.kronecker(v))
}

/// `Tr_{not keep} ρ`, kept sites in ascending order.
pub fn partial_trace(rho: &CMatrix, d: usize, n: usize, keep: &[usize]) -> Result<CMatrix> {
    check_dim(d.pow(n as u32), rho.nrows())?;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let traced: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    let kp = LocalPlan::new(d, n, &keep)?;
    let tp = LocalPlan::new(d, n, &traced)?;
    // kp.offsets index kept configurations; tp.offsets index traced ones.
    let dk = kp.offsets.len();
    let mut out = CMatrix::zeros(dk, dk);
    for b in 0..dk {
        for a in 0..dk {
            let mut acc = ZERO;
            for &t in &tp.offsets {
                acc += rho[(kp.offsets[a] + t, kp.offsets[b] + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateRepr {
    Pure(CVector),
    Mixed(CMatrix),
}

/// State of `n` spin-J qudits, site 0 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct RegisterState {
    pub j: SpinValue,
    pub n: usize,
    pub repr: StateRepr,
}

impl RegisterState {
    pub fn pure(j: SpinValue, n: usize, psi: CVector) -> Result<Self> {
        check_dim(j.dim().pow(n as u32), psi.len())?;
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NonNormalizable(norm));
        }
        Ok(Self { j, n, repr: StateRepr::Pure(psi) })
    }

    pub fn mixed(j: SpinValue, n: usize, rho: CMatrix) -> Result<Self> {
        check_dim(j.dim().pow(n as u32), rho.nrows())?;
        check_dim(rho.nrows(), rho.ncols())?;
        let tr = rho.trace();
        if (tr - ONE).norm() > 1e-10 {
            return Err(Error::NonNormalizable(tr.norm()));
        }
        Ok(Self { j, n, repr: StateRepr::Mixed(rho) })
    }

    pub fn product(j: SpinValue, sites: &[CVector]) -> Result<Self> {
        for v in sites {
            check_dim(j.dim(), v.len())?;
        }
        Self::pure(j, sites.len(), kron_vectors(sites))
    }

    pub fn d(&self) -> usize {
        self.j.dim()
    }

    pub fn dim(&self) -> usize {
        self.d().pow(self.n as u32)
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, StateRepr::Pure(_))
    }

    pub fn vector(&self) -> Option<&CVector> {
        match &self.repr {
            StateRepr::Pure(v) => Some(v),
            StateRepr::Mixed(_) => None,
        }
    }

    pub fn density(&self) -> CMatrix {
        match &self.repr {
            StateRepr::Pure(v) => v * v.adjoint(),
            StateRepr::Mixed(m) => m.clone(),
        }
    }

    pub fn into_mixed(self) -> Self {
        let rho = self.density();
        Self { repr: StateRepr::Mixed(rho), ..self }
    }

    pub fn plan(&self, sites: &[usize]) -> Result<LocalPlan> {
        LocalPlan::new(self.d(), self.n, sites)
    }

    /// Applies a unitary (or any linear map, without renormalizing).
    pub fn apply(&self, op: &ComplexOperator, sites: &[usize]) -> Result<Self> {
        check_dim(self.d().pow(sites.len() as u32), op.dim())?;
        let plan = self.plan(sites)?;
        let repr = match &self.repr {
            StateRepr::Pure(v) => StateRepr::Pure(plan.apply_vector(op.matrix(), v)),
            StateRepr::Mixed(m) => StateRepr::Mixed(plan.conjugate(op.matrix(), m)),
        };
        Ok(Self { repr, ..self.clone() })
    }

    pub fn apply_kraus(&self, kraus: &[ComplexOperator], sites: &[usize]) -> Result<Self> {
        let plan = self.plan(sites)?;
        for k in kraus {
            check_dim(plan.local_dim(), k.dim())?;
        }
        let rho = self.density();
        let ks: Vec<CMatrix> = kraus.iter().map(|k| k.matrix().clone()).collect();
        Ok(Self { repr: StateRepr::Mixed(plan.apply_kraus(&ks, &rho)), ..self.clone() })
    }

    /// `Tr(P ρ)` for a local operator `P`.
    pub fn expectation(&self, op: &ComplexOperator, sites: &[usize]) -> Result<C64> {
        let plan = self.plan(sites)?;
        Ok(match &self.repr {
            StateRepr::Pure(v) => v.dotc(&plan.apply_vector(op.matrix(), v)),
            StateRepr::Mixed(m) => plan.apply_left(op.matrix(), m).trace(),
        })
    }

    /// Projects with a local projector; returns the Born probability and the
    /// renormalized state, or `None` if the branch has zero weight.
    pub fn project(&self, proj: &ComplexOperator, sites: &[usize]) -> Result<(f64, Option<Self>)> {
        let plan = self.plan(sites)?;
        let (p, repr) = match &self.repr {
            StateRepr::Pure(v) => {
                let w = plan.apply_vector(proj.matrix(), v);
                let p = w.norm_squared();
                (p, StateRepr::Pure(w / C64::new(p.sqrt().max(f64::MIN_POSITIVE), 0.0)))
            }
            StateRepr::Mixed(m) => {
                let w = plan.conjugate(proj.matrix(), m);
                let p = w.trace().re;
                (p, StateRepr::Mixed(w / C64::new(p.max(f64::MIN_POSITIVE), 0.0)))
            }
        };
        if p <= 1e-14 {
            return Ok((p.max(0.0), None));
        }
        Ok((p, Some(Self { repr, ..self.clone() })))
    }

    /// Appends qudits in the given pure states after the last site.
    pub fn append(&self, extra: &[CVector]) -> Result<Self> {
        for v in extra {
            check_dim(self.d(), v.len())?;
        }
        let tail = kron_vectors(extra);
        let n = self.n + extra.len();
        let repr = match &self.repr {
            StateRepr::Pure(v) => StateRepr::Pure(v.kronecker(&tail)),
            StateRepr::Mixed(m) => StateRepr::Mixed(m.kronecker(&(&tail * tail.adjoint()))),
        };
        Ok(Self { j: self.j, n, repr })
    }

    /// Reduced state on `keep` (ascending order).
    pub fn reduce(&self, keep: &[usize]) -> Result<Self> {
        let rho = partial_trace(&self.density(), self.d(), self.n, keep)?;
        let mut k = keep.to_vec();
        k.sort_unstable();
        k.dedup();
        Ok(Self { j: self.j, n: k.len(), repr: StateRepr::Mixed(rho) })
    }

    /// Reorders sites so that new site `i` is old site `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n {
            return Err(Error::Dimension { expected: self.n, found: order.len() });
        }
        let d = self.d();
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.n).collect::<Vec<_>>() {
            return domain("permutation must use every site once");
        }
        let dim = self.dim();
        let map: Vec<usize> = (0..dim)
            .map(|new| {
                let mut digits = vec![0; self.n];
                let mut rem = new;
                for i in (0..self.n).rev() {
                    digits[i] = rem % d;
                    rem /= d;
                }
                let mut old = 0;
                let mut old_digits = vec![0; self.n];
                for (i, &o) in order.iter().enumerate() {
                    old_digits[o] = digits[i];
                }
                for &dg in &old_digits {
                    old = old * d + dg;
                }
                old
            })
            .collect();
        let repr = match &self.repr {
            StateRepr::Pure(v) => StateRepr::Pure(CVector::from_fn(dim, |i, _| v[map[i]])),
            StateRepr::Mixed(m) => StateRepr::Mixed(CMatrix::from_fn(dim, dim, |a, b| m[(map[a], map[b])])),
        };
        Ok(Self { repr, ..self.clone() })
    }

    /// `(⟨b| on site) ψ`, unnormalized, on the remaining sites.
    pub fn contract_vector(&self, v: &CVector, site: usize, bra: &CVector) -> Result<CVector> {
        let d = self.d();
        check_dim(d, bra.len())?;
        let plan = self.plan(&[site])?;
        let mut out = CVector::zeros(plan.bases.len());
        for (r, &base) in plan.bases.iter().enumerate() {
            let mut acc = ZERO;
            for (a, &off) in plan.offsets.iter().enumerate() {
                acc += bra[a].conj() * v[base + off];
            }
            out[r] = acc;
        }
        Ok(out)
    }

    /// `(⟨b| ⊗ I) ρ (|b⟩ ⊗ I)`, unnormalized.
    pub fn contract_matrix(&self, m: &CMatrix, site: usize, bra: &CVector) -> Result<CMatrix> {
        let d = self.d();
        check_dim(d, bra.len())?;
        let plan = self.plan(&[site])?;
        let nr = plan.bases.len();
        // Contract rows, then columns.
        let mut half = CMatrix::zeros(nr, m.ncols());
        for col in 0..m.ncols() {
            for (r, &base) in plan.bases.iter().enumerate() {
                let mut acc = ZERO;
                for (a, &off) in plan.offsets.iter().enumerate() {
                    acc += bra[a].conj() * m[(base + off, col)];
                }
                half[(r, col)] = acc;
            }
        }
        let mut out = CMatrix::zeros(nr, nr);
        for (c, &base) in plan.bases.iter().enumerate() {
            for r in 0..nr {
                let mut acc = ZERO;
                for (a, &off) in plan.offsets.iter().enumerate() {
                    acc += half[(r, base + off)] * bra[a];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(out)
    }

    /// Traces out `site` by contracting with an orthonormal `basis`. The
    /// result stays pure when only one basis element carries weight.
    pub fn discard_site(&self, site: usize, basis: &[CVector]) -> Result<Self> {
        let n = self.n - 1;
        let repr = match &self.repr {
            StateRepr::Pure(v) => {
                let pieces: Vec<CVector> = basis
                    .iter()
                    .map(|b| self.contract_vector(v, site, b))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .filter(|w| w.norm_squared() > 1e-13)
                    .collect();
                if pieces.len() == 1 {
                    let w = &pieces[0];
                    StateRepr::Pure(w / C64::new(w.norm(), 0.0))
                } else {
                    let dim = v.len() / self.d();
                    let mut rho = CMatrix::zeros(dim, dim);
                    for w in &pieces {
                        rho += w * w.adjoint();
                    }
                    let tr = rho.trace();
                    StateRepr::Mixed(rho / tr)
                }
            }
            StateRepr::Mixed(m) => {
                let dim = m.nrows() / self.d();
                let mut rho = CMatrix::zeros(dim, dim);
                for b in basis {
                    rho += self.contract_matrix(m, site, b)?;
                }
                let tr = rho.trace();
                StateRepr::Mixed(rho / tr)
            }
        };
        Ok(Self { j: self.j, n, repr })
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            StateRepr::Pure(v) => v.norm_squared(),
            StateRepr::Mixed(m) => m.trace().re,
        }
    }

    /// `<ψ|ρ|ψ>`
    pub fn fidelity_with(&self, psi: &CVector) -> f64 {
        match &self.repr {
            StateRepr::Pure(v) => psi.dotc(v).norm_sqr(),
            StateRepr::Mixed(m) => psi.dotc(&(m * psi)).re,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match &self.repr {
            StateRepr::Pure(_) => 0.0,
            StateRepr::Mixed(m) => min_eigenvalue(m),
        }
    }
}

/// `½‖ρ − σ‖₁`
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * trace_norm_hermitian(&(a - b))
}

/// Trace distance of two PSD matrices, diagonalizing only on the joint
/// support: indices where `diag(a) + diag(b)` is negligible carry zero rows
/// and columns in both.
pub fn trace_distance_psd(a: &CMatrix, b: &CMatrix) -> f64 {
    let keep: Vec<usize> = (0..a.nrows()).filter(|&i| a[(i, i)].re + b[(i, i)].re > 1e-16).collect();
    if keep.len() == a.nrows() {
        return trace_distance(a, b);
    }
    let diff = CMatrix::from_fn(keep.len(), keep.len(), |r, c| a[(keep[r], keep[c])] - b[(keep[r], keep[c])]);
    0.5 * trace_norm_hermitian(&diff)
}
