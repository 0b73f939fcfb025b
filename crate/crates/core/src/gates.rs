//! Rank-preserving gate set on spin-cat qudits.
//!
//! Two-site operators act on `(site a) ⊗ (site b)` with the first factor most
//! significant. The conditional flip used by CNOT and its relatives is the
//! sublevel reversal `X̂|m⟩ = |−m⟩`, which equals `e^{iπJ} exp(−iπJx)` and
//! squares to the identity.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catcode::subspace_projectors;
use crate::error::{domain, Error, Result};
use crate::linalg::{c, CMatrix, CVector, ComplexOperator, ONE, ZERO};
use crate::qec::{readout_x, XOutcome};
use crate::register::RegisterState;
use crate::spinalg::{su2_rotation, SpinValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// `exp(−iπ J_axis)`
pub fn pauli_gate(j: SpinValue, which: Pauli) -> ComplexOperator {
    let axis = match which {
        Pauli::X => [1.0, 0.0, 0.0],
        Pauli::Y => [0.0, 1.0, 0.0],
        Pauli::Z => [0.0, 0.0, 1.0],
    };
    su2_rotation(j, axis, std::f64::consts::PI).expect("unit axis")
}

/// `X̂|m⟩ = |−m⟩`
pub fn flip(j: SpinValue) -> ComplexOperator {
    let d = j.dim();
    ComplexOperator::from_matrix(CMatrix::from_fn(d, d, |a, b| if a + b == d - 1 { ONE } else { ZERO }))
}

/// `Π_0̄ − Π_1̄`, the subspace-label Z.
pub fn z_label(j: SpinValue) -> Result<ComplexOperator> {
    let (p0, p1) = subspace_projectors(j)?;
    Ok(&p0 - &p1)
}

/// `Π_0̄ ⊗ I + Π_1̄ ⊗ X̂`
pub fn cnot(j: SpinValue) -> Result<ComplexOperator> {
    let (p0, p1) = subspace_projectors(j)?;
    let id = ComplexOperator::identity(j.dim());
    Ok(&p0.kron(&id) + &p1.kron(&flip(j)))
}

/// `I − 2 Π_1̄ ⊗ Π_1̄`
pub fn cz(j: SpinValue) -> Result<ComplexOperator> {
    let (_, p1) = subspace_projectors(j)?;
    let d = j.dim();
    Ok(&ComplexOperator::identity(d * d) - &(p1.kron(&p1) * 2.0))
}

/// `exp(−iθ Z⊗Z)` with subspace-label Z.
pub fn zz_gate(j: SpinValue, theta: f64) -> Result<ComplexOperator> {
    let z = z_label(j)?;
    let zz = z.kron(&z);
    let diag: Vec<_> = (0..zz.dim()).map(|i| c(0.0, -theta * zz[(i, i)].re).exp()).collect();
    Ok(ComplexOperator::from_diagonal(&diag))
}

/// `(I − Π_1̄⊗Π_1̄) ⊗ X̂ + Π_1̄⊗Π_1̄ ⊗ I`: the target flips unless both controls
/// lie in 1̄.
pub fn toffoli(j: SpinValue) -> Result<ComplexOperator> {
    let (_, p1) = subspace_projectors(j)?;
    let d = j.dim();
    let both = p1.kron(&p1);
    let rest = &ComplexOperator::identity(d * d) - &both;
    Ok(&rest.kron(&flip(j)) + &both.kron(&ComplexOperator::identity(d)))
}

/// `CNOT_21`: control on the second factor.
pub fn cnot_reversed(j: SpinValue) -> Result<ComplexOperator> {
    let (p0, p1) = subspace_projectors(j)?;
    let id = ComplexOperator::identity(j.dim());
    Ok(&id.kron(&p0) + &flip(j).kron(&p1))
}

/// `CNOT_12 · CNOT_21 · CNOT_12`
pub fn swap_gadget_from_cnots(j: SpinValue) -> Result<ComplexOperator> {
    let c12 = cnot(j)?;
    let c21 = cnot_reversed(j)?;
    Ok(&(&c12 * &c21) * &c12)
}

/// `Π_0̄⊗Π_0̄ + Π_1̄⊗Π_1̄ + X̂Π_0̄⊗X̂Π_1̄ + X̂Π_1̄⊗X̂Π_0̄`
pub fn swap_gadget(j: SpinValue) -> Result<ComplexOperator> {
    let (p0, p1) = subspace_projectors(j)?;
    let x = flip(j);
    let xp0 = &x * &p0;
    let xp1 = &x * &p1;
    Ok(&(&(&p0.kron(&p0) + &p1.kron(&p1)) + &xp0.kron(&xp1)) + &xp1.kron(&xp0))
}

/// `|⟨+|U|0⟩|²` for an SU(2) rotation `U`.
pub fn su2_hadamard_overlap(u: &ComplexOperator, j: SpinValue) -> f64 {
    let plus = crate::catcode::plus(j, 0);
    let zero = crate::catcode::kitten_qubit(j, 0, ONE, ZERO).expect("level 0");
    plus.dotc(&u.apply(&zero)).norm_sqr()
}

/// Logical block `V_levels† G V_levels` of an n-site gate, where `V` embeds a
/// qubit into the given kitten level on each site.
pub fn kitten_block(gate: &ComplexOperator, j: SpinValue, levels: &[usize]) -> Result<CMatrix> {
    let mut iso = CMatrix::from_element(1, 1, ONE);
    for &l in levels {
        iso = iso.kronecker(&crate::catcode::level_isometry(j, l)?);
    }
    if iso.nrows() != gate.dim() {
        return Err(Error::Dimension { expected: gate.dim(), found: iso.nrows() });
    }
    Ok(iso.adjoint() * gate.matrix() * iso)
}

/// Named gate for circuit descriptions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub gate: String,
    pub sites: Vec<usize>,
    #[serde(default)]
    pub params: Vec<f64>,
}

/// Concrete gate with its matrix over the acted sites.
#[derive(Clone, Debug)]
pub struct GateOp {
    pub name: String,
    pub sites: Vec<usize>,
    pub matrix: ComplexOperator,
}

impl GateOp {
    pub fn from_spec(j: SpinValue, spec: &GateSpec) -> Result<Self> {
        let arity = |k: usize| -> Result<()> {
            if spec.sites.len() != k {
                return domain(format!("gate {} needs {k} sites, got {}", spec.gate, spec.sites.len()));
            }
            Ok(())
        };
        let param = |i: usize| -> Result<f64> {
            spec.params
                .get(i)
                .copied()
                .ok_or_else(|| Error::Domain(format!("gate {} missing parameter {i}", spec.gate)))
        };
        let matrix = match spec.gate.as_str() {
            "x" => {
                arity(1)?;
                pauli_gate(j, Pauli::X)
            }
            "y" => {
                arity(1)?;
                pauli_gate(j, Pauli::Y)
            }
            "z" => {
                arity(1)?;
                pauli_gate(j, Pauli::Z)
            }
            "flip" => {
                arity(1)?;
                flip(j)
            }
            "rot" => {
                arity(1)?;
                su2_rotation(j, [param(0)?, param(1)?, param(2)?], param(3)?)?
            }
            "cnot" => {
                arity(2)?;
                cnot(j)?
            }
            "cz" => {
                arity(2)?;
                cz(j)?
            }
            "zz" => {
                arity(2)?;
                zz_gate(j, param(0)?)?
            }
            "swap" => {
                arity(2)?;
                swap_gadget(j)?
            }
            "toffoli" => {
                arity(3)?;
                toffoli(j)?
            }
            other => return domain(format!("unknown gate '{other}'")),
        };
        Ok(Self { name: spec.gate.clone(), sites: spec.sites.clone(), matrix })
    }
}

/// Applies an ordered gate list.
pub fn run_circuit(state: &RegisterState, specs: &[GateSpec]) -> Result<RegisterState> {
    let mut s = state.clone();
    for spec in specs {
        let g = GateOp::from_spec(s.j, spec)?;
        s = s.apply(&g.matrix, &g.sites)?;
    }
    Ok(s)
}

#[derive(Clone, Debug)]
pub struct HadamardBranch {
    pub outcome: XOutcome,
    pub probability: f64,
    pub state: RegisterState,
}

/// Both measurement branches of the teleported Hadamard on a one-qudit state.
pub fn hadamard_gadget_branches(data: &RegisterState) -> Result<Vec<HadamardBranch>> {
    if data.n != 1 {
        return domain("Hadamard gadget acts on a single data qudit");
    }
    let j = data.j;
    let anc = crate::catcode::plus(j, 0);
    // sites: 0 = data, 1 = ancilla
    let s = data.append(&[anc])?;
    let s = s.apply(&cnot(j)?, &[1, 0])?;
    let s = s.apply(&cz(j)?, &[0, 1])?;
    let mut out = Vec::new();
    for outcome in [XOutcome::Plus, XOutcome::Minus] {
        let (p, post) = readout_x(&s, 1, outcome)?;
        if let Some(post) = post {
            let fix = match outcome {
                XOutcome::Plus => pauli_gate(j, Pauli::Z),
                XOutcome::Minus => pauli_gate(j, Pauli::X),
            };
            out.push(HadamardBranch { outcome, probability: p, state: post.apply(&fix, &[0])? });
        }
    }
    Ok(out)
}

/// Teleported Hadamard with a sampled ancilla outcome.
pub fn hadamard_gadget(data: &RegisterState, rng: &mut impl Rng) -> Result<RegisterState> {
    let branches = hadamard_gadget_branches(data)?;
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for b in &branches {
        acc += b.probability;
        if u < acc {
            return Ok(b.state.clone());
        }
    }
    Ok(branches.last().expect("at least one branch").state.clone())
}

/// `a|0⟩_l + b|1⟩_l` as a one-site register.
pub fn kitten_register(j: SpinValue, level: usize, a: crate::linalg::C64, b: crate::linalg::C64) -> Result<RegisterState> {
    let v: CVector = crate::catcode::kitten_qubit(j, level, a, b)?;
    RegisterState::pure(j, 1, v)
}
