//! Cat-state preparation and the maps used to read out the kitten X basis.

use super::{grape_optimize, ControlModel, GrapeOptions, GrapeResult, IsometryTarget, Objective, PulseSchedule, Segment};
use crate::catcode::{minus, plus};
use crate::error::{check_dim, domain, Result};
use crate::linalg::{expm_hermitian, CMatrix, CVector, ComplexOperator, HermitianEigen, C64};
use crate::noise::{kraus_from_superoperator, propagator_superoperator, Hamiltonian};
use crate::spinalg::{make_spin_ops, su2_rotation, SpinOps, SpinValue};

use std::f64::consts::FRAC_PI_2;

/// `|J, J_x = J⟩`
fn x_coherent(j: SpinValue) -> Result<CVector> {
    let mut top = CVector::zeros(j.dim());
    top[0] = C64::new(1.0, 0.0);
    Ok(su2_rotation(j, [0.0, 1.0, 0.0], FRAC_PI_2)?.apply(&top))
}

/// One-axis twisting `exp(−i(π/2)J_x)·exp(−i(π/2)J_z²)|J, J_x = J⟩`.
pub fn cat_prep_oat(j: SpinValue) -> Result<CVector> {
    j.require_half_integer()?;
    let twist: Vec<C64> = (0..j.dim()).map(|i| C64::from_polar(1.0, -FRAC_PI_2 * j.m(i).powi(2))).collect();
    let twisted = CVector::from_iterator(j.dim(), x_coherent(j)?.iter().zip(&twist).map(|(a, b)| a * b));
    Ok(su2_rotation(j, [1.0, 0.0, 0.0], FRAC_PI_2)?.apply(&twisted))
}

/// Midpoint-discretized sweep of `H(s) = −(1−s)J_x − (s/2J)J_z²` from
/// `|J, J_x = J⟩`. Returns the final state and its fidelity with |+⟩.
pub fn cat_prep_adiabatic(j: SpinValue, steps: usize, total_time: f64) -> Result<(CVector, f64)> {
    j.require_half_integer()?;
    check_sweep(steps, total_time)?;
    let ops = make_spin_ops(j);
    let jz2 = ops.jz.matrix() * ops.jz.matrix();
    let h = |s: f64| ops.jx.matrix() * C64::new(-(1.0 - s), 0.0) + &jz2 * C64::new(-s / (2.0 * j.value()), 0.0);
    let u = sweep(&h, steps, total_time);
    let psi = u * x_coherent(j)?;
    let fidelity = plus(j, 0).dotc(&psi).norm_sqr();
    Ok((psi, fidelity))
}

fn check_sweep(steps: usize, total_time: f64) -> Result<()> {
    if steps == 0 {
        return domain("sweep needs at least one step");
    }
    if !(total_time.is_finite() && total_time >= 0.0) {
        return domain(format!("sweep time must be finite and non-negative, got {total_time}"));
    }
    Ok(())
}

fn sweep(h: &dyn Fn(f64) -> CMatrix, steps: usize, total_time: f64) -> CMatrix {
    let tau = total_time / steps as f64;
    let d = h(0.0).nrows();
    (0..steps).fold(CMatrix::identity(d, d), |u, i| expm_hermitian(&h((i as f64 + 0.5) / steps as f64), tau) * u)
}

/// `V = |J, M=J⟩⟨+| + |J, M=−J⟩⟨−|` at kitten level 0.
pub fn x_measurement_map(j: SpinValue) -> Result<IsometryTarget> {
    j.require_half_integer()?;
    let d = j.dim();
    let mut top = CVector::zeros(d);
    top[0] = C64::new(1.0, 0.0);
    let mut bottom = CVector::zeros(d);
    bottom[d - 1] = C64::new(1.0, 0.0);
    let v = ComplexOperator::outer(&top, &plus(j, 0)) + ComplexOperator::outer(&bottom, &minus(j, 0));
    IsometryTarget::new(v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct XAdiabaticResult {
    /// `|⟨J_x = J|U|+⟩|²`
    pub plus_fidelity: f64,
    /// `|⟨J_x = J−1|U|−⟩|²`
    pub minus_fidelity: f64,
    pub unitary: ComplexOperator,
}

/// Sweep of `H(s) = −(1−s)J_z²/J − sJ_x` mapping |+⟩ to the top `J_x`
/// eigenstate and |−⟩ to the next one.
pub fn x_measurement_adiabatic(j: SpinValue, steps: usize, total_time: f64) -> Result<XAdiabaticResult> {
    j.require_half_integer()?;
    check_sweep(steps, total_time)?;
    let ops = make_spin_ops(j);
    let jz2 = ops.jz.matrix() * ops.jz.matrix();
    let h = |s: f64| &jz2 * C64::new(-(1.0 - s) / j.value(), 0.0) + ops.jx.matrix() * C64::new(-s, 0.0);
    let u = sweep(&h, steps, total_time);
    // Eigenvalues ascend, so the last two columns are J_x = J − 1 and J.
    let eig = HermitianEigen::new(ops.jx.matrix());
    let d = j.dim();
    let top = eig.vectors.column(d - 1).into_owned();
    let next = eig.vectors.column(d - 2).into_owned();
    Ok(XAdiabaticResult {
        plus_fidelity: top.dotc(&(&u * plus(j, 0))).norm_sqr(),
        minus_fidelity: next.dotc(&(&u * minus(j, 0))).norm_sqr(),
        unitary: u.into(),
    })
}

/// `H = Ω(cosφ F_x + sinφ F_y) + βF_z²` with the rf phase as the control.
#[derive(Clone, Debug)]
pub struct XMeasurementModel {
    ops: SpinOps,
    jz2: CMatrix,
    pub omega: f64,
    pub beta: f64,
}

impl XMeasurementModel {
    pub fn new(j: SpinValue, omega: f64, beta: f64) -> Self {
        let ops = make_spin_ops(j);
        let jz2 = ops.jz.matrix() * ops.jz.matrix();
        Self { ops, jz2, omega, beta }
    }
}

impl ControlModel for XMeasurementModel {
    fn dim(&self) -> usize {
        self.ops.j.dim()
    }

    fn free(&self) -> [bool; 3] {
        [false, false, true]
    }

    fn hamiltonian(&self, seg: &Segment) -> CMatrix {
        self.ops.jx.matrix() * C64::new(self.omega * seg.phi.cos(), 0.0)
            + self.ops.jy.matrix() * C64::new(self.omega * seg.phi.sin(), 0.0)
            + &self.jz2 * C64::new(self.beta, 0.0)
    }

    fn derivatives(&self, seg: &Segment) -> [CMatrix; 3] {
        let d = self.dim();
        let d_phi = self.ops.jx.matrix() * C64::new(-self.omega * seg.phi.sin(), 0.0)
            + self.ops.jy.matrix() * C64::new(self.omega * seg.phi.cos(), 0.0);
        [CMatrix::zeros(d, d), CMatrix::zeros(d, d), d_phi]
    }
}

/// GRAPE on the X-measurement isometry with `Ω = β = 1`.
pub fn x_measurement_grape(j: SpinValue, segments: usize, total_time: f64, opts: &GrapeOptions) -> Result<GrapeResult> {
    let model = XMeasurementModel::new(j, 1.0, 1.0);
    let target = x_measurement_map(j)?;
    let objective = Objective::new(vec![(&model, &target)], segments, total_time, Segment::new(1.0, 0.0, 0.0))?;
    grape_optimize(&objective, opts)
}

/// Isometry fidelity of the open-system map `E` produced by running the
/// schedule under `dρ/dt = −i[H, ρ] + Γ𝒟[W](ρ)`:
/// `Σ_ij ⟨f_i|E(|e_i⟩⟨e_j|)|f_j⟩/k² = Σ_K |Tr(V†K)|²/k²`, which reduces to
/// `|Tr(V†U)|²/k²` for a unitary map.
pub fn lindblad_isometry_fidelity(
    model: &dyn ControlModel,
    schedule: &PulseSchedule,
    target: &IsometryTarget,
    jumps: &[ComplexOperator],
    gamma: f64,
) -> Result<f64> {
    schedule.validate()?;
    let d = model.dim();
    check_dim(d, target.dim())?;
    for w in jumps {
        check_dim(d, w.dim())?;
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return domain(format!("decay rate must be non-negative, got {gamma}"));
    }
    let ws: Vec<CMatrix> = jumps.iter().map(|w| w.matrix().clone()).collect();
    let tau = schedule.duration();
    let mut s = CMatrix::identity(d * d, d * d);
    for seg in &schedule.segments {
        let h = Hamiltonian::Constant(model.hamiltonian(seg));
        s = propagator_superoperator(&h, &ws, gamma, tau, 1) * s;
    }
    let k2 = (target.k * target.k) as f64;
    Ok(kraus_from_superoperator(&s, d, 1e-15).iter().map(|k| target.v.hs_inner(k).norm_sqr()).sum::<f64>() / k2)
}

