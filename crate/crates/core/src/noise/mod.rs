//! Physical error channels and per-gate error budgets.

mod budget;
mod lindblad;
mod optical;

use rand_distr::{StandardNormal, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::catcode::{minus, plus};
use crate::error::{domain, Result};
use crate::linalg::{CVector, ComplexOperator, C64, I};
use crate::spinalg::{make_spin_ops, su2_rotation, SpinValue};

pub use budget::{
    channel_error_budget, channel_populations, channel_populations_direct, NoiseBudget, NoiseConfig, NoiseModelKind,
    OpticalRatios, PopulationTable,
};
pub use lindblad::{
    apply_kraus, completeness_defect, kraus_from_superoperator, lindblad_evolve, lindblad_superoperator,
    propagator_superoperator, purity, superoperator_from_kraus, unvec, vec, Hamiltonian, SUPEROP_MAX,
};
pub use optical::{
    optical_channel_kraus, optical_pumping_jump_general, optical_pumping_jumps_simplified, spherical_unit_vector,
    Polarization, OPTICAL_ALPHA, OPTICAL_BETA, OPTICAL_GAMMA_T,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AxisDistribution {
    Isotropic,
    Fixed([f64; 3]),
}

/// Random rotation `exp(−iθ n·J)` with `θ ~ N(0, σ²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationNoise {
    pub sigma: f64,
    pub axis: AxisDistribution,
}

impl RotationNoise {
    pub fn new(sigma: f64, axis: AxisDistribution) -> Result<Self> {
        if sigma.is_nan() || sigma < 0.0 {
            return domain(format!("rotation spread must be non-negative, got {sigma}"));
        }
        Ok(Self { sigma, axis })
    }

    pub fn sample(&self, j: SpinValue, rng: &mut impl rand::Rng) -> ComplexOperator {
        let n = match self.axis {
            AxisDistribution::Isotropic => sample_unit_vector(rng),
            AxisDistribution::Fixed(n) => n,
        };
        let g: f64 = rng.sample(StandardNormal);
        su2_rotation(j, n, self.sigma * g).expect("unit axis")
    }
}

pub fn sample_unit_vector(rng: &mut impl rand::Rng) -> [f64; 3] {
    rng.sample(UnitSphere)
}

/// Overlaps of `U|+⟩` for `U = exp(−iθ n·J)`, exact and to first order in θ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationAmplitudes {
    /// `⟨−|U|+⟩`
    pub phase_amp: C64,
    /// `⟨+_1|U|+⟩`
    pub kitten1_amp: C64,
    /// `⟨−_1|U|+⟩`
    pub kitten1_flip_amp: C64,
    /// `−iθ ⟨−|n·J|+⟩`
    pub phase_first_order: C64,
    /// `−iθ ⟨+_1|n·J|+⟩`
    pub kitten1_first_order: C64,
}

pub fn rotation_first_order_amplitudes(j: SpinValue, theta: f64, axis: [f64; 3]) -> Result<RotationAmplitudes> {
    let u = su2_rotation(j, axis, theta)?;
    let gen = make_spin_ops(j).along(axis);
    let p0 = plus(j, 0);
    let m0 = minus(j, 0);
    let up = u.apply(&p0);
    let gp = gen.apply(&p0);
    let (p1, m1): (CVector, CVector) = if j.max_level() >= 1 {
        (plus(j, 1), minus(j, 1))
    } else {
        (CVector::zeros(j.dim()), CVector::zeros(j.dim()))
    };
    Ok(RotationAmplitudes {
        phase_amp: m0.dotc(&up),
        kitten1_amp: p1.dotc(&up),
        kitten1_flip_amp: m1.dotc(&up),
        phase_first_order: -I * theta * m0.dotc(&gp),
        kitten1_first_order: -I * theta * p1.dotc(&gp),
    })
}

/// `1/(2J)`: squared first-order amplitude ratio `|θ√(J/2)|² / |θJ|²`.
pub fn amp_phase_ratio(j: SpinValue) -> f64 {
    1.0 / j.twice() as f64
}

/// Logical amplitude-to-phase ratio for one correction window: the
/// probability that `k_L` single-level jumps (rate `ε/(2J)` each) accumulate
/// within `k_L` gates, divided by `ε`. `k_L = ⌊(2J−1)/2⌋`.
pub fn logical_amp_phase_ratio(j: SpinValue, eps: f64) -> f64 {
    let kl = j.max_level().max(1) as u32;
    crate::threshold::q_jumps(kl, kl, eps * amp_phase_ratio(j), 0.0).expect("valid probabilities") / eps
}

/// Equal-weight mixed-unitary channel of small rotations about each axis.
pub fn rotation_channel_kraus(j: SpinValue, theta: f64, axes: &[[f64; 3]]) -> Result<Vec<ComplexOperator>> {
    if axes.is_empty() {
        return domain("at least one rotation axis required");
    }
    let w = (1.0 / axes.len() as f64).sqrt();
    axes.iter().map(|&a| Ok(su2_rotation(j, a, theta)? * w)).collect()
}

/// Dephasing channel `{√(I − p Jz²/J²), √p Jz/J}`.
pub fn jz_channel_kraus(j: SpinValue, p: f64) -> Result<Vec<ComplexOperator>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(crate::error::Error::Probability(format!("p = {p}")));
    }
    let jz = make_spin_ops(j).jz;
    let scale = 1.0 / j.value();
    let d = j.dim();
    let k0: Vec<f64> = (0..d).map(|i| (1.0 - p * (j.m(i) * scale).powi(2)).sqrt()).collect();
    Ok(vec![ComplexOperator::from_real_diagonal(&k0), jz * (p.sqrt() * scale)])
}
