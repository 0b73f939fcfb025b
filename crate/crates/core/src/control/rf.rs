//! Rf-driven Larmor precession of the auxiliary and Rydberg manifolds in the
//! frame rotating at `ω = 4ω₀/3`, controlled by piecewise-constant rf phases.

use serde::{Deserialize, Serialize};

use super::{grape_optimize, ControlModel, GrapeOptions, InitRanges, IsometryTarget, Objective, PulseSchedule, Segment};
use crate::error::{domain, Result};
use crate::linalg::{CMatrix, ComplexOperator, C64};
use crate::rng;
use crate::spinalg::{make_spin_ops, su2_rotation, SpinOps, SpinValue};

fn default_g_ratio() -> f64 {
    2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfManifoldParams {
    pub omega_rf: f64,
    pub omega0: f64,
    /// `g_r/g_a`
    #[serde(default = "default_g_ratio")]
    pub g_ratio: f64,
}

impl RfManifoldParams {
    pub fn new(omega_rf: f64, omega0: f64) -> Result<Self> {
        let p = Self { omega_rf, omega0, g_ratio: default_g_ratio() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(self.omega_rf) && ok(self.g_ratio) && self.omega0.is_finite() && self.omega0 >= 0.0) {
            return domain(format!("invalid rf parameters {self:?}"));
        }
        Ok(())
    }

    pub fn frame_frequency(&self) -> f64 {
        4.0 * self.omega0 / 3.0
    }

    /// Field strength `g·√(Ω_rf² + (ω₀ − ω/g)²)` seen by a manifold with g-factor `g`.
    fn precession(&self, g: f64) -> f64 {
        g * (self.omega_rf.powi(2) + (self.omega0 - self.frame_frequency() / g).powi(2)).sqrt()
    }

    /// `Ω_a = √(Ω_rf² + ω₀²/9)`
    pub fn omega_a(&self) -> f64 {
        self.precession(1.0)
    }

    pub fn omega_r(&self) -> f64 {
        self.precession(self.g_ratio)
    }
}

/// One manifold with `H = gΩ_rf(cosφ F_x + sinφ F_y) + (gω₀ − ω)F_z`.
#[derive(Clone, Debug)]
pub struct RfManifoldModel {
    ops: SpinOps,
    g: f64,
    params: RfManifoldParams,
}

impl RfManifoldModel {
    pub fn auxiliary(params: RfManifoldParams, j: SpinValue) -> Self {
        Self { ops: make_spin_ops(j), g: 1.0, params }
    }

    pub fn rydberg(params: RfManifoldParams, j: SpinValue) -> Self {
        Self { ops: make_spin_ops(j), g: params.g_ratio, params }
    }

    fn at_phase(&self, phi: f64) -> CMatrix {
        let drive = self.g * self.params.omega_rf;
        let bias = self.g * self.params.omega0 - self.params.frame_frequency();
        self.ops.jx.matrix() * C64::new(drive * phi.cos(), 0.0)
            + self.ops.jy.matrix() * C64::new(drive * phi.sin(), 0.0)
            + self.ops.jz.matrix() * C64::new(bias, 0.0)
    }
}

impl ControlModel for RfManifoldModel {
    fn dim(&self) -> usize {
        self.ops.j.dim()
    }

    fn free(&self) -> [bool; 3] {
        [false, false, true]
    }

    fn hamiltonian(&self, seg: &Segment) -> CMatrix {
        self.at_phase(seg.phi)
    }

    fn derivatives(&self, seg: &Segment) -> [CMatrix; 3] {
        let d = self.dim();
        let drive = self.g * self.params.omega_rf;
        let d_phi = self.ops.jx.matrix() * C64::new(-drive * seg.phi.sin(), 0.0)
            + self.ops.jy.matrix() * C64::new(drive * seg.phi.cos(), 0.0);
        [CMatrix::zeros(d, d), CMatrix::zeros(d, d), d_phi]
    }
}

/// `(H_a, H_r)` at rf phase `φ`.
pub fn rf_hamiltonians(
    params: &RfManifoldParams,
    phi: f64,
    aux: SpinValue,
    ryd: SpinValue,
) -> Result<(ComplexOperator, ComplexOperator)> {
    params.validate()?;
    let a = RfManifoldModel::auxiliary(*params, aux).at_phase(phi);
    let r = RfManifoldModel::rydberg(*params, ryd).at_phase(phi);
    Ok((a.into(), r.into()))
}

/// Auxiliary-manifold target; the Rydberg manifold always targets identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DualTarget {
    /// `exp(−iπF_x)`
    XAux,
    /// `exp(iπF_z)`
    ZAux,
}

impl DualTarget {
    fn aux_unitary(self, j: SpinValue) -> Result<ComplexOperator> {
        match self {
            DualTarget::XAux => su2_rotation(j, [1.0, 0.0, 0.0], std::f64::consts::PI),
            DualTarget::ZAux => su2_rotation(j, [0.0, 0.0, 1.0], -std::f64::consts::PI),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualManifoldConfig {
    pub params: RfManifoldParams,
    pub aux: SpinValue,
    pub ryd: SpinValue,
    pub segments: usize,
    pub total_time: f64,
    pub target: DualTarget,
    pub restarts: usize,
    pub seed: u64,
    pub success: f64,
}

impl DualManifoldConfig {
    fn preset(omega0: f64, segments: usize, total_time: f64, target: DualTarget) -> Self {
        Self {
            params: RfManifoldParams { omega_rf: 1.0, omega0, g_ratio: default_g_ratio() },
            aux: SpinValue::half(9),
            ryd: SpinValue::half(11),
            segments,
            total_time,
            target,
            restarts: 8,
            seed: rng::DEFAULT_SEED,
            success: 0.999,
        }
    }

    /// X on the auxiliary manifold with two phases, `ω₀ = 3`, `T = √2π`.
    pub fn x_two_pulse() -> Self {
        Self::preset(3.0, 2, std::f64::consts::SQRT_2 * std::f64::consts::PI, DualTarget::XAux)
    }

    /// X with three phases at `ω₀ = 5`, each segment a `π/Ω_a` pulse.
    pub fn x_three_pulse() -> Self {
        let mut c = Self::preset(5.0, 3, 0.0, DualTarget::XAux);
        c.total_time = 3.0 * std::f64::consts::PI / c.params.omega_a();
        c
    }

    /// X with three phases at `ω₀ = 5` and `T = 3π/Ω_rf` read literally.
    pub fn x_three_pulse_literal() -> Self {
        Self::preset(5.0, 3, 3.0 * std::f64::consts::PI, DualTarget::XAux)
    }

    /// `exp(iπF_z)` with ten phases at `ω₀ = 3`, `T = π`.
    pub fn z_gate() -> Self {
        Self::preset(3.0, 10, std::f64::consts::PI, DualTarget::ZAux)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.aux.require_half_integer()?;
        self.ryd.require_half_integer()?;
        if self.segments == 0 || self.restarts == 0 {
            return domain("segments and restarts must be positive");
        }
        if !(self.total_time.is_finite() && self.total_time > 0.0) {
            return domain(format!("total time must be positive, got {}", self.total_time));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualManifoldResult {
    pub phases: Vec<f64>,
    pub schedule: PulseSchedule,
    pub fidelity_aux: f64,
    pub fidelity_ryd: f64,
    pub joint: f64,
    pub converged: bool,
}

struct DualProblem {
    aux: RfManifoldModel,
    ryd: RfManifoldModel,
    aux_target: IsometryTarget,
    ryd_target: IsometryTarget,
}

impl DualProblem {
    fn new(cfg: &DualManifoldConfig, aux: SpinValue, ryd: SpinValue) -> Result<Self> {
        Ok(Self {
            aux: RfManifoldModel::auxiliary(cfg.params, aux),
            ryd: RfManifoldModel::rydberg(cfg.params, ryd),
            aux_target: IsometryTarget::from_unitary(cfg.target.aux_unitary(aux)?)?,
            ryd_target: IsometryTarget::from_unitary(ComplexOperator::identity(ryd.dim()))?,
        })
    }

    fn objective(&self, cfg: &DualManifoldConfig) -> Result<Objective<'_>> {
        Objective::new(
            vec![(&self.aux, &self.aux_target), (&self.ryd, &self.ryd_target)],
            cfg.segments,
            cfg.total_time,
            Segment::new(cfg.params.omega_rf, 0.0, 0.0),
        )
    }
}

/// Optimizes the rf phases for the auxiliary target with identity on the
/// Rydberg manifold. The dynamics are SU(2), so the search runs on spin-1/2
/// representations and is then polished at the requested spins.
pub fn dual_manifold_pulse(cfg: &DualManifoldConfig) -> Result<DualManifoldResult> {
    cfg.validate()?;
    let half = SpinValue::half(1);
    let coarse = DualProblem::new(cfg, half, half)?;
    let init = InitRanges { omega: (0.0, 0.0), delta: (0.0, 0.0), phi: (0.0, std::f64::consts::TAU) };
    let opts = GrapeOptions { restarts: cfg.restarts, seed: cfg.seed, init, success: cfg.success, ..Default::default() };
    let best = grape_optimize(&coarse.objective(cfg)?, &opts)?;

    let fine = DualProblem::new(cfg, cfg.aux, cfg.ryd)?;
    let objective = fine.objective(cfg)?;
    let polish = GrapeOptions { restarts: 1, initial: Some(objective.params(&best.schedule)), ..opts };
    let result = grape_optimize(&objective, &polish)?;
    let phases = objective.params(&result.schedule);
    let f = objective.fidelities(&phases);
    Ok(DualManifoldResult {
        phases,
        schedule: result.schedule,
        fidelity_aux: f[0],
        fidelity_ryd: f[1],
        joint: f[0] * f[1],
        converged: f[0] * f[1] >= cfg.success,
    })
}
