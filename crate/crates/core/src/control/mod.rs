//! Piecewise-constant optimal control: propagation, partial-isometry
//! fidelity, and GRAPE with exact per-segment gradients.
//!
//! Times are in units of `1/Ω_rf` and frequencies in units of `Ω_rf`.

mod lbfgs;
mod prep;
mod rabi;
mod rf;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, domain, Result};
use crate::linalg::{CMatrix, ComplexOperator, HermitianEigen, C64, ZERO};
use crate::rng;

pub use lbfgs::{maximize, Ascent, AscentOptions};
pub use prep::{
    cat_prep_adiabatic, cat_prep_oat, lindblad_isometry_fidelity, x_measurement_adiabatic, x_measurement_grape,
    x_measurement_map, XAdiabaticResult, XMeasurementModel,
};
pub use rabi::{rabi_hamiltonian, v_control, v_rydberg, v_target, Layout, RabiModel, RabiTarget};
pub use rf::{
    dual_manifold_pulse, rf_hamiltonians, DualManifoldConfig, DualManifoldResult, DualTarget, RfManifoldModel,
    RfManifoldParams,
};

/// One piecewise-constant control segment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub omega: f64,
    pub delta: f64,
    pub phi: f64,
}

impl Segment {
    pub fn new(omega: f64, delta: f64, phi: f64) -> Self {
        Self { omega, delta, phi }
    }

    fn get(&self, c: usize) -> f64 {
        [self.omega, self.delta, self.phi][c]
    }

    fn set(&mut self, c: usize, v: f64) {
        match c {
            0 => self.omega = v,
            1 => self.delta = v,
            _ => self.phi = v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub unit: String,
    #[serde(rename = "T")]
    pub total_time: f64,
    pub segments: Vec<Segment>,
}

impl PulseSchedule {
    pub fn new(total_time: f64, segments: Vec<Segment>) -> Result<Self> {
        let s = Self { unit: "Omega_rf".into(), total_time, segments };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return domain("pulse schedule needs at least one segment");
        }
        if !(self.total_time.is_finite() && self.total_time >= 0.0) {
            return domain(format!("total time must be finite and non-negative, got {}", self.total_time));
        }
        if self.segments.iter().any(|s| !(s.omega.is_finite() && s.delta.is_finite() && s.phi.is_finite())) {
            return domain("pulse schedule has non-finite controls");
        }
        Ok(())
    }

    /// Length of each equal segment.
    pub fn duration(&self) -> f64 {
        self.total_time / self.segments.len() as f64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A Hamiltonian family `H(omega, delta, phi)` for one segment.
pub trait ControlModel: Sync {
    fn dim(&self) -> usize;

    /// Which of `(omega, delta, phi)` the optimizer varies.
    fn free(&self) -> [bool; 3];

    fn hamiltonian(&self, seg: &Segment) -> CMatrix;

    /// `(∂H/∂omega, ∂H/∂delta, ∂H/∂phi)`
    fn derivatives(&self, seg: &Segment) -> [CMatrix; 3];
}

/// Ordered product `exp(−iH_N τ)···exp(−iH_1 τ)`.
pub fn propagate(schedule: &PulseSchedule, model: &dyn ControlModel) -> Result<ComplexOperator> {
    schedule.validate()?;
    let tau = schedule.duration();
    let d = model.dim();
    let mut u = CMatrix::identity(d, d);
    for seg in &schedule.segments {
        u = HermitianEigen::new(&model.hamiltonian(seg)).propagator(tau) * u;
    }
    Ok(u.into())
}

/// Partial isometry `V = Σ_i |f_i⟩⟨e_i|` of rank `k`, stored as a d×d matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct IsometryTarget {
    pub v: ComplexOperator,
    pub k: usize,
}

impl IsometryTarget {
    /// Requires `V†V` to be a projector to 1e-12.
    pub fn new(v: ComplexOperator) -> Result<Self> {
        let p = v.adjoint() * v.clone();
        let defect = (p.matrix() * p.matrix() - p.matrix()).norm();
        if defect > 1e-12 {
            return domain(format!("V†V is not a projector (defect {defect:.3e})"));
        }
        let k = p.trace().re.round() as usize;
        if k == 0 {
            return domain("isometry target has rank zero");
        }
        Ok(Self { v, k })
    }

    /// `Σ |to⟩⟨from|` over basis-index pairs.
    pub fn from_pairs(dim: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut m = CMatrix::zeros(dim, dim);
        for &(to, from) in pairs {
            if to >= dim || from >= dim {
                return domain(format!("basis index out of range for dimension {dim}"));
            }
            m[(to, from)] = C64::new(1.0, 0.0);
        }
        Self::new(m.into())
    }

    pub fn from_unitary(u: ComplexOperator) -> Result<Self> {
        if !u.is_unitary(1e-10) {
            return domain("target is not unitary");
        }
        let k = u.dim();
        Ok(Self { v: u, k })
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }
}

/// `|Tr(V†U)|²/k²`
pub fn isometry_fidelity(target: &IsometryTarget, u: &ComplexOperator) -> Result<f64> {
    check_dim(target.dim(), u.dim())?;
    let g = target.v.hs_inner(u);
    Ok((g.norm_sqr() / (target.k * target.k) as f64).min(1.0))
}

/// Product of isometry fidelities over several models driven by the same
/// controls, parameterized by the free fields of every segment.
pub struct Objective<'a> {
    parts: Vec<(&'a dyn ControlModel, &'a IsometryTarget)>,
    free: Vec<usize>,
    pub template: Segment,
    pub segments: usize,
    pub total_time: f64,
}

impl<'a> Objective<'a> {
    pub fn new(
        parts: Vec<(&'a dyn ControlModel, &'a IsometryTarget)>,
        segments: usize,
        total_time: f64,
        template: Segment,
    ) -> Result<Self> {
        if parts.is_empty() {
            return domain("objective needs at least one model");
        }
        if segments == 0 {
            return domain("at least one segment required");
        }
        if !(total_time.is_finite() && total_time >= 0.0) {
            return domain(format!("total time must be finite and non-negative, got {total_time}"));
        }
        let mask = parts[0].0.free();
        for (model, target) in &parts {
            check_dim(model.dim(), target.dim())?;
            if model.free() != mask {
                return domain("models in one objective must share their free controls");
            }
        }
        let free = (0..3).filter(|&c| mask[c]).collect();
        Ok(Self { parts, free, template, segments, total_time })
    }

    pub fn n_params(&self) -> usize {
        self.segments * self.free.len()
    }

    pub fn free_controls(&self) -> &[usize] {
        &self.free
    }

    pub fn schedule(&self, x: &[f64]) -> PulseSchedule {
        let nf = self.free.len();
        let segments = (0..self.segments)
            .map(|j| {
                let mut s = self.template;
                for (f, &c) in self.free.iter().enumerate() {
                    s.set(c, x[j * nf + f]);
                }
                s
            })
            .collect();
        PulseSchedule { unit: "Omega_rf".into(), total_time: self.total_time, segments }
    }

    pub fn params(&self, schedule: &PulseSchedule) -> Vec<f64> {
        schedule.segments.iter().flat_map(|s| self.free.iter().map(|&c| s.get(c))).collect()
    }

    /// Per-part fidelities.
    pub fn fidelities(&self, x: &[f64]) -> Vec<f64> {
        let sched = self.schedule(x);
        self.parts
            .iter()
            .map(|(m, t)| isometry_fidelity(t, &propagate(&sched, *m).expect("validated schedule")).unwrap_or(0.0))
            .collect()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.fidelities(x).iter().product()
    }

    /// Objective and its exact gradient.
    pub fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let sched = self.schedule(x);
        let parts: Vec<(f64, Vec<f64>)> =
            self.parts.iter().map(|(m, t)| self.part_gradient(*m, t, &sched)).collect();
        let value: f64 = parts.iter().map(|p| p.0).product();
        let mut grad = vec![0.0; x.len()];
        for (i, (_, gi)) in parts.iter().enumerate() {
            let others: f64 = parts.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, p)| p.0).product();
            for (g, v) in grad.iter_mut().zip(gi) {
                *g += others * v;
            }
        }
        (value, grad)
    }

    /// `F = |g|²/k²` with `g = Tr(V†U)`; `∂F = 2 Re(ḡ ∂g)/k²` where
    /// `∂g = Tr(R_j L_j ∂U_j)`, `R_j = U_{j−1}···U_1`, `L_j = V†U_N···U_{j+1}`.
    fn part_gradient(&self, model: &dyn ControlModel, target: &IsometryTarget, sched: &PulseSchedule) -> (f64, Vec<f64>) {
        let tau = sched.duration();
        let n = sched.segments.len();
        let d = model.dim();
        let eigs: Vec<HermitianEigen> =
            sched.segments.iter().map(|s| HermitianEigen::new(&model.hamiltonian(s))).collect();
        let us: Vec<CMatrix> = eigs.iter().map(|e| e.propagator(tau)).collect();
        let mut right = Vec::with_capacity(n);
        let mut acc = CMatrix::identity(d, d);
        for u in &us {
            right.push(acc.clone());
            acc = u * acc;
        }
        let vdag = target.v.matrix().adjoint();
        let g = (&vdag * &acc).trace();
        let mut left = vec![CMatrix::zeros(d, d); n];
        let mut l = vdag;
        for j in (0..n).rev() {
            left[j] = l.clone();
            l *= &us[j];
        }
        let k2 = (target.k * target.k) as f64;
        let nf = self.free.len();
        let mut grad = vec![0.0; n * nf];
        for j in 0..n {
            let m = &right[j] * &left[j];
            let derivs = model.derivatives(&sched.segments[j]);
            for (f, &c) in self.free.iter().enumerate() {
                let du = eigs[j].propagator_derivative(&derivs[c], tau);
                let mut dg = ZERO;
                for a in 0..d {
                    for b in 0..d {
                        dg += m[(b, a)] * du[(a, b)];
                    }
                }
                grad[j * nf + f] = 2.0 * (g.conj() * dg).re / k2;
            }
        }
        (g.norm_sqr() / k2, grad)
    }
}

/// Uniform ranges for seeded random initial controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitRanges {
    pub omega: (f64, f64),
    pub delta: (f64, f64),
    pub phi: (f64, f64),
}

impl Default for InitRanges {
    fn default() -> Self {
        Self { omega: (0.0, 2.0), delta: (-2.0, 2.0), phi: (0.0, std::f64::consts::TAU) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrapeOptions {
    pub restarts: usize,
    pub seed: u64,
    pub init: InitRanges,
    /// Starting point for restart 0 instead of a random draw.
    pub initial: Option<Vec<f64>>,
    pub ascent: AscentOptions,
    /// Fidelity at or above which the run counts as converged.
    pub success: f64,
}

impl Default for GrapeOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: rng::DEFAULT_SEED,
            init: InitRanges::default(),
            initial: None,
            ascent: AscentOptions::default(),
            success: 0.99,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrapeResult {
    pub schedule: PulseSchedule,
    pub fidelity: f64,
    pub converged: bool,
    pub restart: usize,
    pub iterations: usize,
    /// Fidelity after each iteration of the selected restart.
    pub trace: Vec<f64>,
}

impl GrapeResult {
    /// `iteration,fidelity` rows.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,fidelity\n");
        for (i, f) in self.trace.iter().enumerate() {
            out.push_str(&format!("{i},{f}\n"));
        }
        out
    }
}

fn random_start(objective: &Objective, init: &InitRanges, rng: &mut impl Rng) -> Vec<f64> {
    let ranges = [init.omega, init.delta, init.phi];
    (0..objective.segments)
        .flat_map(|_| objective.free.iter().map(|&c| ranges[c]).collect::<Vec<_>>())
        .map(|(lo, hi)| if hi > lo { rng.gen_range(lo..hi) } else { lo })
        .collect()
}

/// Seeded multi-start GRAPE. Restarts run in parallel and the highest
/// fidelity wins, ties going to the lowest restart index.
pub fn grape_optimize(objective: &Objective, opts: &GrapeOptions) -> Result<GrapeResult> {
    if opts.restarts == 0 {
        return domain("at least one restart required");
    }
    if let Some(x0) = &opts.initial {
        if x0.len() != objective.n_params() {
            return domain(format!("initial controls have {} entries, expected {}", x0.len(), objective.n_params()));
        }
    }
    let runs: Vec<Ascent> = (0..opts.restarts)
        .into_par_iter()
        .map(|i| {
            let x0 = match (&opts.initial, i) {
                (Some(x0), 0) => x0.clone(),
                _ => random_start(objective, &opts.init, &mut rng::stream(opts.seed, "grape", i as u64)),
            };
            maximize(|x| objective.value_and_gradient(x), x0, &opts.ascent)
        })
        .collect();
    let (restart, best) = runs
        .into_iter()
        .enumerate()
        .reduce(|a, b| if b.1.value > a.1.value { b } else { a })
        .expect("restarts ≥ 1");
    Ok(GrapeResult {
        schedule: objective.schedule(&best.x),
        fidelity: best.value,
        converged: best.value >= opts.success,
        restart,
        iterations: best.iterations,
        trace: best.trace,
    })
}
