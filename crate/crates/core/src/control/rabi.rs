//! Two-manifold laser-driven Rabi model. The basis is the lower manifold
//! followed by the upper manifold, each in descending-M order.

use serde::{Deserialize, Serialize};

use super::{ControlModel, IsometryTarget, Segment};
use crate::error::{check_dim, domain, Result};
use crate::linalg::{CMatrix, ComplexOperator, C64};
use crate::spinalg::{clebsch_gordan, SpinValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// Ground F = J to auxiliary F = J.
    GroundAux,
    /// Auxiliary F = J to Rydberg F = J + 1.
    AuxRydberg,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RabiModel {
    pub layout: Layout,
    pub lower: SpinValue,
    pub upper: SpinValue,
    /// `𝒞_M` per lower-manifold index.
    pub cg_ratios: Vec<f64>,
    /// `δ_M` per upper-manifold index.
    pub zeeman: Vec<f64>,
}

impl RabiModel {
    /// π-polarized couplings with `𝒞_M = ⟨F',M|1,0;F,M⟩ / ⟨F',J|1,0;F,J⟩` and
    /// linear Zeeman offsets `δ_M = zeeman_scale·M`.
    pub fn new(layout: Layout, j: SpinValue, zeeman_scale: f64) -> Result<Self> {
        j.require_half_integer()?;
        let upper = match layout {
            Layout::GroundAux => j,
            Layout::AuxRydberg => SpinValue::from_twice(j.twice() + 2)?,
        };
        let (tj, tu) = (j.twice() as i32, upper.twice() as i32);
        let reference = clebsch_gordan(2, 0, tj, tj, tu, tj)?;
        let cg_ratios = (0..j.dim())
            .map(|i| Ok(clebsch_gordan(2, 0, tj, j.twice_m(i), tu, j.twice_m(i))? / reference))
            .collect::<Result<Vec<_>>>()?;
        let zeeman = (0..upper.dim()).map(|i| zeeman_scale * upper.m(i)).collect();
        Ok(Self { layout, lower: j, upper, cg_ratios, zeeman })
    }

    pub fn with_cg_ratios(mut self, ratios: Vec<f64>) -> Result<Self> {
        check_dim(self.lower.dim(), ratios.len())?;
        if ratios.iter().any(|r| !r.is_finite()) {
            return domain("CG ratios must be finite");
        }
        self.cg_ratios = ratios;
        Ok(self)
    }

    pub fn lower_index(&self, twice_m: i32) -> Option<usize> {
        self.lower.index_of(twice_m)
    }

    pub fn upper_index(&self, twice_m: i32) -> Option<usize> {
        self.upper.index_of(twice_m).map(|i| self.lower.dim() + i)
    }

    /// `(lower, upper)` index pairs sharing the same M.
    fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.lower.dim()).filter_map(move |i| {
            let tm = self.lower.twice_m(i);
            self.upper_index(tm).map(|u| (i, u, self.cg_ratios[i]))
        })
    }
}

/// `Σ_M −(Δ + δ_M)|e,M⟩⟨e,M| + 𝒞_M Ω (e^{iφ}|e,M⟩⟨e',M| + h.c.)`
pub fn rabi_hamiltonian(model: &RabiModel, seg: &Segment) -> ComplexOperator {
    model.hamiltonian(seg).into()
}

impl ControlModel for RabiModel {
    fn dim(&self) -> usize {
        self.lower.dim() + self.upper.dim()
    }

    fn free(&self) -> [bool; 3] {
        [true, true, true]
    }

    fn hamiltonian(&self, seg: &Segment) -> CMatrix {
        let d = self.dim();
        let dl = self.lower.dim();
        let mut h = CMatrix::zeros(d, d);
        for (u, dz) in self.zeeman.iter().enumerate() {
            h[(dl + u, dl + u)] = C64::new(-(seg.delta + dz), 0.0);
        }
        let e = C64::from_polar(seg.omega, seg.phi);
        for (l, u, c) in self.couplings() {
            h[(u, l)] = e * c;
            h[(l, u)] = e.conj() * c;
        }
        h
    }

    fn derivatives(&self, seg: &Segment) -> [CMatrix; 3] {
        let d = self.dim();
        let dl = self.lower.dim();
        let mut d_omega = CMatrix::zeros(d, d);
        let mut d_delta = CMatrix::zeros(d, d);
        let mut d_phi = CMatrix::zeros(d, d);
        for u in 0..self.upper.dim() {
            d_delta[(dl + u, dl + u)] = C64::new(-1.0, 0.0);
        }
        let e = C64::from_polar(1.0, seg.phi);
        for (l, u, c) in self.couplings() {
            d_omega[(u, l)] = e * c;
            d_omega[(l, u)] = e.conj() * c;
            d_phi[(u, l)] = C64::new(0.0, 1.0) * e * (c * seg.omega);
            d_phi[(l, u)] = C64::new(0.0, -1.0) * e.conj() * (c * seg.omega);
        }
        [d_omega, d_delta, d_phi]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RabiTarget {
    /// Transfer 1̄ (M > 0) from ground to auxiliary, identity on 0̄ ground.
    Control,
    /// Transfer the whole ground manifold to the auxiliary manifold.
    Target,
    /// Transfer the whole auxiliary manifold to the Rydberg manifold.
    RydTransfer,
}

impl RabiTarget {
    pub fn layout(self) -> Layout {
        match self {
            RabiTarget::Control | RabiTarget::Target => Layout::GroundAux,
            RabiTarget::RydTransfer => Layout::AuxRydberg,
        }
    }

    pub fn isometry(self, model: &RabiModel) -> Result<IsometryTarget> {
        match self {
            RabiTarget::Control => v_control(model),
            RabiTarget::Target => v_target(model),
            RabiTarget::RydTransfer => v_rydberg(model),
        }
    }
}

fn transfer(model: &RabiModel, layout: Layout, keep: impl Fn(i32) -> bool) -> Result<IsometryTarget> {
    if model.layout != layout {
        return domain(format!("target needs layout {layout:?}, model has {:?}", model.layout));
    }
    let pairs: Vec<(usize, usize)> = (0..model.lower.dim())
        .map(|i| {
            let tm = model.lower.twice_m(i);
            if keep(tm) {
                (i, i)
            } else {
                (model.upper_index(tm).expect("upper manifold contains every lower M"), i)
            }
        })
        .collect();
    IsometryTarget::from_pairs(model.dim(), &pairs)
}

/// `Σ_{M<0} |g,M⟩⟨g,M| + Σ_{M>0} |a,M⟩⟨g,M|`
pub fn v_control(model: &RabiModel) -> Result<IsometryTarget> {
    transfer(model, Layout::GroundAux, |tm| tm < 0)
}

/// `Σ_M |a,M⟩⟨g,M|`
pub fn v_target(model: &RabiModel) -> Result<IsometryTarget> {
    transfer(model, Layout::GroundAux, |_| false)
}

/// `Σ_M |r,M⟩⟨a,M|`
pub fn v_rydberg(model: &RabiModel) -> Result<IsometryTarget> {
    transfer(model, Layout::AuxRydberg, |_| false)
}
