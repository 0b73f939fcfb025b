//! Step-by-step correction of a single optical-pumping event on the n = 3 code.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{amp_recover_mf_circuit, phase_correct, phase_syndromes, SyndromeRecord};
use crate::catcode::{kitten_projector, CodePair};
use crate::error::{check_dim, domain, Result};
use crate::linalg::{CVector, ComplexOperator, C64};
use crate::register::RegisterState;
use crate::spinalg::{make_spin_ops, SpinValue};

/// Per-site kitten-level populations and the logical Bloch vector in the
/// `{|+_L⟩, |−_L⟩}` basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    /// `[site][level]`
    pub level_populations: Vec<Vec<f64>>,
    /// Weight inside the level-0 code space.
    pub code_weight: f64,
    pub logical_bloch: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TranscriptStep {
    pub label: String,
    pub summary: StateSummary,
    pub syndromes: Option<SyndromeRecord>,
    #[serde(skip)]
    pub state: Option<RegisterState>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Transcript {
    pub j: SpinValue,
    pub event: String,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub steps: Vec<TranscriptStep>,
    pub final_fidelity: f64,
}

impl Transcript {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn summarize(state: &RegisterState, code: &CodePair) -> Result<StateSummary> {
    let j = state.j;
    let mut level_populations = Vec::with_capacity(state.n);
    for site in 0..state.n {
        let row = (0..j.kitten_levels())
            .map(|l| Ok(state.expectation(&kitten_projector(j, l)?, &[site])?.re))
            .collect::<Result<Vec<f64>>>()?;
        level_populations.push(row);
    }
    let [p, m] = code.states();
    let rho = |a: &CVector, b: &CVector| -> C64 {
        match state.vector() {
            Some(v) => a.dotc(v) * v.dotc(b),
            None => a.dotc(&(state.density() * b)),
        }
    };
    let (pp, mm, pm) = (rho(p, p).re, rho(m, m).re, rho(p, m));
    Ok(StateSummary {
        level_populations,
        code_weight: pp + mm,
        logical_bloch: [2.0 * pm.re, -2.0 * pm.im, pp - mm],
    })
}

/// Applies the σ₊ emission event `J₋/√(2J)` (which sends `|J,J⟩ → |J,J−1⟩`
/// and annihilates `|J,−J⟩`) to site 0 of `α|+_L⟩ + β|−_L⟩`, then runs one
/// round of phase correction and measurement-free amplitude recovery on every
/// site. Syndrome outcomes are sampled from `rng`.
pub fn optical_pumping_walkthrough(j: SpinValue, alpha: C64, beta: C64, rng: &mut impl Rng) -> Result<Transcript> {
    let emission = make_spin_ops(j).jminus * (1.0 / (j.twice() as f64).sqrt());
    walkthrough_with_event(j, &emission, "sigma+ emission J-/sqrt(2J)", alpha, beta, rng)
}

/// Same walkthrough with an arbitrary single-site event on site 0. The event
/// must not annihilate the logical input.
pub fn walkthrough_with_event(
    j: SpinValue,
    event: &ComplexOperator,
    label: &str,
    alpha: C64,
    beta: C64,
    rng: &mut impl Rng,
) -> Result<Transcript> {
    check_dim(j.dim(), event.dim())?;
    let code = CodePair::new(j, 3)?;
    let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return domain("logical amplitudes must be finite and not both zero");
    }
    let (a, b) = (alpha / norm, beta / norm);
    let psi = code.logical(a, b);
    let mut steps = Vec::new();
    let mut push = |label: &str, s: &RegisterState, syn: Option<SyndromeRecord>| -> Result<()> {
        steps.push(TranscriptStep {
            label: label.into(),
            summary: summarize(s, &code)?,
            syndromes: syn,
            state: Some(s.clone()),
        });
        Ok(())
    };

    let input = RegisterState::pure(j, 3, psi.clone())?;
    push("input", &input, None)?;

    let hit = input.apply(event, &[0])?;
    let w = hit.vector().expect("pure").norm();
    if w <= 1e-12 {
        return domain("event annihilates the logical input");
    }
    let hit = RegisterState::pure(j, 3, hit.vector().expect("pure") / C64::new(w, 0.0))?;
    push("optical pumping on site 0", &hit, None)?;

    let (record, projected) = phase_syndromes(&hit, 0, 0.0, rng)?;
    push("phase syndromes", &projected, Some(record.clone()))?;
    let corrected = phase_correct(&projected, std::slice::from_ref(&record))?;
    push("phase correction", &corrected, None)?;

    let mut s = corrected;
    for site in 0..3 {
        s = amp_recover_mf_circuit(&s, site)?;
    }
    push("amplitude recovery", &s, None)?;

    let final_fidelity = s.fidelity_with(&psi);
    Ok(Transcript { j, event: label.into(), alpha: [a.re, a.im], beta: [b.re, b.im], steps, final_fidelity })
}
