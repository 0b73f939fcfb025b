//! Per-gate error budgets: how a channel redistributes a cat state over
//! kitten levels and signs.

use serde::{Deserialize, Serialize};

use super::optical::{optical_channel_kraus, OPTICAL_ALPHA, OPTICAL_BETA, OPTICAL_GAMMA_T};
use crate::catcode::{minus, plus, Sign};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{CVector, ComplexOperator, ZERO};
use crate::spinalg::{SaBasis, SpinValue};

/// Output weights of `Λ(|±⟩⟨±|)` averaged over both inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationTable {
    /// `[level][0]`: same sign as the input; `[level][1]`: flipped sign.
    pub levels: Vec<[f64; 2]>,
    /// Weight carried by basis elements that shift past the last kitten level.
    pub outside: f64,
}

impl PopulationTable {
    pub fn total(&self) -> f64 {
        self.levels.iter().map(|l| l[0] + l[1]).sum::<f64>() + self.outside
    }

    pub fn flipped(&self) -> f64 {
        self.levels.iter().map(|l| l[1]).sum()
    }

    pub fn level(&self, l: usize) -> f64 {
        self.levels.get(l).map(|x| x[0] + x[1]).unwrap_or(0.0)
    }
}

fn sign_vectors(j: SpinValue, level: usize, input: Sign) -> [CVector; 2] {
    let (same, flip) = match input {
        Sign::Plus => (plus(j, level), minus(j, level)),
        Sign::Minus => (minus(j, level), plus(j, level)),
    };
    [same, flip]
}

/// Tensor-basis route: each Kraus operator is expanded in the S/A basis and
/// each basis element is routed to the kitten level `q` it shifts to, with
/// the sign fixed by its flip character.
pub fn channel_populations(j: SpinValue, kraus: &[ComplexOperator]) -> Result<PopulationTable> {
    j.require_half_integer()?;
    for k in kraus {
        check_dim(j.dim(), k.dim())?;
    }
    let basis = SaBasis::new(j);
    let nl = j.kitten_levels();
    let mut levels = vec![[0.0; 2]; nl];
    let mut outside = 0.0;
    for input in [Sign::Plus, Sign::Minus] {
        let src = match input {
            Sign::Plus => plus(j, 0),
            Sign::Minus => minus(j, 0),
        };
        let images: Vec<CVector> = basis.ops.iter().map(|b| b.apply(&src)).collect();
        let targets: Vec<[CVector; 2]> = (0..nl).map(|l| sign_vectors(j, l, input)).collect();
        for k in kraus {
            let coeffs = basis.project(k);
            let mut amp = vec![[ZERO; 2]; nl];
            let mut stray = CVector::zeros(j.dim());
            for ((ix, img), &cb) in basis.indices.iter().zip(&images).zip(&coeffs) {
                if cb == ZERO {
                    continue;
                }
                let q = ix.level_shift() as usize;
                if q < nl {
                    let s = usize::from(ix.flips_sign());
                    amp[q][s] += cb * targets[q][s].dotc(img);
                } else {
                    stray += img * cb;
                }
            }
            for l in 0..nl {
                for s in 0..2 {
                    levels[l][s] += 0.5 * amp[l][s].norm_sqr();
                }
            }
            outside += 0.5 * stray.norm_squared();
        }
    }
    Ok(PopulationTable { levels, outside })
}

/// Direct route: `⟨s_l|Λ(|±⟩⟨±|)|s_l⟩` from the Kraus images.
pub fn channel_populations_direct(j: SpinValue, kraus: &[ComplexOperator]) -> Result<PopulationTable> {
    j.require_half_integer()?;
    let nl = j.kitten_levels();
    let mut levels = vec![[0.0; 2]; nl];
    for input in [Sign::Plus, Sign::Minus] {
        let src = match input {
            Sign::Plus => plus(j, 0),
            Sign::Minus => minus(j, 0),
        };
        for k in kraus {
            check_dim(j.dim(), k.dim())?;
            let img = k.apply(&src);
            for (l, lv) in levels.iter_mut().enumerate() {
                let t = sign_vectors(j, l, input);
                for s in 0..2 {
                    lv[s] += 0.5 * t[s].dotc(&img).norm_sqr();
                }
            }
        }
    }
    Ok(PopulationTable { levels, outside: 0.0 })
}

/// Per-gate error probabilities. Leakage `p_k` is the probability that a
/// fresh ancilla starts in kitten level `k` (k = 1…4).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    pub p_phase: f64,
    pub p_jump1: f64,
    pub p_jump2: f64,
    /// Weight at level ≥ 3 or beyond the kitten range; not used by the bounds.
    pub p_higher: f64,
    pub leakage: [f64; 4],
}

impl NoiseBudget {
    pub fn new(p_phase: f64, p_jump1: f64, p_jump2: f64, leakage: [f64; 4]) -> Result<Self> {
        let b = Self { p_phase, p_jump1, p_jump2, p_higher: 0.0, leakage };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.p_phase, self.p_jump1, self.p_jump2, self.p_higher];
        for p in all.iter().chain(&self.leakage) {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::Probability(format!("{p} outside [0, 1]")));
            }
        }
        if self.p_phase + self.p_jump1 + self.p_jump2 > 1.0 + 1e-12 {
            return Err(Error::Probability("phase and jump probabilities exceed 1".into()));
        }
        if self.leakage.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::Probability("leakage probabilities exceed 1".into()));
        }
        Ok(())
    }

    /// `p_0 = 1 − Σ p_k`
    pub fn leakage_with_p0(&self) -> [f64; 5] {
        let s: f64 = self.leakage.iter().sum();
        [1.0 - s, self.leakage[0], self.leakage[1], self.leakage[2], self.leakage[3]]
    }
}

/// Classifies a channel's output weight and rescales so that `p_phase = ε`.
/// `p_phase` counts every sign-flipped output; `p_jump1`/`p_jump2` count all
/// weight landing on kitten level 1/2.
pub fn channel_error_budget(j: SpinValue, kraus: &[ComplexOperator], eps: f64) -> Result<NoiseBudget> {
    let table = channel_populations(j, kraus)?;
    let raw_phase = table.flipped();
    let higher: f64 = (3..j.kitten_levels()).map(|l| table.level(l)).sum::<f64>() + table.outside;
    // Rounding in the S/A projection leaves ~1e-30 flipped weight on
    // sign-preserving channels.
    if raw_phase <= 1e-15 * table.total() {
        if eps > 0.0 {
            return Err(Error::NonNormalizable(eps));
        }
        return NoiseBudget::new(0.0, 0.0, 0.0, [0.0; 4]);
    }
    let s = eps / raw_phase;
    let b = NoiseBudget {
        p_phase: eps,
        p_jump1: s * table.level(1),
        p_jump2: s * table.level(2),
        p_higher: s * higher,
        leakage: [0.0; 4],
    };
    b.validate()?;
    Ok(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModelKind {
    Rotation,
    Optical,
}

/// `(p_jump1, p_jump2)` per unit phase probability for the optical model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpticalRatios {
    pub jump1: f64,
    pub jump2: f64,
}

impl OpticalRatios {
    pub fn compute(j: SpinValue, alpha: f64, beta: f64, gamma_t: f64) -> Result<Self> {
        let kraus = optical_channel_kraus(j, alpha, beta, gamma_t)?;
        let table = channel_populations(j, &kraus)?;
        let raw = table.flipped();
        if raw <= 1e-15 * table.total() {
            return Err(Error::NonNormalizable(1.0));
        }
        Ok(Self { jump1: table.level(1) / raw, jump2: table.level(2) / raw })
    }
}

fn default_alpha() -> f64 {
    OPTICAL_ALPHA
}
fn default_beta() -> f64 {
    OPTICAL_BETA
}
fn default_gamma_t() -> f64 {
    OPTICAL_GAMMA_T
}

/// `{"model": "rotation"|"optical", "epsilon", "alpha", "beta", "leakage"}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub model: NoiseModelKind,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub leakage: [f64; 4],
    #[serde(default = "default_gamma_t")]
    pub gamma_t: f64,
}

impl NoiseConfig {
    pub fn rotation() -> Self {
        Self {
            model: NoiseModelKind::Rotation,
            epsilon: 0.0,
            alpha: OPTICAL_ALPHA,
            beta: OPTICAL_BETA,
            leakage: [0.0; 4],
            gamma_t: OPTICAL_GAMMA_T,
        }
    }

    pub fn optical() -> Self {
        Self { model: NoiseModelKind::Optical, ..Self::rotation() }
    }

    pub fn with_leakage(mut self, leakage: [f64; 4]) -> Self {
        self.leakage = leakage;
        self
    }

    /// Jump probabilities per unit ε.
    pub fn jump_ratios(&self, j: SpinValue) -> Result<(f64, f64)> {
        match self.model {
            NoiseModelKind::Rotation => Ok((super::amp_phase_ratio(j), 0.0)),
            NoiseModelKind::Optical => {
                let r = OpticalRatios::compute(j, self.alpha, self.beta, self.gamma_t)?;
                Ok((r.jump1, r.jump2))
            }
        }
    }

    pub fn budget(&self, j: SpinValue, eps: f64) -> Result<NoiseBudget> {
        let (r1, r2) = self.jump_ratios(j)?;
        let b = NoiseBudget { p_phase: eps, p_jump1: r1 * eps, p_jump2: r2 * eps, p_higher: 0.0, leakage: self.leakage };
        b.validate()?;
        Ok(b)
    }
}
