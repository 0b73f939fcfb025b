//! Repetition-code phase correction and measurement-free amplitude recovery.

mod walkthrough;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catcode::{kitten_projector, minus, one_index, plus, zero_index};
use crate::error::{domain, Result};
use crate::gates::{cnot, pauli_gate, Pauli};
use crate::linalg::{CMatrix, CVector, ComplexOperator, C64, ONE};
use crate::register::{check_register_dim, trace_distance_psd, RegisterState, StateRepr, DEFAULT_DIM_CAP};
use crate::spinalg::SpinValue;

pub use walkthrough::{optical_pumping_walkthrough, summarize, walkthrough_with_event, StateSummary, Transcript, TranscriptStep};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum XOutcome {
    Plus,
    Minus,
}

impl XOutcome {
    pub fn value(self) -> i8 {
        match self {
            XOutcome::Plus => 1,
            XOutcome::Minus => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            XOutcome::Plus => XOutcome::Minus,
            XOutcome::Minus => XOutcome::Plus,
        }
    }
}

/// `{|s⟩_l : l = 0…d/2−1}` for one sign.
pub fn sign_family(j: SpinValue, outcome: XOutcome) -> Vec<CVector> {
    (0..j.kitten_levels())
        .map(|l| match outcome {
            XOutcome::Plus => plus(j, l),
            XOutcome::Minus => minus(j, l),
        })
        .collect()
}

/// Orthonormal kitten ± basis of one qudit.
pub fn kitten_basis(j: SpinValue) -> Vec<CVector> {
    let mut b = sign_family(j, XOutcome::Plus);
    b.extend(sign_family(j, XOutcome::Minus));
    b
}

/// Destructive readout of `site` in the ± basis (all kitten levels): returns
/// the Born probability of `outcome` and the post-state of the other sites.
pub fn readout_x(state: &RegisterState, site: usize, outcome: XOutcome) -> Result<(f64, Option<RegisterState>)> {
    let family = sign_family(state.j, outcome);
    let p: f64 = match &state.repr {
        StateRepr::Pure(v) => family
            .iter()
            .map(|b| state.contract_vector(v, site, b).map(|w| w.norm_squared()))
            .sum::<Result<f64>>()?,
        StateRepr::Mixed(m) => family
            .iter()
            .map(|b| state.contract_matrix(m, site, b).map(|w| w.trace().re))
            .sum::<Result<f64>>()?,
    };
    if p <= 1e-14 {
        return Ok((p.max(0.0), None));
    }
    Ok((p, Some(state.discard_site(site, &family)?)))
}

fn sample_outcome(probs: [f64; 2], rng: &mut impl Rng) -> XOutcome {
    let u: f64 = rng.gen::<f64>() * (probs[0] + probs[1]);
    if u < probs[0] {
        XOutcome::Plus
    } else {
        XOutcome::Minus
    }
}

/// Both branches of an ancilla-assisted X measurement of `site`.
pub fn measure_x_branches(state: &RegisterState, site: usize) -> Result<Vec<(XOutcome, f64, RegisterState)>> {
    if site >= state.n {
        return domain(format!("site {site} out of range for {} sites", state.n));
    }
    let j = state.j;
    let anc = state.n;
    let s = state.append(&[plus(j, 0)])?.apply(&cnot(j)?, &[anc, site])?;
    let mut out = Vec::new();
    for o in [XOutcome::Plus, XOutcome::Minus] {
        if let (p, Some(post)) = readout_x(&s, anc, o)? {
            out.push((o, p, post));
        }
    }
    Ok(out)
}

/// Ancilla-assisted X measurement: `|+⟩_0` ancilla, CNOT with the ancilla as
/// control, destructive ± readout of the ancilla. The reported outcome is
/// flipped with probability `flip_prob`.
pub fn measure_x(
    state: &RegisterState,
    site: usize,
    flip_prob: f64,
    rng: &mut impl Rng,
) -> Result<(XOutcome, RegisterState)> {
    let branches = measure_x_branches(state, site)?;
    let mut probs = [0.0; 2];
    for (o, p, _) in &branches {
        probs[usize::from(*o == XOutcome::Minus)] = *p;
    }
    let o = sample_outcome(probs, rng);
    let post = branches.into_iter().find(|b| b.0 == o).expect("sampled branch has weight").2;
    let reported = if flip_prob > 0.0 && rng.gen::<f64>() < flip_prob { o.flipped() } else { o };
    Ok((reported, post))
}

/// One round of adjacent XX parities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeRecord {
    pub bits: Vec<i8>,
    pub round: usize,
}

impl SyndromeRecord {
    pub fn trivial(&self) -> bool {
        self.bits.iter().all(|&b| b == 1)
    }
}

/// Measures `X_i X_{i+1}` for i = 0…n−2, each with a fresh `|+⟩_0` ancilla
/// controlling CNOTs onto both data sites.
pub fn phase_syndromes(
    state: &RegisterState,
    round: usize,
    flip_prob: f64,
    rng: &mut impl Rng,
) -> Result<(SyndromeRecord, RegisterState)> {
    let j = state.j;
    let c = cnot(j)?;
    let mut s = state.clone();
    let mut bits = Vec::with_capacity(state.n.saturating_sub(1));
    for i in 0..state.n.saturating_sub(1) {
        let anc = s.n;
        let t = s.append(&[plus(j, 0)])?.apply(&c, &[anc, i])?.apply(&c, &[anc, i + 1])?;
        let mut branches = Vec::new();
        for o in [XOutcome::Plus, XOutcome::Minus] {
            if let (p, Some(post)) = readout_x(&t, anc, o)? {
                branches.push((o, p, post));
            }
        }
        let mut probs = [0.0; 2];
        for (o, p, _) in &branches {
            probs[usize::from(*o == XOutcome::Minus)] = *p;
        }
        let o = sample_outcome(probs, rng);
        s = branches.into_iter().find(|b| b.0 == o).expect("sampled branch has weight").2;
        let reported = if flip_prob > 0.0 && rng.gen::<f64>() < flip_prob { o.flipped() } else { o };
        bits.push(reported.value());
    }
    Ok((SyndromeRecord { bits, round }, s))
}

/// Per-bit majority over rounds.
pub fn majority(records: &[SyndromeRecord]) -> Result<Vec<i8>> {
    let first = records.first().ok_or_else(|| crate::error::Error::Domain("no syndrome records".into()))?;
    let len = first.bits.len();
    if records.iter().any(|r| r.bits.len() != len) {
        return domain("syndrome records have different lengths");
    }
    Ok((0..len)
        .map(|i| {
            let s: i32 = records.iter().map(|r| r.bits[i] as i32).sum();
            if s >= 0 {
                1
            } else {
                -1
            }
        })
        .collect())
}

/// Minimum-weight flip pattern for a repetition-code syndrome. The two
/// candidate patterns are complements; ties pick the one that leaves site 0
/// unflipped.
pub fn decode(bits: &[i8]) -> Vec<usize> {
    let n = bits.len() + 1;
    let mut pattern = vec![false; n];
    for i in 0..bits.len() {
        pattern[i + 1] = pattern[i] ^ (bits[i] == -1);
    }
    let weight = pattern.iter().filter(|&&x| x).count();
    let flip_all = 2 * weight > n;
    (0..n).filter(|&i| pattern[i] ^ flip_all).collect()
}

/// Applies Z at the sites indicated by the majority-voted syndrome.
pub fn phase_correct(state: &RegisterState, records: &[SyndromeRecord]) -> Result<RegisterState> {
    let bits = majority(records)?;
    if bits.len() + 1 != state.n {
        return domain(format!("syndrome length {} does not match {} sites", bits.len(), state.n));
    }
    let z = pauli_gate(state.j, Pauli::Z);
    let mut s = state.clone();
    for site in decode(&bits) {
        s = s.apply(&z, &[site])?;
    }
    Ok(s)
}

/// Kraus operators of the two-CNOT recovery with a fresh ancilla drawn from
/// `Σ_l w_l |+⟩_l⟨+|_l`: `K = √w_l (⟨b|⊗I) CNOT₁₂ CNOT₂₁ (I⊗|+⟩_l)`, summed
/// over the kitten ± basis `b` of the retired qudit. The map sends the old
/// data qudit to the ancilla, which takes its place.
pub fn mf_kraus(j: SpinValue, ancilla_weights: &[f64]) -> Result<Vec<ComplexOperator>> {
    if ancilla_weights.len() > j.kitten_levels() {
        return domain(format!("{} ancilla weights for {} kitten levels", ancilla_weights.len(), j.kitten_levels()));
    }
    if ancilla_weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(crate::error::Error::Probability("ancilla weights outside [0, 1]".into()));
    }
    let d = j.dim();
    let c12 = cnot(j)?;
    let c21 = crate::gates::cnot_reversed(j)?;
    let v = &c12 * &c21;
    let basis = kitten_basis(j);
    let mut out = Vec::new();
    for (l, &w) in ancilla_weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let anc = plus(j, l);
        for b in &basis {
            // K[a', a] = Σ ⟨b, a'| V |a, anc⟩
            let mut k = CMatrix::zeros(d, d);
            for a in 0..d {
                let mut e = CVector::zeros(d);
                e[a] = ONE;
                let img = v.apply(&e.kronecker(&anc));
                for ap in 0..d {
                    let mut acc = crate::linalg::ZERO;
                    for x in 0..d {
                        acc += b[x].conj() * img[x * d + ap];
                    }
                    k[(ap, a)] = acc * w.sqrt();
                }
            }
            if k.norm() > 1e-14 {
                out.push(ComplexOperator::from_matrix(k));
            }
        }
    }
    Ok(out)
}

/// Level-exchange unitary `U_k`: swaps |0⟩_k ↔ |0⟩_0 and |1⟩_k ↔ |1⟩_0.
pub fn level_exchange(j: SpinValue, level: usize) -> Result<ComplexOperator> {
    let d = j.dim();
    let mut perm: Vec<usize> = (0..d).collect();
    perm.swap(zero_index(j, level), zero_index(j, 0));
    perm.swap(one_index(j, level), one_index(j, 0));
    let m = CMatrix::from_fn(d, d, |a, b| if perm[b] == a { ONE } else { crate::linalg::ZERO });
    Ok(ComplexOperator::from_matrix(m))
}

/// Kraus operators `U_k M_k` of the reference measure-and-reset recovery.
pub fn reference_kraus(j: SpinValue) -> Result<Vec<ComplexOperator>> {
    (0..j.kitten_levels())
        .map(|k| Ok(&level_exchange(j, k)? * &kitten_projector(j, k)?))
        .collect()
}

/// Measurement-free amplitude recovery of `site` with a perfect ancilla.
pub fn amp_recover_mf(state: &RegisterState, site: usize) -> Result<RegisterState> {
    amp_recover_mf_with(state, site, &[1.0])
}

/// As [`amp_recover_mf`] with an ancilla mixture over kitten levels.
pub fn amp_recover_mf_with(state: &RegisterState, site: usize, ancilla_weights: &[f64]) -> Result<RegisterState> {
    let kraus = mf_kraus(state.j, ancilla_weights)?;
    apply_channel_keep_pure(state, &kraus, site)
}

/// The recovery gadget run literally: append the ancilla, apply CNOT₂₁ then
/// CNOT₁₂, retire the old data qudit and move the ancilla into its place.
pub fn amp_recover_mf_circuit(state: &RegisterState, site: usize) -> Result<RegisterState> {
    let j = state.j;
    let anc = state.n;
    let c = cnot(j)?;
    let s = state.append(&[plus(j, 0)])?.apply(&c, &[anc, site])?.apply(&c, &[site, anc])?;
    // Move the ancilla into `site`, then drop the retired qudit (now last).
    let mut order: Vec<usize> = (0..=state.n).collect();
    order.swap(site, anc);
    let s = s.permute(&order)?;
    s.discard_site(anc, &kitten_basis(j))
}

/// Applies a single-site Kraus channel, staying pure when one operator
/// carries all the weight.
fn apply_channel_keep_pure(state: &RegisterState, kraus: &[ComplexOperator], site: usize) -> Result<RegisterState> {
    if let StateRepr::Pure(v) = &state.repr {
        let plan = state.plan(&[site])?;
        let pieces: Vec<CVector> = kraus
            .iter()
            .map(|k| plan.apply_vector(k.matrix(), v))
            .filter(|w| w.norm_squared() > 1e-13)
            .collect();
        if pieces.len() == 1 {
            let w = &pieces[0];
            return RegisterState::pure(state.j, state.n, w / C64::new(w.norm(), 0.0));
        }
    }
    state.apply_kraus(kraus, &[site])
}

/// `Σ_k U_k M_k ρ M_k† U_k†` on one qudit.
pub fn amp_recover_reference(rho: &CMatrix, j: SpinValue) -> Result<CMatrix> {
    crate::error::check_dim(j.dim(), rho.nrows())?;
    Ok(crate::noise::apply_kraus(&reference_kraus(j)?, rho))
}

pub type Channel<'a> = dyn Fn(&RegisterState) -> Result<RegisterState> + Sync + 'a;

/// Random pure state from normalized complex Gaussians.
pub fn random_pure_state(dim: usize, rng: &mut impl Rng) -> CVector {
    use rand_distr::StandardNormal;
    let v = CVector::from_fn(dim, |_, _| {
        crate::linalg::c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// Maximum trace distance between the outputs of two channels over random
/// pure inputs on `n` spin-J qudits.
pub fn channel_distance(
    j: SpinValue,
    n: usize,
    a: &Channel,
    b: &Channel,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    let dim = check_register_dim(j.dim(), n, DEFAULT_DIM_CAP)?;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let s = RegisterState::pure(j, n, random_pure_state(dim, rng))?;
        let ra = a(&s)?.density();
        let rb = b(&s)?.density();
        worst = worst.max(trace_distance_psd(&ra, &rb));
    }
    Ok(worst)
}

/// `(1−p)ρ + p I/D`
pub fn depolarize(state: &RegisterState, p: f64) -> Result<RegisterState> {
    let dim = state.dim();
    let rho = state.density() * crate::linalg::r(1.0 - p) + CMatrix::identity(dim, dim) * crate::linalg::r(p / dim as f64);
    RegisterState::mixed(state.j, state.n, rho)
}

/// Basis permutation of `X̂` applied on every site in `sites`.
fn flip_permutation(d: usize, n: usize, sites: &[usize]) -> Vec<usize> {
    let dim = d.pow(n as u32);
    (0..dim)
        .map(|idx| {
            let mut out = idx;
            for &s in sites {
                let stride = d.pow((n - 1 - s) as u32);
                let digit = idx / stride % d;
                out = out - digit * stride + (d - 1 - digit) * stride;
            }
            out
        })
        .collect()
}

/// Phase-recovery channel: syndrome projection onto every outcome pattern of
/// the adjacent `X̂X̂` parities followed by the decoded Z corrections.
///
/// `X̂` is a basis permutation, so each projector `Π_i (I + s_i X̂_iX̂_{i+1})/2`
/// is a signed sum of site-flip permutations and Z is diagonal.
pub fn phase_recovery_channel(state: &RegisterState) -> Result<RegisterState> {
    let j = state.j;
    let n = state.n;
    let d = j.dim();
    if n < 2 {
        return Ok(state.clone().into_mixed());
    }
    let rho = state.density();
    let dim = rho.nrows();
    let gens = n - 1;
    // Group element for each subset of generators.
    let elements: Vec<(usize, Vec<usize>)> = (0..1usize << gens)
        .map(|mask| {
            let mut on = vec![false; n];
            for i in (0..gens).filter(|i| mask >> i & 1 == 1) {
                on[i] ^= true;
                on[i + 1] ^= true;
            }
            let sites: Vec<usize> = (0..n).filter(|&s| on[s]).collect();
            (mask, flip_permutation(d, n, &sites))
        })
        .collect();
    let zdiag: Vec<C64> = {
        let z = pauli_gate(j, Pauli::Z);
        (0..d).map(|i| z.matrix()[(i, i)]).collect()
    };
    let norm = 1.0 / (1u64 << (2 * gens)) as f64;
    let mut out = CMatrix::zeros(dim, dim);
    for pattern in 0..(1usize << gens) {
        let bits: Vec<i8> = (0..gens).map(|i| if pattern >> i & 1 == 1 { -1 } else { 1 }).collect();
        let chi = |mask: usize| -> f64 {
            (0..gens).filter(|i| mask >> i & 1 == 1).map(|i| bits[i] as f64).product()
        };
        let mut projected = CMatrix::zeros(dim, dim);
        for (ma, pa) in &elements {
            for (mb, pb) in &elements {
                let w = chi(*ma) * chi(*mb) * norm;
                for c in 0..dim {
                    for r in 0..dim {
                        projected[(r, c)] += rho[(pa[r], pb[c])] * w;
                    }
                }
            }
        }
        let fix = decode(&bits);
        let phase: Vec<C64> = (0..dim)
            .map(|idx| {
                fix.iter().fold(ONE, |acc, &s| acc * zdiag[idx / d.pow((n - 1 - s) as u32) % d])
            })
            .collect();
        for c in 0..dim {
            for r in 0..dim {
                out[(r, c)] += projected[(r, c)] * phase[r] * phase[c].conj();
            }
        }
    }
    RegisterState::mixed(j, n, out)
}

/// Amplitude-recovery channel on every site.
pub fn amp_recovery_channel(state: &RegisterState) -> Result<RegisterState> {
    let kraus = mf_kraus(state.j, &[1.0])?;
    let mut s = state.clone().into_mixed();
    for site in 0..state.n {
        s = s.apply_kraus(&kraus, &[site])?;
    }
    Ok(s)
}

/// Random single-site correctable error: a random combination of S/A basis
/// elements of rank at most `⌊(2J−1)/2⌋`, with unit Frobenius norm.
pub fn random_correctable_error(j: SpinValue, rng: &mut impl Rng) -> ComplexOperator {
    use rand_distr::StandardNormal;
    let basis = crate::spinalg::SaBasis::new(j);
    let k = j.max_level() as u32;
    let mut op = ComplexOperator::zeros(j.dim());
    for (ix, b) in basis.indices.iter().zip(&basis.ops) {
        if ix.k <= k {
            let c = crate::linalg::c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal));
            op += &(b * c);
        }
    }
    let norm = op.frobenius_norm();
    op * (1.0 / norm)
}

/// Error family injected by [`commute_check_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommuteErrors {
    /// No error: the input is a random logical state.
    None,
    /// Random correctable S/A combination on one random site.
    Correctable,
    /// Per-gate optical-pumping channel on one random site.
    OpticalPumping,
    /// `Z` on one random site.
    PhaseFlip,
}

/// Largest `‖R_amp(R_ph(ρ)) − R_ph(R_amp(ρ))‖_tr` over random logical states
/// hit by a random correctable error on a random site.
pub fn commute_check(j: SpinValue, n: usize, trials: usize, rng: &mut impl Rng) -> Result<f64> {
    commute_check_with(j, n, trials, CommuteErrors::Correctable, rng)
}

pub fn commute_check_with(
    j: SpinValue,
    n: usize,
    trials: usize,
    errors: CommuteErrors,
    rng: &mut impl Rng,
) -> Result<f64> {
    check_register_dim(j.dim(), n, DEFAULT_DIM_CAP)?;
    let code = crate::catcode::CodePair::new(j, n)?;
    let optical = match errors {
        CommuteErrors::OpticalPumping => Some(crate::noise::optical_channel_kraus(
            j,
            crate::noise::OPTICAL_ALPHA,
            crate::noise::OPTICAL_BETA,
            crate::noise::OPTICAL_GAMMA_T,
        )?),
        _ => None,
    };
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let ab = random_pure_state(2, rng);
        let clean = RegisterState::pure(j, n, code.logical(ab[0], ab[1]))?;
        let site = rng.gen_range(0..n);
        let s = match errors {
            CommuteErrors::None => clean,
            CommuteErrors::Correctable => {
                let s = clean.apply(&random_correctable_error(j, rng), &[site])?;
                let v = s.vector().expect("pure");
                RegisterState::pure(j, n, v / C64::new(v.norm(), 0.0))?
            }
            CommuteErrors::OpticalPumping => {
                clean.apply_kraus(optical.as_deref().expect("built above"), &[site])?
            }
            CommuteErrors::PhaseFlip => clean.apply(&pauli_gate(j, Pauli::Z), &[site])?,
        };
        worst = worst.max(commutator_distance(&s)?);
    }
    Ok(worst)
}

/// `‖R_amp(R_ph(ρ)) − R_ph(R_amp(ρ))‖_tr` for one input.
pub fn commutator_distance(state: &RegisterState) -> Result<f64> {
    let a = amp_recovery_channel(&phase_recovery_channel(state)?)?;
    let b = phase_recovery_channel(&amp_recovery_channel(state)?)?;
    Ok(trace_distance_psd(&a.density(), &b.density()))
}
