//! Closed-form logical error bounds for the error-corrected logical CNOT.

use std::io::Write;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::noise::{NoiseConfig, NoiseModelKind};
use crate::spinalg::SpinValue;

/// Threshold of the outer CSS code.
pub const EPS_CSS: f64 = 0.67e-3;

/// `⌊(2J+1)/2⌋`: jumps needed for a logical amplitude error in the bound
/// analysis. The code construction itself corrects up to `⌊(2J−1)/2⌋`.
pub fn default_k_max(j: SpinValue) -> u32 {
    j.twice().div_ceil(2)
}

fn check_jump_probs(p1: f64, p2: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p1) || !(0.0..=1.0).contains(&p2) || p1 + p2 > 1.0 + 1e-12 {
        return Err(Error::Probability(format!("jump probabilities ({p1}, {p2}) invalid")));
    }
    Ok(())
}

/// Probability that `s` independent gates, each adding 0/1/2 jumps with
/// probabilities `(1−p1−p2, p1, p2)`, accumulate at least `k_max` jumps.
/// Exact DP over jump counts with an absorbing `≥ k_max` state.
pub fn q_jumps_generic<T>(s: u32, k_max: u32, p1: T, p2: T) -> T
where
    T: Clone + Zero + One + std::ops::Sub<Output = T>,
{
    if k_max == 0 {
        return T::one();
    }
    let k = k_max as usize;
    let p0 = T::one() - p1.clone() - p2.clone();
    let mut dist = vec![T::zero(); k + 1];
    dist[0] = T::one();
    for _ in 0..s {
        let mut next = vec![T::zero(); k + 1];
        next[k] = dist[k].clone();
        for c in 0..k {
            let w = dist[c].clone();
            next[c] = next[c].clone() + w.clone() * p0.clone();
            let c1 = (c + 1).min(k);
            next[c1] = next[c1].clone() + w.clone() * p1.clone();
            let c2 = (c + 2).min(k);
            next[c2] = next[c2].clone() + w * p2.clone();
        }
        dist = next;
    }
    dist[k].clone()
}

pub fn q_jumps(s: u32, k_max: u32, p1: f64, p2: f64) -> Result<f64> {
    check_jump_probs(p1, p2)?;
    Ok(q_jumps_generic(s, k_max, p1, p2).clamp(0.0, 1.0))
}

/// `q(s, k_max | k) = q(s, k_max − k)`; 1 once `k ≥ k_max`.
pub fn q_jumps_cond(s: u32, k_max: u32, k: u32, p1: f64, p2: f64) -> Result<f64> {
    q_jumps(s, k_max.saturating_sub(k), p1, p2)
}

fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Dominant-term estimate of `q`: sums `multinomial · p1^a p2^b` over the
/// minimal jump patterns (`a` single and `b` double jumps) reaching `k_max`,
/// with no-jump gates weighted by 1.
pub fn q_jumps_dominant(s: u32, k_max: u32, p1: f64, p2: f64) -> Result<f64> {
    check_jump_probs(p1, p2)?;
    if k_max == 0 {
        return Ok(1.0);
    }
    let k = k_max as u64;
    let s = s as u64;
    let mut total = 0.0;
    for b in 0..=s {
        for a in 0..=(s - b) {
            let jumps = a + 2 * b;
            let minimal = jumps >= k && (a == 0 || jumps - 1 < k) && (b == 0 || jumps - 2 < k);
            if minimal {
                let mult = binomial(s, b) * binomial(s - b, a);
                total += mult * p1.powi(a as i32) * p2.powi(b as i32);
            }
        }
    }
    Ok(total)
}

/// Dominant-term phase bounds `C(n,(n+1)/2)(2rε+ε)^((n+1)/2)` (target) and
/// `C(n,(n+1)/2)(4rε+ε)^((n+1)/2)` (control).
pub fn eps_phase_blocks(n: u32, r: u32, eps: f64) -> Result<(f64, f64)> {
    check_odd("repetition length", n)?;
    let h = n.div_ceil(2);
    let c = binomial(n as u64, h as u64);
    let r = r as f64;
    Ok((c * ((2.0 * r + 1.0) * eps).powi(h as i32), c * ((4.0 * r + 1.0) * eps).powi(h as i32)))
}

/// Syndrome-failure bound `2(n−1)·C(r1,(r1+1)/2)·(6ε)^((r1+1)/2)`.
pub fn eps_phase_ec(n: u32, r1: u32, eps: f64) -> Result<f64> {
    check_odd("phase rounds", r1)?;
    let h = r1.div_ceil(2);
    Ok(2.0 * (n as f64 - 1.0) * binomial(r1 as u64, h as u64) * (6.0 * eps).powi(h as i32))
}

fn check_odd(what: &str, v: u32) -> Result<()> {
    if v.is_multiple_of(2) {
        return domain(format!("{what} must be odd, got {v}"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QVariant {
    Exact,
    Dominant,
}

fn q_with(variant: QVariant, s: u32, k_max: u32, p1: f64, p2: f64) -> Result<f64> {
    match variant {
        QVariant::Exact => q_jumps(s, k_max, p1, p2),
        QVariant::Dominant => q_jumps_dominant(s, k_max, p1, p2),
    }
}

/// Amplitude bounds `2n·q(2r) + n·q(1)` (target) and `n·q(2r) + n·q(1)`
/// (control).
pub fn eps_amp_blocks(n: u32, r: u32, k_max: u32, p1: f64, p2: f64) -> Result<(f64, f64)> {
    eps_amp_blocks_with(QVariant::Exact, n, r, k_max, p1, p2)
}

pub fn eps_amp_blocks_with(variant: QVariant, n: u32, r: u32, k_max: u32, p1: f64, p2: f64) -> Result<(f64, f64)> {
    let q2r = q_with(variant, 2 * r, k_max, p1, p2)?;
    let q1 = q_with(variant, 1, k_max, p1, p2)?;
    let n = n as f64;
    Ok((2.0 * n * q2r + n * q1, n * q2r + n * q1))
}

/// Per-qudit amplitude-EC failure `r2·Σ_k q(s, k_max|k)·p_k` and its block
/// total `2n·ε_amp`. `leakage` is `[p0, p1, p2, p3, p4]`.
pub fn eps_amp_ec(
    n: u32,
    r2: u32,
    s: u32,
    k_max: u32,
    p1: f64,
    p2: f64,
    leakage: &[f64; 5],
) -> Result<(f64, f64)> {
    eps_amp_ec_with(QVariant::Exact, n, r2, s, k_max, p1, p2, leakage)
}

#[allow(clippy::too_many_arguments)]
pub fn eps_amp_ec_with(
    variant: QVariant,
    n: u32,
    r2: u32,
    s: u32,
    k_max: u32,
    p1: f64,
    p2: f64,
    leakage: &[f64; 5],
) -> Result<(f64, f64)> {
    if leakage.iter().any(|p| !(0.0..=1.0 + 1e-12).contains(p)) {
        return Err(Error::Probability("leakage probabilities outside [0, 1]".into()));
    }
    let mut per = 0.0;
    for (k, &pk) in leakage.iter().enumerate() {
        if pk == 0.0 {
            continue;
        }
        let q = if k as u32 >= k_max { 1.0 } else { q_with(variant, s, k_max - k as u32, p1, p2)? };
        per += q * pk;
    }
    let per = r2 as f64 * per;
    Ok((per, 2.0 * n as f64 * per))
}

fn default_eps_css() -> f64 {
    EPS_CSS
}

fn default_variant() -> QVariant {
    QVariant::Exact
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub j: SpinValue,
    pub n: u32,
    pub r1: u32,
    pub r2: u32,
    pub noise: NoiseConfig,
    #[serde(default = "default_eps_css")]
    pub eps_css: f64,
    /// Defaults to `⌊(2J+1)/2⌋`.
    #[serde(default)]
    pub k_max: Option<u32>,
    #[serde(default = "default_variant")]
    pub variant: QVariant,
}

impl ThresholdParams {
    pub fn new(j: SpinValue, n: u32, r1: u32, r2: u32, noise: NoiseConfig) -> Result<Self> {
        let p = Self { j, n, r1, r2, noise, eps_css: EPS_CSS, k_max: None, variant: QVariant::Exact };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.j.require_half_integer()?;
        check_odd("repetition length", self.n)?;
        check_odd("phase rounds", self.r1)?;
        if self.k_max == Some(0) {
            return domain("k_max must be at least 1");
        }
        let s: f64 = self.noise.leakage.iter().sum();
        if self.noise.leakage.iter().any(|p| !(0.0..=1.0).contains(p)) || s > 1.0 + 1e-12 {
            return Err(Error::Probability("leakage probabilities invalid".into()));
        }
        Ok(())
    }

    pub fn r(&self) -> u32 {
        self.r1 + self.r2
    }

    pub fn k_max(&self) -> u32 {
        self.k_max.unwrap_or_else(|| default_k_max(self.j))
    }

    fn leakage5(&self) -> [f64; 5] {
        let l = self.noise.leakage;
        [1.0 - l.iter().sum::<f64>(), l[0], l[1], l[2], l[3]]
    }
}

/// Six components of the total logical error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub epsilon: f64,
    pub eps_logical: f64,
    pub eps_phase_ec: f64,
    pub eps_phase_ctrl: f64,
    pub eps_phase_tgt: f64,
    pub eps_amp_ec: f64,
    pub eps_amp_ctrl: f64,
    pub eps_amp_tgt: f64,
}

impl CurvePoint {
    pub fn component_sum(&self) -> f64 {
        self.eps_phase_ec + self.eps_phase_ctrl + self.eps_phase_tgt + self.eps_amp_ec + self.eps_amp_ctrl + self.eps_amp_tgt
    }

    pub fn amplitude_share(&self) -> f64 {
        (self.eps_amp_ec + self.eps_amp_ctrl + self.eps_amp_tgt) / self.eps_logical
    }
}

/// Evaluator with the model's jump ratios resolved once.
#[derive(Clone, Debug)]
pub struct ThresholdModel {
    pub params: ThresholdParams,
    /// `(p1, p2)` per unit ε.
    pub ratios: (f64, f64),
}

impl ThresholdModel {
    pub fn new(params: ThresholdParams) -> Result<Self> {
        params.validate()?;
        let ratios = params.noise.jump_ratios(params.j)?;
        Ok(Self { params, ratios })
    }

    pub fn point(&self, eps: f64) -> Result<CurvePoint> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::Probability(format!("epsilon = {eps}")));
        }
        let p = &self.params;
        let r = p.r();
        let k_max = p.k_max();
        let (p1, p2) = (self.ratios.0 * eps, self.ratios.1 * eps);
        let (tgt, ctrl) = eps_phase_blocks(p.n, r, eps)?;
        let ph_ec = eps_phase_ec(p.n, p.r1, eps)?;
        let (a_tgt, a_ctrl) = eps_amp_blocks_with(p.variant, p.n, r, k_max, p1, p2)?;
        let (_, a_ec) = eps_amp_ec_with(p.variant, p.n, p.r2, 2 * r, k_max, p1, p2, &p.leakage5())?;
        let mut pt = CurvePoint {
            epsilon: eps,
            eps_logical: 0.0,
            eps_phase_ec: ph_ec,
            eps_phase_ctrl: ctrl,
            eps_phase_tgt: tgt,
            eps_amp_ec: a_ec,
            eps_amp_ctrl: a_ctrl,
            eps_amp_tgt: a_tgt,
        };
        pt.eps_logical = pt.component_sum();
        Ok(pt)
    }

    pub fn sweep(&self, grid: &[f64]) -> Result<Vec<CurvePoint>> {
        if grid.windows(2).any(|w| w[0] > w[1]) {
            return domain("epsilon grid must be sorted ascending");
        }
        grid.par_iter().map(|&e| self.point(e)).collect()
    }

    /// First upward crossings of `eps_logical = ε` and `eps_logical = ε_CSS`,
    /// refined by bisection inside the bracketing grid interval.
    pub fn find_crossings(&self, curve: &[CurvePoint]) -> Result<Crossings> {
        let break_even = self.crossing(curve, |pt| pt.eps_logical - pt.epsilon)?;
        let css = self.crossing(curve, |pt| pt.eps_logical - self.params.eps_css)?;
        Ok(Crossings {
            break_even,
            css,
            n: self.params.n,
            r1: self.params.r1,
            r2: self.params.r2,
            model: self.params.noise.model,
        })
    }

    fn crossing(&self, curve: &[CurvePoint], f: impl Fn(&CurvePoint) -> f64) -> Result<Option<f64>> {
        for w in curve.windows(2) {
            let (fa, fb) = (f(&w[0]), f(&w[1]));
            if fa < 0.0 && fb >= 0.0 {
                let (mut lo, mut hi) = (w[0].epsilon, w[1].epsilon);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if f(&self.point(mid)?) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-15 * hi.max(1e-300) {
                        break;
                    }
                }
                return Ok(Some(0.5 * (lo + hi)));
            }
        }
        Ok(None)
    }
}

pub fn eps_logical(params: &ThresholdParams, eps: f64) -> Result<CurvePoint> {
    ThresholdModel::new(params.clone())?.point(eps)
}

pub fn sweep(params: &ThresholdParams, grid: &[f64]) -> Result<Vec<CurvePoint>> {
    ThresholdModel::new(params.clone())?.sweep(grid)
}

pub fn find_crossings(curve: &[CurvePoint], params: &ThresholdParams) -> Result<Crossings> {
    ThresholdModel::new(params.clone())?.find_crossings(curve)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossings {
    pub break_even: Option<f64>,
    pub css: Option<f64>,
    pub n: u32,
    pub r1: u32,
    pub r2: u32,
    pub model: NoiseModelKind,
}

/// `n` from `candidates` minimizing `eps_logical` at fixed ε.
pub fn optimal_n(params: &ThresholdParams, eps: f64, candidates: &[u32]) -> Result<(u32, Vec<(u32, f64)>)> {
    let values = candidates
        .par_iter()
        .map(|&n| Ok((n, eps_logical(&ThresholdParams { n, ..params.clone() }, eps)?.eps_logical)))
        .collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|x| x.0)
        .ok_or_else(|| Error::Domain("no candidate lengths".into()))?;
    Ok((best, values))
}

/// `log10`-spaced grid from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return domain(format!("invalid grid [{lo}, {hi}] with {points} points"));
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..points).map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64)).collect())
}

pub const CSV_HEADER: [&str; 12] = [
    "epsilon",
    "eps_logical",
    "eps_phase_ec",
    "eps_phase_ctrl",
    "eps_phase_tgt",
    "eps_amp_ec",
    "eps_amp_ctrl",
    "eps_amp_tgt",
    "n",
    "r1",
    "r2",
    "model",
];

pub fn write_csv<W: Write>(out: W, params: &ThresholdParams, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let model = match params.noise.model {
        NoiseModelKind::Rotation => "rotation",
        NoiseModelKind::Optical => "optical",
    };
    for pt in curve {
        w.write_record([
            format!("{:e}", pt.epsilon),
            format!("{:e}", pt.eps_logical),
            format!("{:e}", pt.eps_phase_ec),
            format!("{:e}", pt.eps_phase_ctrl),
            format!("{:e}", pt.eps_phase_tgt),
            format!("{:e}", pt.eps_amp_ec),
            format!("{:e}", pt.eps_amp_ctrl),
            format!("{:e}", pt.eps_amp_tgt),
            params.n.to_string(),
            params.r1.to_string(),
            params.r2.to_string(),
            model.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
