//! Spin-cat code: kitten states, correctable-error subspaces, and
//! Knill-Laflamme verification on repetition registers.
//!
//! Kitten level `l` uses the sublevels `m = −J + l` (logical |0⟩_l) and
//! `m = J − l` (logical |1⟩_l), with |±⟩_l = (|0⟩_l ± |1⟩_l)/√2.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, domain, Result};
use crate::linalg::{r, CMatrix, CVector, ComplexOperator, C64, ONE};
use crate::register::{check_register_dim, kron_vectors, LocalPlan, DEFAULT_DIM_CAP};
use crate::spinalg::{make_spin_ops, SpinValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

fn check_level(j: SpinValue, level: usize) -> Result<()> {
    if level > j.max_level() {
        return domain(format!("kitten level {level} exceeds {} for J = {j}", j.max_level()));
    }
    Ok(())
}

/// Basis index of |0⟩_l = |J, −J + l⟩.
pub fn zero_index(j: SpinValue, level: usize) -> usize {
    j.dim() - 1 - level
}

/// Basis index of |1⟩_l = |J, J − l⟩.
pub fn one_index(_j: SpinValue, level: usize) -> usize {
    level
}

/// `a|0⟩_l + b|1⟩_l`
pub fn kitten_qubit(j: SpinValue, level: usize, a: C64, b: C64) -> Result<CVector> {
    check_level(j, level)?;
    let mut v = CVector::zeros(j.dim());
    v[zero_index(j, level)] = a;
    v[one_index(j, level)] = b;
    Ok(v)
}

/// The d×2 isometry embedding a qubit into kitten level `l`.
pub fn level_isometry(j: SpinValue, level: usize) -> Result<CMatrix> {
    check_level(j, level)?;
    let mut m = CMatrix::zeros(j.dim(), 2);
    m[(zero_index(j, level), 0)] = ONE;
    m[(one_index(j, level), 1)] = ONE;
    Ok(m)
}

#[derive(Clone, Debug, PartialEq)]
pub struct KittenState {
    pub j: SpinValue,
    pub level: usize,
    pub sign: Sign,
    pub vector: CVector,
}

/// `(|−J+m⟩ ± |J−m⟩)/√2`
pub fn cat_state(j: SpinValue, level: usize, sign: Sign) -> Result<KittenState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let vector = kitten_qubit(j, level, r(h), r(h * sign.value()))?;
    Ok(KittenState { j, level, sign, vector })
}

pub fn plus(j: SpinValue, level: usize) -> CVector {
    cat_state(j, level, Sign::Plus).expect("level in range").vector
}

pub fn minus(j: SpinValue, level: usize) -> CVector {
    cat_state(j, level, Sign::Minus).expect("level in range").vector
}

/// `(Π_0̄, Π_1̄)`: projectors onto the lower and upper halves of the sublevels.
pub fn subspace_projectors(j: SpinValue) -> Result<(ComplexOperator, ComplexOperator)> {
    j.require_half_integer()?;
    let d = j.dim();
    let half = d / 2;
    let p1: Vec<f64> = (0..d).map(|i| if i < half { 1.0 } else { 0.0 }).collect();
    let p0: Vec<f64> = p1.iter().map(|x| 1.0 - x).collect();
    Ok((ComplexOperator::from_real_diagonal(&p0), ComplexOperator::from_real_diagonal(&p1)))
}

/// `M_l = |+⟩_l⟨+|_l + |−⟩_l⟨−|_l`
pub fn kitten_projector(j: SpinValue, level: usize) -> Result<ComplexOperator> {
    check_level(j, level)?;
    let mut diag = vec![0.0; j.dim()];
    diag[zero_index(j, level)] = 1.0;
    diag[one_index(j, level)] = 1.0;
    Ok(ComplexOperator::from_real_diagonal(&diag))
}

/// Repetition encoding `|±_L⟩ = |±⟩^⊗n` at kitten level 0.
#[derive(Clone, Debug)]
pub struct CodePair {
    pub j: SpinValue,
    pub n: usize,
    pub logical_plus: CVector,
    pub logical_minus: CVector,
}

impl CodePair {
    pub fn new(j: SpinValue, n: usize) -> Result<Self> {
        j.require_half_integer()?;
        if n == 0 || n.is_multiple_of(2) {
            return domain(format!("repetition length must be odd, got {n}"));
        }
        Ok(Self {
            j,
            n,
            logical_plus: kron_vectors(&vec![plus(j, 0); n]),
            logical_minus: kron_vectors(&vec![minus(j, 0); n]),
        })
    }

    /// `a|+_L⟩ + b|−_L⟩`
    pub fn logical(&self, a: C64, b: C64) -> CVector {
        &self.logical_plus * a + &self.logical_minus * b
    }

    pub fn states(&self) -> [&CVector; 2] {
        [&self.logical_plus, &self.logical_minus]
    }
}

/// `J_x^l J_y^m J_z^n`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorMonomial {
    pub l: u32,
    pub m: u32,
    pub n: u32,
}

impl ErrorMonomial {
    pub fn new(l: u32, m: u32, n: u32) -> Self {
        Self { l, m, n }
    }

    pub fn degree(self) -> u32 {
        self.l + self.m + self.n
    }

    pub fn operator(self, j: SpinValue) -> ComplexOperator {
        make_spin_ops(j).monomial(self.l, self.m, self.n)
    }
}

impl std::fmt::Display for ErrorMonomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Jx^{} Jy^{} Jz^{}", self.l, self.m, self.n)
    }
}

/// Every monomial of degree ≤ K, ordered by degree then by descending (l, m).
pub fn correctable_error_set(j: SpinValue, k: u32) -> Vec<(ErrorMonomial, ComplexOperator)> {
    let ops = make_spin_ops(j);
    let mut out = Vec::new();
    for deg in 0..=k {
        for l in (0..=deg).rev() {
            for m in (0..=deg - l).rev() {
                let mono = ErrorMonomial::new(l, m, deg - l - m);
                out.push((mono, ops.monomial(mono.l, mono.m, mono.n)));
            }
        }
    }
    out
}

/// Single-qudit operator placed on one register site.
#[derive(Clone, Debug)]
pub struct SiteOperator {
    pub site: usize,
    pub op: ComplexOperator,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlResult {
    pub satisfied: bool,
    /// Larger-magnitude of `⟨+_L|E_a†E_b|−_L⟩` and `⟨−_L|E_a†E_b|+_L⟩`.
    pub offdiag: C64,
    /// `⟨+_L|E_a†E_b|+_L⟩ − ⟨−_L|E_a†E_b|−_L⟩`
    pub diag_gap: C64,
}

pub const KL_TOL: f64 = 1e-9;

fn kl_from_images(a: [&CVector; 2], b: [&CVector; 2], tol: f64) -> KlResult {
    let g = |i: usize, k: usize| a[i].dotc(b[k]);
    let (o1, o2) = (g(0, 1), g(1, 0));
    let offdiag = if o1.norm() >= o2.norm() { o1 } else { o2 };
    let diag_gap = g(0, 0) - g(1, 1);
    KlResult { satisfied: offdiag.norm() <= tol && diag_gap.norm() <= tol, offdiag, diag_gap }
}

/// Knill-Laflamme check of one error pair on the repetition code.
pub fn kl_check(code: &CodePair, ea: &SiteOperator, eb: &SiteOperator, tol: f64) -> Result<KlResult> {
    let d = code.j.dim();
    check_dim(d, ea.op.dim())?;
    check_dim(d, eb.op.dim())?;
    let pa = LocalPlan::new(d, code.n, &[ea.site])?;
    let pb = LocalPlan::new(d, code.n, &[eb.site])?;
    let ia: Vec<CVector> = code.states().iter().map(|s| pa.apply_vector(ea.op.matrix(), s)).collect();
    let ib: Vec<CVector> = code.states().iter().map(|s| pb.apply_vector(eb.op.matrix(), s)).collect();
    Ok(kl_from_images([&ia[0], &ia[1]], [&ib[0], &ib[1]], tol))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlFailure {
    pub sites: (usize, usize),
    pub monomials: (ErrorMonomial, ErrorMonomial),
    pub offdiag: C64,
    pub diag_gap: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlReport {
    #[serde(rename = "J")]
    pub j: SpinValue,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: u32,
    pub pairs_checked: usize,
    pub failures: Vec<KlFailure>,
    /// `degree_pass[a][b]`: every pair with degrees (a, b) passes.
    pub degree_pass: Vec<Vec<bool>>,
    /// Largest K' ≤ K for which every pair of degree ≤ K' passes.
    pub max_passing_degree: Option<u32>,
}

impl KlReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn kl_scan(j: SpinValue, n: usize, k: u32) -> Result<KlReport> {
    kl_scan_with(j, n, k, KL_TOL, DEFAULT_DIM_CAP)
}

/// Checks every ordered pair of monomials of degree ≤ K on every ordered pair
/// of sites. Images `E|ψ_i⟩` are computed once per (monomial, site, state).
pub fn kl_scan_with(j: SpinValue, n: usize, k: u32, tol: f64, cap: usize) -> Result<KlReport> {
    let d = j.dim();
    check_register_dim(d, n, cap)?;
    let code = CodePair::new(j, n)?;
    let errors = correctable_error_set(j, k);
    let plans: Vec<LocalPlan> = (0..n).map(|s| LocalPlan::new(d, n, &[s])).collect::<Result<_>>()?;
    // images[site][error] = [E|+_L⟩, E|−_L⟩]
    let images: Vec<Vec<[CVector; 2]>> = (0..n)
        .map(|s| {
            errors
                .par_iter()
                .map(|(_, op)| {
                    [
                        plans[s].apply_vector(op.matrix(), &code.logical_plus),
                        plans[s].apply_vector(op.matrix(), &code.logical_minus),
                    ]
                })
                .collect()
        })
        .collect();

    let ne = errors.len();
    let total = n * n * ne * ne;
    let results: Vec<(usize, KlResult)> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let (sa, rest) = (idx / (n * ne * ne), idx % (n * ne * ne));
            let (sb, rest) = (rest / (ne * ne), rest % (ne * ne));
            let (a, b) = (rest / ne, rest % ne);
            let ia = &images[sa][a];
            let ib = &images[sb][b];
            (idx, kl_from_images([&ia[0], &ia[1]], [&ib[0], &ib[1]], tol))
        })
        .collect();

    let kk = k as usize;
    let mut degree_pass = vec![vec![true; kk + 1]; kk + 1];
    let mut failures = Vec::new();
    for (idx, res) in results {
        if res.satisfied {
            continue;
        }
        let (sa, rest) = (idx / (n * ne * ne), idx % (n * ne * ne));
        let (sb, rest) = (rest / (ne * ne), rest % (ne * ne));
        let (a, b) = (rest / ne, rest % ne);
        let (ma, mb) = (errors[a].0, errors[b].0);
        degree_pass[ma.degree() as usize][mb.degree() as usize] = false;
        failures.push(KlFailure { sites: (sa, sb), monomials: (ma, mb), offdiag: res.offdiag, diag_gap: res.diag_gap });
    }
    let max_passing_degree = (0..=k)
        .take_while(|&kp| (0..=kp as usize).all(|a| (0..=kp as usize).all(|b| degree_pass[a][b])))
        .last();
    Ok(KlReport { j, n, k, pairs_checked: total, failures, degree_pass, max_passing_degree })
}

/// Number of monomials of degree ≤ K: C(K+3, 3).
pub fn monomial_count(k: u32) -> usize {
    let k = k as usize;
    (k + 1) * (k + 2) * (k + 3) / 6
}
