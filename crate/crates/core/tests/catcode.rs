use proptest::prelude::*;
use spincat::catcode::*;
use spincat::linalg::{r, CVector, ComplexOperator, C64};
use spincat::spinalg::{clebsch_gordan, make_spin_ops, sa_basis, SpinValue};

fn half(num: u32) -> SpinValue {
    SpinValue::half(num)
}

fn basis(j: SpinValue, twice_m: i32) -> CVector {
    let mut v = CVector::zeros(j.dim());
    v[j.index_of(twice_m).unwrap()] = r(1.0);
    v
}

/// `(|−J+l⟩ ± |J−l⟩)/√2` for any `0 ≤ l ≤ 2J`, zero outside that range.
fn generic_cat(j: SpinValue, l: i32, sign: f64) -> CVector {
    let tj = j.twice() as i32;
    if l < 0 || l > tj {
        return CVector::zeros(j.dim());
    }
    (basis(j, -tj + 2 * l) + basis(j, tj - 2 * l) * r(sign)) * r(0.5f64.sqrt())
}

#[test]
fn cat_state_examples() {
    let j = half(9);
    let h = 0.5f64.sqrt();
    let s = cat_state(j, 0, Sign::Plus).unwrap();
    assert!((&s.vector - (basis(j, -9) + basis(j, 9)) * r(h)).norm() < 1e-15);
    let s = cat_state(j, 4, Sign::Minus).unwrap();
    assert!((&s.vector - (basis(j, -1) - basis(j, 1)) * r(h)).norm() < 1e-15);
    for l in 0..=4 {
        assert!((plus(j, l).norm() - 1.0).abs() < 1e-12);
        assert!(plus(j, l).dotc(&minus(j, l)).norm() < 1e-15);
    }
    assert!(cat_state(j, 5, Sign::Plus).is_err());
}

#[test]
fn projector_examples() {
    let j = half(9);
    let (p0, p1) = subspace_projectors(j).unwrap();
    assert!((p0.trace().re - 5.0).abs() < 1e-15 && (p1.trace().re - 5.0).abs() < 1e-15);
    let sum = &p0 + &p1;
    assert_eq!(sum, ComplexOperator::identity(10));
    assert!((&p0 * &p1).frobenius_norm() == 0.0);
    for l in 0..=4 {
        let expect = basis(j, -9 + 2 * l as i32) * r(0.5f64.sqrt());
        assert!((p0.apply(&plus(j, l)) - expect).norm() < 1e-15);
    }
    assert!(subspace_projectors(SpinValue::from_twice(4).unwrap()).is_err());
}

#[test]
fn kitten_subspaces_decompose_the_space() {
    for tj in [1, 3, 5, 7, 9] {
        let j = half(tj);
        let projs: Vec<_> = (0..=j.max_level()).map(|l| kitten_projector(j, l).unwrap()).collect();
        let mut sum = ComplexOperator::zeros(j.dim());
        for (a, pa) in projs.iter().enumerate() {
            sum = &sum + pa;
            for pb in &projs[a + 1..] {
                assert!((pa * pb).frobenius_norm() < 1e-15);
            }
        }
        assert!((&sum - &ComplexOperator::identity(j.dim())).frobenius_norm() < 1e-15);
    }
}

#[test]
fn error_set_counts() {
    let j = half(9);
    assert_eq!(j.max_level(), 4);
    assert_eq!(correctable_error_set(j, 1).len(), 4);
    assert_eq!(correctable_error_set(j, 2).len(), 10);
    assert_eq!(correctable_error_set(j, 4).len(), monomial_count(4));
    let ops = make_spin_ops(j);
    let set = correctable_error_set(j, 1);
    let names: Vec<_> = set.iter().map(|(m, _)| (m.l, m.m, m.n)).collect();
    assert_eq!(names, vec![(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]);
    assert_eq!(set[1].1, ops.jx);
    // Fixed product order Jx^l Jy^m Jz^n.
    let mono = ErrorMonomial::new(1, 1, 1).operator(j);
    assert!((&mono - &(&(&ops.jx * &ops.jy) * &ops.jz)).frobenius_norm() < 1e-12);
}

/// Kitten action of `S^(k)_q` and `A^(k)_q` written out with explicit CG
/// coefficients, compared with the dense matrices.
#[test]
fn sa_action_on_kittens_matches_coefficient_formula() {
    for tj in [3u32, 5, 7, 9] {
        let j = half(tj);
        let tj = tj as i32;
        let d = j.dim() as f64;
        for k in 0..=2u32 {
            let tk = 2 * k as i32;
            let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
            for l in 0..=j.max_level() as i32 {
                let tm = -tj + 2 * l;
                for sign in [1.0, -1.0] {
                    let ket = generic_cat(j, l, sign);
                    let pair = sa_basis(j, k, 0).unwrap();
                    let pre = ((2 * k + 1) as f64 / d).sqrt();
                    let c0 = clebsch_gordan(tj, tm, tk, 0, tj, tm).unwrap();
                    let flipped = if k % 2 == 0 { sign } else { -sign };
                    let expect = generic_cat(j, l, flipped) * r(pre * c0);
                    assert!((pair.s.apply(&ket) - expect).norm() < 1e-10);

                    for q in 1..=k as i32 {
                        let pair = sa_basis(j, k, q).unwrap();
                        let pre = ((2 * k + 1) as f64 / (2.0 * d)).sqrt();
                        let cg = |tq: i32| {
                            let target = tm + tq;
                            if target.abs() > tj {
                                0.0
                            } else {
                                clebsch_gordan(tj, tm, tk, tq, tj, target).unwrap()
                            }
                        };
                        let (cm, cp) = (cg(-2 * q), cg(2 * q));
                        let s_expect = (generic_cat(j, l - q, sign) * r(parity * cm)
                            + generic_cat(j, l + q, sign) * r(cp))
                            * r(pre);
                        // A = (T_q − (−1)^k T_−q)/√2 puts the minus sign on the l − q term.
                        let a_expect = (generic_cat(j, l + q, -sign) * r(cp)
                            - generic_cat(j, l - q, -sign) * r(parity * cm))
                            * r(pre);
                        assert!((pair.s.apply(&ket) - s_expect).norm() < 1e-10, "S k={k} q={q} l={l}");
                        let a = pair.a.unwrap();
                        assert!((a.apply(&ket) - a_expect).norm() < 1e-10, "A k={k} q={q} l={l}");
                    }
                }
            }
        }
    }
}

#[test]
fn kl_check_examples() {
    let j = half(9);
    let code = CodePair::new(j, 3).unwrap();
    let ops = make_spin_ops(j);
    let jz = SiteOperator { site: 0, op: ops.jz.clone() };
    assert!(kl_check(&code, &jz, &jz, KL_TOL).unwrap().satisfied);
    let id = SiteOperator { site: 1, op: ComplexOperator::identity(10) };
    let res = kl_check(&code, &id, &id, KL_TOL).unwrap();
    assert!(res.satisfied);
    assert_eq!(res.diag_gap, C64::new(0.0, 0.0));
    let bad = SiteOperator { site: 0, op: ComplexOperator::identity(4) };
    assert!(kl_check(&code, &bad, &jz, KL_TOL).is_err());
    assert!(CodePair::new(j, 2).is_err());
}

/// Brute-force matrix elements on the full register for a cross-site pair.
#[test]
fn kl_check_agrees_with_dense_embedding() {
    let j = half(5);
    let code = CodePair::new(j, 3).unwrap();
    let ops = make_spin_ops(j);
    let id = ComplexOperator::identity(j.dim());
    let ea = ops.monomial(1, 1, 0);
    let eb = ops.monomial(0, 1, 1);
    let m = &id.kron(&ea).kron(&id).adjoint() * &eb.kron(&id).kron(&id);
    let g = |x: &CVector, y: &CVector| x.dotc(&m.apply(y));
    let res = kl_check(&code, &SiteOperator { site: 1, op: ea }, &SiteOperator { site: 0, op: eb }, KL_TOL).unwrap();
    let (p, q) = (&code.logical_plus, &code.logical_minus);
    let (o1, o2) = (g(p, q), g(q, p));
    assert!((res.offdiag.norm() - o1.norm().max(o2.norm())).abs() < 1e-12);
    assert!((res.diag_gap - (g(p, p) - g(q, q))).norm() < 1e-12);
}

#[test]
fn kl_scan_nine_halves_passes_at_k4() {
    let report = kl_scan(half(9), 3, 4).unwrap();
    assert!(report.all_pass());
    assert_eq!(report.pairs_checked, 9 * 35 * 35);
    assert_eq!(report.max_passing_degree, Some(4));
}

#[test]
fn kl_scan_nine_halves_fails_at_k5() {
    let report = kl_scan(half(9), 3, 5).unwrap();
    assert!(!report.all_pass());
    assert_eq!(report.max_passing_degree, Some(4));
    assert!(report.failures.iter().all(|f| f.monomials.0.degree() + f.monomials.1.degree() > 8));
    let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    for key in ["J", "n", "K", "pairs_checked", "failures"] {
        assert!(json.get(key).is_some());
    }
}

#[test]
fn kl_scan_three_halves_max_degree_one() {
    let report = kl_scan(half(3), 3, 2).unwrap();
    assert_eq!(report.max_passing_degree, Some(1));
}

#[test]
fn kl_scan_resource_guard() {
    assert!(kl_scan_with(half(9), 5, 1, KL_TOL, 1 << 16).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn kl_monotone_in_k(tj in prop::sample::select(vec![3u32, 5, 7]), k in 0u32..=4) {
        let j = half(tj);
        let report = kl_scan(j, 3, k).unwrap();
        if report.all_pass() {
            for kp in 0..k {
                prop_assert!(kl_scan(j, 3, kp).unwrap().all_pass());
            }
        }
        // Degree bound: pairs with total degree ≤ 2J − 1 always pass.
        for f in &report.failures {
            prop_assert!(f.monomials.0.degree() + f.monomials.1.degree() > tj - 1);
        }
    }
}
