use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spincat::catcode::{kitten_projector, kitten_qubit, minus, plus, CodePair};
use spincat::linalg::{c, r, CMatrix, ComplexOperator, C64, ONE, ZERO};
use spincat::noise::{completeness_defect, superoperator_from_kraus};
use spincat::qec::*;
use spincat::register::{trace_distance, trace_distance_psd, RegisterState};
use spincat::spinalg::{SaBasis, SpinValue};

fn nine_halves() -> SpinValue {
    SpinValue::half(9)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn measure_x_examples() {
    let j = nine_halves();
    let s = RegisterState::pure(j, 1, plus(j, 2)).unwrap();
    let branches = measure_x_branches(&s, 0).unwrap();
    assert_eq!(branches.len(), 1);
    assert_eq!(branches[0].0, XOutcome::Plus);
    assert!((branches[0].1 - 1.0).abs() < 1e-12);

    let zero = RegisterState::pure(j, 1, kitten_qubit(j, 0, ONE, ZERO).unwrap()).unwrap();
    let branches = measure_x_branches(&zero, 0).unwrap();
    assert_eq!(branches.len(), 2);
    for (o, p, post) in &branches {
        assert!((p - 0.5).abs() < 1e-12);
        let target = if *o == XOutcome::Plus { plus(j, 0) } else { minus(j, 0) };
        assert!(1.0 - post.fidelity_with(&target) < 1e-12);
    }

    let prod = RegisterState::product(j, &[minus(j, 0), plus(j, 0), plus(j, 0)]).unwrap();
    let (o, post) = measure_x(&prod, 0, 0.0, &mut rng(1)).unwrap();
    assert_eq!(o, XOutcome::Minus);
    assert_eq!(post.n, 3);
}

#[test]
fn measure_x_flip_probability_one_inverts_reports() {
    let j = SpinValue::half(3);
    let s = RegisterState::pure(j, 1, plus(j, 1)).unwrap();
    let (o, _) = measure_x(&s, 0, 1.0, &mut rng(2)).unwrap();
    assert_eq!(o, XOutcome::Minus);
}

#[test]
fn syndrome_examples() {
    let j = nine_halves();
    let p = plus(j, 0);
    let m = minus(j, 0);
    let cases = [
        (vec![p.clone(), p.clone(), p.clone()], vec![1, 1]),
        (vec![m.clone(), p.clone(), p.clone()], vec![-1, 1]),
        (vec![p.clone(), m.clone(), p.clone()], vec![-1, -1]),
        (vec![p.clone(), p.clone(), m.clone()], vec![1, -1]),
    ];
    for (sites, expect) in cases {
        let s = RegisterState::product(j, &sites).unwrap();
        let (rec, _) = phase_syndromes(&s, 0, 0.0, &mut rng(3)).unwrap();
        assert_eq!(rec.bits, expect);
    }
}

#[test]
fn decoder_examples() {
    assert_eq!(decode(&[-1, 1]), vec![0]);
    assert_eq!(decode(&[-1, -1]), vec![1]);
    assert_eq!(decode(&[1, -1]), vec![2]);
    assert!(decode(&[1, 1]).is_empty());
    // Five sites, flips on sites 1 and 2.
    assert_eq!(decode(&[-1, 1, -1, 1]), vec![1, 2]);
    let records = vec![
        SyndromeRecord { bits: vec![-1, 1], round: 0 },
        SyndromeRecord { bits: vec![1, 1], round: 1 },
        SyndromeRecord { bits: vec![-1, 1], round: 2 },
    ];
    assert_eq!(majority(&records).unwrap(), vec![-1, 1]);
}

#[test]
fn phase_correct_applies_z_on_decoded_site() {
    let j = nine_halves();
    let s = RegisterState::product(j, &[minus(j, 0), plus(j, 0), plus(j, 0)]).unwrap();
    let rec = vec![SyndromeRecord { bits: vec![-1, 1], round: 0 }];
    let out = phase_correct(&s, &rec).unwrap();
    let expect = spincat::register::kron_vectors(&[plus(j, 0), plus(j, 0), plus(j, 0)]);
    assert!(1.0 - out.fidelity_with(&expect) < 1e-12);
    let trivial = vec![SyndromeRecord { bits: vec![1, 1], round: 0 }];
    let same = phase_correct(&s, &trivial).unwrap();
    assert_eq!(same.vector().unwrap(), s.vector().unwrap());
}

#[test]
fn mf_recovery_examples() {
    let j = nine_halves();
    let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
    let data = &plus(j, 1) * a + &minus(j, 1) * b;
    let s = RegisterState::pure(j, 1, data).unwrap();
    let out = amp_recover_mf(&s, 0).unwrap();
    let expect = &plus(j, 0) * a + &minus(j, 0) * b;
    assert!(1.0 - out.fidelity_with(&expect) > -1e-12);
    assert!(1.0 - out.fidelity_with(&expect) < 1e-10);
    let circuit = amp_recover_mf_circuit(&s, 0).unwrap();
    assert!(1.0 - circuit.fidelity_with(&expect) < 1e-10);

    let clean = RegisterState::pure(j, 1, expect.clone()).unwrap();
    let same = amp_recover_mf(&clean, 0).unwrap();
    assert!(1.0 - same.fidelity_with(&expect) < 1e-10);
}

#[test]
fn mf_kraus_is_trace_preserving_and_idempotent() {
    for j in [SpinValue::half(3), nine_halves()] {
        let k = mf_kraus(j, &[1.0]).unwrap();
        assert!(completeness_defect(&k) < 1e-10);
        let s = superoperator_from_kraus(&k);
        assert!((&s * &s - &s).norm() < 1e-10);
        let leaky = mf_kraus(j, &[0.9, 0.1]).unwrap();
        assert!(completeness_defect(&leaky) < 1e-10);
    }
    assert!(mf_kraus(SpinValue::half(3), &[0.9, 0.05, 0.05]).is_err());
}

#[test]
fn mf_recovery_with_leaky_ancilla_lands_on_ancilla_levels() {
    let j = nine_halves();
    let s = RegisterState::pure(j, 1, plus(j, 2)).unwrap();
    let out = amp_recover_mf_with(&s, 0, &[0.7, 0.2, 0.1]).unwrap();
    for (l, w) in [0.7, 0.2, 0.1, 0.0, 0.0].iter().enumerate() {
        let p = out.expectation(&kitten_projector(j, l).unwrap(), &[0]).unwrap().re;
        assert!((p - w).abs() < 1e-12, "level {l}: {p}");
    }
}

#[test]
fn reference_channel_examples() {
    let j = nine_halves();
    let p3 = plus(j, 3);
    let rho = &p3 * p3.adjoint();
    let out = amp_recover_reference(&rho, j).unwrap();
    let p0 = plus(j, 0);
    assert!((out - &p0 * p0.adjoint()).norm() < 1e-12);

    let mix = (&plus(j, 1) + &minus(j, 2)) * r(std::f64::consts::FRAC_1_SQRT_2);
    let rho = &mix * mix.adjoint();
    let out = amp_recover_reference(&rho, j).unwrap();
    let expect = (&p0 * p0.adjoint() + minus(j, 0) * minus(j, 0).adjoint()) * r(0.5);
    assert!((out - expect).norm() < 1e-12);
}

#[test]
fn kitten_projectors_partition_identity() {
    let j = nine_halves();
    let ps: Vec<ComplexOperator> = (0..j.kitten_levels()).map(|l| kitten_projector(j, l).unwrap()).collect();
    let mut sum = ComplexOperator::zeros(j.dim());
    for p in &ps {
        sum += p;
    }
    assert!((&sum - &ComplexOperator::identity(j.dim())).frobenius_norm() < 1e-12);
    for (a, pa) in ps.iter().enumerate() {
        for (b, pb) in ps.iter().enumerate() {
            let prod = pa * pb;
            let expect = if a == b { pa.clone() } else { ComplexOperator::zeros(j.dim()) };
            assert!((&prod - &expect).frobenius_norm() < 1e-12);
        }
    }
}

fn mf_channel(s: &RegisterState) -> spincat::error::Result<RegisterState> {
    amp_recover_mf(s, 0).map(RegisterState::into_mixed)
}

fn ref_channel(s: &RegisterState) -> spincat::error::Result<RegisterState> {
    RegisterState::mixed(s.j, 1, amp_recover_reference(&s.density(), s.j)?)
}

#[test]
fn mf_equals_reference_channel() {
    let j = nine_halves();
    let d = channel_distance(j, 1, &mf_channel, &ref_channel, 100, &mut rng(4)).unwrap();
    assert!(d <= 1e-10, "{d}");
    // Superoperator comparison as a second route.
    let a = superoperator_from_kraus(&mf_kraus(j, &[1.0]).unwrap());
    let b = superoperator_from_kraus(&reference_kraus(j).unwrap());
    assert!((a - b).norm() < 1e-10);
}

#[test]
fn channel_distance_examples() {
    let j = SpinValue::half(3);
    let id = |s: &RegisterState| Ok(s.clone());
    let dep = |s: &RegisterState| depolarize(s, 0.1);
    assert_eq!(channel_distance(j, 1, &id, &id, 10, &mut rng(5)).unwrap(), 0.0);
    let d = channel_distance(j, 1, &dep, &id, 10, &mut rng(5)).unwrap();
    // Pure input: ½‖p(I/D − ψψ†)‖₁ = p(1 − 1/D).
    assert!((d - 0.1 * (1.0 - 0.25)).abs() < 1e-12);
    assert!(d > 0.01);
}

#[test]
fn trace_distance_support_restriction_matches_full() {
    let mut g = rng(6);
    let a = random_pure_state(4, &mut g);
    let b = random_pure_state(4, &mut g);
    let embed = |v: &spincat::linalg::CVector| {
        let mut m = CMatrix::zeros(8, 8);
        let p = v * v.adjoint();
        m.view_mut((0, 0), (4, 4)).copy_from(&p);
        m
    };
    let (ra, rb) = (embed(&a), embed(&b));
    assert!((trace_distance(&ra, &rb) - trace_distance_psd(&ra, &rb)).abs() < 1e-12);
}

fn branch_mixture(state: &RegisterState) -> CMatrix {
    // Every syndrome branch of the ancilla circuit, weighted and corrected.
    let mut out = CMatrix::zeros(state.dim(), state.dim());
    let n = state.n;
    for pattern in 0..(1usize << (n - 1)) {
        let mut s = state.clone();
        let mut bits = Vec::new();
        let mut weight = 1.0;
        for i in 0..n - 1 {
            let want = if pattern >> i & 1 == 1 { XOutcome::Minus } else { XOutcome::Plus };
            let anc = s.n;
            let cn = spincat::gates::cnot(s.j).unwrap();
            let t = s.append(&[plus(s.j, 0)]).unwrap().apply(&cn, &[anc, i]).unwrap().apply(&cn, &[anc, i + 1]).unwrap();
            let (p, post) = readout_x(&t, anc, want).unwrap();
            weight *= p;
            match post {
                Some(post) => s = post,
                None => {
                    weight = 0.0;
                    break;
                }
            }
            bits.push(want.value());
        }
        if weight == 0.0 {
            continue;
        }
        let fixed = phase_correct(&s, &[SyndromeRecord { bits, round: 0 }]).unwrap();
        out += fixed.density() * r(weight);
    }
    out
}

#[test]
fn phase_channel_matches_ancilla_circuit() {
    let j = SpinValue::half(3);
    let code = CodePair::new(j, 3).unwrap();
    let mut g = rng(8);
    for _ in 0..5 {
        let ab = random_pure_state(2, &mut g);
        let e = random_correctable_error(j, &mut g);
        let s = RegisterState::pure(j, 3, code.logical(ab[0], ab[1])).unwrap().apply(&e, &[1]).unwrap();
        let v = s.vector().unwrap();
        let s = RegisterState::pure(j, 3, v / C64::new(v.norm(), 0.0)).unwrap();
        let channel = phase_recovery_channel(&s).unwrap().density();
        let circuit = branch_mixture(&s);
        assert!((channel - circuit).norm() < 1e-10);
    }
}

#[test]
fn single_correctable_errors_are_corrected() {
    let j = SpinValue::half(5);
    let code = CodePair::new(j, 3).unwrap();
    let basis = SaBasis::new(j);
    let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
    let psi = code.logical(a, b);
    for site in 0..3 {
        for (ix, e) in basis.indices.iter().zip(&basis.ops) {
            if ix.k > j.max_level() as u32 {
                continue;
            }
            let s = RegisterState::pure(j, 3, psi.clone()).unwrap().apply(e, &[site]).unwrap();
            let v = s.vector().unwrap();
            if v.norm() < 1e-12 {
                continue;
            }
            let s = RegisterState::pure(j, 3, v / C64::new(v.norm(), 0.0)).unwrap();
            let out = amp_recovery_channel(&phase_recovery_channel(&s).unwrap()).unwrap();
            let f = out.fidelity_with(&psi);
            assert!(f >= 1.0 - 1e-9, "site {site}, {ix:?}: fidelity {f}");
        }
    }
}

#[test]
fn recoveries_commute() {
    let j = SpinValue::half(5);
    let mut g = rng(9);
    assert!(commute_check_with(j, 3, 3, CommuteErrors::None, &mut g).unwrap() < 1e-12);
    assert!(commute_check_with(j, 3, 5, CommuteErrors::PhaseFlip, &mut g).unwrap() < 1e-10);
    assert!(commute_check(j, 3, 5, &mut g).unwrap() < 1e-9);
    assert!(commute_check_with(j, 3, 3, CommuteErrors::OpticalPumping, &mut g).unwrap() < 1e-9);
}

#[test]
fn commute_check_guards_register_size() {
    let j = nine_halves();
    assert!(commute_check(j, 5, 1, &mut rng(1)).is_err());
}

#[test]
fn walkthrough_recovers_logical_state() {
    let j = nine_halves();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (a, b) in [(ONE, ZERO), (r(h), r(h)), (c(0.6, 0.0), c(0.0, 0.8))] {
        for seed in 0..4 {
            let t = optical_pumping_walkthrough(j, a, b, &mut rng(seed)).unwrap();
            assert!(t.final_fidelity >= 1.0 - 1e-9, "{}", t.final_fidelity);
            let after = t.steps.iter().find(|s| s.label == "phase correction").unwrap();
            let expect = spincat::register::kron_vectors(&[plus(j, 1), plus(j, 0), plus(j, 0)]) * a
                + spincat::register::kron_vectors(&[minus(j, 1), minus(j, 0), minus(j, 0)]) * b;
            let f = after.state.as_ref().unwrap().fidelity_with(&expect);
            assert!(1.0 - f < 1e-10, "phase-corrected fidelity {f}");
        }
    }
    let t = optical_pumping_walkthrough(j, ONE, ZERO, &mut rng(0)).unwrap();
    let json = t.to_json().unwrap();
    assert!(json.contains("\"label\": \"phase syndromes\""));
    let last = &t.steps.last().unwrap().summary;
    assert!((last.logical_bloch[2] - 1.0).abs() < 1e-9);
}
