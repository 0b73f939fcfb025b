//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails or exceeds its runtime budget.

// Checks are written as `!(ok)` so a NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spincat::catcode::{kitten_qubit, kl_scan, minus, plus};
use spincat::control::*;
use spincat::gates::{su2_hadamard_overlap, swap_gadget, swap_gadget_from_cnots};
use spincat::linalg::{c, r, ComplexOperator, ONE, ZERO};
use spincat::noise::{logical_amp_phase_ratio, optical_pumping_jumps_simplified, sample_unit_vector, NoiseConfig};
use spincat::qec::{
    amp_recover_mf, amp_recover_reference, channel_distance, commute_check, optical_pumping_walkthrough,
    random_pure_state,
};
use spincat::register::{kron_vectors, RegisterState};
use spincat::spinalg::{euler_rotation, su2_rotation, Euler, SaBasis, SpinValue, TensorBasis};
use spincat::threshold::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, f64);

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn nine_halves() -> SpinValue {
    SpinValue::half(9)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `Σ_ab |Tr(A_a†A_b) − δ_ab|`
fn gram_defect(ops: &[ComplexOperator]) -> f64 {
    let mut total = 0.0;
    for (a, x) in ops.iter().enumerate() {
        for (b, y) in ops.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            total += (x.hs_inner(y) - r(target)).norm();
        }
    }
    total
}

fn algebra() -> Outcome {
    let mut worst_gram: f64 = 0.0;
    for tj in 1..=9 {
        let j = SpinValue::from_twice(tj).unwrap();
        worst_gram = worst_gram.max(gram_defect(&TensorBasis::new(j).ops));
        worst_gram = worst_gram.max(gram_defect(&SaBasis::new(j).ops));
    }
    check!(worst_gram <= 1e-12, "Gram defect {worst_gram:e}");

    let j = nine_halves();
    let basis = TensorBasis::new(j);
    let mut g = rng(1);
    let mut leakage: f64 = 0.0;
    for _ in 0..100 {
        let e = Euler::new(g.gen_range(-PI..PI), g.gen_range(0.0..PI), g.gen_range(-PI..PI));
        let u = euler_rotation(j, e);
        let ud = u.adjoint();
        for (ix, t) in basis.indices.iter().zip(&basis.ops) {
            let coeffs = basis.decompose(&(&(&u * t) * &ud)).unwrap();
            let off: f64 = (0..=j.twice()).filter(|&k| k != ix.k).map(|k| coeffs.rank_weight(k)).sum();
            leakage = leakage.max(off.sqrt());
        }
    }
    check!(leakage <= 1e-10, "off-rank leakage {leakage:e}");
    Ok(format!("Gram defect {worst_gram:.1e}, off-rank leakage {leakage:.1e}"))
}

fn code_verification() -> Outcome {
    let j = nine_halves();
    let k4 = kl_scan(j, 3, 4).unwrap();
    check!(k4.all_pass(), "K=4 has {} violations", k4.failures.len());
    let k5 = kl_scan(j, 3, 5).unwrap();
    check!(!k5.failures.is_empty(), "K=5 shows no violation");
    Ok(format!(
        "K=4: {} pairs pass; K=5: {} violations, max passing degree {:?}",
        k4.pairs_checked,
        k5.failures.len(),
        k5.max_passing_degree
    ))
}

fn gate_identities() -> Outcome {
    let j = nine_halves();
    let from_cnots = swap_gadget_from_cnots(j).unwrap();
    let closed = swap_gadget(j).unwrap();
    let dist = from_cnots.distance_up_to_phase(&closed);
    check!(dist <= 1e-10, "CNOT product vs closed form {dist:e}");

    let mut g = rng(2);
    let mut worst_swap: f64 = 0.0;
    for _ in 0..50 {
        let (k, l) = (g.gen_range(0..j.kitten_levels()), g.gen_range(0..j.kitten_levels()));
        let ab = random_pure_state(2, &mut g);
        let cd = random_pure_state(2, &mut g);
        let input = kitten_qubit(j, k, ab[0], ab[1]).unwrap().kronecker(&kitten_qubit(j, l, cd[0], cd[1]).unwrap());
        let expect = kitten_qubit(j, k, cd[0], cd[1]).unwrap().kronecker(&kitten_qubit(j, l, ab[0], ab[1]).unwrap());
        worst_swap = worst_swap.max(1.0 - expect.dotc(&closed.apply(&input)).norm_sqr());
    }
    check!(worst_swap <= 1e-12, "swap infidelity {worst_swap:e}");

    let mut g = rng(3);
    let mut overlap: f64 = 0.0;
    for _ in 0..10_000 {
        let n = sample_unit_vector(&mut g);
        let theta = g.gen_range(0.0..4.0 * PI);
        overlap = overlap.max(su2_hadamard_overlap(&su2_rotation(j, n, theta).unwrap(), j));
    }
    check!(overlap <= 0.5 + 1e-9, "Hadamard overlap {overlap}");
    Ok(format!("3-CNOT distance {dist:.1e}, swap infidelity {worst_swap:.1e}, max |<+|U|0>|^2 {overlap:.6}"))
}

fn mfqec_equivalence() -> Outcome {
    let j = nine_halves();
    let mf = |s: &RegisterState| amp_recover_mf(s, 0).map(RegisterState::into_mixed);
    let reference = |s: &RegisterState| RegisterState::mixed(s.j, 1, amp_recover_reference(&s.density(), s.j)?);
    let d = channel_distance(j, 1, &mf, &reference, 100, &mut rng(4)).unwrap();
    check!(d <= 1e-10, "channel distance {d:e}");
    let comm = commute_check(j, 3, 50, &mut rng(5)).unwrap();
    check!(comm <= 1e-9, "commutator {comm:e}");
    Ok(format!("channel distance {d:.1e}, commutator {comm:.1e} over 50 trials at n=3"))
}

fn walkthrough() -> Outcome {
    let j = nine_halves();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut worst_fid: f64 = 1.0;
    let mut worst_dist: f64 = 0.0;
    for (a, b) in [(ONE, ZERO), (r(h), r(h)), (c(0.6, 0.0), c(0.0, 0.8))] {
        for seed in 0..4 {
            let t = optical_pumping_walkthrough(j, a, b, &mut rng(seed)).unwrap();
            worst_fid = worst_fid.min(t.final_fidelity);
            let step = t.steps.iter().find(|s| s.label == "phase correction").unwrap();
            let psi = step.state.as_ref().unwrap().vector().unwrap().clone();
            let expect = kron_vectors(&[plus(j, 1), plus(j, 0), plus(j, 0)]) * a
                + kron_vectors(&[minus(j, 1), minus(j, 0), minus(j, 0)]) * b;
            let overlap = expect.dotc(&psi);
            let phase = overlap / overlap.norm();
            worst_dist = worst_dist.max((&psi - &expect * phase).norm());
        }
    }
    check!(worst_fid >= 1.0 - 1e-9, "final fidelity {worst_fid}");
    check!(worst_dist <= 1e-10, "intermediate state distance {worst_dist:e}");
    Ok(format!("final fidelity >= {worst_fid:.12}, intermediate distance {worst_dist:.1e}"))
}

fn max_gradient_error(obj: &Objective, x: &[f64]) -> f64 {
    let (_, grad) = obj.value_and_gradient(x);
    let h = 1e-6;
    (0..x.len())
        .map(|i| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let fd = (obj.value(&xp) - obj.value(&xm)) / (2.0 * h);
            (grad[i] - fd).abs() / fd.abs().max(1e-3)
        })
        .fold(0.0, f64::max)
}

fn control() -> Outcome {
    let j = nine_halves();
    let mut parts = Vec::new();
    for target in [RabiTarget::Control, RabiTarget::Target, RabiTarget::RydTransfer] {
        let model = RabiModel::new(target.layout(), j, 1.0).unwrap();
        let iso = target.isometry(&model).unwrap();
        let obj = Objective::new(vec![(&model, &iso)], 12, 4.0 * PI, Segment::default()).unwrap();
        let res = grape_optimize(&obj, &GrapeOptions::default()).unwrap();
        check!(res.fidelity >= 0.99, "{target:?} fidelity {}", res.fidelity);
        parts.push(format!("{target:?} {:.6}", res.fidelity));
    }

    let mut dual = Vec::new();
    for (name, cfg) in [
        ("N=2", DualManifoldConfig::x_two_pulse()),
        ("N=3 at T=3pi/Omega_a", DualManifoldConfig::x_three_pulse()),
        ("Z", DualManifoldConfig::z_gate()),
    ] {
        let res = dual_manifold_pulse(&cfg).unwrap();
        check!(res.joint >= 0.999, "dual {name} joint {}", res.joint);
        dual.push(format!("{name} {:.6}", res.joint));
    }
    let literal = dual_manifold_pulse(&DualManifoldConfig::x_three_pulse_literal()).unwrap();

    let mut g = rng(6);
    let ga = RabiModel::new(Layout::GroundAux, j, 1.0).unwrap();
    let vc = v_control(&ga).unwrap();
    let obj = Objective::new(vec![(&ga, &vc)], 6, 4.0, Segment::default()).unwrap();
    let x: Vec<f64> = (0..obj.n_params()).map(|_| g.gen_range(-1.5..1.5)).collect();
    let mut grad_err = max_gradient_error(&obj, &x);
    let p = RfManifoldParams::new(1.0, 3.0).unwrap();
    let aux = RfManifoldModel::auxiliary(p, j);
    let ryd = RfManifoldModel::rydberg(p, SpinValue::half(11));
    let tx = IsometryTarget::from_unitary(su2_rotation(j, [1.0, 0.0, 0.0], PI).unwrap()).unwrap();
    let ti = IsometryTarget::from_unitary(ComplexOperator::identity(12)).unwrap();
    let obj = Objective::new(vec![(&aux, &tx), (&ryd, &ti)], 6, PI, Segment::new(1.0, 0.0, 0.0)).unwrap();
    let x: Vec<f64> = (0..obj.n_params()).map(|_| g.gen_range(0.0..2.0 * PI)).collect();
    grad_err = grad_err.max(max_gradient_error(&obj, &x));
    check!(grad_err <= 1e-5, "gradient relative error {grad_err:e}");

    let xm = x_measurement_grape(j, 40, 20.0, &GrapeOptions::default()).unwrap();
    check!(xm.fidelity >= 0.99, "x-measurement fidelity {}", xm.fidelity);
    let model = XMeasurementModel::new(j, 1.0, 1.0);
    let jumps = optical_pumping_jumps_simplified(j, 0.0137, 0.2).unwrap();
    let open = lindblad_isometry_fidelity(&model, &xm.schedule, &x_measurement_map(j).unwrap(), &jumps, 0.5 / 20.0).unwrap();
    check!(open >= 0.97, "Lindblad x-measurement fidelity {open}");

    Ok(format!(
        "GRAPE [{}]; dual [{}] (literal T=3pi/Omega_rf gives {:.2e}); gradient err {grad_err:.1e}; \
         x-measurement closed {:.6}, Lindblad at Gamma*T=0.5 {open:.4}",
        parts.join(", "),
        dual.join(", "),
        literal.joint,
        xm.fidelity
    ))
}

/// Exact tail numerators of the jump count over all `3^s` patterns with
/// integer weights.
fn brute_force_tails(s: u32, w: [i64; 3]) -> Vec<BigInt> {
    let mut by_total = vec![BigInt::from(0); 2 * s as usize + 2];
    for code in 0..3u64.pow(s) {
        let mut rem = code;
        let mut weight = BigInt::from(1);
        let mut total = 0;
        for _ in 0..s {
            let g = (rem % 3) as usize;
            weight *= w[g];
            total += g;
            rem /= 3;
        }
        by_total[total] += weight;
    }
    for t in (0..by_total.len() - 1).rev() {
        by_total[t] = &by_total[t] + &by_total[t + 1].clone();
    }
    by_total
}

fn threshold() -> Outcome {
    let denom = 97i64;
    for (a, b) in [(3i64, 2i64), (20, 30)] {
        let w = [denom - a - b, a, b];
        let p1 = BigRational::new(a.into(), denom.into());
        let p2 = BigRational::new(b.into(), denom.into());
        for s in 0..=12u32 {
            let tails = brute_force_tails(s, w);
            let scale = BigInt::from(denom).pow(s);
            for k in 1..=6u32 {
                let bf = BigRational::new(tails.get(k as usize).cloned().unwrap_or_default(), scale.clone());
                check!(q_jumps_generic(s, k, p1.clone(), p2.clone()) == bf, "q_jumps s={s} k={k}");
            }
        }
    }

    let (t, c2) = eps_phase_blocks(3, 2, 0.01).unwrap();
    check!((t - 7.5e-3).abs() <= 1e-12 && (c2 - 2.43e-2).abs() <= 1e-12, "eps_phase_blocks ({t}, {c2})");
    let ec = eps_phase_ec(21, 7, 0.0054).unwrap();
    check!((ec - 40.0 * 35.0 * 0.0324f64.powi(4)).abs() <= 1e-12, "eps_phase_ec {ec}");
    check!((eps_phase_ec(3, 1, 0.01).unwrap() - 0.24).abs() <= 1e-12, "eps_phase_ec(3, 1)");
    check!(EPS_CSS == 0.67e-3, "eps_css {EPS_CSS}");

    let j = nine_halves();
    let grid = log_grid(1e-3, 2e-2, 40).unwrap();
    let start = Instant::now();
    let mut curves = Vec::new();
    for noise in [NoiseConfig::rotation(), NoiseConfig::optical()] {
        for n in [11, 15, 21] {
            let p = ThresholdParams::new(j, n, 7, 1, noise.clone()).unwrap();
            let curve = sweep(&p, &grid).unwrap();
            curves.push((p, curve));
        }
    }
    let per_model = start.elapsed().as_secs_f64() / 2.0;
    check!(per_model < 10.0, "sweep of 40 x 3 took {per_model:.2} s");
    let rot = find_crossings(&curves[2].1, &curves[2].0).unwrap();
    let be = rot.break_even.ok_or("no rotation break-even")?;
    check!((be - 0.0054).abs() <= 0.1 * 0.0054, "rotation break-even {be}");
    let opt = find_crossings(&curves[5].1, &curves[5].0).unwrap();
    let css = opt.css.ok_or("no optical CSS crossing")?;
    check!((0.002..=0.0053).contains(&css), "optical CSS crossing {css}");
    Ok(format!("q_jumps exact for s <= 12; rotation break-even {be:.6}; optical CSS {css:.6}; sweep {per_model:.3} s"))
}

fn qualitative() -> Outcome {
    let j = nine_halves();
    let p = ThresholdParams::new(j, 21, 7, 1, NoiseConfig::rotation()).unwrap();
    let share = sweep(&p, &log_grid(1e-3, 2e-2, 40).unwrap())
        .unwrap()
        .iter()
        .map(|pt| pt.amplitude_share())
        .fold(0.0, f64::max);
    check!(share < 0.01, "rotation amplitude share {share}");

    let slope = |p: &ThresholdParams| {
        let a = eps_logical(p, 1e-5).unwrap().eps_logical;
        let b = eps_logical(p, 1e-4).unwrap().eps_logical;
        (b / a).log10()
    };
    let clean = ThresholdParams::new(j, 21, 7, 1, NoiseConfig::optical()).unwrap();
    let leaky = ThresholdParams::new(j, 21, 7, 1, NoiseConfig::optical().with_leakage([1e-4; 4])).unwrap();
    let (s_clean, s_leaky) = (slope(&clean), slope(&leaky));
    check!(s_clean > 1.9 && (s_leaky - 1.0).abs() < 0.1, "low-noise slopes clean {s_clean}, leaky {s_leaky}");

    for eps in [1e-4, 1e-3, 1e-2] {
        let ratio = logical_amp_phase_ratio(SpinValue::half(3), eps);
        check!((ratio - 1.0 / 3.0).abs() < 1e-12, "J=3/2 ratio {ratio} at eps {eps}");
    }
    let ratios: Vec<f64> = [3, 5, 7, 9].iter().map(|&t| logical_amp_phase_ratio(SpinValue::half(t), 1e-3)).collect();
    check!(ratios.windows(2).all(|w| w[1] < w[0]), "ratios not decreasing: {ratios:?}");
    Ok(format!(
        "max amplitude share {share:.1e}; low-noise slope clean {s_clean:.2}, leaky {s_leaky:.2}; \
         ratios J=3/2..9/2 {:?}",
        ratios.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 algebra", algebra, 10.0),
        ("2 code verification", code_verification, 300.0),
        ("3 gate identities", gate_identities, 60.0),
        ("4 MFQEC equivalence", mfqec_equivalence, 300.0),
        ("5 optical-pumping walkthrough", walkthrough, f64::INFINITY),
        ("6 control", control, 1800.0),
        ("7 threshold", threshold, f64::INFINITY),
        ("8 qualitative trends", qualitative, f64::INFINITY),
    ];
    let mut failed = 0;
    let stdout = std::io::stdout();
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(_) if secs > budget => Err(format!("took {secs:.1} s, budget {budget} s")),
            o => o,
        };
        let line = match &outcome {
            Ok(detail) => format!("PASS criterion {name} ({secs:.1} s): {detail}"),
            Err(why) => format!("FAIL criterion {name} ({secs:.1} s): {why}"),
        };
        if outcome.is_err() {
            failed += 1;
        }
        writeln!(stdout.lock(), "{line}").unwrap();
    }
    if failed > 0 {
        writeln!(stdout.lock(), "{failed} acceptance criteria failed").unwrap();
        std::process::exit(1);
    }
}
