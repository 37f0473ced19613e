//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! A criterion listed in `DOCUMENTED` may fail; its line still reads FAIL and
//! the run only succeeds if the observed behaviour is the documented one.

use std::time::{Duration, Instant};

use hemicirc::ergohollow::{
    hollow_trajectory, pair_norm_trajectory, recurrence_certificate, CertVerdict, ErgodicVerdict, Sample,
    TrajectoryReport,
};
use hemicirc::factorize::{
    at_reduce_with, mass_invariant, nonisomorphism_witness, square_factor, tensor_collapse_iso_check, term_blocks,
    ConditionVerdict, WitnessConfig,
};
use hemicirc::hemicirc::{psi_dense, theta_dense};
use hemicirc::laurent::qpoly;
use hemicirc::powers::{
    blowup, blowup_chain, delta_conjugate, delta_identity_holds, character_norm_check, odometer, polynomial_sequence,
    power_analysis, project_to_subring, subring_bound_checks, DEFAULT_SEED,
};
use hemicirc::seqspec::{ExponentSchedule, OverlapMode, SequenceSpec, Telescoping};
use hemicirc::{CBall, Coeff, Cyclo, Dense, FiniteAbelianGroup, Hemi, HemicirculantMatrix, Poly, QPoly, Rational};
use hemicirc_cli::verify::{corpus, monotonicity_sweep};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose stated threshold is not met; see the decisions ledger.
const DOCUMENTED: &[usize] = &[3, 6];

struct Outcome {
    pass: bool,
    detail: String,
    /// For documented failures: the recorded behaviour still holds.
    documented_holds: bool,
}

fn ok(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail, documented_holds: false }
}

fn within(start: Instant, limit: Duration) -> bool {
    start.elapsed() < limit
}

fn dyadic(n: u64) -> SequenceSpec {
    SequenceSpec::circulant_half(n, ExponentSchedule::geometric(2))
}

fn random_hemi(rng: &mut ChaCha8Rng, group: &FiniteAbelianGroup) -> HemicirculantMatrix {
    let coeffs = (0..group.n())
        .map(|_| {
            QPoly::from_terms((0..rng.gen_range(1..4)).map(|_| {
                (rng.gen_range(-6i64..=6).into(), Rational::new(rng.gen_range(-9..=9), rng.gen_range(1..=7)))
            }))
        })
        .collect();
    Hemi::new(group.clone(), coeffs).unwrap()
}

fn c1() -> Outcome {
    let t = Instant::now();
    let spec = dyadic(3);
    let mut vals = Vec::new();
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        vals.push(pair_norm_trajectory(&spec, a, b, 0, 0).unwrap().samples[0].value);
    }
    let float_ok = vals.iter().all(|v| (v - 0.75).abs() < 1e-12);
    // λ₁λ₂ of (I + xP)/2 in Q(ω): (1 − x + x²)/4
    let m = spec.term_as::<Cyclo>(0).unwrap();
    let prod = m.lambda(1).unwrap().mul(&m.lambda(2).unwrap());
    let expect: Poly<Cyclo> = qpoly(&[(0, 1, 4), (1, -1, 4), (2, 1, 4)]).map_coeffs(|q| Cyclo::from_rational(q));
    let exact_ok = prod == expect && prod.exact_norm() == Some(Rational::new(3, 4));
    ok(float_ok && exact_ok && within(t, Duration::from_secs(1)), format!("pair norms {vals:?}; (1-x+x^2)/4 exact: {exact_ok}"))
}

fn c2() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let klein = FiniteAbelianGroup::new(&[2, 2]).unwrap();
    let mut exact = true;
    for _ in 0..200 {
        let m = random_hemi(&mut rng, &klein);
        let eigs = m.eigenvalues().unwrap();
        exact &= Hemi::fourier_inverse(&eigs, &klein).unwrap() == m;
    }
    let mut worst = 0.0f64;
    for n in [3u64, 5] {
        let g = FiniteAbelianGroup::cyclic(n);
        for _ in 0..200 {
            let m = random_hemi(&mut rng, &g);
            let mc: Hemi<CBall> = m.to_cball();
            let back = Hemi::fourier_inverse(&mc.eigenvalues().unwrap(), &g).unwrap();
            for i in 0..g.n() {
                worst = worst.max(back.coeff(i).sub(mc.coeff(i)).norm_bound().upper());
            }
        }
    }
    ok(
        exact && worst < 1e-9 && within(t, Duration::from_secs(5)),
        format!("Z2xZ2 exact: {exact}; Z3/Z5 worst coefficient error {worst:.2e}"),
    )
}

fn c3() -> Outcome {
    let t = Instant::now();
    let spec = dyadic(3);
    let mut lines = Vec::new();
    let mut pass = true;
    let mut documented = true;
    for j0 in [0usize, 2, 5] {
        let m = spec.window_product(j0, 9).unwrap();
        let f = square_factor(&m).unwrap();
        let err = f.factor.error.upper();
        let structural = f.spectral_agrees && f.factor.is_nonneg() && f.wv_is_trace;
        pass &= structural && err < f.literal_bound;
        // recorded: the error obeys (p² − p)ε, not (p² − p)ε/p²
        documented &= structural && err < f.proof_bound && err >= f.literal_bound;
        lines.push(format!("j0={j0}: err {err:.3e} literal {:.3e} proof {:.3e}", f.literal_bound, f.proof_bound));
    }
    let fast = within(t, Duration::from_secs(30));
    Outcome { pass: pass && fast, detail: lines.join("; "), documented_holds: documented && fast }
}

fn c4() -> Outcome {
    let d2 = hollow_trajectory(&dyadic(2), 1, 0, 20).unwrap();
    let tri = SequenceSpec::circulant_half(2, ExponentSchedule::recurrence(vec![1, 1, 1], vec![1, 1, 1]).unwrap());
    let tr = hollow_trajectory(&tri, 1, 0, 20).unwrap();
    let ones = |r: &TrajectoryReport| r.samples.iter().all(Sample::is_exactly_one);
    let pass = ones(&d2)
        && d2.certificate.as_deref() == Some("super-increasing")
        && ones(&tr)
        && tr.certificate.as_deref() == Some("parity");
    ok(pass, format!("dyadic cert {:?}, tribonacci cert {:?}, 21 samples each", d2.certificate, tr.certificate))
}

fn c5() -> Outcome {
    let t = Instant::now();
    let spec = SequenceSpec::circulant_half(2, ExponentSchedule::fibonacci());
    let sched = spec.schedule().unwrap().clone();
    let cert = recurrence_certificate(&spec, 40);
    // independent oracle: ∏ (1 − x^{F_j})/2 in exact arithmetic
    let mut acc = QPoly::one();
    let mut first_below = None;
    let mut bound_ok = true;
    let mut reached = 0;
    for n in 0..=40usize {
        let f = sched.value(n).unwrap();
        acc = acc.mul(&Poly::from_terms([(0i64.into(), Rational::new(1, 2)), (f, Rational::new(-1, 2))]));
        if acc.terms().len() > spec.support_cap() {
            break;
        }
        reached = n;
        let norm = acc.norm();
        bound_ok &= norm <= cert.window_bound(0, n);
        if first_below.is_none() && norm < Rational::new(1, 5) {
            first_below = Some(n);
            break;
        }
    }
    // the library trajectory agrees with the oracle where both exist
    let lib = hollow_trajectory(&spec, 1, 0, reached.min(18)).unwrap();
    let mut check = QPoly::one();
    let mut agree = true;
    for s in &lib.samples {
        let f = sched.value(s.d).unwrap();
        check = check.mul(&Poly::from_terms([(0i64.into(), Rational::new(1, 2)), (f, Rational::new(-1, 2))]));
        agree &= s.exact.as_ref() == Some(&check.norm());
    }
    let pass = first_below.is_some()
        && cert.verdict == CertVerdict::Hollow
        && (cert.stride, cert.b) == (3, 3)
        && bound_ok
        && agree
        && within(t, Duration::from_secs(120));
    ok(pass, format!("below 0.2 at N = {first_below:?}; certificate {:?} stride {} b {}; block bound held: {bound_ok}", cert.verdict, cert.stride, cert.b))
}

fn c6() -> Outcome {
    // normalized ‖∏_{j<k} λ₁(M_j)²‖
    let mut acc = QPoly::one();
    let mut first_below = None;
    for k in 0..12usize {
        let l1 = qpoly(&[(0, 1, 2), (1i64 << k, -1, 2)]);
        acc = acc.mul(&l1).mul(&l1);
        if first_below.is_none() && acc.norm() < Rational::new(1, 10) {
            first_below = Some(k + 1);
        }
    }
    let family: Vec<QPoly> = (0..6).map(|j| qpoly(&[(0, 1, 2), (1i64 << j, -1, 2)])).collect();
    let cfg = WitnessConfig { power: 1, epsilon: 0.1, horizon: 12, family: Some(family), ..WitnessConfig::default() };
    let w = nonisomorphism_witness(&dyadic(2), &cfg).unwrap();
    let witness = w.matrix_side.s_l;
    let lam0 = w.lambda0_side.s_l;
    let pass = first_below.is_some() && w.gap >= 0.8 && witness >= 0.9 && lam0 < 0.05;
    // recorded: the hollow drop and the λ₀ side hold; the witness side sits
    // near 2/3 (the mass bound 1 − 1/n gives 1/2 for Z₂), not at 1 − ε
    let documented = first_below.is_some() && lam0 < 0.05 && witness > 0.5 && witness < 0.9 && w.gap > 0.5;
    Outcome {
        pass,
        detail: format!(
            "squares below 0.1 at length {first_below:?}; witness side {witness:.4}, lambda0 side {lam0:.2e}, gap {:.4}",
            w.gap
        ),
        documented_holds: documented,
    }
}

fn c7() -> Outcome {
    let family: Vec<QPoly> = (1..=6).map(|i| qpoly(&[(0, 1, 2), (1i64 << (i - 1), -1, 2)])).collect();
    let z3 = term_blocks(&dyadic(3), 16).unwrap();
    let est = mass_invariant(&family, &z3, 0, 15).unwrap();
    let mut lower_ok = true;
    for (d, v) in est.per_d.iter().enumerate() {
        let bound = 1.0 - 1.0 / 3.0 - (0.5f64).powi(d as i32);
        lower_ok &= *v >= bound;
    }
    // exact check of the (1,1) entry bound for p = (1 − x)/2
    let exact_ok = est.tables[0].values.iter().all(|s| {
        let b = &Rational::new(2, 3) - &Rational::new(1, 1i64 << s.d);
        s.exact.as_ref().is_some_and(|q| *q >= b)
    });
    let odo = polynomial_sequence(qpoly(&[(0, 1, 2), (1, 1, 2)]), ExponentSchedule::geometric(2)).unwrap();
    let ob = term_blocks(&odo, 16).unwrap();
    let oe = mass_invariant(&family, &ob, 0, 15).unwrap();
    let odo_small = oe.per_d[15] < 0.05;
    ok(
        lower_ok && exact_ok && odo_small,
        format!("Z3 per-d min at d=15 {:.4} (bound {:.4}); odometer at d=15 {:.2e}", est.per_d[15], 2.0 / 3.0 - 2f64.powi(-15), oe.per_d[15]),
    )
}

fn digit_class(j: u64, a: usize, b: usize, n: u64) -> QPoly {
    let m = b - a;
    let s = 3i64.pow(a as u32);
    QPoly::from_terms((0u64..1 << m).filter(|t| (t.count_ones() as u64) % n == j).map(|t| {
        let v: i64 = (0..m).filter(|k| t >> k & 1 == 1).map(|k| 3i64.pow(k as u32)).sum();
        ((v * s).into(), Rational::one())
    }))
}

fn c8() -> Outcome {
    let spec = SequenceSpec::circulant_half(3, ExponentSchedule::geometric(3));
    let tel = Telescoping::triangular(7, OverlapMode::Standard);
    let red = at_reduce_with(&spec, &tel).unwrap();
    let cuts = tel.cuts();
    let mut pass = true;
    for i in 0..=4 {
        let target = digit_class(0, cuts[i], cuts[i + 2], 3);
        // block i has i + 1 terms: scalar 2^{−(2i+3)}
        let scaled = target.scale(&Rational::new(1, 1i64 << (2 * i + 3)));
        pass &= red.reduced[i] == scaled;
        let mass: Rational = (0..3).map(|g| red.class_poly(g, i).unwrap().eval_one()).sum();
        pass &= mass.is_one();
    }
    ok(pass, "p_i = 2^-(2i+3) P_{0,n(i),n(i+2)} for i <= 4; class masses sum to 1".into())
}

fn c9() -> Outcome {
    let t = Instant::now();
    let delta = (2..=6).all(|n| delta_identity_holds(n).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut mult = true;
    for _ in 0..100 {
        let mut rp = || {
            QPoly::from_terms((0..rng.gen_range(1..4)).map(|_| (rng.gen_range(-8i64..=8).into(), Rational::new(rng.gen_range(1..=6), 5))))
        };
        let (p, q) = (rp(), rp());
        let n = rng.gen_range(1..=6);
        mult &= blowup(&p.mul(&q), n).unwrap() == blowup(&p, n).unwrap().mul(&blowup(&q, n).unwrap()).unwrap();
    }
    // 𝔅(p_j) for the 3-odometer against the closed form
    let mut display = true;
    for j in 0..5u32 {
        let e = 3i64.pow(j);
        let p = qpoly(&[(0, 1, 3), (e, 1, 3), (2 * e, 1, 3)]);
        let b = blowup(&p, 2).unwrap();
        let diag = qpoly(&[(0, 1, 3), (e, 1, 3)]);
        display &= b.x_form.get(0, 0) == &diag
            && b.x_form.get(1, 1) == &diag
            && b.x_form.get(0, 1) == &qpoly(&[((e + 1) / 2, 1, 3)])
            && b.x_form.get(1, 0) == &qpoly(&[((e - 1) / 2, 1, 3)]);
        display &= delta_conjugate(&b).is_ok();
    }
    let dy = polynomial_sequence(qpoly(&[(0, 1, 2), (1, 1, 2)]), ExponentSchedule::geometric(2)).unwrap();
    let dyadic_not = power_analysis(&dy, 2, 12).unwrap().verdict == ErgodicVerdict::NotErgodic;
    let three = odometer(3).unwrap();
    let pa = power_analysis(&three, 2, 12).unwrap();
    let three_erg = pa.verdict == ErgodicVerdict::Ergodic && pa.consistent;
    let char_norms = character_norm_check(&three, 2, 1, 6).unwrap().certified;
    let pass = delta && mult && display && dyadic_not && three_erg && char_norms && within(t, Duration::from_secs(10));
    ok(pass, format!("delta {delta}, multiplicative {mult}, display {display}, dyadic T^2 non-ergodic {dyadic_not}, 3-odometer T^2 ergodic {three_erg}, character_norms {char_norms}"))
}

fn c10() -> Outcome {
    let t = Instant::now();
    let s = subring_bound_checks(1000, 5, DEFAULT_SEED).unwrap();
    let chain = blowup_chain(&odometer(3).unwrap(), 2, &[0, 2, 4, 6, 9], &Rational::new(1, 100)).unwrap();
    let proj = project_to_subring(&chain, 2).unwrap();
    let audit = proj.all_audits_hold && proj.pairs.iter().all(|p| p.in_subring);
    let pass = s.total_violations() == 0
        && s.near_split.applicable > 0
        && s.mass_bound_high.applicable > 0
        && s.mass_bound_low.applicable > 0
        && s.product_bound.applicable > 0
        && audit
        && within(t, Duration::from_secs(60));
    ok(
        pass,
        format!(
            "violations {}; applicable near-split {} / mass high {} / mass low {} / product {}; boundary ties {}; audit {audit}",
            s.total_violations(),
            s.near_split.applicable,
            s.mass_bound_high.applicable,
            s.mass_bound_low.applicable,
            s.product_bound.applicable,
            s.mass_bound_high.boundary_ties + s.mass_bound_low.boundary_ties
        ),
    )
}

fn c11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ 11);
    let mut ids = true;
    for orders in [&[2u64][..], &[2, 2]] {
        let g = FiniteAbelianGroup::new(orders).unwrap();
        let theta = theta_dense::<Rational>(&g);
        ids &= theta.mul(&psi_dense::<Rational>(&g)).unwrap() == Dense::identity(g.n());
        for _ in 0..100 {
            let (m, n) = (random_hemi(&mut rng, &g), random_hemi(&mut rng, &g));
            ids &= theta.mul(&m.tensor(&n).to_dense()).unwrap() == m.mul(&n).unwrap().to_dense().mul(&theta).unwrap();
        }
    }
    let mut certified = 0;
    let mut ergodic = 0;
    for (_, spec) in corpus() {
        let c = tensor_collapse_iso_check(&spec, &spec, 8).unwrap();
        if c.ergodic.iter().all(|v| *v == ErgodicVerdict::Ergodic) {
            ergodic += 1;
            certified += usize::from(c.verdict == ConditionVerdict::Certified);
        }
    }
    ok(ids && ergodic > 0 && certified == ergodic, format!("identities {ids}; certified {certified} of {ergodic} ergodic specs"))
}

fn samples_monotone(s: &[Sample]) -> bool {
    s.windows(2).all(|w| match (&w[0].exact, &w[1].exact) {
        (Some(a), Some(b)) => b <= a,
        _ => w[1].lower() <= w[0].upper(),
    })
}

fn c12() -> Outcome {
    let cfg = hemicirc_cli::RunConfig {
        pipeline: hemicirc_cli::Pipeline::Verify,
        spec_path: None,
        spec_n_path: None,
        family_path: None,
        horizon: 10,
        epsilon: "1/10".into(),
        epsilon_value: 0.1,
        power: None,
        seed: DEFAULT_SEED,
        blocks: 4,
        block_cap: 64,
        samples: 100,
    };
    let out = hemicirc_cli::run(cfg).unwrap();
    let report_ok = out.report.payload["all_pass"] == serde_json::Value::Bool(true);
    // recheck every object of the sweep from its raw samples
    let sweep = monotonicity_sweep(&corpus(), 10).unwrap();
    let traj = sweep.trajectories.iter().all(|(_, t)| samples_monotone(&t.samples) && t.non_increasing);
    let mass = sweep.mass.iter().all(|(_, m)| {
        m.estimates.iter().all(|e| e.tables.iter().all(|t| samples_monotone(&t.values)))
            && m.record.windows(2).all(|w| w[0] <= w[1])
    });
    ok(
        report_ok && traj && mass,
        format!("{} trajectories, {} mass sweeps; verify pipeline all_pass {report_ok}", sweep.trajectories.len(), sweep.mass.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("gamma(3) = 3/4", c1),
        ("spectral round-trip", c2),
        ("square factorization", c3),
        ("no-cancellation exactness", c4),
        ("Fibonacci hollowness", c5),
        ("Morse-Thue squares and witness", c6),
        ("mass-cancellation bound", c7),
        ("ternary reduction identity", c8),
        ("power construction", c9),
        ("subring bounds", c10),
        ("theta/psi identities", c11),
        ("monotonicity sweep", c12),
    ];
    let mut failed = false;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        let t = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && DOCUMENTED.contains(&n) {
            if o.documented_holds {
                " [documented deviation, observed as recorded]"
            } else {
                " [documented deviation, NOT as recorded]"
            }
        } else {
            ""
        };
        println!("criterion {n:2} {tag} {name}: {} ({:.2}s){note}", o.detail, t.elapsed().as_secs_f64());
        if !o.pass && !(DOCUMENTED.contains(&n) && o.documented_holds) {
            failed = true;
        }
    }
    if failed {
        std::process::exit(1);
    }
}
