use hemicirc::ergohollow::ErgodicVerdict;
use hemicirc::laurent::qpoly;
use hemicirc::powers::*;
use hemicirc::seqspec::ExponentSchedule;
use hemicirc::{Error, QPoly, Rational};
use proptest::prelude::*;

fn dyadic_t() -> hemicirc::seqspec::SequenceSpec {
    polynomial_sequence(qpoly(&[(0, 1, 2), (1, 1, 2)]), ExponentSchedule::geometric(2)).unwrap()
}

#[test]
fn dyadic_square_is_not_ergodic() {
    let r = power_analysis(&dyadic_t(), 2, 12).unwrap();
    assert_eq!(r.verdict, ErgodicVerdict::NotErgodic);
    assert!(r.consistent);
    assert_eq!(r.odd_infinitely_often, Some(false));
    // 𝔅(p_j) is diagonal for j ≥ 1: X^{2^{j−1}} on the diagonal
    let b = blowup(&qpoly(&[(0, 1, 2), (8, 1, 2)]), 2).unwrap();
    assert_eq!(b.x_form.get(0, 0), &qpoly(&[(0, 1, 2), (4, 1, 2)]));
    assert!(b.x_form.get(1, 0).is_zero() && b.x_form.get(0, 1).is_zero());
}

#[test]
fn odometer_odd_powers_are_ergodic() {
    for n in [3u64, 5, 7] {
        let r = power_analysis(&dyadic_t(), n, 16).unwrap();
        assert_eq!(r.verdict, ErgodicVerdict::Ergodic, "n = {n}");
        assert!(r.consistent);
    }
}

#[test]
fn three_odometer_square() {
    let t = odometer(3).unwrap();
    let r = power_analysis(&t, 2, 10).unwrap();
    assert_eq!(r.verdict, ErgodicVerdict::Ergodic);
    assert!(r.consistent);
    assert_eq!(r.odd_infinitely_often, Some(true));
    let l = character_norm_check(&t, 2, 1, 5).unwrap();
    assert!(l.certified);
    assert_eq!(l.characters.len(), 2);
    let l3 = character_norm_check(&t, 2, 3, 3).unwrap();
    assert!(l3.certified);
}

#[test]
fn character_norms_refuse_non_ergodic() {
    assert!(matches!(character_norm_check(&dyadic_t(), 2, 1, 4), Err(Error::NotErgodic(_))));
}

#[test]
fn character_norms_cyclotomic_path() {
    // 2 is a primitive root mod 5, so the dyadic fifth power is ergodic
    let l = character_norm_check(&dyadic_t(), 5, 1, 4).unwrap();
    assert!(l.certified);
    assert_eq!(l.characters.len(), 5);
}

#[test]
fn power_rejects_bad_input() {
    assert!(power_analysis(&dyadic_t(), 0, 4).is_err());
    let z2 = hemicirc::seqspec::SequenceSpec::circulant_half(2, ExponentSchedule::geometric(2));
    assert!(power_analysis(&z2, 2, 4).is_err());
    assert!(matches!(blowup(&qpoly(&[(0, -1, 1)]), 2), Err(Error::NegativeCoefficient)));
}

#[test]
fn delta_conjugate_rejects_non_blowup() {
    let mut b = blowup(&qpoly(&[(0, 1, 2), (1, 1, 2)]), 2).unwrap();
    b.x_form.set(1, 1, QPoly::zero());
    assert!(matches!(delta_conjugate(&b), Err(Error::NotBlowup(_))));
}

#[test]
fn three_odometer_projection_chain() {
    let t = odometer(3).unwrap();
    let chain = blowup_chain(&t, 2, &[0, 2, 4, 7], &Rational::new(1, 100)).unwrap();
    let rep = project_to_subring(&chain, 2).unwrap();
    assert!(rep.all_audits_hold);
    for (p, orig) in rep.pairs.iter().zip(&chain) {
        assert!(p.in_subring);
        assert!(p.strip_non_increasing);
        // the monomial offsets cancel, so the error is that of the unperturbed factors
        assert!(p.stripped_error <= p.epsilon);
        assert!(orig.v.entries().iter().any(|e| !e.in_subring(2)) || p.zeroed == 0);
    }
    // reduced 1×1 sequence W'_i V'_{i+1} lies in B with mass |H|·(row mass)
    for w in rep.pairs.windows(2) {
        let r = w[0].w.mul(&w[1].v).unwrap();
        assert!(r.get(0, 0).in_subring(2));
        assert_eq!(r.get(0, 0).eval_one(), Rational::one());
    }
}

#[test]
fn projection_zeroes_ties() {
    use hemicirc::Dense;
    let mut v = Dense::zeros(1, 1);
    v.set(0, 0, qpoly(&[(0, 1, 2), (1, 1, 2)]));
    let mut w = Dense::zeros(1, 1);
    w.set(0, 0, QPoly::one());
    let mut target = Dense::zeros(1, 1);
    target.set(0, 0, QPoly::one());
    let rep = project_to_subring(&[FactorPair { v, w, target }], 2).unwrap();
    assert_eq!(rep.pairs[0].zeroed, 1);
}

#[test]
fn subring_lemmas_hold() {
    let s = subring_bound_checks(300, 5, 7).unwrap();
    assert_eq!(s.total_violations(), 0, "{s:?}");
    assert!(s.mass_bound_high.applicable > 0 && s.mass_bound_low.applicable > 0 && s.product_bound.applicable > 0);
    assert_eq!(subring_bound_checks(50, 4, 11).unwrap(), subring_bound_checks(50, 4, 11).unwrap());
}

fn small_poly() -> impl Strategy<Value = QPoly> {
    prop::collection::vec((-6i64..=6, 1i64..=5), 1..4)
        .prop_map(|t| QPoly::from_terms(t.into_iter().map(|(e, c)| (e.into(), Rational::from_integer(c)))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn blowup_is_a_ring_map(p in small_poly(), q in small_poly(), n in 1u64..5) {
        let bp = blowup(&p, n).unwrap();
        let bq = blowup(&q, n).unwrap();
        prop_assert_eq!(blowup(&p.mul(&q), n).unwrap(), bp.mul(&bq).unwrap());
        let sum = blowup(&p.add(&q), n).unwrap();
        prop_assert_eq!(sum.x_form, bp.x_form.add(&bq.x_form).unwrap());
    }

    #[test]
    fn conjugate_is_circulant_of(p in small_poly(), n in 1u64..5) {
        prop_assert_eq!(delta_conjugate(&blowup(&p, n).unwrap()).unwrap(), circulant_of(&p, n));
    }
}
