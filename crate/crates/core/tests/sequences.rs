use hemicirc::ergohollow::{ergodicity_report, hollow_trajectory, samples_non_increasing, ErgodicVerdict, Verdict};
use hemicirc::factorize::{at_reduce_with, sector_partition, square_factor, watc_factor, LabeledSet};
use hemicirc::laurent::qpoly;
use hemicirc::seqspec::{ExponentSchedule, OverlapMode, SequenceSpec, Telescoping};
use hemicirc::{Error, Exponent, FiniteAbelianGroup, Hemi, QPoly, Rational};
use proptest::prelude::*;

fn ints(s: &ExponentSchedule, count: usize) -> Vec<i64> {
    s.values(0, count).unwrap().iter().map(|e| e.as_i64().unwrap()).collect()
}

#[test]
fn schedules_follow_their_recurrences() {
    assert_eq!(ints(&ExponentSchedule::geometric(2), 6), vec![1, 2, 4, 8, 16, 32]);
    assert_eq!(ints(&ExponentSchedule::geometric(3), 4), vec![1, 3, 9, 27]);
    let fib = ints(&ExponentSchedule::fibonacci(), 20);
    assert_eq!(&fib[..3], &[1, 2, 3]);
    assert!(fib.windows(3).all(|w| w[2] == w[0] + w[1]));
    let tri = ints(&ExponentSchedule::recurrence(vec![1, 1, 1], vec![1, 1, 1]).unwrap(), 15);
    assert!(tri.windows(4).all(|w| w[3] == w[0] + w[1] + w[2]));
    assert_eq!(ints(&ExponentSchedule::constant(5), 3), vec![5, 5, 5]);
    let big = ExponentSchedule::geometric(2).with_guard(64);
    assert!(matches!(big.value(200), Err(Error::ExponentGuard { .. })));
}

#[test]
fn terms_are_substituted_templates() {
    let spec = SequenceSpec::circulant_half(3, ExponentSchedule::fibonacci());
    let t = spec.template_matrix().unwrap().clone();
    for j in 0..8 {
        let s = ExponentSchedule::fibonacci().value(j).unwrap();
        assert_eq!(spec.term(j).unwrap(), t.substitute(&s).unwrap());
    }
    let mut acc = Hemi::identity(spec.group());
    for j in 2..6 {
        acc = acc.mul(&spec.term(j).unwrap()).unwrap();
    }
    assert_eq!(spec.range_product(2, 5).unwrap(), acc);
    assert_eq!(spec.window_product(2, 3).unwrap(), acc);
}

#[test]
fn json_round_trip_preserves_terms() {
    let g = FiniteAbelianGroup::new(&[2, 2]).unwrap();
    let t = Hemi::new(
        g,
        vec![qpoly(&[(0, 1, 4)]), qpoly(&[(1, 1, 4)]), qpoly(&[(-2, 1, 4)]), qpoly(&[(3, 1, 4)])],
    )
    .unwrap();
    let spec = SequenceSpec::template(t, ExponentSchedule::geometric(3)).unwrap().with_label("k4");
    let back = SequenceSpec::from_json(&spec.to_json()).unwrap();
    assert_eq!(back.label(), Some("k4"));
    for j in 0..6 {
        assert_eq!(back.term(j).unwrap(), spec.term(j).unwrap());
    }
}

#[test]
fn templates_must_be_stochastic_and_nonnegative() {
    let g = FiniteAbelianGroup::cyclic(2);
    let neg = Hemi::new(g.clone(), vec![qpoly(&[(0, 3, 2)]), qpoly(&[(1, -1, 2)])]).unwrap();
    assert!(SequenceSpec::template(neg, ExponentSchedule::geometric(2)).is_err());
    let zero = Hemi::new(g, vec![QPoly::zero(), QPoly::zero()]).unwrap();
    assert!(SequenceSpec::template(zero, ExponentSchedule::geometric(2)).is_err());
}

#[test]
fn telescoping_validation() {
    assert!(matches!(Telescoping::new(vec![0, 3, 3], OverlapMode::Standard), Err(Error::NonIncreasingCuts)));
    let t = Telescoping::triangular(4, OverlapMode::Standard);
    assert_eq!(t.cuts(), &[0, 1, 3, 6, 10]);
    assert_eq!(t.block(2).unwrap(), (3, 5));
    assert_eq!(t.with_mode(OverlapMode::BothEnds).block(2).unwrap(), (3, 6));
}

#[test]
fn identity_template_is_not_ergodic() {
    let g = FiniteAbelianGroup::cyclic(2);
    let spec = SequenceSpec::template(Hemi::identity(&g), ExponentSchedule::geometric(2)).unwrap();
    let r = ergodicity_report(&spec, 10).unwrap();
    assert_eq!(r.verdict, ErgodicVerdict::NotErgodic);
    let t = hollow_trajectory(&spec, 1, 0, 6).unwrap();
    assert!(t.samples.iter().all(|s| s.is_exactly_one()));
}

#[test]
fn dyadic_circulants_are_ergodic() {
    for n in [2u64, 3, 5] {
        let spec = SequenceSpec::circulant_half(n, ExponentSchedule::geometric(2));
        let r = ergodicity_report(&spec, 12).unwrap();
        assert_eq!(r.verdict, ErgodicVerdict::Ergodic, "n = {n}");
        // each term puts mass 1/2 off the identity
        assert!(r.subgroup_sums.iter().all(|s| s.partial_sum >= Rational::new(12, 2)));
    }
}

#[test]
fn z3_stuck_and_fibonacci_decays() {
    // super-increasing exponents keep every Z3 norm at exactly 1
    let z3 = SequenceSpec::circulant_half(3, ExponentSchedule::geometric(2));
    let t = hollow_trajectory(&z3, 1, 0, 8).unwrap();
    assert_eq!(t.verdict, Verdict::StuckAtOneCertified);
    // Fibonacci exponents over Z2 cancel
    let fib = SequenceSpec::circulant_half(2, ExponentSchedule::fibonacci());
    let t = hollow_trajectory(&fib, 1, 0, 14).unwrap();
    assert!(t.non_increasing);
    assert!(t.last().unwrap().upper() < 0.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hollow_trajectories_are_non_increasing(n in 2u64..5, base in 2i64..4, j0 in 0usize..3) {
        let spec = SequenceSpec::circulant_half(n, ExponentSchedule::geometric(base));
        for a in 1..n as usize {
            let t = hollow_trajectory(&spec, a, j0, 7).unwrap();
            prop_assert!(samples_non_increasing(&t.samples));
            prop_assert!(t.samples.iter().all(|s| s.lower() <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn square_factor_spectral_identity(w in prop::collection::vec(1i64..6, 3), e in prop::collection::vec(-3i64..4, 3)) {
        let total: i64 = w.iter().sum();
        let g = FiniteAbelianGroup::cyclic(3);
        let coeffs = w.iter().zip(&e).map(|(&c, &x)| QPoly::monomial(Exponent::from(x), Rational::new(c, total))).collect();
        let m = Hemi::new(g, coeffs).unwrap();
        let sf = square_factor(&m).unwrap();
        prop_assert!(sf.spectral_agrees);
        prop_assert!(sf.wv_is_trace);
        prop_assert!(sf.factor.is_nonneg());
        // trace of M² from the dense square
        let sq = m.to_dense().mul(&m.to_dense()).unwrap();
        let tr = (0..3).fold(QPoly::zero(), |s, i| s.add(sq.get(i, i)));
        prop_assert_eq!(&sf.factor.wv, &tr);
    }

    #[test]
    fn sectors_separate_labels(sizes in prop::collection::vec(1usize..4, 6)) {
        let n = 3;
        let mut fam = Vec::new();
        let mut next = 0;
        let labels = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];
        for (&(k, l), &s) in labels.iter().zip(&sizes) {
            fam.push(LabeledSet { k, l, members: (next..next + s).collect() });
            next += s;
        }
        let u = sector_partition(&fam, n).unwrap();
        for z in &fam {
            for j in &z.members {
                prop_assert!(u[z.k].contains(j));
                prop_assert!(!u[z.l].contains(j));
            }
        }
    }
}

#[test]
fn overlapping_sets_rejected() {
    let fam = vec![
        LabeledSet { k: 0, l: 1, members: vec![0, 1] },
        LabeledSet { k: 1, l: 0, members: vec![1, 2] },
    ];
    assert!(matches!(sector_partition(&fam, 2), Err(Error::OverlappingSets(1))));
}

#[test]
fn at_reduction_masses() {
    let spec = SequenceSpec::circulant_half(3, ExponentSchedule::geometric(2));
    let tel = Telescoping::triangular(4, OverlapMode::Standard);
    let red = at_reduce_with(&spec, &tel).unwrap();
    assert_eq!(red.len(), 3);
    for i in 0..red.len() {
        assert_eq!(red.total_mass[i], Rational::one());
        let sum = (0..3).fold(Rational::zero(), |s, g| &s + &red.class_poly(g, i).unwrap().eval_one());
        assert_eq!(sum, Rational::one());
        assert_eq!(red.identity_mass[i], red.reduced[i].eval_one());
    }
}

#[test]
fn watc_on_morse_thue() {
    let spec = SequenceSpec::circulant_half(2, ExponentSchedule::geometric(2));
    let r = watc_factor(&spec, 0, 0.1, 64).unwrap();
    assert!(r.certified);
    assert!(r.wv_is_trace);
    assert!(r.factor.error.upper() < 0.1);
    assert_eq!(r.sub_blocks.len(), 2);
    assert!(matches!(watc_factor(&spec, 0, 1e-9, 4), Err(Error::WindowCap(4))));
}
