//! Powers of transformations: the companion blow-up 𝔅(p) = p(Q) over
//! B = R[X^{±1}] with X = xⁿ, Δ-conjugation to circulant form, ergodicity of
//! powers, and the subring projection with its bound audits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chargroup::{FiniteAbelianGroup, DEFAULT_ENUMERATION_CAP};
use crate::ergohollow::{ergodicity_report, ErgodicVerdict, ErgodicityReport, Sample, SumVerdict};
use crate::error::{Error, Result};
use crate::hemicirc::{Dense, DenseMatrix, Hemi, HemicirculantMatrix};
use crate::laurent::{Poly, QPoly};
use crate::num::{Coeff, Cyclo, Exponent, Rational};
use crate::seqspec::{ExponentSchedule, ScheduleKind, SequenceSpec};

/// Default seed for the randomized subring audits.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Element of B: a polynomial in X, read in A through X = xⁿ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BPoly {
    pub modulus: u64,
    pub x_form: QPoly,
}

impl BPoly {
    pub fn new(modulus: u64, x_form: QPoly) -> Self {
        BPoly { modulus, x_form }
    }

    /// a ∈ A as an element of B, when every exponent is a multiple of n.
    pub fn from_a(modulus: u64, a: &QPoly) -> Result<Self> {
        if !a.in_subring(modulus) {
            return Err(Error::InvalidArgument(format!("polynomial is not in x^{modulus}Z")));
        }
        let terms = a.terms().iter().map(|(e, c)| (e.div_floor(modulus), c.clone()));
        Ok(BPoly { modulus, x_form: Poly::from_terms(terms) })
    }

    pub fn to_a(&self) -> QPoly {
        self.x_form.substitute(&Exponent::from(self.modulus)).expect("positive modulus")
    }
}

/// Matrix over B, stored in X.
#[derive(Clone, Debug, PartialEq)]
pub struct BMatrix {
    pub modulus: u64,
    pub x_form: DenseMatrix,
}

impl BMatrix {
    pub fn to_a(&self) -> DenseMatrix {
        let n = Exponent::from(self.modulus);
        self.x_form.map_entries(|p| p.substitute(&n).expect("positive modulus"))
    }

    pub fn mul(&self, o: &BMatrix) -> Result<BMatrix> {
        if self.modulus != o.modulus {
            return Err(Error::InvalidArgument("blow-ups with different powers".into()));
        }
        Ok(BMatrix { modulus: self.modulus, x_form: self.x_form.mul(&o.x_form)? })
    }

    pub fn entry(&self, r: usize, c: usize) -> BPoly {
        BPoly::new(self.modulus, self.x_form.get(r, c).clone())
    }
}

fn check_modulus(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("the power must be at least 1".into()));
    }
    Ok(())
}

/// Companion matrix of Zⁿ − X: ones below the diagonal, X in the top-right corner.
pub fn companion(n: u64) -> Result<BMatrix> {
    check_modulus(n)?;
    blowup(&QPoly::x_pow(1i64), n)
}

/// 𝔅(p) = p(Q); Q^e e_c = X^{⌊(c+e)/n⌋} e_{(c+e) mod n}.
pub fn blowup(p: &QPoly, n: u64) -> Result<BMatrix> {
    check_modulus(n)?;
    if !p.is_nonneg() {
        return Err(Error::NegativeCoefficient);
    }
    let size = n as usize;
    let mut d = Dense::zeros(size, size);
    for c in 0..size {
        for (e, coef) in p.terms() {
            let s = e + &Exponent::from(c as i64);
            let r = s.rem_euclid(n) as usize;
            let term = Poly::monomial(s.div_floor(n), coef.clone());
            let cur = d.get(r, c).add(&term);
            d.set(r, c, cur);
        }
    }
    Ok(BMatrix { modulus: n, x_form: d })
}

/// Entrywise blow-up of a matrix over A^+.
pub fn blowup_matrix(m: &DenseMatrix, n: u64) -> Result<BMatrix> {
    check_modulus(n)?;
    let (rows, cols) = m.shape();
    let k = n as usize;
    let mut d = Dense::zeros(rows * k, cols * k);
    for r in 0..rows {
        for c in 0..cols {
            let b = blowup(m.get(r, c), n)?;
            for i in 0..k {
                for j in 0..k {
                    d.set(r * k + i, c * k + j, b.x_form.get(i, j).clone());
                }
            }
        }
    }
    Ok(BMatrix { modulus: n, x_form: d })
}

/// p(xP) over Z_n: the exponent e contributes p_e·x^e to the class e mod n.
pub fn circulant_of(p: &QPoly, n: u64) -> HemicirculantMatrix {
    let group = FiniteAbelianGroup::cyclic(n);
    let mut coeffs = vec![QPoly::zero(); n as usize];
    for (e, c) in p.terms() {
        let r = e.rem_euclid(n) as usize;
        coeffs[r] = coeffs[r].add(&Poly::monomial(e.clone(), c.clone()));
    }
    Hemi::new(group, coeffs).expect("n coefficients")
}

/// Δ = diag(1, x, …, x^{n−1}) and its inverse.
fn delta(n: usize) -> (DenseMatrix, DenseMatrix) {
    let mut d = Dense::zeros(n, n);
    let mut di = Dense::zeros(n, n);
    for i in 0..n {
        d.set(i, i, QPoly::x_pow(i as i64));
        di.set(i, i, QPoly::x_pow(-(i as i64)));
    }
    (d, di)
}

/// ΔQΔ⁻¹ = xP, checked by dense multiplication.
pub fn delta_identity_holds(n: u64) -> Result<bool> {
    let q = companion(n)?.to_a();
    let (d, di) = delta(n as usize);
    let lhs = d.mul(&q)?.mul(&di)?;
    let p = HemicirculantMatrix::cyclic_shift(n).scale_poly(&QPoly::x_pow(1i64));
    Ok(lhs == p.to_dense())
}

/// Δ𝔅(p)Δ⁻¹ = p(xP) as a circulant over A. Analysis device only: the
/// conjugation is not implementable over B.
pub fn delta_conjugate(b: &BMatrix) -> Result<HemicirculantMatrix> {
    let n = b.modulus;
    let k = n as usize;
    if b.x_form.shape() != (k, k) {
        return Err(Error::NotBlowup(format!("expected a {k}x{k} matrix")));
    }
    let a = b.to_a();
    let (d, di) = delta(k);
    let conj = d.mul(&a)?.mul(&di)?;
    let group = FiniteAbelianGroup::cyclic(n);
    let coeffs: Vec<QPoly> = (0..k).map(|g| conj.get(g, 0).clone()).collect();
    for (g, q) in coeffs.iter().enumerate() {
        if q.terms().iter().any(|(e, _)| e.rem_euclid(n) as usize != g) {
            return Err(Error::NotBlowup(format!("entry ({g}, 0) mixes residue classes")));
        }
    }
    let h = Hemi::new(group, coeffs)?;
    if h.to_dense() != conj {
        return Err(Error::NotBlowup("conjugate is not circulant".into()));
    }
    Ok(h)
}

/// Spec over the trivial group with terms p(x^{g(j)}).
pub fn polynomial_sequence(p: QPoly, schedule: ExponentSchedule) -> Result<SequenceSpec> {
    let g = FiniteAbelianGroup::cyclic(1);
    SequenceSpec::template(Hemi::new(g, vec![p])?, schedule)
}

/// The k-odometer (1 + x^{k^j} + … + x^{(k−1)k^j})/k.
pub fn odometer(k: u64) -> Result<SequenceSpec> {
    let p = Poly::from_terms((0..k as i64).map(|e| (Exponent::from(e), Rational::new(1, k as i64))));
    polynomial_sequence(p, ExponentSchedule::geometric(k as i64))
}

// ---------------------------------------------------------------------------
// Ergodicity of powers

/// g(j) mod n as a preperiod followed by a cycle, when the schedule allows it.
pub fn residue_cycle(sched: &ExponentSchedule, n: u64) -> Option<(Vec<u64>, Vec<u64>)> {
    let m = n as i128;
    let red = |v: i128| v.rem_euclid(m) as u64;
    let mut seq: Vec<u64> = Vec::new();
    match sched.kind() {
        ScheduleKind::Geometric { base } => {
            let mut seen = std::collections::HashMap::new();
            let mut r = red(1);
            loop {
                if let Some(&s) = seen.get(&r) {
                    return Some((seq[..s].to_vec(), seq[s..].to_vec()));
                }
                seen.insert(r, seq.len());
                seq.push(r);
                r = red(r as i128 * *base as i128);
            }
        }
        ScheduleKind::LinearRecurrence { seeds, coeffs } => {
            let l = coeffs.len();
            seq.extend(seeds.iter().map(|&s| red(s as i128)));
            if l == 0 || seeds.len() < l {
                return None;
            }
            let mut seen = std::collections::HashMap::new();
            loop {
                let j = seq.len();
                let state: Vec<u64> = seq[j - l..].to_vec();
                if let Some(&s) = seen.get(&state) {
                    // equal windows ending at s and j: periodic from s − l
                    return Some((seq[..s - l].to_vec(), seq[s - l..j - l].to_vec()));
                }
                seen.insert(state, j);
                let mut next = 0i128;
                for (i, c) in coeffs.iter().enumerate() {
                    next += *c as i128 * seq[j - 1 - i] as i128;
                }
                seq.push(red(next));
            }
        }
        ScheduleKind::Factorial => {
            let mut f = 1i128;
            for j in 0..n as i128 {
                f = (f * (j + 1)).rem_euclid(m);
                seq.push(f as u64);
            }
            Some((seq, vec![0]))
        }
        ScheduleKind::Polynomial { coeffs } => {
            for j in 0..m {
                let mut acc = 0i128;
                for c in coeffs.iter().rev() {
                    acc = (acc * j + *c as i128).rem_euclid(m);
                }
                seq.push(acc as u64);
            }
            Some((vec![], seq))
        }
        ScheduleKind::Explicit { .. } => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgroupVerdict {
    pub subgroup: String,
    pub verdict: SumVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerReport {
    pub power: u64,
    pub horizon: usize,
    /// g(j) mod n: preperiod, then the repeating cycle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preperiod: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Vec<u64>>,
    pub subgroups: Vec<SubgroupVerdict>,
    pub verdict: ErgodicVerdict,
    /// Report on the circulant sequence (p_j(xP)) over the horizon.
    pub direct: ErgodicityReport,
    /// Symbolic and direct partial sums agree over the horizon.
    pub consistent: bool,
    /// n = 2 only: whether the residue cycle contains an odd g(j).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub odd_infinitely_often: Option<bool>,
}

fn polynomial_spec(spec: &SequenceSpec) -> Result<()> {
    if spec.group().order() != 1 {
        return Err(Error::InvalidArgument("the transformation must be given by polynomials (trivial group)".into()));
    }
    Ok(())
}

/// p_j for a spec over the trivial group.
pub fn polynomial_term(spec: &SequenceSpec, j: usize) -> Result<QPoly> {
    polynomial_spec(spec)?;
    Ok(spec.term(j)?.coeff(0).clone())
}

/// The circulant sequence (p_j(xP)) over the first `count` terms.
pub fn circulant_sequence(spec: &SequenceSpec, n: u64, count: usize) -> Result<SequenceSpec> {
    let terms = (0..count).map(|j| Ok(circulant_of(&polynomial_term(spec, j)?, n))).collect::<Result<Vec<_>>>()?;
    SequenceSpec::explicit(FiniteAbelianGroup::cyclic(n), terms)
}

/// Values at x = 1 of p(x^r)(xP), recentered at their largest entry:
/// class g collects p_e with e·r ≡ g mod n.
fn residue_values(template: &QPoly, r: u64, n: u64) -> Result<Vec<Rational>> {
    let group = FiniteAbelianGroup::cyclic(n);
    let mut coeffs = vec![QPoly::zero(); n as usize];
    for (e, c) in template.terms() {
        let g = (e.rem_euclid(n) as u128 * r as u128 % n as u128) as usize;
        coeffs[g] = coeffs[g].add(&QPoly::constant(c.clone()));
    }
    let m = Hemi::new(group, coeffs)?;
    let f = SequenceSpec::argmax_at_one(&m);
    Ok(m.translate(m.group().inv_idx(f)).values_at_one())
}

/// Ergodicity of Tⁿ through the circulant sequence (p_j(xP))(1).
pub fn power_analysis(spec: &SequenceSpec, n: u64, horizon: usize) -> Result<PowerReport> {
    check_modulus(n)?;
    polynomial_spec(spec)?;
    let horizon = horizon.max(1);
    let group = FiniteAbelianGroup::cyclic(n);
    let direct = ergodicity_report(&circulant_sequence(spec, n, horizon)?, horizon)?;
    let subgroups_k = group.maximal_subgroups(DEFAULT_ENUMERATION_CAP)?;
    let template = spec.effective_template().map(|t| t.coeff(0).clone());
    let cyc = spec.schedule().and_then(|s| residue_cycle(s, n));
    let (Some(template), Some((pre, cycle))) = (template, cyc) else {
        return Ok(PowerReport {
            power: n,
            horizon,
            preperiod: None,
            cycle: None,
            subgroups: vec![],
            verdict: if n == 1 { ErgodicVerdict::Ergodic } else { ErgodicVerdict::Inconclusive },
            direct,
            consistent: true,
            odd_infinitely_often: None,
        });
    };
    let contribution = |r: u64, k: &crate::chargroup::Subgroup| -> Result<Rational> {
        let c = residue_values(&template, r, n)?;
        Ok(c.iter().enumerate().filter(|(g, _)| !k.contains(*g)).map(|(_, v)| v.clone()).sum())
    };
    let mut subgroups = Vec::new();
    let mut consistent = true;
    for (idx, k) in subgroups_k.iter().enumerate() {
        let mut divergent = false;
        for &r in &cycle {
            if contribution(r, k)?.is_positive() {
                divergent = true;
            }
        }
        let mut partial = Rational::zero();
        for j in 0..horizon {
            let r = if j < pre.len() { pre[j] } else { cycle[(j - pre.len()) % cycle.len()] };
            partial = &partial + &contribution(r, k)?;
        }
        if direct.subgroup_sums.get(idx).map(|s| &s.partial_sum) != Some(&partial) {
            consistent = false;
        }
        let gens: Vec<String> = k.generators.iter().map(|g| format!("{:?}", g.residues)).collect();
        subgroups.push(SubgroupVerdict {
            subgroup: format!("K=<{}>", gens.join(",")),
            verdict: if divergent { SumVerdict::Divergent } else { SumVerdict::Vanishing },
        });
    }
    let verdict = if subgroups.iter().all(|s| s.verdict == SumVerdict::Divergent) {
        ErgodicVerdict::Ergodic
    } else {
        ErgodicVerdict::NotErgodic
    };
    Ok(PowerReport {
        power: n,
        horizon,
        odd_infinitely_often: (n == 2).then(|| cycle.iter().any(|r| r % 2 == 1)),
        preperiod: Some(pre),
        cycle: Some(cycle),
        subgroups,
        verdict,
        direct,
        consistent,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacterNorms {
    pub j: usize,
    pub samples: Vec<Sample>,
    /// λ_j(∏ p_i(xP)^l) = (∏ p_i^l)(x·ξ^{−j}) at every d.
    pub identity_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacterNormReport {
    pub k: u64,
    pub l: u32,
    pub horizon: usize,
    pub characters: Vec<CharacterNorms>,
    /// Every eigenvalue trajectory is exactly 1: not hollow.
    pub certified: bool,
}

fn character_norm_c<C: Coeff>(spec: &SequenceSpec, k: u64, l: u32, horizon: usize) -> Result<CharacterNormReport> {
    let group = FiniteAbelianGroup::cyclic(k);
    let mut prod_p = QPoly::one();
    let mut prod_m: Hemi<C> = Hemi::identity(&group);
    let mut characters: Vec<CharacterNorms> =
        (0..k as usize).map(|j| CharacterNorms { j, samples: vec![], identity_holds: true }).collect();
    for d in 0..=horizon {
        let p = polynomial_term(spec, d)?.pow(l);
        prod_p = prod_p.mul(&p);
        spec.check_support(&prod_p)?;
        prod_m = prod_m.mul(&circulant_of(&p, k).map_coeffs(|q: &Rational| C::from_rational(q)))?;
        let one = prod_p.is_nonneg() && prod_p.eval_one().is_one();
        for ch in characters.iter_mut() {
            let lam = prod_m.lambda(ch.j)?;
            let twisted: Poly<C> = Poly::from_terms(prod_p.terms().iter().map(|(e, c)| {
                let t = (k - e.rem_euclid(k) * ch.j as u64 % k) % k;
                (e.clone(), C::from_rational(c).mul(&C::root_of_unity(k, t).expect("root of unity")))
            }));
            let holds = lam == twisted;
            ch.identity_holds &= holds;
            // ‖p(xξ^{−j})‖ = ‖p‖ = p(1) for p ∈ A^+
            ch.samples.push(if holds && prod_p.is_nonneg() {
                Sample::exact(d, prod_p.eval_one())
            } else {
                Sample::of(d, &lam)
            });
            let _ = one;
        }
    }
    let certified = characters.iter().all(|c| c.identity_holds && c.samples.iter().all(|s| s.is_exactly_one()));
    Ok(CharacterNormReport { k, l, horizon, characters, certified })
}

/// ‖λ_j(∏ p_i(xP)^l)‖ ≡ 1 for all j ∈ Z_k when T^k is ergodic.
pub fn character_norm_check(spec: &SequenceSpec, k: u64, l: u32, horizon: usize) -> Result<CharacterNormReport> {
    let pa = power_analysis(spec, k, horizon)?;
    if pa.verdict != ErgodicVerdict::Ergodic {
        return Err(Error::NotErgodic(format!("T^{k} is not certified ergodic")));
    }
    if k <= 2 {
        character_norm_c::<Rational>(spec, k, l.max(1), horizon)
    } else {
        character_norm_c::<Cyclo>(spec, k, l.max(1), horizon)
    }
}

// ---------------------------------------------------------------------------
// Subring projection

/// Components a^{(i)} (in B coordinates) and their masses.
fn components(a: &QPoly, k: u64) -> (Vec<QPoly>, Vec<Rational>) {
    let (dec, _) = a.subring_split(k).expect("positive modulus");
    let masses = dec.masses();
    (dec.components, masses)
}

/// dist(a, B) = Σ_{i≠0} ‖a^{(i)}‖.
pub fn dist_to_subring(a: &QPoly, k: u64) -> Rational {
    a.subring_split(k).expect("positive modulus").1
}

/// A candidate rank-one factorization V·W ≈ target, target over B.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorPair {
    pub v: DenseMatrix,
    pub w: DenseMatrix,
    pub target: DenseMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectedPair {
    #[serde(skip)]
    pub v: DenseMatrix,
    #[serde(skip)]
    pub w: DenseMatrix,
    /// ε = ‖VW − target‖.
    pub epsilon: Rational,
    /// Entries removed in stage (1).
    pub zeroed: usize,
    /// ‖V₂W₂ − target‖ after stages (1) and (2).
    pub projected_error: Rational,
    /// ‖V'W' − target‖ after stripping the monomials.
    pub stripped_error: Rational,
    pub strip_non_increasing: bool,
    /// ‖VW − V'W'‖.
    pub product_change: Rational,
    /// 2k(√ε + 2ε), √ε rounded down.
    pub audit_bound: Rational,
    pub audit_holds: bool,
    pub in_subring: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionReport {
    pub k: u64,
    pub pairs: Vec<ProjectedPair>,
    /// Σ √ε(i) over the supplied range.
    pub sqrt_sum: f64,
    pub all_audits_hold: bool,
}

/// Stage (1)/(2) outcome for one entry: None when zeroed, else the dominant
/// class r and its component in B coordinates.
fn dominant(a: &QPoly, k: u64, thr_sq: &Rational) -> Option<(u64, QPoly)> {
    if a.is_zero() {
        return None;
    }
    let (comps, masses) = components(a, k);
    let total: Rational = masses.iter().cloned().sum();
    let best = masses.iter().max().cloned().expect("k ≥ 1 classes");
    if masses.iter().filter(|m| **m == best).count() > 1 {
        return None;
    }
    let eta = &(&total - &best) / &total;
    if eta.is_positive() && &(&eta * &eta) >= thr_sq {
        return None;
    }
    let r = masses.iter().position(|m| *m == best).expect("max present") as u64;
    Some((r, comps[r as usize].clone()))
}

/// Projection of each pair: (1) zero entries whose non-dominant mass
/// fraction η reaches (k−1)√ε, (2) keep the dominant component x^f·b,
/// (3) strip x^f (V offsets in {0,…,−(k−1)}, W offsets in {0,…,k−1}).
pub fn project_to_subring(pairs: &[FactorPair], k: u64) -> Result<ProjectionReport> {
    if k < 2 {
        return Err(Error::InvalidArgument("subring modulus must be at least 2".into()));
    }
    let km1 = Rational::from_integer(k as i64 - 1);
    let mut out = Vec::with_capacity(pairs.len());
    let mut sqrt_sum = 0.0;
    for p in pairs {
        if !p.target.entries().iter().all(|e| e.in_subring(k)) {
            return Err(Error::InvalidArgument("target is not over B".into()));
        }
        let vw = p.v.mul(&p.w)?;
        let eps = vw.sub(&p.target)?.operator_norm();
        sqrt_sum += eps.to_f64().sqrt();
        let thr_sq = &(&km1 * &km1) * &eps;
        let mut zeroed = 0;
        let stage = |m: &DenseMatrix, is_v: bool, zeroed: &mut usize| -> (DenseMatrix, DenseMatrix) {
            let (rows, cols) = m.shape();
            let mut projected = Dense::zeros(rows, cols);
            let mut stripped = Dense::zeros(rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    let a = m.get(r, c);
                    match dominant(a, k, &thr_sq) {
                        None => {
                            if !a.is_zero() {
                                *zeroed += 1;
                            }
                        }
                        Some((res, b)) => {
                            projected.set(r, c, b.shift(&Exponent::from(res as i64)));
                            // V: x^f with f = res − k (res > 0); W: x^res
                            let keep = if is_v && res > 0 { k } else { 0 };
                            stripped.set(r, c, b.shift(&Exponent::from(keep as i64)));
                        }
                    }
                }
            }
            (projected, stripped)
        };
        let (v2, v3) = stage(&p.v, true, &mut zeroed);
        let (w2, w3) = stage(&p.w, false, &mut zeroed);
        let projected_error = v2.mul(&w2)?.sub(&p.target)?.operator_norm();
        let vw3 = v3.mul(&w3)?;
        let stripped_error = vw3.sub(&p.target)?.operator_norm();
        let product_change = vw.sub(&vw3)?.operator_norm();
        let two_k = Rational::from_integer(2 * k as i64);
        let audit_bound = &two_k * &(&eps.sqrt_lower(64) + &(&Rational::from_integer(2) * &eps));
        let in_subring = v3.entries().iter().chain(w3.entries()).all(|e| e.in_subring(k));
        out.push(ProjectedPair {
            epsilon: eps,
            zeroed,
            strip_non_increasing: stripped_error <= projected_error,
            audit_holds: product_change < audit_bound || product_change.is_zero(),
            projected_error,
            stripped_error,
            product_change,
            audit_bound,
            in_subring,
            v: v3,
            w: w3,
        });
    }
    let all_audits_hold = out.iter().all(|p| p.audit_holds);
    Ok(ProjectionReport { k, pairs: out, sqrt_sum, all_audits_hold })
}

/// Factorization chain for Tⁿ from block products of 𝔅(p_j), seen over A.
/// Block i targets ∏ 𝔅(p_j) over [cuts[i], cuts[i+1]); V = x^{s}(1, 1 + ρx)ᵀ
/// and W = x^{−s}·(first row), with s = i mod n and ρ = `perturb`, so every
/// stage of the projection has work to do.
pub fn blowup_chain(spec: &SequenceSpec, n: u64, cuts: &[usize], perturb: &Rational) -> Result<Vec<FactorPair>> {
    check_modulus(n)?;
    let k = n as usize;
    let mut out = Vec::new();
    for (i, w) in cuts.windows(2).enumerate() {
        let mut prod: Option<BMatrix> = None;
        for j in w[0]..w[1] {
            let b = blowup(&polynomial_term(spec, j)?, n)?;
            prod = Some(match prod {
                None => b,
                Some(p) => b.mul(&p)?,
            });
        }
        let target = prod.ok_or_else(|| Error::InvalidArgument("empty block".into()))?.to_a();
        let shift = Exponent::from((i % k) as i64);
        let mut v = Dense::zeros(k, 1);
        for r in 0..k {
            let mut e = QPoly::one();
            if r > 0 && !perturb.is_zero() {
                e = e.add(&QPoly::monomial(Exponent::from(1i64), perturb.clone()));
            }
            v.set(r, 0, e.shift(&shift));
        }
        let neg = Exponent::from(-((i % k) as i64));
        let mut wrow = Dense::zeros(1, k);
        for c in 0..k {
            wrow.set(0, c, target.get(0, c).shift(&neg));
        }
        out.push(FactorPair { v, w: wrow, target });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Randomized bound audits

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BoundStats {
    pub tested: usize,
    pub applicable: usize,
    pub violations: usize,
    /// Cases where a strict inequality of the statement holds only with equality.
    pub boundary_ties: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubringStats {
    pub seed: u64,
    pub samples: usize,
    pub k_max: u64,
    pub near_split: BoundStats,
    /// η, µ > 1/2 branch.
    pub mass_bound_high: BoundStats,
    /// Remaining branch: dist ≥ 1/2.
    pub mass_bound_low: BoundStats,
    pub product_bound: BoundStats,
}

impl SubringStats {
    pub fn total_violations(&self) -> usize {
        self.near_split.violations + self.mass_bound_high.violations + self.mass_bound_low.violations + self.product_bound.violations
    }
}

/// Random element of A^+ with the given integer mass per residue class.
fn random_apoly(rng: &mut ChaCha8Rng, k: u64, weights: &[i64]) -> QPoly {
    let mut terms = Vec::new();
    for (r, &w) in weights.iter().enumerate() {
        let mut left = w;
        while left > 0 {
            let part = if left == 1 { 1 } else { rng.gen_range(1..=left) };
            let t: i64 = rng.gen_range(-2..=2);
            terms.push((Exponent::from(r as i64 + k as i64 * t), Rational::from_integer(part)));
            left -= part;
        }
    }
    Poly::from_terms(terms)
}

fn max_fraction(masses: &[Rational], total: &Rational) -> Rational {
    &masses.iter().max().cloned().unwrap_or_else(Rational::zero) / total
}

/// Seeded audits of the three subring bounds in exact arithmetic.
pub fn subring_bound_checks(samples: usize, k_max: u64, seed: u64) -> Result<SubringStats> {
    if k_max < 2 {
        return Err(Error::InvalidArgument("k_max must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s_split = BoundStats::default();
    let mut s_high = BoundStats::default();
    let mut s_low = BoundStats::default();
    let mut s_prod = BoundStats::default();
    let half = Rational::new(1, 2);
    for _ in 0..samples {
        let k = rng.gen_range(2..=k_max);
        let ku = k as usize;

        // near-split pairs: a near x^j B^+, c near x^{−j} B^+
        s_split.tested += 1;
        let j = rng.gen_range(0..ku);
        let mut wa: Vec<i64> = (0..ku).map(|_| rng.gen_range(0..=2)).collect();
        let mut wc: Vec<i64> = (0..ku).map(|_| rng.gen_range(0..=2)).collect();
        wa[j] = rng.gen_range(200..=400);
        wc[(ku - j) % ku] = rng.gen_range(200..=400);
        let a = random_apoly(&mut rng, k, &wa);
        let c = random_apoly(&mut rng, k, &wc);
        let ac = a.mul(&c);
        let (a1, c1) = (a.eval_one(), c.eval_one());
        let eps0 = &dist_to_subring(&ac, k) / &(&a1 * &c1);
        let kk = Rational::from_integer((k * k - k) as i64);
        if &kk * &eps0 < half {
            s_split.applicable += 1;
            let (ca, ma) = components(&a, k);
            let (cc, _) = components(&c, k);
            let jj = ma.iter().position(|m| *m == *ma.iter().max().expect("k ≥ 2")).expect("max") as u64;
            // x^j a' with a' = a^{(j)} ∈ B; x^{−j} c' with c' = x^{j+s} c^{(s)}, s ≡ −j
            let s = (k - jj) % k;
            let xa = ca[jj as usize].shift(&Exponent::from(jj as i64));
            let c_prime = cc[s as usize].shift(&Exponent::from((jj + s) as i64));
            let xc = c_prime.shift(&Exponent::from(-(jj as i64)));
            let ok_b = c_prime.in_subring(k) && ca[jj as usize].in_subring(k);
            let ea = xa.sub(&a).norm();
            let ec = xc.sub(&c).norm();
            let ba = &(&kk * &eps0) * &a1;
            let bc = &(&kk * &eps0) * &c1;
            if !ok_b || ea > ba || ec > bc {
                s_split.violations += 1;
            }
        }

        // mass and product bounds on unconstrained pairs
        let wa: Vec<i64> = (0..ku).map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=12) }).collect();
        let wb: Vec<i64> = (0..ku).map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=12) }).collect();
        if wa.iter().all(|w| *w == 0) || wb.iter().all(|w| *w == 0) {
            continue;
        }
        let a = random_apoly(&mut rng, k, &wa);
        let a2 = random_apoly(&mut rng, k, &wb);
        let prod = a.mul(&a2);
        let total = prod.eval_one();
        let ratio = &dist_to_subring(&prod, k) / &total;
        let (_, ma) = components(&a, k);
        let (_, mb) = components(&a2, k);
        let eta = max_fraction(&ma, &a.eval_one());
        let mu = max_fraction(&mb, &a2.eval_one());
        if eta > half && mu > half {
            s_high.tested += 1;
            s_high.applicable += 1;
            let bound = &(&eta + &mu) - &(&Rational::from_integer(2) * &(&eta * &mu));
            let other = Ord::max(&Rational::one() - &mu, &Rational::one() - &eta);
            if ratio < bound || bound < other {
                s_high.violations += 1;
            } else if bound == other {
                s_high.boundary_ties += 1;
            }
        } else {
            s_low.tested += 1;
            s_low.applicable += 1;
            if ratio < half {
                s_low.violations += 1;
            } else if ratio == half {
                s_low.boundary_ties += 1;
            }
        }
        s_prod.tested += 1;
        let mut sorted = ma.clone();
        sorted.sort();
        let delta = &sorted[ku - 2] / &a.eval_one();
        if delta.is_positive() {
            s_prod.applicable += 1;
            if ratio < delta {
                s_prod.violations += 1;
            }
        }
    }
    Ok(SubringStats {
        seed,
        samples,
        k_max,
        near_split: s_split,
        mass_bound_high: s_high,
        mass_bound_low: s_low,
        product_bound: s_prod,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::qpoly;

    #[test]
    fn companion_and_delta() {
        let q = companion(3).unwrap();
        assert_eq!(q.x_form.get(1, 0), &QPoly::one());
        assert_eq!(q.x_form.get(0, 2), &QPoly::x_pow(1i64));
        for n in 2..=6 {
            assert!(delta_identity_holds(n).unwrap());
        }
        assert_eq!(blowup(&QPoly::one(), 4).unwrap().x_form, Dense::identity(4));
    }

    #[test]
    fn three_odometer_blowup() {
        let j = 2u32;
        let t = 3i64.pow(j);
        let p = qpoly(&[(0, 1, 3), (t, 1, 3), (2 * t, 1, 3)]);
        let b = blowup(&p, 2).unwrap();
        let diag = qpoly(&[(0, 1, 3), (t, 1, 3)]);
        assert_eq!(b.x_form.get(0, 0), &diag);
        assert_eq!(b.x_form.get(1, 1), &diag);
        assert_eq!(b.x_form.get(0, 1), &qpoly(&[((t + 1) / 2, 1, 3)]));
        assert_eq!(b.x_form.get(1, 0), &qpoly(&[((t - 1) / 2, 1, 3)]));
        let c = delta_conjugate(&b).unwrap();
        assert_eq!(c, circulant_of(&p, 2));
    }

    #[test]
    fn half_one_plus_x() {
        let p = qpoly(&[(0, 1, 2), (1, 1, 2)]);
        let c = delta_conjugate(&blowup(&p, 2).unwrap()).unwrap();
        assert_eq!(c.coeff(0), &qpoly(&[(0, 1, 2)]));
        assert_eq!(c.coeff(1), &qpoly(&[(1, 1, 2)]));
    }

    #[test]
    fn residue_cycles() {
        let (pre, cyc) = residue_cycle(&ExponentSchedule::geometric(2), 2).unwrap();
        assert_eq!((pre, cyc), (vec![1], vec![0]));
        let (pre, cyc) = residue_cycle(&ExponentSchedule::fibonacci(), 2).unwrap();
        assert!(pre.is_empty());
        assert_eq!(cyc, vec![1, 0, 1]);
    }

    #[test]
    fn subring_examples() {
        let a = qpoly(&[(0, 1, 2), (1, 1, 2)]);
        let sq = a.mul(&a);
        assert_eq!(dist_to_subring(&sq, 2), Rational::new(1, 2));
        let stats = subring_bound_checks(200, 5, DEFAULT_SEED).unwrap();
        assert_eq!(stats.total_violations(), 0);
        assert!(stats.near_split.applicable > 0);
    }
}
