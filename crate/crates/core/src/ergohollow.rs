//! Ergodicity and hollowness: weak-ergodicity sums, pair-norm decay,
//! hollowness trajectories and their symbolic certificates.

use std::f64::consts::PI;

use serde::Serialize;

use crate::chargroup::{FiniteAbelianGroup, GroupElement, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::hemicirc::HemicirculantMatrix;
use crate::laurent::{Poly, QPoly};
use crate::num::{Coeff, Cyclo, Exponent, Rational};
use crate::seqspec::{ScheduleKind, SequenceSpec, Telescoping};

/// Observational decay threshold for `TendsToZeroObserved`.
pub const DECAY_THRESHOLD: f64 = 1e-3;
/// Samples that must strictly decrease at the end of a decaying trajectory.
pub const DECAY_TAIL: usize = 5;

/// Runs `$f::<C>(args)` with C exact: rationals for ±1 characters, cyclotomics otherwise.
macro_rules! by_field {
    ($group:expr, $f:ident ( $($a:expr),* )) => {
        if $group.is_real() { $f::<Rational>($($a),*) } else { $f::<Cyclo>($($a),*) }
    };
}
#[allow(unused_imports)]
pub(crate) use by_field;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub d: usize,
    pub value: f64,
    pub err: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<f64>,
}

impl Sample {
    pub fn of<C: Coeff>(d: usize, p: &Poly<C>) -> Sample {
        match p.exact_norm() {
            Some(q) => Sample::exact(d, q),
            None => {
                let b = p.norm_bound();
                Sample { d, value: b.value, err: b.err, exact: None, analytic: None }
            }
        }
    }

    pub fn exact(d: usize, q: Rational) -> Sample {
        let (v, e) = q.to_f64_bound();
        Sample { d, value: v, err: e, exact: Some(q), analytic: None }
    }

    /// Certified upper bound.
    pub fn upper(&self) -> f64 {
        self.value + self.err
    }

    pub fn lower(&self) -> f64 {
        self.value - self.err
    }

    pub fn is_exactly_one(&self) -> bool {
        self.exact.as_ref().is_some_and(|q| q.is_one())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    TendsToZeroObserved,
    StuckAtOneCertified,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryReport {
    pub label: String,
    pub j0: usize,
    pub samples: Vec<Sample>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    pub non_increasing: bool,
    /// Every sample sits below its analytic bound (when one is tracked).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_respected: Option<bool>,
}

/// s_d ≤ s_{d−1}, exactly when both are exact and within error otherwise.
pub fn samples_non_increasing(samples: &[Sample]) -> bool {
    samples.windows(2).all(|w| match (&w[0].exact, &w[1].exact) {
        (Some(a), Some(b)) => b <= a,
        _ => w[1].lower() <= w[0].upper(),
    })
}

impl TrajectoryReport {
    fn build(label: String, j0: usize, samples: Vec<Sample>, certificate: Option<String>) -> Self {
        let non_increasing = samples_non_increasing(&samples);
        let analytic_respected = if samples.iter().any(|s| s.analytic.is_some()) {
            Some(samples.iter().all(|s| s.analytic.map_or(true, |a| s.lower() <= a * (1.0 + 1e-12) + 1e-15)))
        } else {
            None
        };
        let stuck = certificate.is_some() && samples.iter().all(|s| s.is_exactly_one() || (s.exact.is_none() && s.lower() <= 1.0 && s.upper() >= 1.0));
        let verdict = if stuck {
            Verdict::StuckAtOneCertified
        } else if decays(&samples) {
            Verdict::TendsToZeroObserved
        } else {
            Verdict::Inconclusive
        };
        TrajectoryReport {
            label,
            j0,
            samples,
            verdict,
            certificate: if stuck { certificate } else { None },
            non_increasing,
            analytic_respected,
        }
    }

    pub fn from_samples(label: String, j0: usize, samples: Vec<Sample>) -> Self {
        Self::build(label, j0, samples, None)
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// First d whose certified bound falls below t.
    pub fn first_below(&self, t: f64) -> Option<usize> {
        self.samples.iter().find(|s| s.upper() < t).map(|s| s.d)
    }
}

fn decays(samples: &[Sample]) -> bool {
    let Some(last) = samples.last() else { return false };
    if last.upper() >= DECAY_THRESHOLD || samples.len() < DECAY_TAIL {
        return false;
    }
    let tail = &samples[samples.len() - DECAY_TAIL..];
    tail.windows(2).all(|w| match (&w[0].exact, &w[1].exact) {
        (Some(a), Some(b)) => b < a,
        _ => w[1].upper() < w[0].lower(),
    })
}

// ---------------------------------------------------------------------------
// Ergodicity

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumVerdict {
    /// Per-term contributions are a positive j-independent constant.
    Divergent,
    /// Per-term contributions vanish identically.
    Vanishing,
    /// Finite data only.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialSum {
    pub label: String,
    pub partial_sum: Rational,
    /// The per-term constant, when the spec is template-driven.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_term: Option<Rational>,
    pub verdict: SumVerdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErgodicVerdict {
    Ergodic,
    NotErgodic,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErgodicityReport {
    pub horizon: usize,
    pub symbolic: bool,
    /// Σ_j (1 − max_g c_{gj}).
    pub one_minus_max: PartialSum,
    /// Σ_j Σ_{α(g)≠1} c_{gj}, per nontrivial α.
    pub character_sums: Vec<PartialSum>,
    /// Σ_j Σ_{g∉K} c_{gj}, per maximal subgroup K.
    pub subgroup_sums: Vec<PartialSum>,
    /// Σ_j Σ_{S_{α,β}} c_{gj}c_{hj}, per pair α < β.
    pub pair_sums: Vec<PartialSum>,
    pub verdict: ErgodicVerdict,
}

impl ErgodicityReport {
    pub fn is_ergodic(&self) -> bool {
        self.verdict == ErgodicVerdict::Ergodic
    }
}

/// Each term multiplied by m_{f⁻¹} for f maximizing c_{fj}.
pub fn recenter(spec: &SequenceSpec) -> SequenceSpec {
    spec.clone().with_recentered(true)
}

fn subgroup_label(gens: &[GroupElement]) -> String {
    let g: Vec<String> = gens.iter().map(|e| format!("{:?}", e.residues)).collect();
    format!("K=<{}>", g.join(","))
}

fn finish_sum(label: String, partial: Rational, per_term: Option<Rational>) -> PartialSum {
    let verdict = match &per_term {
        Some(c) if c.is_positive() => SumVerdict::Divergent,
        Some(_) => SumVerdict::Vanishing,
        None => SumVerdict::Inconclusive,
    };
    PartialSum { label, partial_sum: partial, per_term, verdict }
}

/// Accumulates Σ_j f(c_j) over the horizon; template specs also report the per-term constant.
fn accumulate(
    spec: &SequenceSpec,
    horizon: usize,
    label: String,
    f: &dyn Fn(&[Rational]) -> Rational,
) -> Result<PartialSum> {
    let symbolic = spec.effective_template().is_some();
    let mut acc = Rational::zero();
    let mut first = None;
    for j in 0..horizon {
        let c = spec.values_at_one(j)?;
        let v = f(&c);
        if first.is_none() {
            first = Some(v.clone());
        }
        acc = &acc + &v;
    }
    Ok(finish_sum(label, acc, if symbolic { first } else { None }))
}

pub fn pair_sum(group: &FiniteAbelianGroup, a: usize, b: usize, c: &[Rational]) -> Rational {
    let n = group.n();
    let mut s = Rational::zero();
    for g in 0..n {
        if c[g].is_zero() {
            continue;
        }
        for h in 0..n {
            if !c[h].is_zero() && group.in_s_idx(a, b, g, h) {
                s = &s + &(&c[g] * &c[h]);
            }
        }
    }
    s
}

/// Ergodicity partial sums over terms 0..horizon (recentered internally).
pub fn ergodicity_report(spec: &SequenceSpec, horizon: usize) -> Result<ErgodicityReport> {
    let spec = recenter(spec);
    let group = spec.group().clone();
    let symbolic = spec.effective_template().is_some();
    let horizon = spec.len_limit().map_or(horizon, |l| horizon.min(l));
    let one_minus_max = accumulate(&spec, horizon, "1-max".into(), &|c| {
        &Rational::one() - c.iter().max().expect("nonempty")
    })?;
    if group.n() == 1 {
        return Ok(ErgodicityReport {
            horizon,
            symbolic,
            one_minus_max,
            character_sums: vec![],
            subgroup_sums: vec![],
            pair_sums: vec![],
            verdict: ErgodicVerdict::Ergodic,
        });
    }
    let mut ii = Vec::new();
    for a in 1..group.n() {
        let ker = group.kernel(a);
        let label = format!("alpha={:?}", group.character(a).residues);
        ii.push(accumulate(&spec, horizon, label, &|c| {
            c.iter().zip(&ker).filter(|(_, k)| !**k).map(|(v, _)| v.clone()).sum()
        })?);
    }
    let mut iii = Vec::new();
    for k in group.maximal_subgroups(DEFAULT_ENUMERATION_CAP)? {
        let label = subgroup_label(&k.generators);
        iii.push(accumulate(&spec, horizon, label, &|c| {
            c.iter().enumerate().filter(|(g, _)| !k.contains(*g)).map(|(_, v)| v.clone()).sum()
        })?);
    }
    let mut iv = Vec::new();
    for a in 0..group.n() {
        for b in a + 1..group.n() {
            let label = format!(
                "alpha={:?},beta={:?}",
                group.character(a).residues,
                group.character(b).residues
            );
            let gr = group.clone();
            iv.push(accumulate(&spec, horizon, label, &move |c| pair_sum(&gr, a, b, c))?);
        }
    }
    let verdict = if !symbolic {
        ErgodicVerdict::Inconclusive
    } else if iii.iter().all(|s| s.verdict == SumVerdict::Divergent) {
        ErgodicVerdict::Ergodic
    } else {
        ErgodicVerdict::NotErgodic
    };
    Ok(ErgodicityReport {
        horizon,
        symbolic,
        one_minus_max,
        character_sums: ii,
        subgroup_sums: iii,
        pair_sums: iv,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// Trajectories

/// 1 − cos(π/N), rounded down.
pub fn pair_contraction(exponent: u64) -> f64 {
    let s = (PI / (2.0 * exponent as f64)).sin();
    2.0 * s * s * (1.0 - 1e-12)
}

fn char_label(group: &FiniteAbelianGroup, a: usize) -> String {
    format!("{:?}", group.character(a).residues)
}

fn pair_trajectory_c<C: Coeff>(
    spec: &SequenceSpec,
    a: usize,
    b: usize,
    j0: usize,
    horizon: usize,
) -> Result<TrajectoryReport> {
    let group = spec.group();
    let kappa = pair_contraction(group.exponent());
    let mut acc: Poly<C> = Poly::one();
    let mut analytic = 1.0f64;
    let mut samples = Vec::new();
    for d in 0..=horizon {
        let j = j0 + d;
        let t = spec.term_as::<C>(j)?;
        acc = acc.mul(&t.lambda(a)?.mul(&t.lambda(b)?));
        spec.check_support(&acc)?;
        let s = pair_sum(group, a, b, &spec.values_at_one(j)?).to_f64();
        analytic *= (1.0 - kappa * s * (1.0 - 1e-15)).max(0.0) * (1.0 + 1e-15);
        let mut sample = Sample::of(d, &acc);
        sample.analytic = Some(analytic);
        samples.push(sample);
    }
    Ok(TrajectoryReport::build(
        format!("pair {} {}", char_label(group, a), char_label(group, b)),
        j0,
        samples,
        None,
    ))
}

/// ‖λ_α(∏)·λ_β(∏)‖ over windows [j0, j0+d], d ≤ horizon, with the product
/// bound ∏_j (1 − (1 − cos π/N)·Σ_{S_{α,β}} c_{gj}c_{hj}).
pub fn pair_norm_trajectory(
    spec: &SequenceSpec,
    alpha: usize,
    beta: usize,
    j0: usize,
    horizon: usize,
) -> Result<TrajectoryReport> {
    if alpha == beta {
        return Err(Error::EqualCharacters);
    }
    let n = spec.group().n();
    if alpha >= n || beta >= n {
        return Err(Error::OutOfRange { index: alpha.max(beta), len: n });
    }
    by_field!(spec.group(), pair_trajectory_c(spec, alpha, beta, j0, horizon))
}

fn hollow_trajectory_c<C: Coeff>(
    spec: &SequenceSpec,
    a: usize,
    j0: usize,
    horizon: usize,
) -> Result<TrajectoryReport> {
    let mut acc: Poly<C> = Poly::one();
    let mut samples = Vec::new();
    for d in 0..=horizon {
        acc = acc.mul(&spec.lambda_term::<C>(j0 + d, a)?);
        spec.check_support(&acc)?;
        samples.push(Sample::of(d, &acc));
    }
    let cert = nonhollow_certificate(spec, a, j0, horizon)?;
    Ok(TrajectoryReport::build(format!("hollow {}", char_label(spec.group(), a)), j0, samples, cert))
}

/// ‖λ_α(window_product(j0, d))‖ for d ≤ horizon.
pub fn hollow_trajectory(spec: &SequenceSpec, alpha: usize, j0: usize, horizon: usize) -> Result<TrajectoryReport> {
    if alpha == 0 {
        return Err(Error::InvalidArgument("the trivial character has no hollowness trajectory".into()));
    }
    if alpha >= spec.group().n() {
        return Err(Error::OutOfRange { index: alpha, len: spec.group().n() });
    }
    by_field!(spec.group(), hollow_trajectory_c(spec, alpha, j0, horizon))
}

fn block_norms_c<C: Coeff>(spec: &SequenceSpec, a: usize, tel: &Telescoping) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for i in 0..tel.num_blocks() {
        let (s, e) = tel.block(i)?;
        let set: Vec<usize> = (s..=e).collect();
        out.push(Sample::of(i, &spec.lambda_subset::<C>(a, &set)?));
    }
    Ok(out)
}

/// ‖λ_α(M^{(i)})‖ per telescoped block.
pub fn block_lambda_norms(spec: &SequenceSpec, alpha: usize, tel: &Telescoping) -> Result<Vec<Sample>> {
    by_field!(spec.group(), block_norms_c(spec, alpha, tel))
}

// ---------------------------------------------------------------------------
// Non-hollowness certificates

/// Exponent span D of λ_α(T) and whether ‖λ_α(T)‖ = 1 exactly.
fn template_lambda_shape(t: &HemicirculantMatrix, a: usize) -> Result<(Exponent, bool)> {
    let lam = t.to_cyclo().lambda(a)?;
    let (Some(lo), Some(hi)) = (lam.min_exp(), lam.max_exp()) else {
        return Ok((Exponent::ZERO, false));
    };
    // an exponent hit by one group coefficient only keeps its full mass
    let mut seen = std::collections::HashMap::<Exponent, usize>::new();
    for q in t.coeffs() {
        for (e, _) in q.terms() {
            *seen.entry(e.clone()).or_default() += 1;
        }
    }
    let collision_free = seen.values().all(|&c| c == 1);
    let norm_one = collision_free || lam.exact_norm().is_some_and(|n| n.is_one());
    Ok((hi - lo, norm_one))
}

/// g(n) > D·Σ_{j0≤i<n} g(i) across the window, λ_α(template) of norm one:
/// no two subset sums collide, so the window norm is exactly 1.
pub fn super_increasing_certificate(spec: &SequenceSpec, a: usize, j0: usize, horizon: usize) -> Result<bool> {
    let (Some(t), Some(sched)) = (spec.effective_template(), spec.schedule()) else {
        return Ok(false);
    };
    let (span, norm_one) = template_lambda_shape(&t, a)?;
    if !norm_one {
        return Ok(false);
    }
    let mut prefix = Exponent::ZERO;
    for j in j0..=j0 + horizon {
        let g = sched.value(j)?;
        if g <= &span * &prefix {
            return Ok(false);
        }
        prefix = &prefix + &g;
    }
    Ok(true)
}

/// Each q_{gj} has a single exponent parity p_g with (−1)^{p_g}α(g) constant,
/// so λ_α(M_j)(x) = ±λ₀(M_j)(−x) and the window norm equals ‖λ₀(window)‖ = 1.
pub fn parity_certificate(spec: &SequenceSpec, a: usize, j0: usize, horizon: usize) -> Result<bool> {
    let group = spec.group();
    let n_exp = group.exponent();
    if (0..group.n()).any(|g| {
        let t = group.pairing_idx(a, g);
        t != 0 && 2 * t != n_exp
    }) {
        return Ok(false);
    }
    for j in j0..=j0 + horizon {
        let m = spec.term(j)?;
        let mut sign = None;
        for (g, q) in m.coeffs().iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let p = q.terms()[0].0.rem_euclid(2);
            if q.terms().iter().any(|(e, _)| e.rem_euclid(2) != p) {
                return Ok(false);
            }
            let flip = (group.pairing_idx(a, g) != 0) as u64;
            let s = (p + flip) % 2;
            if *sign.get_or_insert(s) != s {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Tag of the first non-hollowness certificate that fires on the window.
pub fn nonhollow_certificate(spec: &SequenceSpec, a: usize, j0: usize, horizon: usize) -> Result<Option<String>> {
    if super_increasing_certificate(spec, a, j0, horizon)? {
        return Ok(Some("super-increasing".into()));
    }
    if parity_certificate(spec, a, j0, horizon)? {
        return Ok(Some("parity".into()));
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Hollowness certificates

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertVerdict {
    Hollow,
    AtCertified,
    NotHollow,
    Inconclusive,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecurrenceBlock {
    pub s: usize,
    pub support: Vec<usize>,
    pub b: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecurrenceCertificate {
    pub verdict: CertVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub stride: usize,
    pub start: usize,
    pub epsilon: Vec<i64>,
    pub b: u32,
    pub parity_even: bool,
    pub blocks: Vec<RecurrenceBlock>,
}

impl RecurrenceCertificate {
    fn not_applicable(reason: impl Into<String>) -> Self {
        RecurrenceCertificate {
            verdict: CertVerdict::NotApplicable,
            reason: Some(reason.into()),
            stride: 0,
            start: 0,
            epsilon: vec![],
            b: 0,
            parity_even: false,
            blocks: vec![],
        }
    }

    /// Blocks whose support lies inside [j0, j1].
    pub fn covered(&self, j0: usize, j1: usize) -> Vec<&RecurrenceBlock> {
        self.blocks
            .iter()
            .filter(|b| b.support.first().is_some_and(|&lo| lo >= j0) && b.support.last().is_some_and(|&hi| hi <= j1))
            .collect()
    }

    /// ∏_{covered s}(1 − 2·2^{−b(s)}), an upper bound on the normalized window norm.
    pub fn window_bound(&self, j0: usize, j1: usize) -> Rational {
        self.covered(j0, j1)
            .iter()
            .fold(Rational::one(), |acc, b| &acc * &(&Rational::one() - &Rational::new(2, 1i64 << b.b)))
    }
}

/// (I + x·m₁)/2 over Z₂.
fn is_half_swap(t: &HemicirculantMatrix) -> bool {
    t.group().cyclic_orders() == [2]
        && t.coeff(0) == &QPoly::constant(Rational::new(1, 2))
        && t.coeff(1) == &QPoly::monomial(Exponent::from(1i64), Rational::new(1, 2))
}

/// The recurrence certificate for (I + x^{g(j)}m₁)/2 with a linear-recurrence g,
/// S an arithmetic progression of stride L+1 starting at the first non-seed index.
pub fn recurrence_certificate(spec: &SequenceSpec, horizon: usize) -> RecurrenceCertificate {
    let Some(t) = spec.template_matrix() else {
        return RecurrenceCertificate::not_applicable("not a template spec");
    };
    if spec.is_recentered() || !is_half_swap(t) {
        return RecurrenceCertificate::not_applicable("template is not (I + x m_1)/2 over Z_2");
    }
    let Some(sched) = spec.schedule() else {
        return RecurrenceCertificate::not_applicable("no schedule");
    };
    let ScheduleKind::LinearRecurrence { seeds, coeffs } = sched.kind() else {
        return RecurrenceCertificate::not_applicable("schedule is not a linear recurrence");
    };
    if coeffs.iter().any(|c| c.abs() > 1) {
        return RecurrenceCertificate::not_applicable("recurrence coefficients must lie in {0, 1, -1}");
    }
    let l = coeffs.len();
    let stride = l + 1;
    let start = seeds.len();
    let b = 1 + coeffs.iter().map(|c| c.unsigned_abs() as u32).sum::<u32>();
    let parity_even = coeffs.iter().sum::<i64>().rem_euclid(2) == 0;
    let mut blocks = Vec::new();
    let mut s = start;
    while s < horizon {
        let mut support: Vec<usize> =
            coeffs.iter().enumerate().filter(|(_, c)| **c != 0).map(|(i, _)| s - 1 - i).collect();
        support.push(s);
        support.sort_unstable();
        blocks.push(RecurrenceBlock { s, support, b });
        s += stride;
    }
    RecurrenceCertificate {
        verdict: if parity_even { CertVerdict::Hollow } else { CertVerdict::AtCertified },
        reason: None,
        stride,
        start,
        epsilon: coeffs.clone(),
        b,
        parity_even,
        blocks,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubringCriterion {
    pub sums: Vec<PartialSum>,
    pub verdict: CertVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetricCriterion {
    pub symmetric: bool,
    pub odd_order: bool,
    pub sums: Vec<PartialSum>,
    pub verdict: CertVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacterCertificate {
    pub alpha: Vec<u64>,
    pub parity: bool,
    pub super_increasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HollowCertificates {
    pub horizon: usize,
    pub ergodic: ErgodicVerdict,
    /// Σ_j Σ_{gh⁻¹∉K} (q_g ∧ q_h)(1) per maximal K.
    pub wedge_criterion: SubringCriterion,
    /// Σ_j Σ_{g²∉K} q_g(1) per maximal K, for symmetric terms.
    pub symmetric_criterion: SymmetricCriterion,
    pub recurrence: RecurrenceCertificate,
    pub nonhollow: Vec<CharacterCertificate>,
    pub verdict: CertVerdict,
}

fn sums_verdict(sums: &[PartialSum], ergodic: ErgodicVerdict) -> CertVerdict {
    if ergodic == ErgodicVerdict::Ergodic && sums.iter().all(|s| s.verdict == SumVerdict::Divergent) {
        CertVerdict::Hollow
    } else {
        CertVerdict::Inconclusive
    }
}

/// Runs every hollowness and non-hollowness certificate over terms 0..=horizon.
pub fn hollow_certificates(spec: &SequenceSpec, horizon: usize) -> Result<HollowCertificates> {
    let group = spec.group().clone();
    let erg = ergodicity_report(spec, horizon.max(1))?;
    let rec = recenter(spec);
    let tmpl = rec.effective_template();
    let horizon = spec.len_limit().map_or(horizon, |l| horizon.min(l.saturating_sub(1)));
    let maximal = if group.n() > 1 { group.maximal_subgroups(DEFAULT_ENUMERATION_CAP)? } else { vec![] };

    let term_at = |j: usize| -> Result<HemicirculantMatrix> {
        match &tmpl {
            Some(t) => Ok(t.clone()),
            None => rec.term(j),
        }
    };
    let per_k = |f: &dyn Fn(&HemicirculantMatrix, &crate::chargroup::Subgroup) -> Rational| -> Result<Vec<PartialSum>> {
        let mut out = Vec::new();
        for k in &maximal {
            let mut acc = Rational::zero();
            let mut first = None;
            for j in 0..=horizon {
                let v = f(&term_at(j)?, k);
                first.get_or_insert(v.clone());
                acc = &acc + &v;
            }
            out.push(finish_sum(subgroup_label(&k.generators), acc, if tmpl.is_some() { first } else { None }));
        }
        Ok(out)
    };

    let wedge_sums = per_k(&|m, k| {
        let mut s = Rational::zero();
        for g in 0..group.n() {
            for h in 0..group.n() {
                if !k.contains(group.div_idx(g, h)) {
                    s = &s + &m.coeff(g).wedge(m.coeff(h)).eval_one();
                }
            }
        }
        s
    })?;
    let wedge_verdict = sums_verdict(&wedge_sums, erg.verdict);

    let symmetric = match &tmpl {
        Some(t) => t.is_symmetric(),
        None => (0..=horizon).map(|j| rec.term(j)).collect::<Result<Vec<_>>>()?.iter().all(|m| m.is_symmetric()),
    };
    let odd_order = group.order() % 2 == 1;
    let sym_sums = per_k(&|m, k| {
        (0..group.n())
            .filter(|&g| !k.contains(group.mul_idx(g, g)))
            .map(|g| m.coeff(g).eval_one())
            .sum()
    })?;
    let sym_verdict = if !symmetric {
        CertVerdict::NotApplicable
    } else if odd_order && erg.verdict == ErgodicVerdict::Ergodic {
        CertVerdict::Hollow
    } else {
        sums_verdict(&sym_sums, erg.verdict)
    };

    let recurrence = recurrence_certificate(spec, horizon + 1);

    let mut nonhollow = Vec::new();
    for a in 1..group.n() {
        nonhollow.push(CharacterCertificate {
            alpha: group.character(a).residues,
            parity: parity_certificate(spec, a, 0, horizon)?,
            super_increasing: super_increasing_certificate(spec, a, 0, horizon)?,
        });
    }

    let verdict = if nonhollow.iter().any(|c| c.parity || c.super_increasing) {
        CertVerdict::NotHollow
    } else if [wedge_verdict, sym_verdict, recurrence.verdict].contains(&CertVerdict::Hollow) {
        CertVerdict::Hollow
    } else if recurrence.verdict == CertVerdict::AtCertified {
        CertVerdict::AtCertified
    } else {
        CertVerdict::Inconclusive
    };
    Ok(HollowCertificates {
        horizon,
        ergodic: erg.verdict,
        wedge_criterion: SubringCriterion { sums: wedge_sums, verdict: wedge_verdict },
        symmetric_criterion: SymmetricCriterion { symmetric, odd_order, sums: sym_sums, verdict: sym_verdict },
        recurrence,
        nonhollow,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// Automorphisms and scaled sequences

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AutomorphismReport {
    pub trajectory: TrajectoryReport,
    /// Σ_{α(g)≠1} |α(g⁻¹) − 1|·‖λ_α(window)‖ per d.
    pub spectral_bounds: Vec<f64>,
    pub bound_respected: bool,
}

fn automorphism_c<C: Coeff>(spec: &SequenceSpec, g: usize, j0: usize, horizon: usize) -> Result<AutomorphismReport> {
    let group = spec.group();
    let n_exp = group.exponent();
    let mut w = HemicirculantMatrix::identity(group);
    let mut samples = Vec::new();
    let mut bounds = Vec::new();
    let mut ok = true;
    for d in 0..=horizon {
        w = w.mul(&spec.term(j0 + d)?)?;
        let diff = w.translate(g).sub(&w)?;
        let sample = Sample::exact(d, diff.norm());
        let wc = w.map_coeffs(|q| C::from_rational(q));
        let mut bound = 0.0;
        for a in 0..group.n() {
            let t = group.pairing_idx(a, group.inv_idx(g));
            if t == 0 {
                continue;
            }
            let factor = 2.0 * (PI * t as f64 / n_exp as f64).sin().abs();
            bound += factor * wc.lambda(a)?.norm_bound().upper();
        }
        bound *= 1.0 + 1e-12;
        ok &= sample.lower() <= bound + 1e-12;
        bounds.push(bound);
        samples.push(sample);
    }
    Ok(AutomorphismReport {
        trajectory: TrajectoryReport::build(
            format!("automorphism {:?}", group.residues(g)),
            j0,
            samples,
            None,
        ),
        spectral_bounds: bounds,
        bound_respected: ok,
    })
}

/// ‖(m_g − I)·window_product(j0, d)‖ for d ≤ horizon.
pub fn automorphism_triviality(
    spec: &SequenceSpec,
    g: &GroupElement,
    j0: usize,
    horizon: usize,
) -> Result<AutomorphismReport> {
    let gi = spec.group().index(g)?;
    if gi == 0 {
        return Err(Error::IdentityElement);
    }
    by_field!(spec.group(), automorphism_c(spec, gi, j0, horizon))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaledPair {
    pub alpha: Vec<u64>,
    /// ‖λ_α(∏ λ₀(M_j)M_j)‖.
    pub scaled: TrajectoryReport,
    /// The (α, χ₀) pair trajectory.
    pub pair: TrajectoryReport,
    pub coincide: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceBlock {
    pub block: usize,
    /// The expansion λ_α(tr·M) = ∏λ_α(M_j²) + Σ_{γ≠α}∏λ_γλ_α holds exactly.
    pub identity_holds: bool,
    pub square_term: Sample,
    pub cross_term: Sample,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceScaled {
    pub alpha: Vec<u64>,
    /// Hollow trajectory of (M_j²) from j0 = cuts[0].
    pub squares: TrajectoryReport,
    /// ‖λ_α(∏_i N_i)‖ with N_i = tr(M^{(i)})·M^{(i)}/tr(M^{(i)})(1).
    pub trace_scaled: TrajectoryReport,
    pub blocks: Vec<TraceBlock>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaledChecks {
    pub lambda0_scaled: Vec<ScaledPair>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace_scaled: Vec<TraceScaled>,
}

fn scaled_c<C: Coeff>(spec: &SequenceSpec, horizon: usize, tel: Option<&Telescoping>) -> Result<ScaledChecks> {
    let group = spec.group();
    let mut lambda0_scaled = Vec::new();
    for a in 1..group.n() {
        let mut acc: Poly<C> = Poly::one();
        let mut samples = Vec::new();
        for d in 0..=horizon {
            let m = spec.term_as::<C>(d)?;
            let l0 = m.lambda(0)?;
            let n = m.scale_poly(&l0);
            acc = acc.mul(&n.lambda(a)?);
            spec.check_support(&acc)?;
            samples.push(Sample::of(d, &acc));
        }
        let scaled = TrajectoryReport::build(format!("lambda0-scaled {}", char_label(group, a)), 0, samples, None);
        let pair = pair_trajectory_c::<C>(spec, a, 0, 0, horizon)?;
        let coincide = scaled.samples.iter().zip(&pair.samples).all(|(x, y)| match (&x.exact, &y.exact) {
            (Some(p), Some(q)) => p == q,
            _ => (x.value - y.value).abs() <= x.err + y.err,
        });
        lambda0_scaled.push(ScaledPair { alpha: group.character(a).residues, scaled, pair, coincide });
    }

    let mut trace_scaled = Vec::new();
    if let Some(tel) = tel {
        let j0 = tel.cuts()[0];
        let last = tel.block(tel.num_blocks() - 1)?.1;
        let squares_spec = SequenceSpec::power_of(spec.clone(), crate::seqspec::ExponentSchedule::constant(2));
        for a in 1..group.n() {
            let squares = hollow_trajectory_c::<C>(&squares_spec, a, j0, last - j0)?;
            let mut acc: Poly<C> = Poly::one();
            let mut samples = Vec::new();
            let mut blocks = Vec::new();
            for i in 0..tel.num_blocks() {
                let (s, e) = tel.block(i)?;
                let set: Vec<usize> = (s..=e).collect();
                let lams: Vec<Poly<C>> =
                    (0..group.n()).map(|c| spec.lambda_subset::<C>(c, &set)).collect::<Result<_>>()?;
                let block = spec.subset_product(&set)?;
                let tr = block.trace();
                let tr1 = tr.eval_one();
                let n_i = block.scale_poly(&tr.scale(&tr1.recip())).map_coeffs(|q| C::from_rational(q));
                let lhs = n_i.lambda(a)?;
                let sq = lams[a].mul(&lams[a]);
                let mut cross = Poly::zero();
                for (c, l) in lams.iter().enumerate() {
                    if c != a {
                        cross = cross.add(&l.mul(&lams[a]));
                    }
                }
                let inv = C::from_rational(&tr1.recip());
                let identity_holds = lhs == sq.add(&cross).scale(&inv);
                blocks.push(TraceBlock {
                    block: i,
                    identity_holds,
                    square_term: Sample::of(i, &sq.scale(&inv)),
                    cross_term: Sample::of(i, &cross.scale(&inv)),
                });
                acc = acc.mul(&lhs);
                spec.check_support(&acc)?;
                samples.push(Sample::of(i, &acc));
            }
            trace_scaled.push(TraceScaled {
                alpha: group.character(a).residues,
                squares,
                trace_scaled: TrajectoryReport::build(format!("trace-scaled {}", char_label(group, a)), j0, samples, None),
                blocks,
            });
        }
    }
    Ok(ScaledChecks { lambda0_scaled, trace_scaled })
}

/// (a) (λ₀(M_j)M_j) trajectories against the (α, χ₀) pair trajectories;
/// (b) given a telescoping, (M_j²) against (tr(M^{(i)})·M^{(i)}), block by block.
pub fn scaled_sequence_checks(spec: &SequenceSpec, horizon: usize, tel: Option<&Telescoping>) -> Result<ScaledChecks> {
    by_field!(spec.group(), scaled_c(spec, horizon, tel))
}

/// λ_α of a hemicirculant built from rational data, in the exact field.
pub fn lambda_exact_sample(m: &HemicirculantMatrix, a: usize) -> Result<Sample> {
    fn go<C: Coeff>(m: &HemicirculantMatrix, a: usize) -> Result<Sample> {
        Ok(Sample::of(0, &m.map_coeffs(|q| C::from_rational(q)).lambda(a)?))
    }
    by_field!(m.group(), go(m, a))
}
