//! Rank-one factorizations (AT and WATC), reduced polynomial sequences,
//! intertwining error norms and the mass-cancellation invariant.

use std::any::Any;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::chargroup::{FiniteAbelianGroup, GroupElement};
use crate::ergohollow::{
    by_field, ergodicity_report, pair_norm_trajectory, samples_non_increasing, ErgodicVerdict, Sample,
    TrajectoryReport, Verdict,
};
use crate::error::{Error, Result};
use crate::hemicirc::{spectral_bilinear, Dense, DenseMatrix, Hemi, HemicirculantMatrix};
use crate::laurent::{LaurentPoly, Poly, QPoly};
use crate::num::{Coeff, Cyclo, Rational};
use crate::seqspec::{default_epsilon, find_telescoping, SequenceSpec, Telescoping};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Positivity {
    Nonneg,
    Real,
    Complex,
}

/// Report view of a polynomial: exact when every coefficient is rational.
pub fn to_laurent<C: Coeff>(p: &Poly<C>) -> LaurentPoly {
    let any = p as &dyn Any;
    if let Some(q) = any.downcast_ref::<QPoly>() {
        return LaurentPoly::Exact(q.clone());
    }
    if let Some(q) = any.downcast_ref::<Poly<Cyclo>>().and_then(|c| c.as_rational()) {
        return LaurentPoly::Exact(q);
    }
    LaurentPoly::Complex(p.to_cpoly())
}

/// Operator 1-norm of a dense matrix as a sample, exact when every entry
/// norm is rational.
pub fn dense_norm<C: Coeff>(d: usize, m: &Dense<C>) -> Sample {
    let (rows, cols) = m.shape();
    let mut exact = Some(Rational::zero());
    for c in 0..cols {
        let mut col = Some(Rational::zero());
        for r in 0..rows {
            col = match (col, m.get(r, c).exact_norm()) {
                (Some(a), Some(b)) => Some(&a + &b),
                _ => None,
            };
        }
        exact = match (exact, col) {
            (Some(a), Some(b)) => Some(Ord::max(a, b)),
            _ => None,
        };
        if exact.is_none() {
            break;
        }
    }
    match exact {
        Some(q) => Sample::exact(d, q),
        None => {
            let b = m.operator_norm_bound();
            Sample { d, value: b.value, err: b.err, exact: None, analytic: None }
        }
    }
}

fn root<C: Coeff>(n_exp: u64, t: u64) -> Result<C> {
    C::root_of_unity(n_exp, t).ok_or_else(|| Error::InvalidArgument("character value not representable".into()))
}

fn lift<C: Coeff>(m: &HemicirculantMatrix) -> Hemi<C> {
    m.map_coeffs(|q: &Rational| C::from_rational(q))
}

/// Normalizes to l¹ norm one (exactly when the norm is rational).
pub fn normalize<C: Coeff>(p: &Poly<C>) -> Result<Poly<C>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    match p.exact_norm() {
        Some(q) if q.is_one() => Ok(p.clone()),
        Some(q) => Ok(p.scale(&C::from_rational(&q.recip()))),
        None => {
            let v = p.norm_bound().value;
            let s = Rational::from_f64(1.0 / v).ok_or(Error::ZeroPolynomial)?;
            Ok(p.scale(&C::from_rational(&s)))
        }
    }
}

// ---------------------------------------------------------------------------
// Rank-one factorizations

/// Column V, row W and the computed error ‖target − VW‖.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneFactorization<C: Coeff = Rational> {
    pub v: Dense<C>,
    pub w: Dense<C>,
    pub error: Sample,
    pub positivity: Positivity,
    /// The scalar W·V.
    pub wv: Poly<C>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorSummary {
    pub v: Vec<LaurentPoly>,
    pub w: Vec<LaurentPoly>,
    pub error: Sample,
    pub positivity: Positivity,
    pub wv: LaurentPoly,
}

impl<C: Coeff> RankOneFactorization<C> {
    pub fn product(&self) -> Result<Dense<C>> {
        self.v.mul(&self.w)
    }

    pub fn summary(&self) -> FactorSummary {
        FactorSummary {
            v: self.v.entries().iter().map(to_laurent).collect(),
            w: self.w.entries().iter().map(to_laurent).collect(),
            error: self.error.clone(),
            positivity: self.positivity,
            wv: to_laurent(&self.wv),
        }
    }
}

impl RankOneFactorization<Rational> {
    pub fn is_nonneg(&self) -> bool {
        self.v.is_nonneg() && self.w.is_nonneg()
    }
}

/// V_g = q_g(R), W_g = |H|·q_{g⁻¹}(S), error against `target`.
fn rank_one_nonneg(
    r: &HemicirculantMatrix,
    s: &HemicirculantMatrix,
    target: &HemicirculantMatrix,
) -> Result<RankOneFactorization> {
    if r.group() != s.group() || r.group() != target.group() {
        return Err(Error::GroupMismatch);
    }
    let g = r.group();
    let n = g.n();
    let scale = Rational::from_integer(n as i64);
    let mut v = Dense::zeros(n, 1);
    let mut w = Dense::zeros(1, n);
    for i in 0..n {
        v.set(i, 0, r.coeff(i).clone());
        w.set(0, i, s.coeff(g.inv_idx(i)).scale(&scale));
    }
    let diff = target.to_dense().sub(&v.mul(&w)?)?;
    let wv = w.mul(&v)?.get(0, 0).clone();
    Ok(RankOneFactorization { v, w, error: dense_norm(0, &diff), positivity: Positivity::Nonneg, wv })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SquareFactor {
    pub factor: RankOneFactorization,
    /// VW − M² equals Σ_{α≠β} λ_αλ_β v_α w_β entry for entry.
    pub spectral_agrees: bool,
    /// max_{α≠β} ‖λ_α(M)λ_β(M)‖, certified upper bound.
    pub max_pair: f64,
    /// (p² − p)·max_pair / p² with p = |H|.
    pub literal_bound: f64,
    /// (p² − p)·max_pair.
    pub proof_bound: f64,
    /// W·V = tr(M²).
    pub wv_is_trace: bool,
    /// Diagonal entries of VW.
    pub vw_diagonal: Vec<QPoly>,
}

fn spectral_check_c<C: Coeff>(m: &HemicirculantMatrix, vw_minus_target: &DenseMatrix) -> Result<(bool, f64)> {
    let mc: Hemi<C> = lift(m);
    let lams = mc.eigenvalues()?;
    let n = lams.len();
    let mut prods: HashMap<(usize, usize), Poly<C>> = HashMap::new();
    let mut max_pair = 0.0f64;
    for a in 0..n {
        for b in a + 1..n {
            let p = lams[a].mul(&lams[b]);
            max_pair = max_pair.max(Sample::of(0, &p).upper());
            prods.insert((a, b), p);
        }
    }
    let spectral = spectral_bilinear::<C>(m.group(), |a, b| match a.cmp(&b) {
        std::cmp::Ordering::Less => prods.get(&(a, b)).cloned(),
        std::cmp::Ordering::Greater => prods.get(&(b, a)).cloned(),
        std::cmp::Ordering::Equal => None,
    })?;
    let dense = vw_minus_target.map_coeffs(|q: &Rational| C::from_rational(q));
    Ok((spectral == dense, max_pair))
}

/// Rank-one approximation of M²: V_g = q_g, W_g = |H|·q_{g⁻¹}.
pub fn square_factor(m: &HemicirculantMatrix) -> Result<SquareFactor> {
    if !m.is_nonneg() {
        return Err(Error::NegativeCoefficient);
    }
    let sq = m.mul(m)?;
    let factor = rank_one_nonneg(m, m, &sq)?;
    let vw = factor.product()?;
    let vw_minus = vw.sub(&sq.to_dense())?;
    let (spectral_agrees, max_pair) = by_field!(m.group(), spectral_check_c(m, &vw_minus))?;
    let p = m.group().order() as f64;
    let vw_diagonal = (0..m.group().n()).map(|i| vw.get(i, i).clone()).collect();
    Ok(SquareFactor {
        wv_is_trace: factor.wv == sq.trace(),
        factor,
        spectral_agrees,
        max_pair,
        literal_bound: (p * p - p) * max_pair / (p * p),
        proof_bound: (p * p - p) * max_pair,
        vw_diagonal,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitFactor {
    pub factor: RankOneFactorization,
    /// max_{α≠β} ‖λ_α(∏_R)·λ_β(∏_{T∖R})‖.
    pub max_pair: f64,
    /// |H|(|H| − 1)·max_pair.
    pub bound: f64,
}

fn split_pairs_c<C: Coeff>(r: &HemicirculantMatrix, s: &HemicirculantMatrix) -> Result<f64> {
    let lr = lift::<C>(r).eigenvalues()?;
    let ls = lift::<C>(s).eigenvalues()?;
    let mut best = 0.0f64;
    for a in 0..lr.len() {
        for b in 0..ls.len() {
            if a != b {
                best = best.max(Sample::of(0, &lr[a].mul(&ls[b])).upper());
            }
        }
    }
    Ok(best)
}

/// V from ∏_{j∈R} M_j, W from ∏_{j∈T∖R} M_j, compared with ∏_{j∈T} M_j.
pub fn split_at_factor(spec: &SequenceSpec, window: &[usize], r: &[usize]) -> Result<SplitFactor> {
    if let Some(j) = r.iter().find(|j| !window.contains(j)) {
        return Err(Error::InvalidArgument(format!("index {j} of R is not inside T")));
    }
    let rest: Vec<usize> = window.iter().copied().filter(|j| !r.contains(j)).collect();
    let pr = spec.subset_product(r)?;
    let ps = spec.subset_product(&rest)?;
    let target = pr.mul(&ps)?;
    let factor = rank_one_nonneg(&pr, &ps, &target)?;
    let max_pair = by_field!(spec.group(), split_pairs_c(&pr, &ps))?;
    let n = spec.group().order() as f64;
    Ok(SplitFactor { factor, max_pair, bound: n * (n - 1.0) * max_pair })
}

// ---------------------------------------------------------------------------
// AT reduction

/// Blocks M^{(i)} of a telescoping and the reduced polynomials p_{0i}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtReduction {
    pub telescoping: Telescoping,
    #[serde(skip)]
    pub blocks: Vec<HemicirculantMatrix>,
    /// M^{(i)}·M^{(i+1)}.
    #[serde(skip)]
    pub products: Vec<HemicirculantMatrix>,
    /// p_{0i}: the identity coefficient of M^{(i)}M^{(i+1)} (= tr/|H|).
    pub reduced: Vec<QPoly>,
    /// p_{0i}(1).
    pub identity_mass: Vec<Rational>,
    /// Σ_g p_{g,i}(1).
    pub total_mass: Vec<Rational>,
}

impl AtReduction {
    pub fn group(&self) -> &FiniteAbelianGroup {
        self.blocks[0].group()
    }

    pub fn len(&self) -> usize {
        self.reduced.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reduced.is_empty()
    }

    /// p_{g,i}: the g-coefficient of M^{(i)}M^{(i+1)}.
    pub fn class_poly(&self, g: usize, i: usize) -> Result<&QPoly> {
        let p = self.products.get(i).ok_or(Error::OutOfRange { index: i, len: self.products.len() })?;
        if g >= p.group().n() {
            return Err(Error::OutOfRange { index: g, len: p.group().n() });
        }
        Ok(p.coeff(g))
    }

    /// ‖p_{0i} − tr(M^{(i)})·tr(M^{(i+1)})/|H|‖, small when the sequence is hollow.
    pub fn hollow_defect(&self, i: usize) -> Result<Rational> {
        let p = self.reduced.get(i).ok_or(Error::OutOfRange { index: i, len: self.len() })?;
        let n = Rational::new(1, self.group().order() as i64);
        let tt = self.blocks[i].trace().mul(&self.blocks[i + 1].trace()).scale(&n);
        Ok(p.sub(&tt).norm())
    }
}

/// p_{0i} over the blocks of a given telescoping.
pub fn at_reduce_with(spec: &SequenceSpec, tel: &Telescoping) -> Result<AtReduction> {
    if tel.num_blocks() < 2 {
        return Err(Error::InvalidArgument("an AT reduction needs at least two blocks".into()));
    }
    let blocks = (0..tel.num_blocks()).map(|i| spec.block_product(tel, i)).collect::<Result<Vec<_>>>()?;
    let mut products = Vec::new();
    let mut reduced = Vec::new();
    let mut identity_mass = Vec::new();
    let mut total_mass = Vec::new();
    for w in blocks.windows(2) {
        let p = w[0].mul(&w[1])?;
        reduced.push(p.coeff(0).clone());
        identity_mass.push(p.coeff(0).eval_one());
        total_mass.push(p.column_sum_at_one());
        products.push(p);
    }
    Ok(AtReduction { telescoping: tel.clone(), blocks, products, reduced, identity_mass, total_mass })
}

/// Finds a telescoping with block pair norms below budget·2^{-(t+1)} and reduces it.
pub fn at_reduce(spec: &SequenceSpec, blocks: usize, budget: f64, block_cap: usize) -> Result<AtReduction> {
    let eps = move |t: usize| budget * default_epsilon(t);
    let search = find_telescoping(spec, 0, blocks.max(2), &eps, block_cap)?;
    at_reduce_with(spec, &search.telescoping)
}

/// Multiplier p_{g⁻¹,i} of the reduced automorphism [f, i] ↦ [p_{g⁻¹,i}f, i+1].
pub fn reduced_automorphism(red: &AtReduction, g: &GroupElement, i: usize) -> Result<QPoly> {
    let group = red.group();
    let gi = group.index(g)?;
    red.class_poly(group.inv_idx(gi), i).cloned()
}

// ---------------------------------------------------------------------------
// Sector partition

/// An index set Z_{k,l}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSet {
    pub k: usize,
    pub l: usize,
    pub members: Vec<usize>,
}

/// Sectors s ∈ [0, 2n) sit at angle (2s+1)π/(2n); the open half circle
/// A_{t,+} starting at tπ/n holds s iff (s − t) mod 2n < n.
fn in_half(s: usize, t: usize, n: usize) -> bool {
    (s + 2 * n - t) % (2 * n) < n
}

/// U_0..U_{n−1} with Z_{k,l} ⊆ U_k and Z_{k,l} ∩ U_l = ∅.
pub fn sector_partition(family: &[LabeledSet], n: usize) -> Result<Vec<Vec<usize>>> {
    let mut owner = HashMap::new();
    for (f, z) in family.iter().enumerate() {
        if z.k == z.l || z.k >= n || z.l >= n {
            return Err(Error::InvalidArgument(format!("bad label ({}, {}) for n = {n}", z.k, z.l)));
        }
        for &j in &z.members {
            if owner.insert(j, f).is_some_and(|g| g != f) {
                return Err(Error::OverlappingSets(j));
            }
        }
    }
    let mut u = vec![Vec::new(); n];
    for z in family {
        let s = if z.k < z.l { z.k } else { z.k + n - 1 };
        for (t, ut) in u.iter_mut().enumerate() {
            if in_half(s, t, n) {
                ut.extend(z.members.iter().copied());
            }
        }
    }
    for ut in &mut u {
        ut.sort_unstable();
        ut.dedup();
    }
    for z in family {
        for j in &z.members {
            if u[z.k].binary_search(j).is_err() || u[z.l].binary_search(j).is_ok() {
                return Err(Error::Precondition(format!("sector postcondition failed for ({}, {})", z.k, z.l)));
            }
        }
    }
    Ok(u)
}

// ---------------------------------------------------------------------------
// WATC

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WatcReport {
    pub factor: FactorSummary,
    /// Inclusive window [j0, j1].
    pub window: (usize, usize),
    pub sub_blocks: Vec<LabeledSet>,
    pub sectors: Vec<Vec<usize>>,
    pub epsilon: f64,
    /// Certified ‖VW − ∏M_j‖ < ε.
    pub certified: bool,
    pub trace: QPoly,
    pub wv_is_trace: bool,
}

fn watc_c<C: Coeff>(spec: &SequenceSpec, j0: usize, eps: f64, cap: usize) -> Result<WatcReport> {
    let group = spec.group().clone();
    let n = group.n();
    let n_exp = group.exponent();
    let thr = eps / (n * n) as f64;
    let mut eigs: Vec<Vec<Poly<C>>> = Vec::new();
    let mut pos = j0;
    let mut subs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let start = pos;
            let mut acc: Poly<C> = Poly::one();
            loop {
                if pos - start == cap || spec.len_limit().is_some_and(|l| pos >= l) {
                    return Err(Error::WindowCap(cap));
                }
                let lams = spec.term_as::<C>(pos)?.eigenvalues()?;
                acc = acc.mul(&lams[a].mul(&lams[b]));
                spec.check_support(&acc)?;
                eigs.push(lams);
                pos += 1;
                if Sample::of(0, &acc).upper() < thr {
                    break;
                }
            }
            subs.push(LabeledSet { k: a, l: b, members: (start..pos).collect() });
        }
    }
    let sectors = sector_partition(&subs, n)?;
    let mut inside: Vec<Poly<C>> = vec![Poly::one(); n];
    let mut outside: Vec<Poly<C>> = vec![Poly::one(); n];
    for (off, lams) in eigs.iter().enumerate() {
        let j = j0 + off;
        for a in 0..n {
            let slot = if sectors[a].binary_search(&j).is_ok() { &mut inside[a] } else { &mut outside[a] };
            *slot = slot.mul(&lams[a]);
            spec.check_support(slot)?;
        }
    }
    let inv_n = C::from_rational(&Rational::new(1, n as i64));
    let mut v = Dense::zeros(n, 1);
    let mut w = Dense::zeros(1, n);
    for g in 0..n {
        let (mut vg, mut wg) = (Poly::zero(), Poly::zero());
        for a in 0..n {
            vg = vg.add(&inside[a].scale(&root::<C>(n_exp, group.pairing_idx(a, g))?));
            wg = wg.add(&outside[a].scale(&root::<C>(n_exp, group.pairing_idx(a, group.inv_idx(g)))?));
        }
        v.set(g, 0, vg.scale(&inv_n));
        w.set(0, g, wg);
    }
    let target = spec.range_product(j0, pos - 1)?;
    let diff = lift::<C>(&target).to_dense().sub(&v.mul(&w)?)?;
    let error = dense_norm(0, &diff);
    let wv = w.mul(&v)?.get(0, 0).clone();
    let trace = target.trace();
    let wv_is_trace = wv == trace.map_coeffs(|q| C::from_rational(q));
    let factor = RankOneFactorization {
        v,
        w,
        positivity: if group.is_real() { Positivity::Real } else { Positivity::Complex },
        wv,
        error: error.clone(),
    };
    Ok(WatcReport {
        factor: factor.summary(),
        window: (j0, pos - 1),
        sub_blocks: subs,
        sectors,
        epsilon: eps,
        certified: error.upper() < eps,
        trace,
        wv_is_trace,
    })
}

/// Rank-one approximation of ∏M_j over a window built from n² − n consecutive
/// sub-blocks, each with pair norm below ε/n².
pub fn watc_factor(spec: &SequenceSpec, j0: usize, eps: f64, cap: usize) -> Result<WatcReport> {
    if spec.group().n() < 2 {
        return Err(Error::TrivialGroup);
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    by_field!(spec.group(), watc_c(spec, j0, eps, cap))
}

// ---------------------------------------------------------------------------
// Intertwining error

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntertwiningBlock {
    pub block: usize,
    /// After each push-forward stage: max over columns of the smallest
    /// column norm seen so far.
    pub stage_bounds: Vec<Rational>,
    pub bound: Rational,
}

/// Certified upper bounds on the dimension-space norm of M^{(k)} − S_kR_k.
pub fn intertwining_error(
    blocks: &[DenseMatrix],
    s: &[DenseMatrix],
    r: &[DenseMatrix],
    depth: usize,
) -> Result<Vec<IntertwiningBlock>> {
    if s.len() != blocks.len() || r.len() != blocks.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} blocks, {} S, {} R",
            blocks.len(),
            s.len(),
            r.len()
        )));
    }
    let mut out = Vec::with_capacity(blocks.len());
    for k in 0..blocks.len() {
        let mut d = blocks[k].sub(&s[k].mul(&r[k])?)?;
        let mut best = d.column_norms();
        let stage = |b: &[Rational]| b.iter().max().cloned().unwrap_or_else(Rational::zero);
        let mut stage_bounds = vec![stage(&best)];
        for step in 1..=depth {
            let Some(next) = blocks.get(k + step) else { break };
            d = next.mul(&d)?;
            for (b, c) in best.iter_mut().zip(d.column_norms()) {
                if c < *b {
                    *b = c;
                }
            }
            stage_bounds.push(stage(&best));
        }
        let bound = stage_bounds.last().cloned().unwrap_or_else(Rational::zero);
        out.push(IntertwiningBlock { block: k, stage_bounds, bound });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Mass-cancellation invariant

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassTable {
    pub p_index: usize,
    pub values: Vec<Sample>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassInvariantEstimate {
    pub l: usize,
    pub tables: Vec<MassTable>,
    /// Upper bound on s_l: min over the family of the last tabulated value.
    pub s_l: f64,
    /// min over the family of the value at each d.
    pub per_d: Vec<f64>,
    pub non_increasing: bool,
}

impl MassInvariantEstimate {
    /// Rows (p-index, d, value).
    pub fn rows(&self) -> Vec<(usize, usize, f64)> {
        self.tables.iter().flat_map(|t| t.values.iter().map(move |s| (t.p_index, s.d, s.value))).collect()
    }
}

/// Exact value when known, certified upper bound otherwise.
fn sample_value(s: &Sample) -> f64 {
    s.exact.as_ref().map_or_else(|| s.upper(), |q| q.to_f64())
}

/// Dense matrices of the terms M_j, j < count.
pub fn term_blocks(spec: &SequenceSpec, count: usize) -> Result<Vec<DenseMatrix>> {
    (0..count).map(|j| Ok(spec.term(j)?.to_dense())).collect()
}

/// ‖p·N_{l+d}···N_l‖ for d ≤ d_max and each p (normalized first).
pub fn mass_invariant<C: Coeff>(
    family: &[Poly<C>],
    blocks: &[Dense<C>],
    l: usize,
    d_max: usize,
) -> Result<MassInvariantEstimate> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty polynomial family".into()));
    }
    if l + d_max >= blocks.len() {
        return Err(Error::OutOfRange { index: l + d_max, len: blocks.len() });
    }
    let mut tables = Vec::with_capacity(family.len());
    for (i, p) in family.iter().enumerate() {
        let p = normalize(p)?;
        let mut acc = blocks[l].scale_poly(&p);
        let mut values = vec![dense_norm(0, &acc)];
        for d in 1..=d_max {
            acc = blocks[l + d].mul(&acc)?;
            values.push(dense_norm(d, &acc));
        }
        tables.push(MassTable { p_index: i, values });
    }
    let per_d: Vec<f64> = (0..=d_max)
        .map(|d| tables.iter().map(|t| sample_value(&t.values[d])).fold(f64::INFINITY, f64::min))
        .collect();
    let non_increasing = tables.iter().all(|t| samples_non_increasing(&t.values));
    Ok(MassInvariantEstimate { l, s_l: *per_d.last().expect("d_max + 1 values"), tables, per_d, non_increasing })
}

/// Recomputes the tables on the telescoped blocks [cuts(i), cuts(i+1)) and
/// checks they match the original values at d = cuts(i+1) − 1 − cuts(0).
pub fn mass_telescoped_agrees<C: Coeff>(family: &[Poly<C>], blocks: &[Dense<C>], tel: &Telescoping) -> Result<bool> {
    let cuts = tel.cuts();
    let l = cuts[0];
    let last = *cuts.last().expect("two cuts") - 1;
    let direct = mass_invariant(family, blocks, l, last - l)?;
    let mut tele = Vec::with_capacity(cuts.len() - 1);
    for w in cuts.windows(2) {
        let mut acc = blocks.get(w[0]).ok_or(Error::OutOfRange { index: w[0], len: blocks.len() })?.clone();
        for j in w[0] + 1..w[1] {
            acc = blocks.get(j).ok_or(Error::OutOfRange { index: j, len: blocks.len() })?.mul(&acc)?;
        }
        tele.push(acc);
    }
    let view = mass_invariant(family, &tele, 0, tele.len() - 1)?;
    Ok(direct.tables.iter().zip(&view.tables).all(|(a, b)| {
        b.values.iter().enumerate().all(|(i, s)| {
            let t = &a.values[cuts[i + 1] - 1 - l];
            match (&s.exact, &t.exact) {
                (Some(x), Some(y)) => x == y,
                _ => s.lower() <= t.upper() && t.lower() <= s.upper(),
            }
        })
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassSweep {
    pub estimates: Vec<MassInvariantEstimate>,
    /// Upper bound on s_l valid because l ↦ s_l increases: min over l' ≥ l.
    pub record: Vec<f64>,
}

impl MassSweep {
    pub fn record_non_decreasing(&self) -> bool {
        self.record.windows(2).all(|w| w[0] <= w[1])
    }
}

pub fn mass_sweep<C: Coeff>(family: &[Poly<C>], blocks: &[Dense<C>], ls: &[usize], d_max: usize) -> Result<MassSweep> {
    let estimates = ls.iter().map(|&l| mass_invariant(family, blocks, l, d_max)).collect::<Result<Vec<_>>>()?;
    let mut record = vec![f64::INFINITY; estimates.len()];
    let mut run = f64::INFINITY;
    for (i, e) in estimates.iter().enumerate().rev() {
        run = run.min(e.s_l);
        record[i] = run;
    }
    Ok(MassSweep { estimates, record })
}

// ---------------------------------------------------------------------------
// Nonisomorphism witness

#[derive(Clone, Debug)]
pub struct WitnessConfig {
    /// k: compare (M_j^k) with (λ₀(M_j^k)).
    pub power: u32,
    pub epsilon: f64,
    /// Largest d (and family index) tested.
    pub horizon: usize,
    /// Start indices N tried by the persistence search.
    pub search: usize,
    /// Family supplied by the caller instead of the persistence construction.
    pub family: Option<Vec<QPoly>>,
    /// Start index l for a supplied family.
    pub start: usize,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig { power: 1, epsilon: 0.1, horizon: 8, search: 4, family: None, start: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub power: u32,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<usize>,
    pub start: usize,
    pub family_source: String,
    pub family_size: usize,
    pub matrix_side: MassInvariantEstimate,
    pub lambda0_side: MassInvariantEstimate,
    /// matrix-side estimate minus λ₀-side estimate.
    pub gap: f64,
    /// matrix side ≥ 1 − ε and λ₀ side < 0.05.
    pub separated: bool,
}

/// Bound on the λ₀ side below which the witness counts as separating.
pub const WITNESS_LAMBDA0_LIMIT: f64 = 0.05;

fn witness_c<C: Coeff>(spec: &SequenceSpec, cfg: &WitnessConfig) -> Result<WitnessReport> {
    let k = cfg.power.max(1);
    let h = cfg.horizon;
    let (family, start, alpha, source): (Vec<Poly<C>>, usize, Option<usize>, String) = match &cfg.family {
        Some(f) => (
            f.iter().map(|p| normalize(&p.map_coeffs(|q| C::from_rational(q)))).collect::<Result<_>>()?,
            cfg.start,
            None,
            "supplied".into(),
        ),
        None => {
            let mut found = None;
            'outer: for a in 1..spec.group().n() {
                for n0 in 0..=cfg.search {
                    let mut acc: Poly<C> = Poly::one();
                    for j in n0..=n0 + h {
                        acc = acc.mul(&spec.lambda_term::<C>(j, a)?.pow(k + 1));
                        spec.check_support(&acc)?;
                    }
                    if Sample::of(0, &acc).lower() > 1.0 - cfg.epsilon {
                        found = Some((a, n0));
                        break 'outer;
                    }
                }
            }
            let (a, n0) = found.ok_or_else(|| {
                Error::Precondition(format!(
                    "no character keeps ‖∏λ_α^{}‖ above 1 − ε at horizon {h}",
                    k + 1
                ))
            })?;
            let mut fam = Vec::with_capacity(h + 1);
            let mut acc: Poly<C> = Poly::one();
            for j in n0..=n0 + h {
                acc = acc.mul(&spec.lambda_term::<C>(j, a)?);
                fam.push(normalize(&acc)?);
            }
            (fam, n0, Some(a), "persistence".into())
        }
    };
    let mut mblocks = Vec::with_capacity(start + h + 1);
    let mut lblocks = Vec::with_capacity(start + h + 1);
    for j in 0..=start + h {
        let t = lift::<C>(&spec.term(j)?.pow(k));
        let mut one = Dense::zeros(1, 1);
        one.set(0, 0, t.lambda(0)?);
        lblocks.push(one);
        mblocks.push(t.to_dense());
    }
    let matrix_side = mass_invariant(&family, &mblocks, start, h)?;
    let lambda0_side = mass_invariant(&family, &lblocks, start, h)?;
    let m_lower = matrix_side
        .tables
        .iter()
        .map(|t| t.values.last().expect("nonempty").lower())
        .fold(f64::INFINITY, f64::min);
    let gap = m_lower - lambda0_side.s_l;
    Ok(WitnessReport {
        power: k,
        epsilon: cfg.epsilon,
        alpha,
        start,
        family_source: source,
        family_size: family.len(),
        separated: m_lower >= 1.0 - cfg.epsilon && lambda0_side.s_l < WITNESS_LAMBDA0_LIMIT,
        matrix_side,
        lambda0_side,
        gap,
    })
}

/// Separates (M_j^k) from (λ₀(M_j^k)) with the mass-cancellation invariant.
pub fn nonisomorphism_witness(spec: &SequenceSpec, cfg: &WitnessConfig) -> Result<WitnessReport> {
    if spec.group().n() < 2 {
        return Err(Error::TrivialGroup);
    }
    by_field!(spec.group(), witness_c(spec, cfg))
}

// ---------------------------------------------------------------------------
// Tensor-collapse condition

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionVerdict {
    /// Same ergodic sequence: every pair product decays.
    Certified,
    /// Every pair trajectory decays within the horizon.
    Observed,
    /// Some pair trajectory is exactly 1 throughout.
    FailedObserved,
    Inconclusive,
    NotErgodic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TensorCheck {
    pub same_sequence: bool,
    pub ergodic: Vec<ErgodicVerdict>,
    pub trajectories: Vec<TrajectoryReport>,
    pub verdict: ConditionVerdict,
}

fn mixed_pair_c<C: Coeff>(
    m: &SequenceSpec,
    n: &SequenceSpec,
    a: usize,
    b: usize,
    horizon: usize,
) -> Result<TrajectoryReport> {
    let mut acc: Poly<C> = Poly::one();
    let mut samples = Vec::new();
    for d in 0..=horizon {
        acc = acc.mul(&m.lambda_term::<C>(d, a)?.mul(&n.lambda_term::<C>(d, b)?));
        m.check_support(&acc)?;
        samples.push(Sample::of(d, &acc));
    }
    Ok(TrajectoryReport::from_samples(format!("mixed pair {a} {b}"), 0, samples))
}

/// Decay of ∏λ_α(M_j)λ_β(N_j) for all α ≠ β.
pub fn tensor_collapse_iso_check(m: &SequenceSpec, n: &SequenceSpec, horizon: usize) -> Result<TensorCheck> {
    if m.group() != n.group() {
        return Err(Error::GroupMismatch);
    }
    let same = m == n;
    let em = ergodicity_report(m, horizon)?.verdict;
    let ergodic = if same { vec![em] } else { vec![em, ergodicity_report(n, horizon)?.verdict] };
    if ergodic.contains(&ErgodicVerdict::NotErgodic) {
        return Ok(TensorCheck { same_sequence: same, ergodic, trajectories: vec![], verdict: ConditionVerdict::NotErgodic });
    }
    let k = m.group().n();
    let mut trajectories = Vec::new();
    for a in 0..k {
        for b in 0..k {
            if a == b || (same && b < a) {
                continue;
            }
            trajectories.push(if same {
                pair_norm_trajectory(m, a, b, 0, horizon)?
            } else {
                by_field!(m.group(), mixed_pair_c(m, n, a, b, horizon))?
            });
        }
    }
    let verdict = if same && ergodic.iter().all(|v| *v == ErgodicVerdict::Ergodic) {
        ConditionVerdict::Certified
    } else if trajectories.iter().all(|t| t.verdict == Verdict::TendsToZeroObserved) {
        ConditionVerdict::Observed
    } else if trajectories.iter().any(|t| t.samples.iter().all(|s| s.is_exactly_one())) {
        ConditionVerdict::FailedObserved
    } else {
        ConditionVerdict::Inconclusive
    };
    Ok(TensorCheck { same_sequence: same, ergodic, trajectories, verdict })
}

// ---------------------------------------------------------------------------
// Overlapping traces

/// One term N_j of an AT factorization chain with its rank-one factors.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainLink {
    pub n: DenseMatrix,
    pub v: DenseMatrix,
    pub w: DenseMatrix,
    pub error: Rational,
}

/// Chain over the blocks of a telescoping: each block is split in half and
/// factored with [`split_at_factor`].
pub fn at_chain(spec: &SequenceSpec, tel: &Telescoping) -> Result<Vec<ChainLink>> {
    let mut out = Vec::with_capacity(tel.num_blocks());
    for i in 0..tel.num_blocks() {
        let (a, b) = tel.block(i)?;
        let window: Vec<usize> = (a..=b).collect();
        let r = &window[..window.len().div_ceil(2)];
        let f = split_at_factor(spec, &window, r)?;
        let error = f.factor.error.exact.clone().expect("rational factorization");
        out.push(ChainLink { n: spec.subset_product(&window)?.to_dense(), v: f.factor.v, w: f.factor.w, error });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapBlock {
    pub block: usize,
    /// Inclusive chain range [n(i), n(i+1)].
    pub range: (usize, usize),
    pub trace: QPoly,
    /// (W_{n(i)}V_{n(i+1)})·∏ P_j with P_j = W_{j+1}V_j.
    pub approx: QPoly,
    pub defect: Rational,
    /// rows·Σ_j err_j·∏_{k>j}‖N_k‖·∏_{k<j}‖V_kW_k‖.
    pub audit_bound: Rational,
    pub audit_holds: bool,
}

/// tr N_{(i)} for both-ends blocks N_{n(i+1)}···N_{n(i)} against the rank-one chain.
pub fn overlap_trace(chain: &[ChainLink], cuts: &[usize]) -> Result<Vec<OverlapBlock>> {
    if chain.is_empty() {
        return Err(Error::Precondition("missing factorization context".into()));
    }
    if cuts.len() < 2 || cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonIncreasingCuts);
    }
    if let Some(&c) = cuts.last().filter(|&&c| c >= chain.len()) {
        return Err(Error::OutOfRange { index: c, len: chain.len() });
    }
    let entry = |d: DenseMatrix| d.get(0, 0).clone();
    let mut out = Vec::new();
    for (i, w) in cuts.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let mut prod = chain[a].n.clone();
        for link in &chain[a + 1..=b] {
            prod = link.n.mul(&prod)?;
        }
        let rows = prod.shape().0;
        let mut trace = QPoly::zero();
        for r in 0..rows {
            trace = trace.add(prod.get(r, r));
        }
        let mut approx = entry(chain[a].w.mul(&chain[b].v)?);
        for j in a..b {
            approx = approx.mul(&entry(chain[j + 1].w.mul(&chain[j].v)?));
        }
        let defect = trace.sub(&approx).norm();
        let n_norms: Vec<Rational> = chain[a..=b].iter().map(|l| l.n.operator_norm()).collect();
        let vw_norms = chain[a..=b]
            .iter()
            .map(|l| Ok(l.v.mul(&l.w)?.operator_norm()))
            .collect::<Result<Vec<Rational>>>()?;
        let mut audit = Rational::zero();
        for j in 0..=b - a {
            let mut t = chain[a + j].error.clone();
            for k in j + 1..=b - a {
                t = &t * &n_norms[k];
            }
            for k in 0..j {
                t = &t * &vw_norms[k];
            }
            audit = &audit + &t;
        }
        let audit_bound = &audit * &Rational::from_integer(rows as i64);
        out.push(OverlapBlock {
            block: i,
            range: (a, b),
            audit_holds: defect <= audit_bound,
            trace,
            approx,
            defect,
            audit_bound,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::qpoly;
    use crate::seqspec::{ExponentSchedule, OverlapMode};

    fn dyadic(n: u64) -> SequenceSpec {
        SequenceSpec::circulant_half(n, ExponentSchedule::geometric(2))
    }

    #[test]
    fn square_factor_of_identity() {
        let g = FiniteAbelianGroup::cyclic(3);
        let f = square_factor(&HemicirculantMatrix::identity(&g)).unwrap();
        // VW = |H|·E_ee, so the error is |H| − 1, not 0
        assert_eq!(f.factor.error.exact, Some(Rational::from_integer(2)));
        let t = FiniteAbelianGroup::cyclic(1);
        let f1 = square_factor(&HemicirculantMatrix::identity(&t)).unwrap();
        assert!(f1.factor.error.exact.unwrap().is_zero());
        assert!(f.spectral_agrees);
        assert_eq!(f.factor.v.get(0, 0), &QPoly::one());
        assert!(f.factor.v.get(1, 0).is_zero());
    }

    #[test]
    fn square_factor_spectral_identity_small_window() {
        let m = dyadic(3).window_product(0, 3).unwrap();
        let f = square_factor(&m).unwrap();
        assert!(f.spectral_agrees);
        assert!(f.wv_is_trace);
        assert!(f.factor.is_nonneg());
        assert!(f.factor.error.upper() <= f.proof_bound);
    }

    #[test]
    fn sectors_cover_all_pairs() {
        let mut fam = Vec::new();
        let mut next = 0;
        for k in 0..3 {
            for l in 0..3 {
                if k != l {
                    fam.push(LabeledSet { k, l, members: vec![next, next + 1] });
                    next += 2;
                }
            }
        }
        let u = sector_partition(&fam, 3).unwrap();
        for z in &fam {
            for j in &z.members {
                assert!(u[z.k].contains(j) && !u[z.l].contains(j));
            }
        }
        assert_eq!(sector_partition(&[], 4).unwrap(), vec![Vec::<usize>::new(); 4]);
        let bad = [LabeledSet { k: 0, l: 1, members: vec![1] }, LabeledSet { k: 1, l: 0, members: vec![1] }];
        assert_eq!(sector_partition(&bad, 2), Err(Error::OverlappingSets(1)));
    }

    #[test]
    fn watc_dyadic_z2() {
        let r = watc_factor(&dyadic(2), 0, 0.1, 64).unwrap();
        assert!(r.certified);
        assert!(r.wv_is_trace);
        assert_eq!(r.factor.positivity, Positivity::Real);
        assert!(r.factor.v.iter().chain(&r.factor.w).all(|p| p.as_exact().is_some()));
        assert_eq!(r.sub_blocks.len(), 2);
    }

    #[test]
    fn at_reduce_mass() {
        let spec = SequenceSpec::circulant_half(3, ExponentSchedule::geometric(3));
        let red = at_reduce_with(&spec, &Telescoping::triangular(4, OverlapMode::Standard)).unwrap();
        for i in 0..red.len() {
            assert!(red.total_mass[i].is_one());
            assert!(red.reduced[i].is_nonneg());
            let id = GroupElement { residues: vec![0] };
            assert_eq!(reduced_automorphism(&red, &id, i).unwrap(), red.reduced[i]);
        }
    }

    #[test]
    fn intertwining_exact_is_zero() {
        let spec = dyadic(2);
        let blocks = term_blocks(&spec, 3).unwrap();
        let ids: Vec<DenseMatrix> = blocks.iter().map(|_| Dense::identity(2)).collect();
        let out = intertwining_error(&blocks, &blocks, &ids, 2).unwrap();
        assert!(out.iter().all(|b| b.bound.is_zero()));
    }

    #[test]
    fn mass_dyadic_odometer_cancels() {
        let blocks: Vec<DenseMatrix> = (0..8)
            .map(|j| {
                let mut d = Dense::zeros(1, 1);
                d.set(0, 0, qpoly(&[(0, 1, 2), (1i64 << j, 1, 2)]));
                d
            })
            .collect();
        let fam = vec![qpoly(&[(0, 1, 2), (1, -1, 2)])];
        let e = mass_invariant(&fam, &blocks, 0, 7).unwrap();
        assert!(e.non_increasing);
        assert_eq!(e.tables[0].values[7].exact, Some(Rational::new(1, 256)));
        let e1 = mass_invariant(&fam, &blocks, 1, 6).unwrap();
        assert_eq!(e1.s_l, 1.0);
        let tel = Telescoping::new(vec![0, 2, 5, 8], OverlapMode::Standard).unwrap();
        assert!(mass_telescoped_agrees(&fam, &blocks, &tel).unwrap());
    }
}
