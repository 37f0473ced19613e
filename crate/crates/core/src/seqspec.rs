//! Sequence specifications (M_j): exponent schedules, template substitution,
//! explicit lists, powers, telescopings and window products.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::chargroup::{FiniteAbelianGroup, GroupElement};
use crate::error::{Error, Result};
use crate::hemicirc::{Hemi, HemicirculantMatrix};
use crate::laurent::{Poly, QPoly};
use crate::num::{Coeff, Exponent, Rational};

pub const DEFAULT_SUPPORT_CAP: usize = 1 << 22;
pub const DEFAULT_EXPONENT_GUARD_BITS: u64 = 4096;
/// Largest power f(j) accepted by power-of specs.
pub const MAX_TERM_POWER: u64 = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleKind {
    /// g(j) = base^j.
    Geometric { base: i64 },
    /// g(j) = Σ_i coeffs[i]·g(j−1−i) once the seeds run out.
    LinearRecurrence { seeds: Vec<i64>, coeffs: Vec<i64> },
    /// g(j) = (j+1)!.
    Factorial,
    /// g(j) = Σ_k coeffs[k]·j^k.
    Polynomial { coeffs: Vec<i64> },
    Explicit { values: Vec<Exponent> },
}

/// Lazily evaluated, memoized g(j).
#[derive(Debug)]
pub struct ExponentSchedule {
    kind: ScheduleKind,
    guard_bits: u64,
    memo: Mutex<Vec<Exponent>>,
}

impl Clone for ExponentSchedule {
    fn clone(&self) -> Self {
        ExponentSchedule {
            kind: self.kind.clone(),
            guard_bits: self.guard_bits,
            memo: Mutex::new(self.memo.lock().expect("memo lock").clone()),
        }
    }
}

impl PartialEq for ExponentSchedule {
    fn eq(&self, o: &Self) -> bool {
        self.kind == o.kind && self.guard_bits == o.guard_bits
    }
}

impl ExponentSchedule {
    pub fn new(kind: ScheduleKind) -> Result<Self> {
        match &kind {
            ScheduleKind::LinearRecurrence { seeds, coeffs } => {
                if coeffs.is_empty() || seeds.len() < coeffs.len() {
                    return Err(Error::InvalidArgument(
                        "linear-recurrence needs at least as many seeds as coefficients".into(),
                    ));
                }
            }
            ScheduleKind::Polynomial { coeffs } if coeffs.is_empty() => {
                return Err(Error::InvalidArgument("polynomial schedule has no coefficients".into()));
            }
            _ => {}
        }
        Ok(ExponentSchedule { kind, guard_bits: DEFAULT_EXPONENT_GUARD_BITS, memo: Mutex::new(Vec::new()) })
    }

    pub fn with_guard(mut self, bits: u64) -> Self {
        self.guard_bits = bits;
        self.memo = Mutex::new(Vec::new());
        self
    }

    pub fn geometric(base: i64) -> Self {
        ExponentSchedule::new(ScheduleKind::Geometric { base }).expect("valid")
    }

    /// Seeds (1, 2): 1, 2, 3, 5, 8, ...
    pub fn fibonacci() -> Self {
        ExponentSchedule::recurrence(vec![1, 2], vec![1, 1]).expect("valid")
    }

    pub fn recurrence(seeds: Vec<i64>, coeffs: Vec<i64>) -> Result<Self> {
        ExponentSchedule::new(ScheduleKind::LinearRecurrence { seeds, coeffs })
    }

    pub fn explicit(values: Vec<Exponent>) -> Self {
        ExponentSchedule::new(ScheduleKind::Explicit { values }).expect("valid")
    }

    pub fn constant(c: i64) -> Self {
        ExponentSchedule::new(ScheduleKind::Polynomial { coeffs: vec![c] }).expect("valid")
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn guard_bits(&self) -> u64 {
        self.guard_bits
    }

    /// Number of defined values (explicit lists are finite).
    pub fn len_limit(&self) -> Option<usize> {
        match &self.kind {
            ScheduleKind::Explicit { values } => Some(values.len()),
            _ => None,
        }
    }

    fn raw(&self, j: usize, prev: &[Exponent]) -> Result<Exponent> {
        Ok(match &self.kind {
            ScheduleKind::Geometric { base } => {
                if j == 0 {
                    Exponent::from(1i64)
                } else {
                    &prev[j - 1] * &Exponent::from(*base)
                }
            }
            ScheduleKind::LinearRecurrence { seeds, coeffs } => {
                if j < seeds.len() {
                    Exponent::from(seeds[j])
                } else {
                    let mut acc = Exponent::ZERO;
                    for (i, c) in coeffs.iter().enumerate() {
                        if *c != 0 {
                            acc = &acc + &(&prev[j - 1 - i] * &Exponent::from(*c));
                        }
                    }
                    acc
                }
            }
            ScheduleKind::Factorial => {
                let f = Exponent::from(j as i64 + 1);
                if j == 0 {
                    f
                } else {
                    &prev[j - 1] * &f
                }
            }
            ScheduleKind::Polynomial { coeffs } => {
                let x = Exponent::from(j as i64);
                let mut acc = Exponent::ZERO;
                for c in coeffs.iter().rev() {
                    acc = &(&acc * &x) + &Exponent::from(*c);
                }
                acc
            }
            ScheduleKind::Explicit { values } => values
                .get(j)
                .cloned()
                .ok_or(Error::OutOfRange { index: j, len: values.len() })?,
        })
    }

    /// g(j); errors on guard overflow or a non-positive value.
    pub fn value(&self, j: usize) -> Result<Exponent> {
        let mut memo = self.memo.lock().expect("memo lock");
        while memo.len() <= j {
            let k = memo.len();
            let v = self.raw(k, &memo)?;
            if v.bits() > self.guard_bits {
                return Err(Error::ExponentGuard { index: k, bits: v.bits(), limit: self.guard_bits });
            }
            if v.signum() <= 0 {
                return Err(Error::NonPositiveSchedule { index: k, value: v.to_string() });
            }
            memo.push(v);
        }
        Ok(memo[j].clone())
    }

    pub fn values(&self, from: usize, count: usize) -> Result<Vec<Exponent>> {
        (from..from + count).map(|j| self.value(j)).collect()
    }

    /// Whether g(j) is odd for every j ≥ j0, decided symbolically.
    /// Explicit lists are decided over their finite range.
    pub fn all_odd_from(&self, j0: usize) -> Result<bool> {
        match &self.kind {
            ScheduleKind::Geometric { base } => Ok(base.rem_euclid(2) == 1),
            ScheduleKind::Factorial => Ok(false),
            ScheduleKind::Polynomial { .. } => {
                Ok(self.value(j0)?.rem_euclid(2) == 1 && self.value(j0 + 1)?.rem_euclid(2) == 1)
            }
            ScheduleKind::Explicit { values } => {
                Ok(values.iter().skip(j0).all(|v| v.rem_euclid(2) == 1))
            }
            ScheduleKind::LinearRecurrence { seeds, coeffs } => {
                // the last L values mod 2 determine the future; walk until a state repeats
                let l = coeffs.len();
                let start = j0.max(seeds.len());
                for j in j0..start {
                    if self.value(j)?.rem_euclid(2) == 0 {
                        return Ok(false);
                    }
                }
                let mut state: Vec<u8> = (start - l..start)
                    .map(|j| self.value(j).map(|v| v.rem_euclid(2) as u8))
                    .collect::<Result<_>>()?;
                let mut seen = std::collections::HashSet::new();
                while seen.insert(state.clone()) {
                    let mut next = 0i64;
                    for (i, c) in coeffs.iter().enumerate() {
                        next += c.rem_euclid(2) * state[l - 1 - i] as i64;
                    }
                    let bit = (next % 2) as u8;
                    if bit == 0 {
                        return Ok(false);
                    }
                    state.remove(0);
                    state.push(bit);
                }
                Ok(true)
            }
        }
    }
}

impl Serialize for ExponentSchedule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.kind.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExponentSchedule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let kind = ScheduleKind::deserialize(d)?;
        ExponentSchedule::new(kind).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum SpecMode {
    /// M_j = template(x ↦ x^{g(j)}).
    Template { template: HemicirculantMatrix, schedule: ExponentSchedule },
    Explicit { terms: Vec<HemicirculantMatrix> },
    /// M_j = inner_j^{f(j)}.
    PowerOf { inner: Box<SequenceSpec>, power: ExponentSchedule },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceSpec {
    group: FiniteAbelianGroup,
    mode: SpecMode,
    recentered: bool,
    normalized_by: Option<Rational>,
    support_cap: usize,
    label: Option<String>,
}

fn validate_term(m: &HemicirculantMatrix, index: usize) -> Result<()> {
    if !m.is_nonneg() {
        return Err(Error::NegativeCoefficient);
    }
    let s = m.column_sum_at_one();
    if !s.is_one() {
        return Err(Error::NotStochastic { index, sum: s.to_string() });
    }
    Ok(())
}

impl SequenceSpec {
    /// Template spec; a template whose column sum at 1 is not 1 is divided by it
    /// and the divisor recorded.
    pub fn template(template: HemicirculantMatrix, schedule: ExponentSchedule) -> Result<Self> {
        if !template.is_nonneg() {
            return Err(Error::NegativeCoefficient);
        }
        let s = template.column_sum_at_one();
        if s.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let (template, normalized_by) = if s.is_one() {
            (template, None)
        } else {
            (template.scale_poly(&QPoly::constant(s.recip())), Some(s))
        };
        Ok(SequenceSpec {
            group: template.group().clone(),
            mode: SpecMode::Template { template, schedule },
            recentered: false,
            normalized_by,
            support_cap: DEFAULT_SUPPORT_CAP,
            label: None,
        })
    }

    pub fn explicit(group: FiniteAbelianGroup, terms: Vec<HemicirculantMatrix>) -> Result<Self> {
        for (i, t) in terms.iter().enumerate() {
            if t.group() != &group {
                return Err(Error::GroupMismatch);
            }
            validate_term(t, i)?;
        }
        Ok(SequenceSpec {
            group,
            mode: SpecMode::Explicit { terms },
            recentered: false,
            normalized_by: None,
            support_cap: DEFAULT_SUPPORT_CAP,
            label: None,
        })
    }

    pub fn power_of(inner: SequenceSpec, power: ExponentSchedule) -> Self {
        SequenceSpec {
            group: inner.group.clone(),
            support_cap: inner.support_cap,
            mode: SpecMode::PowerOf { inner: Box::new(inner), power },
            recentered: false,
            normalized_by: None,
            label: None,
        }
    }

    /// (I + x·m_[1])/2 over Z_n with schedule g.
    pub fn circulant_half(n: u64, schedule: ExponentSchedule) -> Self {
        let g = FiniteAbelianGroup::cyclic(n);
        let half = Rational::new(1, 2);
        let t = Hemi::basis(&g, 0, QPoly::constant(half.clone()))
            .add(&Hemi::basis(&g, 1 % n as usize, QPoly::monomial(Exponent::from(1i64), half)))
            .expect("same group");
        SequenceSpec::template(t, schedule).expect("stochastic template")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_support_cap(mut self, cap: usize) -> Self {
        self.support_cap = cap;
        self
    }

    pub fn with_recentered(mut self, on: bool) -> Self {
        self.recentered = on;
        self
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn mode(&self) -> &SpecMode {
        &self.mode
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn is_recentered(&self) -> bool {
        self.recentered
    }

    /// Column sum the template was divided by on load, if any.
    pub fn normalized_by(&self) -> Option<&Rational> {
        self.normalized_by.as_ref()
    }

    pub fn support_cap(&self) -> usize {
        self.support_cap
    }

    /// Template-substitution data is j-independent at x = 1.
    pub fn is_template(&self) -> bool {
        match &self.mode {
            SpecMode::Template { .. } => true,
            SpecMode::Explicit { .. } => false,
            SpecMode::PowerOf { inner, power } => {
                inner.is_template() && matches!(power.kind(), ScheduleKind::Polynomial { coeffs } if coeffs.len() == 1)
            }
        }
    }

    /// Number of available terms, if finite.
    pub fn len_limit(&self) -> Option<usize> {
        match &self.mode {
            SpecMode::Template { schedule, .. } => schedule.len_limit(),
            SpecMode::Explicit { terms } => Some(terms.len()),
            SpecMode::PowerOf { inner, power } => match (inner.len_limit(), power.len_limit()) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
        }
    }

    pub fn schedule(&self) -> Option<&ExponentSchedule> {
        match &self.mode {
            SpecMode::Template { schedule, .. } => Some(schedule),
            SpecMode::PowerOf { inner, .. } => inner.schedule(),
            SpecMode::Explicit { .. } => None,
        }
    }

    pub fn template_matrix(&self) -> Option<&HemicirculantMatrix> {
        match &self.mode {
            SpecMode::Template { template, .. } => Some(template),
            _ => None,
        }
    }

    /// The j-independent template behind M_j (recentering and constant
    /// powers applied), so that M_j = T(x ↦ x^{g(j)}).
    pub fn effective_template(&self) -> Option<HemicirculantMatrix> {
        let t = match &self.mode {
            SpecMode::Template { template, .. } => template.clone(),
            SpecMode::Explicit { .. } => return None,
            SpecMode::PowerOf { inner, power } => match power.kind() {
                ScheduleKind::Polynomial { coeffs } if coeffs.len() == 1 && coeffs[0] >= 1 => {
                    inner.effective_template()?.pow(coeffs[0] as u32)
                }
                _ => return None,
            },
        };
        if self.recentered {
            let f = SequenceSpec::argmax_at_one(&t);
            Some(t.translate(self.group.inv_idx(f)))
        } else {
            Some(t)
        }
    }

    /// c_{gj} = q_{gj}(1).
    pub fn values_at_one(&self, j: usize) -> Result<Vec<Rational>> {
        match self.effective_template() {
            Some(t) => {
                if let Some(l) = self.len_limit() {
                    if j >= l {
                        return Err(Error::OutOfRange { index: j, len: l });
                    }
                }
                Ok(t.values_at_one())
            }
            None => Ok(self.term(j)?.values_at_one()),
        }
    }

    /// Power f(j) for power-of specs, 1 otherwise.
    pub fn term_power(&self, j: usize) -> Result<u32> {
        match &self.mode {
            SpecMode::PowerOf { power, .. } => {
                let f = power.value(j)?;
                match f.as_i64() {
                    Some(v) if v >= 1 && v as u64 <= MAX_TERM_POWER => Ok(v as u32),
                    _ => Err(Error::InvalidArgument(format!(
                        "power f({j}) = {f} outside 1..={MAX_TERM_POWER}"
                    ))),
                }
            }
            _ => Ok(1),
        }
    }

    fn raw_term(&self, j: usize) -> Result<HemicirculantMatrix> {
        match &self.mode {
            SpecMode::Template { template, schedule } => template.substitute(&schedule.value(j)?),
            SpecMode::Explicit { terms } => {
                terms.get(j).cloned().ok_or(Error::OutOfRange { index: j, len: terms.len() })
            }
            SpecMode::PowerOf { inner, .. } => {
                let f = self.term_power(j)?;
                let t = inner.term(j)?.pow(f);
                self.guard(&t)?;
                Ok(t)
            }
        }
    }

    /// Element index where c_{gj} = q_{gj}(1) is maximal (lowest index on ties).
    pub fn argmax_at_one(m: &HemicirculantMatrix) -> usize {
        let vals = m.values_at_one();
        let mut best = 0;
        for (i, v) in vals.iter().enumerate() {
            if v > &vals[best] {
                best = i;
            }
        }
        best
    }

    /// M_j (recentered when the flag is set).
    pub fn term(&self, j: usize) -> Result<HemicirculantMatrix> {
        let t = self.raw_term(j)?;
        if self.recentered {
            let f = SequenceSpec::argmax_at_one(&t);
            Ok(t.translate(self.group.inv_idx(f)))
        } else {
            Ok(t)
        }
    }

    pub fn term_as<C: Coeff>(&self, j: usize) -> Result<Hemi<C>> {
        Ok(self.term(j)?.map_coeffs(|q| C::from_rational(q)))
    }

    /// λ_α(M_j).
    pub fn lambda_term<C: Coeff>(&self, j: usize, alpha: usize) -> Result<Poly<C>> {
        self.term_as::<C>(j)?.lambda(alpha)
    }

    fn guard(&self, m: &HemicirculantMatrix) -> Result<()> {
        let s = m.max_support();
        if s > self.support_cap {
            Err(Error::SupportGuard { terms: s, limit: self.support_cap })
        } else {
            Ok(())
        }
    }

    pub fn check_support<C: Coeff>(&self, p: &Poly<C>) -> Result<()> {
        if p.len() > self.support_cap {
            Err(Error::SupportGuard { terms: p.len(), limit: self.support_cap })
        } else {
            Ok(())
        }
    }

    /// ∏_{j0 ≤ j ≤ j0+d} M_j.
    pub fn window_product(&self, j0: usize, d: usize) -> Result<HemicirculantMatrix> {
        self.range_product(j0, j0 + d)
    }

    /// ∏_{a ≤ j ≤ b} M_j; identity when b < a.
    pub fn range_product(&self, a: usize, b: usize) -> Result<HemicirculantMatrix> {
        let mut acc = HemicirculantMatrix::identity(&self.group);
        for j in a..=b {
            if b < a {
                break;
            }
            acc = acc.mul(&self.term(j)?)?;
            self.guard(&acc)?;
        }
        Ok(acc)
    }

    /// ∏_{j ∈ set} M_j.
    pub fn subset_product(&self, set: &[usize]) -> Result<HemicirculantMatrix> {
        let mut acc = HemicirculantMatrix::identity(&self.group);
        for &j in set {
            acc = acc.mul(&self.term(j)?)?;
            self.guard(&acc)?;
        }
        Ok(acc)
    }

    /// λ_α(∏_{j ∈ set} M_j) as a product of eigenvalues.
    pub fn lambda_subset<C: Coeff>(&self, alpha: usize, set: &[usize]) -> Result<Poly<C>> {
        let mut acc = Poly::one();
        for &j in set {
            acc = acc.mul(&self.lambda_term::<C>(j, alpha)?);
            self.check_support(&acc)?;
        }
        Ok(acc)
    }

    pub fn lambda_window<C: Coeff>(&self, alpha: usize, j0: usize, d: usize) -> Result<Poly<C>> {
        let set: Vec<usize> = (j0..=j0 + d).collect();
        self.lambda_subset(alpha, &set)
    }

    /// Block i of a telescoping.
    pub fn block_product(&self, tel: &Telescoping, i: usize) -> Result<HemicirculantMatrix> {
        let (a, b) = tel.block(i)?;
        self.range_product(a, b)
    }

    pub fn to_file(&self) -> SpecFile {
        let coeffs = |m: &HemicirculantMatrix| -> Vec<(Vec<u64>, QPoly)> {
            m.coeffs()
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .map(|(i, p)| (m.group().residues(i), p.clone()))
                .collect()
        };
        let mut f = SpecFile {
            group: self.group.clone(),
            mode: String::new(),
            template_coeffs: None,
            schedule: None,
            terms: None,
            inner: None,
            power: None,
            recenter: self.recentered.then_some(true),
            label: self.label.clone(),
            support_cap: (self.support_cap != DEFAULT_SUPPORT_CAP).then_some(self.support_cap),
            normalized_by: self.normalized_by.clone(),
        };
        match &self.mode {
            SpecMode::Template { template, schedule } => {
                f.mode = "template".into();
                f.template_coeffs = Some(coeffs(template));
                f.schedule = Some(schedule.kind().clone());
            }
            SpecMode::Explicit { terms } => {
                f.mode = "explicit".into();
                f.terms = Some(terms.iter().map(coeffs).collect());
            }
            SpecMode::PowerOf { inner, power } => {
                f.mode = "power-of".into();
                f.inner = Some(Box::new(inner.to_file()));
                f.power = Some(power.kind().clone());
            }
        }
        f
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: SpecFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        f.into_spec()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("spec serializes")
    }
}

/// On-disk spec format.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub group: FiniteAbelianGroup,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_coeffs: Option<Vec<(Vec<u64>, QPoly)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<Vec<(Vec<u64>, QPoly)>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<SpecFile>>,
    /// f(j); for template and explicit modes this wraps the spec in a power.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<ScheduleKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recenter: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_cap: Option<usize>,
    /// Informational; written when the loader normalized the template.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized_by: Option<Rational>,
}

fn hemi_from_pairs(group: &FiniteAbelianGroup, field: &str, pairs: Vec<(Vec<u64>, QPoly)>) -> Result<HemicirculantMatrix> {
    for (r, _) in &pairs {
        if r.len() != group.cyclic_orders().len() || r.iter().zip(group.cyclic_orders()).any(|(x, d)| x >= d) {
            return Err(Error::Parse(format!("{field}: element {r:?} is not in the group")));
        }
    }
    Hemi::from_pairs(group.clone(), pairs.into_iter().map(|(r, p)| (GroupElement { residues: r }, p)))
}

impl SpecFile {
    pub fn into_spec(self) -> Result<SequenceSpec> {
        let field_err = |field: &str, e: Error| Error::Parse(format!("{field}: {e}"));
        let mut spec = match self.mode.as_str() {
            "template" => {
                let tc = self.template_coeffs.ok_or_else(|| Error::Parse("template_coeffs: missing".into()))?;
                let t = hemi_from_pairs(&self.group, "template_coeffs", tc)?;
                let kind = self.schedule.ok_or_else(|| Error::Parse("schedule: missing".into()))?;
                let sched = ExponentSchedule::new(kind).map_err(|e| field_err("schedule", e))?;
                let s = SequenceSpec::template(t, sched).map_err(|e| field_err("template_coeffs", e))?;
                match self.power {
                    Some(p) => SequenceSpec::power_of(
                        s,
                        ExponentSchedule::new(p).map_err(|e| field_err("power", e))?,
                    ),
                    None => s,
                }
            }
            "explicit" => {
                let terms = self.terms.ok_or_else(|| Error::Parse("terms: missing".into()))?;
                let ms = terms
                    .into_iter()
                    .enumerate()
                    .map(|(i, t)| hemi_from_pairs(&self.group, &format!("terms[{i}]"), t))
                    .collect::<Result<Vec<_>>>()?;
                let s = SequenceSpec::explicit(self.group.clone(), ms).map_err(|e| field_err("terms", e))?;
                match self.power {
                    Some(p) => SequenceSpec::power_of(
                        s,
                        ExponentSchedule::new(p).map_err(|e| field_err("power", e))?,
                    ),
                    None => s,
                }
            }
            "power-of" => {
                let inner = self.inner.ok_or_else(|| Error::Parse("inner: missing".into()))?;
                if inner.group != self.group {
                    return Err(Error::Parse("inner: group differs from the outer group".into()));
                }
                let inner = inner.into_spec()?;
                let p = self.power.ok_or_else(|| Error::Parse("power: missing".into()))?;
                SequenceSpec::power_of(inner, ExponentSchedule::new(p).map_err(|e| field_err("power", e))?)
            }
            other => return Err(Error::Parse(format!("mode: unknown mode {other:?}"))),
        };
        if let Some(c) = self.support_cap {
            spec = spec.with_support_cap(c);
        }
        if let Some(l) = self.label {
            spec = spec.with_label(l);
        }
        Ok(spec.with_recentered(self.recenter.unwrap_or(false)))
    }
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapMode {
    Standard,
    BothEnds,
}

/// Cuts n(0) < n(1) < ...; block i covers [n(i), n(i+1)) or, with both ends,
/// [n(i), n(i+1)].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Telescoping {
    cuts: Vec<usize>,
    mode: OverlapMode,
}

impl Telescoping {
    pub fn new(cuts: Vec<usize>, mode: OverlapMode) -> Result<Self> {
        if cuts.len() < 2 {
            return Err(Error::InvalidArgument("a telescoping needs at least two cuts".into()));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NonIncreasingCuts);
        }
        Ok(Telescoping { cuts, mode })
    }

    /// n(i+1) − n(i) = i + 1 from n(0) = 0: cuts k(k+1)/2.
    pub fn triangular(blocks: usize, mode: OverlapMode) -> Self {
        Telescoping { cuts: (0..=blocks).map(|k| k * (k + 1) / 2).collect(), mode }
    }

    pub fn cuts(&self) -> &[usize] {
        &self.cuts
    }

    pub fn mode(&self) -> OverlapMode {
        self.mode
    }

    pub fn num_blocks(&self) -> usize {
        self.cuts.len() - 1
    }

    /// Inclusive index range of block i.
    pub fn block(&self, i: usize) -> Result<(usize, usize)> {
        if i + 1 >= self.cuts.len() {
            return Err(Error::OutOfRange { index: i, len: self.num_blocks() });
        }
        let (a, b) = (self.cuts[i], self.cuts[i + 1]);
        Ok(match self.mode {
            OverlapMode::Standard => (a, b - 1),
            OverlapMode::BothEnds => (a, b),
        })
    }

    pub fn with_mode(&self, mode: OverlapMode) -> Self {
        Telescoping { cuts: self.cuts.clone(), mode }
    }
}

/// Per-block outcome of the greedy telescoping search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockRecord {
    pub start: usize,
    pub len: usize,
    pub epsilon: f64,
    /// Certified upper bound on max_{α≠β} ‖λ_α λ_β(block)‖.
    pub pair_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TelescopingSearch {
    pub telescoping: Telescoping,
    pub blocks: Vec<BlockRecord>,
}

/// ε for the 0-based block t: 2^{-(t+1)}.
pub fn default_epsilon(t: usize) -> f64 {
    0.5f64.powi(t as i32 + 1)
}

/// Unordered nontrivial pairs α < β.
pub fn character_pairs(group: &FiniteAbelianGroup) -> Vec<(usize, usize)> {
    let n = group.n();
    let mut v = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            v.push((a, b));
        }
    }
    v
}

fn find_telescoping_c<C: Coeff>(
    spec: &SequenceSpec,
    start: usize,
    blocks: usize,
    eps: &dyn Fn(usize) -> f64,
    block_cap: usize,
) -> Result<TelescopingSearch> {
    let pairs = character_pairs(spec.group());
    let mut cuts = vec![start];
    let mut records = Vec::new();
    let mut pos = start;
    for t in 0..blocks {
        let e = eps(t);
        // per-pair running products: exact polynomial (dropped past the
        // support cap) and the product of per-term norms
        let mut exact: Vec<Option<Poly<C>>> = vec![Some(Poly::one()); pairs.len()];
        let mut factor_bound = vec![1.0f64; pairs.len()];
        let mut len = 0;
        loop {
            if len == block_cap || spec.len_limit().is_some_and(|l| pos + len >= l) {
                return Err(Error::TelescopingStalled { block: t, cap: block_cap });
            }
            let term = spec.term_as::<C>(pos + len)?;
            let lams = term.eigenvalues()?;
            len += 1;
            let mut worst = 0.0f64;
            for (k, &(a, b)) in pairs.iter().enumerate() {
                let f = lams[a].mul(&lams[b]);
                factor_bound[k] *= f.norm_bound().upper() * (1.0 + 1e-15);
                let mut best = factor_bound[k];
                if let Some(p) = exact[k].take() {
                    let q = p.mul(&f);
                    best = best.min(q.norm_bound().upper());
                    if q.len() <= spec.support_cap() {
                        exact[k] = Some(q);
                    }
                }
                worst = worst.max(best);
            }
            if worst < e {
                records.push(BlockRecord { start: pos, len, epsilon: e, pair_norm: worst });
                pos += len;
                cuts.push(pos);
                break;
            }
        }
    }
    Ok(TelescopingSearch { telescoping: Telescoping::new(cuts, OverlapMode::Standard)?, blocks: records })
}

/// Greedy telescoping: each block grows until every pair norm drops below ε_t.
pub fn find_telescoping(
    spec: &SequenceSpec,
    start: usize,
    blocks: usize,
    eps: &dyn Fn(usize) -> f64,
    block_cap: usize,
) -> Result<TelescopingSearch> {
    if spec.group().n() < 2 {
        return Err(Error::TrivialGroup);
    }
    if spec.group().is_real() {
        find_telescoping_c::<Rational>(spec, start, blocks, eps, block_cap)
    } else {
        find_telescoping_c::<crate::num::Cyclo>(spec, start, blocks, eps, block_cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::qpoly;

    #[test]
    fn schedules() {
        assert_eq!(ExponentSchedule::geometric(3).value(2).unwrap(), Exponent::from(9i64));
        let f = ExponentSchedule::fibonacci();
        assert_eq!(f.values(0, 6).unwrap(), [1, 2, 3, 5, 8, 13].map(|v| Exponent::from(v as i64)));
        let fact = ExponentSchedule::new(ScheduleKind::Factorial).unwrap();
        assert_eq!(fact.value(4).unwrap(), Exponent::from(120i64));
        let poly = ExponentSchedule::new(ScheduleKind::Polynomial { coeffs: vec![1, 0, 1] }).unwrap();
        assert_eq!(poly.value(3).unwrap(), Exponent::from(10i64));
        let g = ExponentSchedule::geometric(2).with_guard(10);
        assert!(matches!(g.value(12), Err(Error::ExponentGuard { .. })));
        let bad = ExponentSchedule::recurrence(vec![1, 1], vec![1, -2]).unwrap();
        assert!(matches!(bad.value(2), Err(Error::NonPositiveSchedule { .. })));
    }

    #[test]
    fn parity_decisions() {
        assert!(ExponentSchedule::recurrence(vec![1, 1, 1], vec![1, 1, 1]).unwrap().all_odd_from(0).unwrap());
        assert!(!ExponentSchedule::fibonacci().all_odd_from(0).unwrap());
        assert!(ExponentSchedule::geometric(5).all_odd_from(0).unwrap());
        assert!(!ExponentSchedule::geometric(2).all_odd_from(1).unwrap());
    }

    #[test]
    fn template_term() {
        let s = SequenceSpec::circulant_half(3, ExponentSchedule::geometric(3));
        let t = s.term(2).unwrap();
        assert_eq!(t.coeff(0), &qpoly(&[(0, 1, 2)]));
        assert_eq!(t.coeff(1), &qpoly(&[(9, 1, 2)]));
        assert_eq!(s.term(2).unwrap(), t);
    }

    #[test]
    fn power_term_squares() {
        let inner = SequenceSpec::circulant_half(3, ExponentSchedule::geometric(3));
        let p = SequenceSpec::power_of(inner.clone(), ExponentSchedule::constant(2));
        let m = inner.term(1).unwrap();
        assert_eq!(p.term(1).unwrap(), m.mul(&m).unwrap());
    }

    #[test]
    fn unnormalized_template_is_rescaled() {
        let g = FiniteAbelianGroup::cyclic(2);
        let t = Hemi::new(g, vec![qpoly(&[(0, 1, 2), (2, 1, 2)]), qpoly(&[(1, 1, 2)])]).unwrap();
        let s = SequenceSpec::template(t, ExponentSchedule::geometric(3)).unwrap();
        assert_eq!(s.normalized_by(), Some(&Rational::new(3, 2)));
        assert!(s.term(0).unwrap().column_sum_at_one().is_one());
    }

    #[test]
    fn window_examples() {
        let s = SequenceSpec::circulant_half(3, ExponentSchedule::geometric(3));
        assert_eq!(s.window_product(4, 0).unwrap(), s.term(4).unwrap());
        let w = s.window_product(0, 1).unwrap();
        // (I + xP)(I + x³P)/4: coefficient of P^u collects exponents with digit sum u
        assert_eq!(w.coeff(0), &qpoly(&[(0, 1, 4)]));
        assert_eq!(w.coeff(1), &qpoly(&[(1, 1, 4), (3, 1, 4)]));
        assert_eq!(w.coeff(2), &qpoly(&[(4, 1, 4)]));
    }

    #[test]
    fn telescoping_rules() {
        assert!(matches!(Telescoping::new(vec![0, 2, 2], OverlapMode::Standard), Err(Error::NonIncreasingCuts)));
        let t = Telescoping::triangular(4, OverlapMode::BothEnds);
        assert_eq!(t.cuts(), &[0, 1, 3, 6, 10]);
        assert_eq!(t.block(1).unwrap(), (1, 3));
        assert_eq!(t.with_mode(OverlapMode::Standard).block(1).unwrap(), (1, 2));
    }

    #[test]
    fn spec_json_round_trip() {
        let s = SequenceSpec::circulant_half(3, ExponentSchedule::geometric(3)).with_label("z3");
        let back = SequenceSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let e = SequenceSpec::from_json(r#"{"group":{"cyclic_orders":[2]},"mode":"template","schedule":{"kind":"geometric","base":2}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("template_coeffs"));
    }
}
