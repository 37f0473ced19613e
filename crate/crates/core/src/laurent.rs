//! Sparse Laurent polynomials over a coefficient field, with the l¹ norm.
//!
//! Terms are kept sorted by exponent with no zero coefficients, so equality
//! is structural and serialization is deterministic.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::num::{Bound, CBall, Coeff, Exponent, Rational, UNIT_ROUNDOFF};

/// Sparse Laurent polynomial Σ c_e x^e.
#[derive(Clone, PartialEq)]
pub struct Poly<C> {
    terms: Vec<(Exponent, C)>,
}

pub type QPoly = Poly<Rational>;
pub type CPoly = Poly<CBall>;

impl<C: Coeff> Default for Poly<C> {
    fn default() -> Self {
        Poly::zero()
    }
}

impl<C: Coeff> Poly<C> {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Poly::monomial(Exponent::ZERO, c)
    }

    pub fn monomial(e: Exponent, c: C) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(e, c)] }
        }
    }

    /// x^e with unit coefficient.
    pub fn x_pow(e: impl Into<Exponent>) -> Self {
        Poly::monomial(e.into(), C::one())
    }

    /// Builds from arbitrary (exponent, coefficient) pairs; duplicates add.
    pub fn from_terms<I: IntoIterator<Item = (Exponent, C)>>(it: I) -> Self {
        let mut v: Vec<(Exponent, C)> = it.into_iter().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        Poly { terms: collapse(v) }
    }

    /// Trusted constructor from already sorted, zero-free terms.
    fn from_sorted(terms: Vec<(Exponent, C)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(terms.iter().all(|(_, c)| !c.is_zero()));
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Exponent, C)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Exponent, C)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &Exponent) -> C {
        match self.terms.binary_search_by(|t| t.0.cmp(e)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => C::zero(),
        }
    }

    pub fn min_exp(&self) -> Option<&Exponent> {
        self.terms.first().map(|t| &t.0)
    }

    pub fn max_exp(&self) -> Option<&Exponent> {
        self.terms.last().map(|t| &t.0)
    }

    pub fn add(&self, o: &Self) -> Self {
        Poly::from_sorted(merge(&self.terms, &o.terms, |c| c.clone()))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Poly::from_sorted(merge(&self.terms, &o.terms, |c| c.neg()))
    }

    pub fn neg(&self) -> Self {
        Poly::from_sorted(self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect())
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly::from_sorted(
            self.terms
                .iter()
                .map(|(e, c)| (e.clone(), c.mul(s)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        )
    }

    /// Multiply by x^k.
    pub fn shift(&self, k: &Exponent) -> Self {
        Poly::from_sorted(self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect())
    }

    /// Convolution product.
    pub fn mul(&self, o: &Self) -> Self {
        let (small, big) = if self.len() <= o.len() { (self, o) } else { (o, self) };
        if small.is_empty() {
            return Poly::zero();
        }
        if small.len() <= 8 {
            // repeated linear merges of shifted copies
            let mut acc: Vec<(Exponent, C)> = Vec::new();
            for (e, c) in &small.terms {
                let part: Vec<(Exponent, C)> =
                    big.terms.iter().map(|(f, d)| (e + f, c.mul(d))).collect();
                acc = if acc.is_empty() {
                    part.into_iter().filter(|(_, c)| !c.is_zero()).collect()
                } else {
                    merge(&acc, &part, |c| c.clone())
                };
            }
            return Poly::from_sorted(acc);
        }
        let mut v = Vec::with_capacity(small.len() * big.len());
        for (e, c) in &small.terms {
            for (f, d) in &big.terms {
                v.push((e + f, c.mul(d)));
            }
        }
        v.sort_by(|a, b| a.0.cmp(&b.0));
        Poly::from_sorted(collapse(v))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// x ↦ x^m.
    pub fn substitute(&self, m: &Exponent) -> Result<Self> {
        if m.is_zero() {
            return Err(Error::InvalidArgument("substitution x -> x^0 is not allowed".into()));
        }
        let mut v: Vec<(Exponent, C)> =
            self.terms.iter().map(|(e, c)| (e * m, c.clone())).collect();
        if m.signum() < 0 {
            v.reverse();
        }
        Ok(Poly::from_sorted(v))
    }

    /// Value at x = 1.
    pub fn eval_one(&self) -> C {
        let mut acc = C::zero();
        for (_, c) in &self.terms {
            acc = acc.add(c);
        }
        acc
    }

    /// Certified upper/lower bound for the l¹ norm.
    pub fn norm_bound(&self) -> Bound {
        let mut v = 0.0;
        let mut err = 0.0;
        for (_, c) in &self.terms {
            let m = c.modulus();
            v += m.value;
            err += m.err;
        }
        err += v * UNIT_ROUNDOFF * (self.terms.len() as f64 + 1.0);
        Bound { value: v, err }
    }

    /// Exact l¹ norm when every coefficient modulus is rational.
    pub fn exact_norm(&self) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (_, c) in &self.terms {
            acc = &acc + &c.exact_modulus()?;
        }
        Some(acc)
    }

    /// Collects coefficients with exponent ≡ r (mod k), exponents kept.
    pub fn residue_class(&self, k: u64, r: u64) -> Self {
        Poly::from_sorted(
            self.terms.iter().filter(|(e, _)| e.rem_euclid(k) == r).cloned().collect(),
        )
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::from_sorted(
            self.terms
                .iter()
                .map(|(e, c)| (e.clone(), f(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        )
    }

    pub fn to_cpoly(&self) -> CPoly {
        self.map_coeffs(|c| c.to_cball())
    }

    /// Exponents all divisible by k.
    pub fn in_subring(&self, k: u64) -> bool {
        self.terms.iter().all(|(e, _)| e.rem_euclid(k) == 0)
    }

    /// Largest exponent magnitude in bits.
    pub fn max_exp_bits(&self) -> u64 {
        self.terms.iter().map(|(e, _)| e.bits()).max().unwrap_or(0)
    }
}

fn collapse<C: Coeff>(v: Vec<(Exponent, C)>) -> Vec<(Exponent, C)> {
    let mut out: Vec<(Exponent, C)> = Vec::with_capacity(v.len());
    for (e, c) in v {
        match out.last_mut() {
            Some(last) if last.0 == e => last.1 = last.1.add(&c),
            _ => {
                if let Some(last) = out.last() {
                    if last.1.is_zero() {
                        out.pop();
                    }
                }
                out.push((e, c));
            }
        }
    }
    if let Some(last) = out.last() {
        if last.1.is_zero() {
            out.pop();
        }
    }
    out
}

fn merge<C: Coeff>(
    a: &[(Exponent, C)],
    b: &[(Exponent, C)],
    fb: impl Fn(&C) -> C,
) -> Vec<(Exponent, C)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push((b[j].0.clone(), fb(&b[j].1)));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let c = a[i].1.add(&fb(&b[j].1));
                if !c.is_zero() {
                    out.push((a[i].0.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend(b[j..].iter().map(|(e, c)| (e.clone(), fb(c))));
    out
}

impl Poly<Rational> {
    /// Exact l¹ norm.
    pub fn norm(&self) -> Rational {
        let mut acc = Rational::zero();
        for (_, c) in &self.terms {
            acc = &acc + &c.abs();
        }
        acc
    }

    pub fn is_nonneg(&self) -> bool {
        self.terms.iter().all(|(_, c)| !c.is_negative())
    }

    /// Coefficient-wise minimum (absent terms count as 0).
    pub fn wedge(&self, o: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        let z = Rational::zero();
        while i < self.terms.len() || j < o.terms.len() {
            let ord = match (self.terms.get(i), o.terms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            let (e, m) = match ord {
                std::cmp::Ordering::Less => {
                    let a = &self.terms[i];
                    i += 1;
                    (a.0.clone(), Ord::min(a.1.clone(), z.clone()))
                }
                std::cmp::Ordering::Greater => {
                    let b = &o.terms[j];
                    j += 1;
                    (b.0.clone(), Ord::min(b.1.clone(), z.clone()))
                }
                std::cmp::Ordering::Equal => {
                    let (a, b) = (&self.terms[i], &o.terms[j]);
                    i += 1;
                    j += 1;
                    (a.0.clone(), Ord::min(a.1.clone(), b.1.clone()))
                }
            };
            if !m.is_zero() {
                out.push((e, m));
            }
        }
        Poly::from_sorted(out)
    }

    /// Split a = Σ_{i<k} x^i a^{(i)} with a^{(i)} ∈ B = span x^{kZ}.
    pub fn subring_split(&self, k: u64) -> Result<(SubringDecomposition, Rational)> {
        if k == 0 {
            return Err(Error::InvalidArgument("subring modulus must be positive".into()));
        }
        let mut comps: Vec<Vec<(Exponent, Rational)>> = vec![Vec::new(); k as usize];
        for (e, c) in &self.terms {
            let r = e.rem_euclid(k);
            comps[r as usize].push((e - &Exponent::from(r), c.clone()));
        }
        let components: Vec<QPoly> = comps.into_iter().map(Poly::from_sorted).collect();
        let dist = components.iter().skip(1).map(|p| p.norm()).sum();
        Ok((SubringDecomposition { modulus: k, components }, dist))
    }

    pub fn to_cyclo(&self) -> Poly<crate::num::Cyclo> {
        self.map_coeffs(|c| crate::num::Cyclo::rational(c.clone()))
    }
}

impl Poly<crate::num::Cyclo> {
    /// The polynomial with rational coefficients, if every coefficient is rational.
    pub fn as_rational(&self) -> Option<QPoly> {
        let mut v = Vec::with_capacity(self.len());
        for (e, c) in &self.terms {
            v.push((e.clone(), c.as_rational()?));
        }
        Some(Poly::from_sorted(v))
    }
}

/// a = Σ_i x^i a^{(i)}, each a^{(i)} supported on multiples of k.
#[derive(Clone, Debug, PartialEq)]
pub struct SubringDecomposition {
    pub modulus: u64,
    pub components: Vec<QPoly>,
}

impl SubringDecomposition {
    pub fn reconstruct(&self) -> QPoly {
        let mut acc = Poly::zero();
        for (i, c) in self.components.iter().enumerate() {
            acc = acc.add(&c.shift(&Exponent::from(i as i64)));
        }
        acc
    }

    /// a^{(i)}(1) for each i.
    pub fn masses(&self) -> Vec<Rational> {
        self.components.iter().map(|c| c.eval_one()).collect()
    }
}

impl<C: Coeff> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c:?})x^{e}")?;
        }
        Ok(())
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

// ---------------------------------------------------------------------------
// Dynamic-mode polynomial

/// Arithmetic mode of a [`LaurentPoly`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldMode {
    ExactRational,
    ComplexFloat,
}

/// Polynomial whose field is chosen at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum LaurentPoly {
    Exact(QPoly),
    Complex(CPoly),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl LaurentPoly {
    pub fn mode(&self) -> FieldMode {
        match self {
            LaurentPoly::Exact(_) => FieldMode::ExactRational,
            LaurentPoly::Complex(_) => FieldMode::ComplexFloat,
        }
    }

    pub fn arithmetic(&self, other: &LaurentPoly, op: ArithOp) -> Result<LaurentPoly> {
        match (self, other) {
            (LaurentPoly::Exact(a), LaurentPoly::Exact(b)) => Ok(LaurentPoly::Exact(match op {
                ArithOp::Add => a.add(b),
                ArithOp::Sub => a.sub(b),
                ArithOp::Mul => a.mul(b),
            })),
            (LaurentPoly::Complex(a), LaurentPoly::Complex(b)) => {
                Ok(LaurentPoly::Complex(match op {
                    ArithOp::Add => a.add(b),
                    ArithOp::Sub => a.sub(b),
                    ArithOp::Mul => a.mul(b),
                }))
            }
            _ => Err(Error::ModeMismatch),
        }
    }

    pub fn scale_rational(&self, s: &Rational) -> LaurentPoly {
        match self {
            LaurentPoly::Exact(a) => LaurentPoly::Exact(a.scale(s)),
            LaurentPoly::Complex(a) => LaurentPoly::Complex(a.scale(&s.to_cball())),
        }
    }

    pub fn substitute(&self, m: &Exponent) -> Result<LaurentPoly> {
        Ok(match self {
            LaurentPoly::Exact(a) => LaurentPoly::Exact(a.substitute(m)?),
            LaurentPoly::Complex(a) => LaurentPoly::Complex(a.substitute(m)?),
        })
    }

    /// (‖p‖, p(1)) as certified bounds; the exact variant is in [`QPoly::norm`].
    pub fn norm_and_eval(&self) -> (Bound, CBall) {
        match self {
            LaurentPoly::Exact(a) => (Bound::from_rational(&a.norm()), a.eval_one().to_cball()),
            LaurentPoly::Complex(a) => (a.norm_bound(), a.eval_one()),
        }
    }

    pub fn wedge_inf(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        match (self, other) {
            (LaurentPoly::Exact(a), LaurentPoly::Exact(b)) => Ok(LaurentPoly::Exact(a.wedge(b))),
            _ => Err(Error::ModeMismatch),
        }
    }

    pub fn as_exact(&self) -> Option<&QPoly> {
        match self {
            LaurentPoly::Exact(a) => Some(a),
            LaurentPoly::Complex(_) => None,
        }
    }
}

impl Serialize for QPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<[String; 3]> = self
            .terms
            .iter()
            .map(|(e, c)| [e.to_string(), c.numer().to_string(), c.denom().to_string()])
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<Vec<serde_json::Value>> = Vec::deserialize(d)?;
        let mut terms = Vec::with_capacity(raw.len());
        for t in raw {
            let s = |v: &serde_json::Value| -> String {
                match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                }
            };
            let (e, q) = match t.len() {
                3 => {
                    let e: Exponent = s(&t[0]).parse().map_err(D::Error::custom)?;
                    let q: Rational =
                        format!("{}/{}", s(&t[1]), s(&t[2])).parse().map_err(D::Error::custom)?;
                    (e, q)
                }
                2 => {
                    let e: Exponent = s(&t[0]).parse().map_err(D::Error::custom)?;
                    let q: Rational = s(&t[1]).parse().map_err(D::Error::custom)?;
                    (e, q)
                }
                n => {
                    return Err(D::Error::custom(format!(
                        "polynomial term must have 2 or 3 entries, got {n}"
                    )))
                }
            };
            terms.push((e, q));
        }
        Ok(Poly::from_terms(terms))
    }
}

impl Serialize for CPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (e, c) in &self.terms {
            seq.serialize_element(&(e.to_string(), c.re, c.im, c.err))?;
        }
        seq.end()
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LaurentPoly::Exact(a) => a.serialize(s),
            LaurentPoly::Complex(a) => a.serialize(s),
        }
    }
}

/// Shorthand for building exact polynomials in tests and examples:
/// `qpoly(&[(0, 1, 2), (1, 1, 2)])` is (1 + x)/2.
pub fn qpoly(terms: &[(i64, i64, i64)]) -> QPoly {
    Poly::from_terms(terms.iter().map(|&(e, n, d)| (Exponent::from(e), Rational::new(n, d))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Cyclo;

    #[test]
    fn telescoping_product() {
        let p = qpoly(&[(0, 1, 1), (1, 1, 1)]);
        let q = qpoly(&[(0, 1, 1), (1, -1, 1)]);
        assert_eq!(p.mul(&q), qpoly(&[(0, 1, 1), (2, -1, 1)]));
    }

    #[test]
    fn gamma3_polynomial_exact() {
        // ((1+ξx)(1+ξ²x))/4 = (1 − x + x²)/4
        let xi = Cyclo::root(3, 1);
        let xi2 = Cyclo::root(3, 2);
        let a = Poly::from_terms(vec![
            (Exponent::ZERO, Cyclo::one()),
            (Exponent::from(1i64), xi),
        ]);
        let b = Poly::from_terms(vec![
            (Exponent::ZERO, Cyclo::one()),
            (Exponent::from(1i64), xi2),
        ]);
        let quarter = Cyclo::rational(Rational::new(1, 4));
        let prod = a.mul(&b).scale(&quarter).as_rational().unwrap();
        let expected = qpoly(&[(0, 1, 4), (1, -1, 4), (2, 1, 4)]);
        assert_eq!(prod, expected);
        assert_eq!(prod.norm(), Rational::new(3, 4));
        assert_eq!(prod.eval_one(), Rational::new(1, 4));
    }

    #[test]
    fn additive_inverse_is_empty() {
        let p = qpoly(&[(-3, 2, 7), (5, -1, 3)]);
        assert!(p.add(&p.neg()).terms().is_empty());
    }

    #[test]
    fn substitution_examples() {
        let p = qpoly(&[(0, 1, 2), (1, 1, 2)]);
        assert_eq!(p.substitute(&4i64.into()).unwrap(), qpoly(&[(0, 1, 2), (4, 1, 2)]));
        assert_eq!(p.substitute(&1i64.into()).unwrap(), p);
        let r = qpoly(&[(0, 1, 1), (1, -1, 1), (2, 1, 1)]);
        assert_eq!(
            r.substitute(&(-1i64).into()).unwrap(),
            qpoly(&[(0, 1, 1), (-1, -1, 1), (-2, 1, 1)])
        );
        assert!(p.substitute(&0i64.into()).is_err());
    }

    #[test]
    fn norm_examples() {
        let p = qpoly(&[(0, 1, 4), (1, -1, 4), (2, 1, 4)]);
        assert_eq!((p.norm(), p.eval_one()), (Rational::new(3, 4), Rational::new(1, 4)));
        let z = QPoly::zero();
        assert_eq!((z.norm(), z.eval_one()), (Rational::zero(), Rational::zero()));
        let huge = Exponent::pow_u(2, 40);
        let h = Poly::from_terms(vec![
            (Exponent::ZERO, Rational::new(1, 2)),
            (huge, Rational::new(1, 2)),
        ]);
        assert_eq!((h.norm(), h.eval_one()), (Rational::one(), Rational::one()));
    }

    #[test]
    fn wedge_examples() {
        let a = qpoly(&[(0, 1, 1), (1, 2, 1)]);
        let b = qpoly(&[(0, 2, 1), (1, 1, 1)]);
        assert_eq!(a.wedge(&b), qpoly(&[(0, 1, 1), (1, 1, 1)]));
        assert_eq!(a.wedge(&a), a);
        assert!(qpoly(&[(1, 1, 1)]).wedge(&qpoly(&[(2, 1, 1)])).is_zero());
        let c = LaurentPoly::Complex(a.to_cpoly());
        assert!(c.wedge_inf(&LaurentPoly::Exact(b)).is_err());
    }

    #[test]
    fn subring_split_examples() {
        let a = qpoly(&[(0, 1, 1), (1, 1, 1), (3, 1, 1)]);
        let (d, dist) = a.subring_split(2).unwrap();
        assert_eq!(d.components[0], qpoly(&[(0, 1, 1)]));
        assert_eq!(d.components[1], qpoly(&[(0, 1, 1), (2, 1, 1)]));
        assert_eq!(dist, Rational::from_integer(2));
        assert_eq!(d.reconstruct(), a);
        let b = qpoly(&[(0, 1, 1), (6, 1, 1), (-3, 1, 1)]);
        assert!(b.subring_split(3).unwrap().1.is_zero());
        let c = qpoly(&[(0, 1, 3), (1, 1, 3), (2, 1, 3)]);
        assert_eq!(c.subring_split(3).unwrap().1, Rational::new(2, 3));
    }

    #[test]
    fn mode_mismatch_rejected() {
        let a = LaurentPoly::Exact(qpoly(&[(0, 1, 1)]));
        let b = LaurentPoly::Complex(qpoly(&[(0, 1, 1)]).to_cpoly());
        assert!(matches!(a.arithmetic(&b, ArithOp::Add), Err(Error::ModeMismatch)));
    }

    #[test]
    fn json_round_trip() {
        let p = qpoly(&[(-2, 3, 7), (0, 1, 2)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"[["-2","3","7"],["0","1","2"]]"#);
        let back: QPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
