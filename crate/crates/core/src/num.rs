//! Scalars: arbitrary-magnitude exponents, exact rationals, complex balls
//! and exact cyclotomic numbers, plus the [`Coeff`] trait tying them to
//! polynomial arithmetic.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Unit roundoff for f64.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

// ---------------------------------------------------------------------------
// Exponent

/// Signed integer of arbitrary magnitude; machine-word fast path.
#[derive(Clone, PartialEq, Eq)]
pub struct Exponent(ERepr);

#[derive(Clone, PartialEq, Eq)]
enum ERepr {
    Small(i64),
    Big(BigInt),
}

impl Exponent {
    pub const ZERO: Exponent = Exponent(ERepr::Small(0));

    pub fn from_big(b: BigInt) -> Self {
        match b.to_i64() {
            Some(v) => Exponent(ERepr::Small(v)),
            None => Exponent(ERepr::Big(b)),
        }
    }

    pub fn to_big(&self) -> BigInt {
        match &self.0 {
            ERepr::Small(v) => BigInt::from(*v),
            ERepr::Big(b) => b.clone(),
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match &self.0 {
            ERepr::Small(v) => Some(*v),
            ERepr::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, ERepr::Small(0))
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            ERepr::Small(v) => v.signum() as i32,
            ERepr::Big(b) => {
                if b.is_negative() {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn abs(&self) -> Exponent {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Number of bits in |e|.
    pub fn bits(&self) -> u64 {
        match &self.0 {
            ERepr::Small(v) => 64 - v.unsigned_abs().leading_zeros() as u64,
            ERepr::Big(b) => b.bits(),
        }
    }

    /// Euclidean residue in `[0, k)`.
    pub fn rem_euclid(&self, k: u64) -> u64 {
        assert!(k > 0);
        match &self.0 {
            ERepr::Small(v) => (*v as i128).rem_euclid(k as i128) as u64,
            ERepr::Big(b) => b.mod_floor(&BigInt::from(k)).to_u64().unwrap(),
        }
    }

    /// Floor division by a positive integer.
    pub fn div_floor(&self, k: u64) -> Exponent {
        assert!(k > 0);
        match &self.0 {
            ERepr::Small(v) => Exponent::from((*v as i128).div_euclid(k as i128)),
            ERepr::Big(b) => Exponent::from_big(b.div_floor(&BigInt::from(k))),
        }
    }

    pub fn pow_u(base: i64, e: u32) -> Exponent {
        match base.checked_pow(e) {
            Some(v) => Exponent(ERepr::Small(v)),
            None => Exponent::from_big(num_traits::pow(BigInt::from(base), e as usize)),
        }
    }
}

impl From<i64> for Exponent {
    fn from(v: i64) -> Self {
        Exponent(ERepr::Small(v))
    }
}

impl From<i32> for Exponent {
    fn from(v: i32) -> Self {
        Exponent(ERepr::Small(v as i64))
    }
}

impl From<u64> for Exponent {
    fn from(v: u64) -> Self {
        Exponent::from_big(BigInt::from(v))
    }
}

impl From<i128> for Exponent {
    fn from(v: i128) -> Self {
        match i64::try_from(v) {
            Ok(s) => Exponent(ERepr::Small(s)),
            Err(_) => Exponent(ERepr::Big(BigInt::from(v))),
        }
    }
}

impl From<BigInt> for Exponent {
    fn from(b: BigInt) -> Self {
        Exponent::from_big(b)
    }
}

impl Hash for Exponent {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            ERepr::Small(v) => {
                0u8.hash(state);
                v.hash(state)
            }
            ERepr::Big(b) => {
                1u8.hash(state);
                b.hash(state)
            }
        }
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (ERepr::Small(a), ERepr::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Exponent {
    type Output = Exponent;
    fn add(self, rhs: &Exponent) -> Exponent {
        if let (ERepr::Small(a), ERepr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(s) = i64::checked_add(*a, *b) {
                return Exponent(ERepr::Small(s));
            }
        }
        Exponent::from_big(self.to_big() + rhs.to_big())
    }
}

impl Add for Exponent {
    type Output = Exponent;
    fn add(self, rhs: Exponent) -> Exponent {
        &self + &rhs
    }
}

impl Sub for &Exponent {
    type Output = Exponent;
    fn sub(self, rhs: &Exponent) -> Exponent {
        if let (ERepr::Small(a), ERepr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(s) = i64::checked_sub(*a, *b) {
                return Exponent(ERepr::Small(s));
            }
        }
        Exponent::from_big(self.to_big() - rhs.to_big())
    }
}

impl Mul for &Exponent {
    type Output = Exponent;
    fn mul(self, rhs: &Exponent) -> Exponent {
        if let (ERepr::Small(a), ERepr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(s) = i64::checked_mul(*a, *b) {
                return Exponent(ERepr::Small(s));
            }
        }
        Exponent::from_big(self.to_big() * rhs.to_big())
    }
}

impl Neg for &Exponent {
    type Output = Exponent;
    fn neg(self) -> Exponent {
        match &self.0 {
            ERepr::Small(v) => match v.checked_neg() {
                Some(n) => Exponent(ERepr::Small(n)),
                None => Exponent::from_big(-BigInt::from(*v)),
            },
            ERepr::Big(b) => Exponent::from_big(-b),
        }
    }
}

impl Neg for Exponent {
    type Output = Exponent;
    fn neg(self) -> Exponent {
        -&self
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            ERepr::Small(v) => write!(f, "{v}"),
            ERepr::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Exponent {
    type Err = num_bigint::ParseBigIntError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Exponent::from_big(s.trim().parse::<BigInt>()?))
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(Exponent::from)
                .ok_or_else(|| serde::de::Error::custom("exponent must be an integer")),
            _ => Err(serde::de::Error::custom("exponent must be a string or integer")),
        }
    }
}

// ---------------------------------------------------------------------------
// Rational

const SMALL_LIMIT: i64 = 1 << 62;

/// Exact rational number. Small values stay on machine words.
#[derive(Clone)]
pub struct Rational(QRepr);

#[derive(Clone)]
enum QRepr {
    Small(Ratio<i64>),
    Big(BigRational),
}

fn fits(v: i64) -> bool {
    v > -SMALL_LIMIT && v < SMALL_LIMIT
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational::from_big(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_integer(v: i64) -> Self {
        Rational::new(v, 1)
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Rational::from_big(BigRational::from_integer(v))
    }

    pub fn from_big(b: BigRational) -> Self {
        if let (Some(n), Some(d)) = (b.numer().to_i64(), b.denom().to_i64()) {
            if fits(n) && fits(d) {
                return Rational(QRepr::Small(Ratio::new_raw(n, d)));
            }
        }
        Rational(QRepr::Big(b))
    }

    fn from_small(r: Ratio<i64>) -> Self {
        if fits(*r.numer()) && fits(*r.denom()) {
            Rational(QRepr::Small(r))
        } else {
            Rational(QRepr::Big(BigRational::new_raw(
                BigInt::from(*r.numer()),
                BigInt::from(*r.denom()),
            )))
        }
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            QRepr::Small(r) => {
                BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
            }
            QRepr::Big(b) => b.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            QRepr::Small(r) => BigInt::from(*r.numer()),
            QRepr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            QRepr::Small(r) => BigInt::from(*r.denom()),
            QRepr::Big(b) => b.denom().clone(),
        }
    }

    pub fn zero() -> Self {
        Rational(QRepr::Small(Ratio::new_raw(0, 1)))
    }

    pub fn one() -> Self {
        Rational(QRepr::Small(Ratio::new_raw(1, 1)))
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            QRepr::Small(r) => *r.numer() == 0,
            QRepr::Big(b) => b.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.0 {
            QRepr::Small(r) => *r.numer() == 1 && *r.denom() == 1,
            QRepr::Big(b) => b.is_one(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            QRepr::Small(r) => *r.numer() < 0,
            QRepr::Big(b) => b.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && !self.is_negative()
    }

    pub fn abs(&self) -> Rational {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Rational {
        assert!(!self.is_zero(), "reciprocal of zero");
        match &self.0 {
            QRepr::Small(r) => Rational::from_small(r.recip()),
            QRepr::Big(b) => Rational::from_big(b.recip()),
        }
    }

    pub fn pow(&self, e: u32) -> Rational {
        let mut acc = Rational::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Nearest f64 (correctly rounded up to one ulp).
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            QRepr::Small(r) => *r.numer() as f64 / *r.denom() as f64,
            QRepr::Big(b) => b.to_f64().unwrap_or(if b.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }),
        }
    }

    /// f64 approximation with an absolute error bound.
    pub fn to_f64_bound(&self) -> (f64, f64) {
        let v = self.to_f64();
        (v, v.abs() * 4.0 * UNIT_ROUNDOFF)
    }


    /// Exact rational from a finite f64.
    pub fn from_f64(v: f64) -> Option<Rational> {
        BigRational::from_float(v).map(Rational::from_big)
    }

    /// Smallest rational q with q ≥ sqrt(self) among dyadics with the
    /// given number of fractional bits; exact upper bound.
    pub fn sqrt_upper(&self, bits: u32) -> Rational {
        assert!(!self.is_negative());
        let scale = BigInt::one() << (2 * bits as usize);
        let scaled = (self.to_big() * BigRational::from_integer(scale)).ceil().to_integer();
        let mut r = scaled.sqrt();
        if &r * &r < scaled {
            r += 1;
        }
        Rational::from_big(BigRational::new(r, BigInt::one() << bits as usize))
    }

    /// Largest dyadic q ≤ sqrt(self) with the given number of fractional bits.
    pub fn sqrt_lower(&self, bits: u32) -> Rational {
        assert!(!self.is_negative());
        let scale = BigInt::one() << (2 * bits as usize);
        let scaled = (self.to_big() * BigRational::from_integer(scale)).floor().to_integer();
        let r = scaled.sqrt();
        Rational::from_big(BigRational::new(r, BigInt::one() << bits as usize))
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (QRepr::Small(a), QRepr::Small(b)) => a == b,
            (QRepr::Big(a), QRepr::Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            QRepr::Small(r) => {
                r.numer().hash(state);
                r.denom().hash(state);
            }
            QRepr::Big(b) => b.hash(state),
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (QRepr::Small(a), QRepr::Small(b)) => {
                let l = *a.numer() as i128 * *b.denom() as i128;
                let r = *b.numer() as i128 * *a.denom() as i128;
                l.cmp(&r)
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

macro_rules! rat_binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                if let (QRepr::Small(a), QRepr::Small(b)) = (&self.0, &rhs.0) {
                    if let Some(r) = a.$checked(b) {
                        return Rational::from_small(r);
                    }
                }
                Rational::from_big($tr::$m(self.to_big(), rhs.to_big()))
            }
        }
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                $tr::$m(&self, &rhs)
            }
        }
    };
}

rat_binop!(Add, add, checked_add);
rat_binop!(Sub, sub, checked_sub);
rat_binop!(Mul, mul, checked_mul);
rat_binop!(Div, div, checked_div);

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            QRepr::Small(r) => Rational(QRepr::Small(Ratio::new_raw(-*r.numer(), *r.denom()))),
            QRepr::Big(b) => Rational::from_big(-b),
        }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| &a + &b)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            QRepr::Small(r) => write!(f, "{r}"),
            QRepr::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|e| format!("{e}"))?;
            let d: BigInt = d.trim().parse().map_err(|e| format!("{e}"))?;
            if d.is_zero() {
                return Err("zero denominator".into());
            }
            Ok(Rational::from_big(BigRational::new(n, d)))
        } else if s.contains('.') || s.contains('e') || s.contains('E') {
            // decimal literal, read exactly
            let (mant, exp) = match s.find(['e', 'E']) {
                Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|e| format!("{e}"))?),
                None => (s, 0),
            };
            let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
            let digits = format!("{ip}{fp}");
            let n: BigInt = digits.parse().map_err(|e| format!("{e}"))?;
            let shift = exp - fp.len() as i32;
            let ten = BigInt::from(10);
            let q = if shift >= 0 {
                BigRational::from_integer(n * num_traits::pow(ten, shift as usize))
            } else {
                BigRational::new(n, num_traits::pow(ten, (-shift) as usize))
            };
            Ok(Rational::from_big(q))
        } else {
            let n: BigInt = s.parse().map_err(|e| format!("{e}"))?;
            Ok(Rational::from_bigint(n))
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Rational::from_integer(i))
                } else {
                    n.to_string().parse().map_err(serde::de::Error::custom)
                }
            }
            _ => Err(serde::de::Error::custom("rational must be a string or number")),
        }
    }
}

// ---------------------------------------------------------------------------
// Certified bounds

/// A real number known to lie in `[value − err, value + err]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub err: f64,
}

impl Bound {
    pub fn exact(v: f64) -> Self {
        Bound { value: v, err: 0.0 }
    }

    pub fn from_rational(q: &Rational) -> Self {
        let (v, e) = q.to_f64_bound();
        Bound { value: v, err: e }
    }

    pub fn upper(&self) -> f64 {
        self.value + self.err
    }

    pub fn lower(&self) -> f64 {
        self.value - self.err
    }
}

// ---------------------------------------------------------------------------
// Complex ball

/// Complex float with a tracked absolute error radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CBall {
    pub re: f64,
    pub im: f64,
    pub err: f64,
}

impl CBall {
    pub fn new(re: f64, im: f64, err: f64) -> Self {
        CBall { re, im, err }
    }

    /// Upper bound on |centre|.
    fn mag(&self) -> f64 {
        (self.re.abs() + self.im.abs()).min(self.re.hypot(self.im) * (1.0 + 4.0 * UNIT_ROUNDOFF))
    }

    fn round_err(&self) -> f64 {
        2.0 * UNIT_ROUNDOFF * (self.re.abs() + self.im.abs())
    }

    /// Certified bound on the modulus of the true value.
    pub fn modulus(&self) -> Bound {
        let c = self.re.hypot(self.im);
        Bound { value: c, err: self.err + 4.0 * UNIT_ROUNDOFF * c }
    }
}

impl Serialize for CBall {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.re, self.im, self.err).serialize(s)
    }
}

// ---------------------------------------------------------------------------
// Cyclotomic numbers

fn cyclotomic_poly(n: u64) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by Φ_d for every proper divisor d
    let mut p: Vec<i64> = vec![0; n as usize + 1];
    p[0] = -1;
    p[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let q = cyclotomic_poly(d);
            p = poly_exact_div(&p, &q);
        }
    }
    let p = Arc::new(p);
    cache.lock().unwrap().insert(n, p.clone());
    p
}

fn poly_exact_div(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    let da = rem.len() - 1;
    let mut q = vec![0i64; da - db + 1];
    for k in (0..=da - db).rev() {
        let c = rem[k + db] / b[db];
        q[k] = c;
        for (i, bi) in b.iter().enumerate() {
            rem[k + i] -= c * bi;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

/// Euler's totient.
pub fn totient(n: u64) -> u64 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// Exact element of Q(ζ_n), stored in the power basis reduced mod Φ_n.
#[derive(Clone, Debug)]
pub struct Cyclo {
    n: u64,
    c: Vec<Rational>,
}

impl Cyclo {
    fn reduce(n: u64, mut v: Vec<Rational>) -> Cyclo {
        let phi = cyclotomic_poly(n);
        let d = phi.len() - 1;
        while v.len() > d {
            let top = v.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let base = v.len() - d;
            for (i, &pi) in phi[..d].iter().enumerate() {
                if pi != 0 {
                    v[base + i] = &v[base + i] - &(&top * &Rational::from_integer(pi));
                }
            }
        }
        v.resize(d, Rational::zero());
        Cyclo { n, c: v }
    }

    pub fn rational(q: Rational) -> Cyclo {
        Cyclo { n: 1, c: vec![q] }
    }

    /// ζ_n^t.
    pub fn root(n: u64, t: u64) -> Cyclo {
        assert!(n >= 1);
        let t = (t % n) as usize;
        let mut v = vec![Rational::zero(); t + 1];
        v[t] = Rational::one();
        Cyclo::reduce(n, v)
    }

    pub fn order(&self) -> u64 {
        self.n
    }

    /// Re-express in Q(ζ_m) for n | m.
    fn lift(&self, m: u64) -> Cyclo {
        if m == self.n {
            return self.clone();
        }
        assert!(m % self.n == 0);
        let step = (m / self.n) as usize;
        let mut v = vec![Rational::zero(); (self.c.len().saturating_sub(1)) * step + 1];
        for (i, ci) in self.c.iter().enumerate() {
            v[i * step] = ci.clone();
        }
        Cyclo::reduce(m, v)
    }

    fn common(a: &Cyclo, b: &Cyclo) -> (Cyclo, Cyclo) {
        if a.n == b.n {
            return (a.clone(), b.clone());
        }
        let m = a.n.lcm(&b.n);
        (a.lift(m), b.lift(m))
    }

    /// The rational value if this number lies in Q.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.c.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.c.first().cloned().unwrap_or_else(Rational::zero))
        } else {
            None
        }
    }

    pub fn to_cball(&self) -> CBall {
        let mut re = 0.0;
        let mut im = 0.0;
        let mut err = 0.0;
        for (i, ci) in self.c.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            let (v, e) = ci.to_f64_bound();
            let ang = 2.0 * std::f64::consts::PI * (i as f64) / (self.n as f64);
            let (s, c) = ang.sin_cos();
            re += v * c;
            im += v * s;
            err += e + v.abs() * 16.0 * UNIT_ROUNDOFF * (i as f64 + 2.0);
        }
        err += 4.0 * UNIT_ROUNDOFF * (re.abs() + im.abs()) * (self.c.len() as f64 + 1.0);
        CBall { re, im, err }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = Cyclo::common(self, other);
        a.c == b.c
    }
}

// ---------------------------------------------------------------------------
// Coefficient trait

/// Coefficient field for [`crate::laurent::Poly`].
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    /// True only for an exact zero (complex balls need zero radius as well).
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_rational(q: &Rational) -> Self;
    /// ζ_n^t, if representable in this field.
    fn root_of_unity(n: u64, t: u64) -> Option<Self>;
    /// Certified modulus.
    fn modulus(&self) -> Bound;
    /// Whether every value of this type is real.
    const REAL: bool;
    fn to_cball(&self) -> CBall;
    /// |self| as an exact rational, when it is one.
    fn exact_modulus(&self) -> Option<Rational> {
        None
    }
}

impl Coeff for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn root_of_unity(n: u64, t: u64) -> Option<Self> {
        let t = t % n;
        if t == 0 {
            Some(Rational::one())
        } else if 2 * t == n {
            Some(Rational::from_integer(-1))
        } else {
            None
        }
    }
    fn modulus(&self) -> Bound {
        Bound::from_rational(&self.abs())
    }
    const REAL: bool = true;
    fn to_cball(&self) -> CBall {
        let (v, e) = self.to_f64_bound();
        CBall::new(v, 0.0, e)
    }
    fn exact_modulus(&self) -> Option<Rational> {
        Some(self.abs())
    }
}

impl Coeff for CBall {
    fn zero() -> Self {
        CBall::new(0.0, 0.0, 0.0)
    }
    fn one() -> Self {
        CBall::new(1.0, 0.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0 && self.err == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        let mut r = CBall::new(self.re + o.re, self.im + o.im, self.err + o.err);
        r.err += r.round_err();
        r
    }
    fn sub(&self, o: &Self) -> Self {
        let mut r = CBall::new(self.re - o.re, self.im - o.im, self.err + o.err);
        r.err += r.round_err();
        r
    }
    fn mul(&self, o: &Self) -> Self {
        let re = self.re * o.re - self.im * o.im;
        let im = self.re * o.im + self.im * o.re;
        let (ma, mb) = (self.mag(), o.mag());
        let prop = ma * o.err + mb * self.err + self.err * o.err;
        let round = 4.0
            * UNIT_ROUNDOFF
            * (self.re.abs() + self.im.abs())
            * (o.re.abs() + o.im.abs());
        CBall::new(re, im, prop + round)
    }
    fn neg(&self) -> Self {
        CBall::new(-self.re, -self.im, self.err)
    }
    fn from_rational(q: &Rational) -> Self {
        q.to_cball()
    }
    fn root_of_unity(n: u64, t: u64) -> Option<Self> {
        let t = t % n;
        if t == 0 {
            return Some(CBall::one());
        }
        if 2 * t == n {
            return Some(CBall::new(-1.0, 0.0, 0.0));
        }
        if 4 * t == n {
            return Some(CBall::new(0.0, 1.0, 0.0));
        }
        if 4 * t == 3 * n {
            return Some(CBall::new(0.0, -1.0, 0.0));
        }
        let ang = 2.0 * std::f64::consts::PI * (t as f64) / (n as f64);
        let (s, c) = ang.sin_cos();
        Some(CBall::new(c, s, 16.0 * UNIT_ROUNDOFF))
    }
    fn modulus(&self) -> Bound {
        CBall::modulus(self)
    }
    const REAL: bool = false;
    fn to_cball(&self) -> CBall {
        *self
    }
}

impl Coeff for Cyclo {
    fn zero() -> Self {
        Cyclo::rational(Rational::zero())
    }
    fn one() -> Self {
        Cyclo::rational(Rational::one())
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|c| c.is_zero())
    }
    fn add(&self, o: &Self) -> Self {
        let (a, b) = Cyclo::common(self, o);
        Cyclo { n: a.n, c: a.c.iter().zip(&b.c).map(|(x, y)| x + y).collect() }
    }
    fn sub(&self, o: &Self) -> Self {
        let (a, b) = Cyclo::common(self, o);
        Cyclo { n: a.n, c: a.c.iter().zip(&b.c).map(|(x, y)| x - y).collect() }
    }
    fn mul(&self, o: &Self) -> Self {
        if self.n == 1 {
            return Cyclo { n: o.n, c: o.c.iter().map(|y| &self.c[0] * y).collect() };
        }
        if o.n == 1 {
            return Cyclo { n: self.n, c: self.c.iter().map(|x| x * &o.c[0]).collect() };
        }
        let (a, b) = Cyclo::common(self, o);
        let mut v = vec![Rational::zero(); a.c.len() + b.c.len() - 1];
        for (i, x) in a.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.c.iter().enumerate() {
                if !y.is_zero() {
                    v[i + j] = &v[i + j] + &(x * y);
                }
            }
        }
        Cyclo::reduce(a.n, v)
    }
    fn neg(&self) -> Self {
        Cyclo { n: self.n, c: self.c.iter().map(|x| -x).collect() }
    }
    fn from_rational(q: &Rational) -> Self {
        Cyclo::rational(q.clone())
    }
    fn root_of_unity(n: u64, t: u64) -> Option<Self> {
        Some(Cyclo::root(n, t))
    }
    fn modulus(&self) -> Bound {
        match self.as_rational() {
            Some(q) => Bound::from_rational(&q.abs()),
            None => self.to_cball().modulus(),
        }
    }
    const REAL: bool = false;
    fn to_cball(&self) -> CBall {
        Cyclo::to_cball(self)
    }
    fn exact_modulus(&self) -> Option<Rational> {
        self.as_rational().map(|q| q.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_promotes_past_i64() {
        let a = Exponent::from(i64::MAX);
        let b = &a + &Exponent::from(1i64);
        assert!(b.as_i64().is_none());
        assert_eq!(&b - &Exponent::from(1i64), a);
        assert!(b > a);
        assert_eq!(Exponent::pow_u(5, 30).to_string(), "931322574615478515625");
        assert_eq!(Exponent::from(-7i64).rem_euclid(3), 2);
        assert_eq!(Exponent::from(-7i64).div_floor(3), Exponent::from(-3i64));
    }

    #[test]
    fn rational_overflow_falls_back() {
        let big = Rational::new(SMALL_LIMIT - 1, 1);
        let sq = &big * &big;
        assert_eq!(&sq / &big, big);
        assert_eq!("3/6".parse::<Rational>().unwrap(), Rational::new(1, 2));
        assert_eq!("0.25".parse::<Rational>().unwrap(), Rational::new(1, 4));
        assert_eq!("1e-3".parse::<Rational>().unwrap(), Rational::new(1, 1000));
        assert!(Rational::new(1, 3) < Rational::new(1, 2));
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(*cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(*cyclotomic_poly(3), vec![1, 1, 1]);
        assert_eq!(*cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(*cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12).len() as u64 - 1, totient(12));
    }

    #[test]
    fn cyclo_identities() {
        let z = Cyclo::root(3, 1);
        let z2 = Cyclo::root(3, 2);
        // 1 + ζ + ζ² = 0
        let s = Coeff::add(&Coeff::add(&Cyclo::one(), &z), &z2);
        assert!(Coeff::is_zero(&s));
        assert_eq!(Coeff::mul(&z, &z2), Cyclo::one());
        // ζ_6^2 = ζ_3, mixing orders
        assert_eq!(Cyclo::root(6, 2), z);
        assert_eq!(Coeff::mul(&Cyclo::root(2, 1), &Cyclo::root(2, 1)), Cyclo::one());
        let b = Cyclo::root(5, 2).to_cball();
        let ang = 4.0 * std::f64::consts::PI / 5.0;
        assert!((b.re - ang.cos()).abs() < 1e-15 && (b.im - ang.sin()).abs() < 1e-15);
    }

    #[test]
    fn cball_error_encloses() {
        let a = CBall::root_of_unity(7, 1).unwrap();
        let mut p = CBall::one();
        for _ in 0..7 {
            p = Coeff::mul(&p, &a);
        }
        assert!((p.re - 1.0).abs() <= p.err && p.im.abs() <= p.err);
    }
}
