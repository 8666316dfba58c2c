//! Truncated arithmetic in `Q_p` and `F_p((X))`.
//!
//! Elements use a capped-relative precision model: a nonzero element is
//! `pi^v * u` where the unit `u` is known modulo `pi^r` (`r <= N`, the
//! spec precision), so it is certified up to the absolute exponent `v + r`.
//! A zero carries only the absolute exponent up to which it is known to
//! vanish; exact zeros use [`EXACT`].

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute precision carried by exact zeros.
pub const EXACT: i64 = i64::MAX / 4;

fn sat_add(a: i64, b: i64) -> i64 {
    if a >= EXACT || b >= EXACT {
        EXACT
    } else {
        (a + b).min(EXACT)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// The p-adic numbers.
    Padic,
    /// Formal Laurent series over the prime field with p elements.
    Laurent,
}

/// A local field together with the number of significant digits carried.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FieldSpecDoc", into = "FieldSpecDoc")]
pub struct FieldSpec {
    kind: FieldKind,
    p: u32,
    precision: u32,
}

#[derive(Serialize, Deserialize)]
struct FieldSpecDoc {
    field: String,
    p: u32,
    precision: u32,
}

impl TryFrom<FieldSpecDoc> for FieldSpec {
    type Error = Error;

    fn try_from(doc: FieldSpecDoc) -> Result<Self> {
        let kind = match doc.field.as_str() {
            "Qp" => FieldKind::Padic,
            "FpX" => FieldKind::Laurent,
            other => return Err(Error::InvalidSpec(format!("unknown field kind {other:?}"))),
        };
        FieldSpec::new(kind, doc.p, doc.precision)
    }
}

impl From<FieldSpec> for FieldSpecDoc {
    fn from(spec: FieldSpec) -> Self {
        FieldSpecDoc {
            field: match spec.kind {
                FieldKind::Padic => "Qp".into(),
                FieldKind::Laurent => "FpX".into(),
            },
            p: spec.p,
            precision: spec.precision,
        }
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    pub fn new(kind: FieldKind, p: u32, precision: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidSpec(format!("{p} is not prime")));
        }
        if kind == FieldKind::Laurent && p > 251 {
            return Err(Error::InvalidSpec("residue characteristic too large".into()));
        }
        if precision == 0 {
            return Err(Error::InvalidSpec("precision must be at least 1".into()));
        }
        Ok(FieldSpec { kind, p, precision })
    }

    pub fn qp(p: u32, precision: u32) -> Result<Self> {
        Self::new(FieldKind::Padic, p, precision)
    }

    pub fn fpx(p: u32, precision: u32) -> Result<Self> {
        Self::new(FieldKind::Laurent, p, precision)
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Cardinality of the residue field (always prime here).
    pub fn q(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        Self::new(self.kind, self.p, precision)
    }

    fn ppow(&self, k: u32) -> BigUint {
        BigUint::from(self.p).pow(k)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::Padic => write!(f, "Q_{} (N={})", self.p, self.precision),
            FieldKind::Laurent => write!(f, "F_{}((X)) (N={})", self.p, self.precision),
        }
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Zero { abs: i64 },
    Padic { val: i64, rel: u32, unit: BigUint },
    Series { val: i64, digits: Vec<u8> },
}

/// An element of a local field, certified to a finite absolute precision.
///
/// `PartialEq` compares to the smaller of the two certified precisions,
/// so it is not transitive.
#[derive(Clone, Debug)]
pub struct FieldElement {
    spec: FieldSpec,
    repr: Repr,
}

/// An absolute value `q^(-exponent)`, or zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AbsValue {
    base: u32,
    exponent: Option<Ratio<i64>>,
}

impl AbsValue {
    pub fn new(base: u32, exponent: Ratio<i64>) -> Self {
        AbsValue { base, exponent: Some(exponent) }
    }

    pub fn zero(base: u32) -> Self {
        AbsValue { base, exponent: None }
    }

    pub fn one(base: u32) -> Self {
        Self::new(base, Ratio::from_integer(0))
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// `Some(e)` for the value `q^(-e)`; `None` for zero.
    pub fn exponent(&self) -> Option<Ratio<i64>> {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.exponent.is_none()
    }

    pub fn mul(&self, other: &AbsValue) -> AbsValue {
        match (self.exponent, other.exponent) {
            (Some(a), Some(b)) => AbsValue::new(self.base, a + b),
            _ => AbsValue::zero(self.base),
        }
    }

    pub fn pow(&self, k: i64) -> AbsValue {
        match self.exponent {
            Some(e) => AbsValue::new(self.base, e * k),
            None if k > 0 => *self,
            None => AbsValue::one(self.base),
        }
    }

    /// The value as an integer when it is a nonnegative power `q^m`.
    pub fn as_integer(&self) -> Option<BigUint> {
        let e = self.exponent?;
        if e.is_integer() && *e.numer() <= 0 {
            Some(BigUint::from(self.base).pow((-*e.numer()) as u32))
        } else {
            None
        }
    }
}

impl PartialOrd for AbsValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AbsValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.exponent, other.exponent) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => b.cmp(&a),
        }
    }
}

impl fmt::Display for AbsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exponent {
            None => write!(f, "0"),
            Some(e) => write!(f, "{}^({})", self.base, -e),
        }
    }
}

/// Base-p digits of |n| read as a polynomial in X, negated when n < 0.
fn integer_as_fp_poly(n: &BigInt, p: u32) -> Vec<u8> {
    let mut m = n.magnitude().clone();
    let mut out = Vec::new();
    let pb = BigUint::from(p);
    while !m.is_zero() {
        let (q, r) = m.div_rem(&pb);
        out.push(r.to_u32().unwrap() as u8);
        m = q;
    }
    if n.is_negative() {
        for d in out.iter_mut() {
            *d = ((p - *d as u32) % p) as u8;
        }
    }
    out
}

fn inv_mod_prime(a: u32, p: u32) -> u32 {
    // Fermat; p is prime and a is nonzero mod p.
    let mut result = 1u64;
    let mut base = (a % p) as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

fn series_inverse(digits: &[u8], len: usize, p: u32) -> Vec<u8> {
    let a0inv = inv_mod_prime(digits[0] as u32, p) as u64;
    let pp = p as u64;
    let mut out = vec![0u8; len];
    out[0] = a0inv as u8;
    for k in 1..len {
        let mut acc = 0u64;
        for j in 1..=k.min(digits.len() - 1) {
            acc += digits[j] as u64 * out[k - j] as u64;
        }
        acc %= pp;
        out[k] = ((pp - acc) % pp * a0inv % pp) as u8;
    }
    out
}

impl FieldElement {
    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn zero(spec: FieldSpec) -> Self {
        FieldElement { spec, repr: Repr::Zero { abs: EXACT } }
    }

    /// Zero known only up to `pi^abs`.
    pub fn zero_to(spec: FieldSpec, abs: i64) -> Self {
        FieldElement { spec, repr: Repr::Zero { abs: abs.min(EXACT) } }
    }

    pub fn one(spec: FieldSpec) -> Self {
        Self::uniformizer_pow(spec, 0)
    }

    /// `pi^k`, where pi is `p` or `X`.
    pub fn uniformizer_pow(spec: FieldSpec, k: i64) -> Self {
        let n = spec.precision;
        let repr = match spec.kind {
            FieldKind::Padic => Repr::Padic { val: k, rel: n, unit: BigUint::one() },
            FieldKind::Laurent => {
                let mut digits = vec![0u8; n as usize];
                digits[0] = 1;
                Repr::Series { val: k, digits }
            }
        };
        FieldElement { spec, repr }
    }

    pub fn from_int(n: i64, spec: FieldSpec) -> Self {
        Self::from_bigints(&BigInt::from(n), &BigInt::one(), spec).expect("denominator is one")
    }

    pub fn from_rational(num: i64, den: i64, spec: FieldSpec) -> Result<Self> {
        Self::from_bigints(&BigInt::from(num), &BigInt::from(den), spec)
    }

    /// Canonical expansion of `num/den`.
    ///
    /// For `F_p((X))` an integer is read through its base-p digits as a
    /// polynomial in `X` (so `p` itself maps to the uniformizer `X` and
    /// `3` maps to `1 + X` when `p = 2`).
    pub fn from_bigints(num: &BigInt, den: &BigInt, spec: FieldSpec) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Self::zero(spec));
        }
        let n = spec.precision;
        match spec.kind {
            FieldKind::Padic => {
                let pb = BigInt::from(spec.p);
                let (mut a, mut b) = (num.clone(), den.clone());
                let mut val = 0i64;
                while a.is_multiple_of(&pb) {
                    a /= &pb;
                    val += 1;
                }
                while b.is_multiple_of(&pb) {
                    b /= &pb;
                    val -= 1;
                }
                let modulus = BigInt::from(spec.ppow(n));
                let binv = b
                    .mod_floor(&modulus)
                    .to_biguint()
                    .unwrap()
                    .modinv(&modulus.to_biguint().unwrap())
                    .ok_or(Error::NonInvertibleDenominator)?;
                let unit = (a.mod_floor(&modulus) * BigInt::from(binv)).mod_floor(&modulus);
                Ok(Self::padic_normalized(spec, val, unit.to_biguint().unwrap(), EXACT))
            }
            FieldKind::Laurent => {
                let a = integer_as_fp_poly(num, spec.p);
                let b = integer_as_fp_poly(den, spec.p);
                let x = Self::series_from_poly(spec, &a);
                let y = Self::series_from_poly(spec, &b);
                x.div(&y)
            }
        }
    }

    /// Parses `"n"` or `"n/d"`.
    pub fn parse(s: &str, spec: FieldSpec) -> Result<Self> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let den: BigInt = den.parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        Self::from_bigints(&num, &den, spec)
    }

    /// Laurent polynomial `sum coeffs[i] X^i`, exact to N digits.
    pub fn series_from_poly(spec: FieldSpec, coeffs: &[u8]) -> Self {
        assert_eq!(spec.kind, FieldKind::Laurent);
        let first = match coeffs.iter().position(|&c| !(c as u32).is_multiple_of(spec.p)) {
            Some(i) => i,
            None => return Self::zero(spec),
        };
        let n = spec.precision as usize;
        let mut digits = vec![0u8; n];
        for (i, &c) in coeffs[first..].iter().enumerate().take(n) {
            digits[i] = (c as u32 % spec.p) as u8;
        }
        FieldElement { spec, repr: Repr::Series { val: first as i64, digits } }
    }

    /// Builds `pi^val * sum digits[i] pi^i` from raw digits certified up to `abs`.
    pub fn from_digits(spec: FieldSpec, val: i64, digits: &[u8], abs: i64) -> Self {
        match spec.kind {
            FieldKind::Laurent => {
                let len = (abs.min(EXACT) - val).clamp(0, i64::from(spec.precision).max(digits.len() as i64));
                let mut d: Vec<u8> = digits.iter().map(|&x| (x as u32 % spec.p) as u8).collect();
                d.resize(len as usize, 0);
                Self::series_normalized(spec, val, d, abs)
            }
            FieldKind::Padic => {
                let mut unit = BigUint::zero();
                for &d in digits.iter().rev() {
                    unit = unit * spec.p + (d as u32 % spec.p);
                }
                Self::padic_normalized(spec, val, unit, abs)
            }
        }
    }

    fn padic_normalized(spec: FieldSpec, mut val: i64, unit: BigUint, abs: i64) -> Self {
        let n = spec.precision as i64;
        if abs <= val {
            return Self::zero_to(spec, abs);
        }
        let avail = (abs - val).min(4 * n + 64);
        let mut unit = unit % spec.ppow(avail as u32);
        if unit.is_zero() {
            return Self::zero_to(spec, abs);
        }
        let pb = BigUint::from(spec.p);
        loop {
            let (q, r) = unit.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            unit = q;
            val += 1;
        }
        let rel = if abs >= EXACT { n } else { (abs - val).min(n) };
        if rel <= 0 {
            return Self::zero_to(spec, abs);
        }
        let unit = unit % spec.ppow(rel as u32);
        FieldElement { spec, repr: Repr::Padic { val, rel: rel as u32, unit } }
    }

    fn series_normalized(spec: FieldSpec, val: i64, digits: Vec<u8>, abs: i64) -> Self {
        let n = spec.precision as i64;
        let first = match digits.iter().position(|&d| d != 0) {
            Some(i) => i,
            None => return Self::zero_to(spec, abs.min(val + digits.len() as i64)),
        };
        let val = val + first as i64;
        let rel = if abs >= EXACT { n } else { (abs - val).min(n) };
        if rel <= 0 {
            return Self::zero_to(spec, abs);
        }
        let mut d: Vec<u8> = digits[first..].to_vec();
        d.resize(rel as usize, 0);
        FieldElement { spec, repr: Repr::Series { val, digits: d } }
    }

    /// True when the element vanishes to its certified precision.
    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { abs } if abs >= EXACT)
    }

    /// Valuation, or `None` when zero to precision.
    pub fn valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Padic { val, .. } | Repr::Series { val, .. } => Some(*val),
        }
    }

    /// Valuation with zeros reported at their certified absolute precision.
    pub fn valuation_or_precision(&self) -> i64 {
        match &self.repr {
            Repr::Zero { abs } => *abs,
            Repr::Padic { val, .. } | Repr::Series { val, .. } => *val,
        }
    }

    pub fn rel_precision(&self) -> u32 {
        match &self.repr {
            Repr::Zero { .. } => 0,
            Repr::Padic { rel, .. } => *rel,
            Repr::Series { digits, .. } => digits.len() as u32,
        }
    }

    /// Absolute exponent up to which the element is certified.
    pub fn abs_precision(&self) -> i64 {
        match &self.repr {
            Repr::Zero { abs } => *abs,
            Repr::Padic { val, rel, .. } => val + *rel as i64,
            Repr::Series { val, digits } => val + digits.len() as i64,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Some(0)
    }

    /// Digits of the unit part, leading digit first (empty for zero).
    pub fn digits(&self) -> Vec<u8> {
        match &self.repr {
            Repr::Zero { .. } => Vec::new(),
            Repr::Series { digits, .. } => digits.clone(),
            Repr::Padic { rel, unit, .. } => {
                let pb = BigUint::from(self.spec.p);
                let mut u = unit.clone();
                let mut out = Vec::with_capacity(*rel as usize);
                for _ in 0..*rel {
                    let (q, r) = u.div_rem(&pb);
                    out.push(r.to_u32().unwrap() as u8);
                    u = q;
                }
                while out.len() > 1 && *out.last().unwrap() == 0 {
                    out.pop();
                }
                out
            }
        }
    }

    /// Digit at absolute position `k` (coefficient of `pi^k`).
    pub fn digit_at(&self, k: i64) -> u8 {
        match self.valuation() {
            None => 0,
            Some(v) if k < v || k >= self.abs_precision() => 0,
            Some(v) => self.digits().get((k - v) as usize).copied().unwrap_or(0),
        }
    }

    pub fn abs_value(&self) -> AbsValue {
        match self.valuation() {
            None => AbsValue::zero(self.spec.q()),
            Some(v) => AbsValue::new(self.spec.q(), Ratio::from_integer(v)),
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            Err(Error::SpecMismatch)
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.add_unchecked(other, false))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.add_unchecked(other, true))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("spec mismatch")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("spec mismatch")
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("spec mismatch")
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(&other.inv()?))
    }

    pub fn neg(&self) -> Self {
        let spec = self.spec;
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Padic { val, rel, unit } => {
                let m = spec.ppow(*rel);
                FieldElement { spec, repr: Repr::Padic { val: *val, rel: *rel, unit: (&m - unit) % &m } }
            }
            Repr::Series { val, digits } => {
                let p = spec.p;
                let d = digits.iter().map(|&x| ((p - x as u32) % p) as u8).collect();
                FieldElement { spec, repr: Repr::Series { val: *val, digits: d } }
            }
        }
    }

    /// Multiplication by `pi^k`; exact and precision-preserving.
    pub fn shift(&self, k: i64) -> Self {
        let repr = match &self.repr {
            Repr::Zero { abs } => Repr::Zero { abs: sat_add(*abs, k) },
            Repr::Padic { val, rel, unit } => Repr::Padic { val: val + k, rel: *rel, unit: unit.clone() },
            Repr::Series { val, digits } => Repr::Series { val: val + k, digits: digits.clone() },
        };
        FieldElement { spec: self.spec, repr }
    }

    pub fn inv(&self) -> Result<Self> {
        let spec = self.spec;
        match &self.repr {
            Repr::Zero { .. } => Err(Error::DivisionByZeroToPrecision),
            Repr::Padic { val, rel, unit } => {
                let m = spec.ppow(*rel);
                let u = unit.modinv(&m).expect("unit is invertible");
                Ok(FieldElement { spec, repr: Repr::Padic { val: -val, rel: *rel, unit: u } })
            }
            Repr::Series { val, digits } => {
                let inv = series_inverse(digits, digits.len(), spec.p);
                Ok(FieldElement { spec, repr: Repr::Series { val: -val, digits: inv } })
            }
        }
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let mut result = Self::one(self.spec);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        Ok(result)
    }

    fn add_unchecked(&self, other: &Self, subtract: bool) -> Self {
        let spec = self.spec;
        let rhs = if subtract { other.neg() } else { other.clone() };
        match (&self.repr, &rhs.repr) {
            (Repr::Zero { abs: a }, Repr::Zero { abs: b }) => Self::zero_to(spec, (*a).min(*b)),
            (Repr::Zero { abs }, _) => rhs.reduce_to_abs(*abs),
            (_, Repr::Zero { abs }) => self.reduce_to_abs(*abs),
            (Repr::Padic { val: va, rel: ra, unit: ua }, Repr::Padic { val: vb, rel: rb, unit: ub }) => {
                let abs = (va + *ra as i64).min(vb + *rb as i64);
                let v = (*va).min(*vb);
                let width = (abs - v) as u32;
                let m = spec.ppow(width);
                let sa = ua * spec.ppow((va - v) as u32);
                let sb = ub * spec.ppow((vb - v) as u32);
                Self::padic_normalized(spec, v, (sa + sb) % m, abs)
            }
            (Repr::Series { val: va, digits: da }, Repr::Series { val: vb, digits: db }) => {
                let abs = (va + da.len() as i64).min(vb + db.len() as i64);
                let v = (*va).min(*vb);
                let width = (abs - v).max(0) as usize;
                let p = spec.p as u16;
                let mut out = vec![0u8; width];
                for (i, o) in out.iter_mut().enumerate() {
                    let pos = v + i as i64;
                    let a = da.get((pos - va) as usize).filter(|_| pos >= *va).copied().unwrap_or(0) as u16;
                    let b = db.get((pos - vb) as usize).filter(|_| pos >= *vb).copied().unwrap_or(0) as u16;
                    *o = ((a + b) % p) as u8;
                }
                Self::series_normalized(spec, v, out, abs)
            }
            _ => unreachable!("representation matches spec kind"),
        }
    }

    /// Drops certified digits beyond the absolute exponent `abs`.
    pub fn reduce_to_abs(&self, abs: i64) -> Self {
        if abs >= self.abs_precision() {
            return self.clone();
        }
        match &self.repr {
            Repr::Zero { .. } => Self::zero_to(self.spec, abs),
            Repr::Padic { val, unit, .. } => Self::padic_normalized(self.spec, *val, unit.clone(), abs),
            Repr::Series { val, digits } => Self::series_normalized(self.spec, *val, digits.clone(), abs),
        }
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let spec = self.spec;
        match (&self.repr, &other.repr) {
            (Repr::Zero { abs: a }, Repr::Zero { abs: b }) => Self::zero_to(spec, sat_add(*a, *b)),
            (Repr::Zero { abs }, _) => Self::zero_to(spec, sat_add(*abs, other.valuation().unwrap())),
            (_, Repr::Zero { abs }) => Self::zero_to(spec, sat_add(*abs, self.valuation().unwrap())),
            (Repr::Padic { val: va, rel: ra, unit: ua }, Repr::Padic { val: vb, rel: rb, unit: ub }) => {
                let rel = (*ra).min(*rb);
                let unit = (ua * ub) % spec.ppow(rel);
                FieldElement { spec, repr: Repr::Padic { val: va + vb, rel, unit } }
            }
            (Repr::Series { val: va, digits: da }, Repr::Series { val: vb, digits: db }) => {
                let rel = da.len().min(db.len());
                let p = spec.p;
                let mut acc = vec![0u32; rel];
                for (i, &x) in da.iter().enumerate().take(rel) {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in db.iter().enumerate().take(rel - i) {
                        acc[i + j] = (acc[i + j] + x as u32 * y as u32) % p;
                    }
                }
                let digits = acc.into_iter().map(|d| d as u8).collect();
                FieldElement { spec, repr: Repr::Series { val: va + vb, digits } }
            }
            _ => unreachable!("representation matches spec kind"),
        }
    }

    /// The canonical representative of `self mod pi^e`: the digits at
    /// positions below `e`. Certified exactly when `e <= abs_precision`.
    pub fn low_part(&self, e: i64) -> Self {
        let spec = self.spec;
        let v = match self.valuation() {
            None => return Self::zero(spec),
            Some(v) => v,
        };
        if e <= v {
            return Self::zero(spec);
        }
        let exact_from = if e <= self.abs_precision() { EXACT } else { self.abs_precision() };
        match &self.repr {
            Repr::Padic { unit, .. } => {
                let width = ((e - v) as u32).min(self.rel_precision());
                Self::padic_normalized(spec, v, unit % spec.ppow(width), exact_from)
            }
            Repr::Series { digits, .. } => {
                let width = ((e - v) as usize).min(digits.len());
                let mut d = digits[..width].to_vec();
                if exact_from >= EXACT {
                    d.resize(spec.precision as usize, 0);
                }
                Self::series_normalized(spec, v, d, exact_from)
            }
            Repr::Zero { .. } => unreachable!(),
        }
    }

    /// The fractional part: digits at negative positions only.
    pub fn fractional_part(&self) -> Self {
        self.low_part(0)
    }

    /// Digit-exact agreement to the smaller certified precision.
    pub fn eq_to_precision(&self, other: &Self) -> bool {
        self.spec == other.spec && self.sub(other).is_zero()
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.eq_to_precision(other)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pi = match self.spec.kind {
            FieldKind::Padic => self.spec.p.to_string(),
            FieldKind::Laurent => "X".to_string(),
        };
        match self.valuation() {
            None if self.is_exact_zero() => write!(f, "0"),
            None => write!(f, "O({pi}^{})", self.abs_precision()),
            Some(v) => {
                let mut terms = Vec::new();
                for (i, d) in self.digits().iter().enumerate() {
                    if *d != 0 {
                        terms.push(format!("{d}*{pi}^{}", v + i as i64));
                    }
                }
                write!(f, "{} + O({pi}^{})", terms.join(" + "), self.abs_precision())
            }
        }
    }
}

/// Wire form of an element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementDoc {
    Zero { zero: bool, precision: i64 },
    Nonzero { valuation: i64, digits: Vec<u8> },
    Rational(String),
}

impl FieldElement {
    pub fn to_doc(&self) -> ElementDoc {
        match self.valuation() {
            None => ElementDoc::Zero { zero: true, precision: self.abs_precision().min(i64::from(self.spec.precision)) },
            Some(valuation) => ElementDoc::Nonzero { valuation, digits: self.digits() },
        }
    }

    pub fn from_doc(doc: &ElementDoc, spec: FieldSpec) -> Result<Self> {
        match doc {
            ElementDoc::Zero { precision, .. } => {
                if *precision >= i64::from(spec.precision) {
                    Ok(Self::zero(spec))
                } else {
                    Ok(Self::zero_to(spec, *precision))
                }
            }
            ElementDoc::Nonzero { valuation, digits } => {
                if digits.iter().any(|&d| d as u32 >= spec.p) {
                    return Err(Error::Parse("digit out of range".into()));
                }
                if digits.first().copied().unwrap_or(0) == 0 {
                    return Err(Error::Parse("leading digit must be nonzero".into()));
                }
                Ok(Self::from_digits(spec, *valuation, digits, EXACT))
            }
            ElementDoc::Rational(s) => Self::parse(s, spec),
        }
    }
}

/// `v_p(n)` for a nonzero integer, by repeated division.
pub fn integer_valuation(n: &BigInt, p: u32) -> Option<i64> {
    if n.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0;
    while m.is_multiple_of(&pb) {
        m /= &pb;
        v += 1;
    }
    Some(v)
}

impl From<&FieldElement> for ElementDoc {
    fn from(x: &FieldElement) -> Self {
        x.to_doc()
    }
}
