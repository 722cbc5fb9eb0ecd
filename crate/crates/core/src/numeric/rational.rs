use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Exact arbitrary-precision rational number, always kept in lowest terms
/// with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// `numer / denom` for machine integers. Panics on a zero denominator.
    pub fn new(numer: i64, denom: i64) -> Self {
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Result<Self, Error> {
        if denom.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    pub fn from_integer(value: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }

    /// The exact value of a finite `f64` (every finite double is a dyadic
    /// rational).
    pub fn from_f64(value: f64) -> Option<Self> {
        BigRational::from_float(value).map(Rational)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Rational(self.0.recip()))
        }
    }

    pub fn checked_div(&self, rhs: &Rational) -> Option<Self> {
        if rhs.is_zero() {
            None
        } else {
            Some(Rational(&self.0 / &rhs.0))
        }
    }

    pub fn pow(&self, exp: i32) -> Self {
        Rational(Pow::pow(&self.0, exp))
    }

    /// Nearest double (correctly rounded by `num-rational`).
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn into_big(self) -> BigRational {
        self.0
    }

    /// Renders the value in scientific notation with `digits` significant
    /// decimal digits, rounding half away from zero.
    pub fn to_sci_string(&self, digits: u32) -> String {
        let digits = digits.max(1);
        if self.is_zero() {
            return format!("{}e0", pad_mantissa("0", digits));
        }
        let negative = self.is_negative();
        let n = self.numer().abs();
        let d = self.denom().clone();
        let ten = BigInt::from(10u32);
        // Estimate floor(log10(n/d)) from digit counts, then correct.
        let mut exp10 = n.to_string().len() as i64 - d.to_string().len() as i64;
        let scaled = |e: i64| -> BigInt {
            let shift = digits as i64 - 1 - e;
            let (num, den) = if shift >= 0 {
                (&n * Pow::pow(&ten, shift as u32), d.clone())
            } else {
                (n.clone(), &d * Pow::pow(&ten, (-shift) as u32))
            };
            let (q, r) = num.div_rem(&den);
            if &r + &r >= den {
                q + 1
            } else {
                q
            }
        };
        let lower = Pow::pow(&ten, digits - 1);
        let upper = Pow::pow(&ten, digits);
        let mut mantissa = scaled(exp10);
        for _ in 0..4 {
            if mantissa >= upper {
                exp10 += 1;
            } else if mantissa < lower {
                exp10 -= 1;
            } else {
                break;
            }
            mantissa = scaled(exp10);
        }
        if mantissa >= upper {
            // rounding carried into a new digit (e.g. 9.99 -> 10.0)
            exp10 += 1;
            mantissa = scaled(exp10);
        }
        let sign = if negative { "-" } else { "" };
        format!("{sign}{}e{exp10}", pad_mantissa(&mantissa.to_string(), digits))
    }
}

fn pad_mantissa(digits_str: &str, digits: u32) -> String {
    let mut s = digits_str.to_string();
    while s.len() < digits as usize {
        s.push('0');
    }
    if s.len() == 1 {
        s
    } else {
        format!("{}.{}", &s[..1], &s[1..])
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `"p/q"` or an integer `"p"`, with optional sign on `p`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid rational {s:?}"));
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        if den.starts_with(['+', '-']) {
            return Err(bad());
        }
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        Rational::from_bigints(num, den).map_err(|_| bad())
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

impl From<u64> for Rational {
    fn from(v: u64) -> Self {
        Rational::from_integer(v)
    }
}

impl From<u32> for Rational {
    fn from(v: u32) -> Self {
        Rational::from_integer(v)
    }
}

impl From<usize> for Rational {
    fn from(v: usize) -> Self {
        Rational::from_integer(v as u64)
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational::from_integer(v)
    }
}

impl From<BigRational> for Rational {
    fn from(v: BigRational) -> Self {
        Rational(v)
    }
}

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self.0.is_integer() && self.0.numer() == &BigInt::from(*other)
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.0.cmp(&BigRational::from_integer((*other).into())))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign_method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $assign_trait<Rational> for Rational {
            fn $assign_method(&mut self, rhs: Rational) {
                self.0.$assign_method(rhs.0);
            }
        }
        impl<'a> $assign_trait<&'a Rational> for Rational {
            fn $assign_method(&mut self, rhs: &'a Rational) {
                self.0.$assign_method(&rhs.0);
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign);
forward_binop!(Sub, sub, SubAssign, sub_assign);
forward_binop!(Mul, mul, MulAssign, mul_assign);
forward_binop!(Div, div, DivAssign, div_assign);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

/// `e^λ − 1` for a non-negative rational `λ`, as a dyadic rational whose
/// relative error is at most `rel_tol`.
pub fn expm1(lambda: &Rational, rel_tol: &Rational) -> Rational {
    assert!(!lambda.is_negative(), "expm1 requires a non-negative argument");
    assert!(rel_tol.is_positive());
    if lambda.is_zero() {
        return Rational::zero();
    }
    let half_tol = rel_tol / Rational::from(2u32);
    let mut term = lambda.clone();
    let mut sum = lambda.clone();
    let mut n: u64 = 1;
    loop {
        let next = &term * lambda / Rational::from(n + 1);
        // For λ/(n+2) <= 1/2 the tail after `term` is bounded by 2·next.
        let ratio_ok = lambda * Rational::from(2u32) <= Rational::from(n + 2);
        if ratio_ok && &next * Rational::from(2u32) <= &half_tol * &sum {
            break;
        }
        sum += &next;
        term = next;
        n += 1;
    }
    round_relative(&sum, &(rel_tol / Rational::from(4u32)))
}

/// Rounds a positive value to a dyadic rational within `rel_tol` relative
/// error, keeping denominators small.
fn round_relative(value: &Rational, rel_tol: &Rational) -> Rational {
    let abs_tol = value * rel_tol;
    // smallest k with 2^-k <= abs_tol
    let mut k: u64 = 0;
    let mut step = Rational::one();
    let two = Rational::from(2u32);
    if abs_tol >= step {
        return value.clone();
    }
    // Coarse jump using bit lengths before the exact refinement.
    let guess = (abs_tol.denom().bits() as i64 - abs_tol.numer().bits() as i64 - 1).max(0) as u64;
    if guess > 0 {
        k = guess;
        step = Rational::from_bigints(BigInt::one(), BigInt::one() << guess).expect("nonzero");
    }
    while step > abs_tol {
        step /= &two;
        k += 1;
    }
    let scale = BigInt::one() << k;
    let scaled = value.numer() * &scale;
    let (q, r) = scaled.div_rem(value.denom());
    let q = if (&r + &r) >= *value.denom() { q + 1 } else { q };
    Rational::from_bigints(q, scale).expect("nonzero")
}

/// Binomial coefficient `C(n, m)`; zero outside `0 <= m <= n`.
pub fn binomial(n: u64, m: i64) -> BigInt {
    if m < 0 || m as u64 > n {
        return BigInt::zero();
    }
    let m = (m as u64).min(n - m as u64);
    let mut acc = BigInt::one();
    for i in 0..m {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub(crate) fn big_pow(base: i64, exp: u32) -> BigInt {
    Pow::pow(BigInt::from(base), exp)
}
