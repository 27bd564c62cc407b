//! Exact quantities of voting liquid.
//!
//! A single ballot carries exactly one unit of liquid. Linear tallies keep
//! every quantity as a reduced nonnegative rational so that recounts are
//! bit-reproducible; quadratic tallies fall back to binary64 because square
//! roots leave the rationals. Both representations implement [`Quantity`],
//! which is what the tally engines are written against.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Sub, SubAssign};
use std::str::FromStr;

/// Nonnegative exact rational amount of voting liquid, always in reduced form.
///
/// Values whose numerator and denominator fit in `i64` are stored inline;
/// anything larger moves to big integers, so results never overflow.
#[derive(Clone)]
pub struct Amount(Repr);

#[derive(Clone)]
enum Repr {
    Small(Ratio<i64>),
    Big(BigRational),
}

impl Amount {
    pub fn zero() -> Self {
        Amount(Repr::Small(Ratio::zero()))
    }

    pub fn one() -> Self {
        Amount(Repr::Small(Ratio::one()))
    }

    pub fn from_integer(n: u64) -> Self {
        match i64::try_from(n) {
            Ok(n) => Amount(Repr::Small(Ratio::from_integer(n))),
            Err(_) => Amount(Repr::Big(BigRational::from_integer(BigInt::from(n)))),
        }
    }

    /// `num / den`. Panics if `den` is zero.
    pub fn ratio(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        match (i64::try_from(num), i64::try_from(den)) {
            (Ok(n), Ok(d)) => Amount(Repr::Small(Ratio::new(n, d))),
            _ => Amount::big(BigRational::new(BigInt::from(num), BigInt::from(den))),
        }
    }

    /// Wraps a rational, rejecting negative values.
    pub fn from_rational(r: BigRational) -> Option<Self> {
        if r.is_negative() {
            None
        } else {
            Some(Amount::big(r))
        }
    }

    /// Canonical form: inline whenever both parts fit.
    fn big(r: BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Amount(Repr::Small(Ratio::new_raw(n, d))),
            _ => Amount(Repr::Big(r)),
        }
    }

    pub fn to_rational(&self) -> BigRational {
        match &self.0 {
            Repr::Small(r) => BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(*r.numer()),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(*r.denom()),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_zero(),
            Repr::Big(r) => r.is_zero(),
        }
    }

    /// Subtraction that refuses to go below zero.
    pub fn checked_sub(&self, other: &Amount) -> Option<Amount> {
        if other > self {
            None
        } else {
            Some(self.combine(other, CheckedSub::checked_sub, |a, b| a - b))
        }
    }

    /// Absolute difference.
    pub fn abs_diff(&self, other: &Amount) -> Amount {
        if other > self {
            other.combine(self, CheckedSub::checked_sub, |a, b| a - b)
        } else {
            self.combine(other, CheckedSub::checked_sub, |a, b| a - b)
        }
    }

    /// Largest integer not above this amount.
    pub fn floor(&self) -> Amount {
        match &self.0 {
            Repr::Small(r) => Amount(Repr::Small(r.floor())),
            Repr::Big(r) => Amount::big(r.floor()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(r) => r.to_f64(),
            Repr::Big(r) => r.to_f64(),
        }
        .unwrap_or(f64::NAN)
    }

    /// Decimal approximation rounded to 12 significant digits.
    pub fn decimal(&self) -> f64 {
        round_significant(self.to_f64())
    }

    /// Applies `small` when both sides are inline and it does not overflow,
    /// `big` otherwise.
    fn combine(
        &self,
        other: &Amount,
        small: impl Fn(&Ratio<i64>, &Ratio<i64>) -> Option<Ratio<i64>>,
        big: impl Fn(BigRational, BigRational) -> BigRational,
    ) -> Amount {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &other.0) {
            if let Some(r) = small(a, b) {
                return Amount(Repr::Small(r));
            }
        }
        Amount::big(big(self.to_rational(), other.to_rational()))
    }
}

impl PartialEq for Amount {
    fn eq(&self, other: &Amount) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Amount {}

impl PartialOrd for Amount {
    fn partial_cmp(&self, other: &Amount) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Amount {
    fn cmp(&self, other: &Amount) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            _ => self.to_rational().cmp(&other.to_rational()),
        }
    }
}

impl Hash for Amount {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // The canonical form makes the representation unique per value.
        match &self.0 {
            Repr::Small(r) => r.hash(state),
            Repr::Big(r) => r.hash(state),
        }
    }
}

/// Rounds `x` to 12 significant digits, the precision used for the
/// convenience decimal fields of reports.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Repr::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Error parsing an amount from its `num/den` form.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid amount {0:?}: expected \"num/den\" with den > 0 and num >= 0")]
pub struct ParseAmountError(String);

impl FromStr for Amount {
    type Err = ParseAmountError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseAmountError(s.to_string());
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num: BigInt = num.parse().map_err(|_| err())?;
        let den: BigInt = den.parse().map_err(|_| err())?;
        if !den.is_positive() || num.is_negative() {
            return Err(err());
        }
        Ok(Amount::big(BigRational::new(num, den)))
    }
}

impl Serialize for Amount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Amount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl<'a> Add<&'a Amount> for &'a Amount {
    type Output = Amount;
    fn add(self, rhs: &Amount) -> Amount {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        self.combine(rhs, CheckedAdd::checked_add, |a, b| a + b)
    }
}

impl Add for Amount {
    type Output = Amount;
    fn add(self, rhs: Amount) -> Amount {
        &self + &rhs
    }
}

impl AddAssign<&Amount> for Amount {
    fn add_assign(&mut self, rhs: &Amount) {
        *self = &*self + rhs;
    }
}

impl AddAssign for Amount {
    fn add_assign(&mut self, rhs: Amount) {
        *self = &*self + &rhs;
    }
}

/// Panics if the result would be negative; liquid never goes below zero.
impl<'a> Sub<&'a Amount> for &'a Amount {
    type Output = Amount;
    fn sub(self, rhs: &Amount) -> Amount {
        self.checked_sub(rhs)
            .unwrap_or_else(|| panic!("negative amount: {self} - {rhs}"))
    }
}

impl Sub for Amount {
    type Output = Amount;
    fn sub(self, rhs: Amount) -> Amount {
        &self - &rhs
    }
}

impl SubAssign<&Amount> for Amount {
    fn sub_assign(&mut self, rhs: &Amount) {
        *self = &*self - rhs;
    }
}

impl<'a> Mul<&'a Amount> for &'a Amount {
    type Output = Amount;
    fn mul(self, rhs: &Amount) -> Amount {
        self.combine(rhs, CheckedMul::checked_mul, |a, b| a * b)
    }
}

impl Mul for Amount {
    type Output = Amount;
    fn mul(self, rhs: Amount) -> Amount {
        &self * &rhs
    }
}

/// Panics on division by zero.
impl<'a> Div<&'a Amount> for &'a Amount {
    type Output = Amount;
    fn div(self, rhs: &Amount) -> Amount {
        self.combine(rhs, CheckedDiv::checked_div, |a, b| a / b)
    }
}

impl Div for Amount {
    type Output = Amount;
    fn div(self, rhs: Amount) -> Amount {
        &self / &rhs
    }
}

impl Sum for Amount {
    fn sum<I: Iterator<Item = Amount>>(iter: I) -> Amount {
        iter.fold(Amount::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Amount> for Amount {
    fn sum<I: Iterator<Item = &'a Amount>>(iter: I) -> Amount {
        let mut acc = Amount::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}

/// A tally number: exact for linear methods, binary64 for quadratic ones.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Amount),
    Approx(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(a) => a.to_f64(),
            Value::Approx(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Amount> {
        match self {
            Value::Exact(a) => Some(a),
            Value::Approx(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Exact(a) => a.is_zero(),
            Value::Approx(x) => *x == 0.0,
        }
    }

    /// Sum of values of the same kind. Mixing kinds falls back to binary64.
    pub fn sum<'a>(values: impl IntoIterator<Item = &'a Value>) -> Value {
        let mut exact = Some(Amount::zero());
        let mut approx = 0.0;
        for v in values {
            approx += v.to_f64();
            exact = match (exact, v) {
                (Some(acc), Value::Exact(a)) => Some(acc + a.clone()),
                _ => None,
            };
        }
        match exact {
            Some(a) => Value::Exact(a),
            None => Value::Approx(approx),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(a) => write!(f, "{a}"),
            Value::Approx(x) => write!(f, "{x}"),
        }
    }
}

/// Arithmetic the tally engines need from a liquid representation.
pub trait Quantity:
    Clone
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn zero() -> Self;
    fn from_integer(n: u64) -> Self;
    fn from_amount(a: &Amount) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    fn to_value(&self) -> Value;
    /// Largest integer not above `self`.
    fn floor(&self) -> Self;
    /// Total order used when ranking supports; NaN never arises in practice.
    fn cmp_total(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }
}

impl Quantity for Amount {
    fn zero() -> Self {
        Amount::zero()
    }
    fn from_integer(n: u64) -> Self {
        Amount::from_integer(n)
    }
    fn from_amount(a: &Amount) -> Self {
        a.clone()
    }
    fn is_zero(&self) -> bool {
        Amount::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        Amount::to_f64(self)
    }
    fn to_value(&self) -> Value {
        Value::Exact(self.clone())
    }
    fn floor(&self) -> Self {
        Amount::floor(self)
    }
    fn cmp_total(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

impl Quantity for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_integer(n: u64) -> Self {
        n as f64
    }
    fn from_amount(a: &Amount) -> Self {
        a.to_f64()
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_value(&self) -> Value {
        Value::Approx(*self)
    }
    fn floor(&self) -> Self {
        f64::floor(*self)
    }
    fn cmp_total(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
}
