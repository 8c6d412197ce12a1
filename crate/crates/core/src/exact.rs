//! Exact arbitrary-precision rational scalars and points of the circle R/Z.
//!
//! Every quantity in the algebra layer (breakpoints, slopes, weights,
//! distances) is one of these two types. Repeated composition of dyadic maps
//! grows denominators exponentially, so fixed-width arithmetic is never used;
//! values are always stored reduced.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number, always reduced, denominator always positive.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let d: BigInt = denom.into();
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer.into(), d)))
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// 2^k for any integer k, negative exponents included.
    pub fn pow2(k: i64) -> Self {
        let mag = BigInt::one() << k.unsigned_abs();
        if k >= 0 {
            Rational(BigRational::from_integer(mag))
        } else {
            Rational(BigRational::new(BigInt::one(), mag))
        }
    }

    pub fn from_u64_ratio(numer: u64, denom: u64) -> Result<Self> {
        Self::new(BigInt::from(numer), BigInt::from(denom))
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

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, other: &Rational) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(&self.0 / &other.0))
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Fractional part in [0, 1).
    pub fn fract_mod_one(&self) -> Self {
        Rational(&self.0 - BigRational::from_integer(self.0.floor().to_integer()))
    }

    /// True iff the denominator is a power of two (integers included).
    pub fn is_dyadic(&self) -> bool {
        is_power_of_two_uint(self.0.denom().magnitude())
    }

    /// For r = 2^k returns Some(k), otherwise None.
    pub fn log2_exact(&self) -> Option<i64> {
        if !self.is_positive() {
            return None;
        }
        let n = self.0.numer().magnitude();
        let d = self.0.denom().magnitude();
        if d.is_one() && is_power_of_two_uint(n) {
            Some(n.trailing_zeros().unwrap_or(0) as i64)
        } else if n.is_one() && is_power_of_two_uint(d) {
            Some(-(d.trailing_zeros().unwrap_or(0) as i64))
        } else {
            None
        }
    }

    /// Nearest-enough f64; robust for numerators/denominators far beyond the
    /// f64 range (both are shifted down to 64 significant bits first).
    pub fn to_f64(&self) -> f64 {
        let num = self.0.numer();
        let den = self.0.denom();
        if num.is_zero() {
            return 0.0;
        }
        let nb = num.bits();
        let db = den.bits();
        let ns = nb.saturating_sub(64);
        let ds = db.saturating_sub(64);
        let n_approx = (num >> ns).to_f64().unwrap_or(f64::NAN);
        let d_approx = (den >> ds).to_f64().unwrap_or(f64::NAN);
        let exp = ns as i64 - ds as i64;
        if exp.abs() > i64::from(i32::MAX) {
            return if exp > 0 { f64::INFINITY } else { 0.0 } * n_approx.signum();
        }
        (n_approx / d_approx) * 2f64.powi(exp as i32)
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

fn is_power_of_two_uint(n: &BigUint) -> bool {
    !n.is_zero() && n.count_ones() == 1
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Parses "num/den" or a bare integer "num".
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_int = |t: &str| -> Result<BigInt> {
            BigInt::from_str(t.trim())
                .map_err(|_| Error::InvalidParameter(format!("bad rational literal {s:?}")))
        };
        match s.split_once('/') {
            Some((n, d)) => Rational::new(parse_int(n)?, parse_int(d)?),
            None => Ok(Rational::integer(parse_int(s)?)),
        }
    }
}

macro_rules! rational_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
        impl<'a> $trait<&'a Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }
    };
}

rational_binop!(Add, add, +);
rational_binop!(Sub, sub, -);
rational_binop!(Mul, mul, *);

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        self.0 -= rhs.0;
    }
}

impl MulAssign for Rational {
    fn mul_assign(&mut self, rhs: Rational) {
        self.0 *= rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

/// Panics on a zero divisor; use `checked_div` where the divisor is untrusted.
impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

/// A point of the circle S^1 = R/Z, stored as its representative in [0, 1).
///
/// Normalization happens at construction, never lazily.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CirclePoint(Rational);

impl CirclePoint {
    pub fn new(value: Rational) -> Self {
        CirclePoint(value.fract_mod_one())
    }

    pub fn zero() -> Self {
        CirclePoint(Rational::zero())
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Result<Self> {
        Ok(CirclePoint::new(Rational::new(numer, denom)?))
    }

    /// The representative in [0, 1).
    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_value(self) -> Rational {
        self.0
    }

    pub fn is_dyadic(&self) -> bool {
        self.0.is_dyadic()
    }

    /// Rotation: self + t mod 1.
    pub fn add_rational(&self, t: &Rational) -> Self {
        CirclePoint::new(&self.0 + t)
    }

    /// Signed lift difference (self - other) mod 1, in [0, 1).
    pub fn offset_from(&self, other: &CirclePoint) -> Rational {
        (&self.0 - &other.0).fract_mod_one()
    }

    /// Circle metric d(x, y) = min(|x - y|, 1 - |x - y|); always <= 1/2.
    pub fn dist(&self, other: &CirclePoint) -> Rational {
        let fwd = self.offset_from(other);
        let bwd = Rational::one() - fwd.clone();
        fwd.min(bwd)
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for CirclePoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(CirclePoint::new(s.parse::<Rational>()?))
    }
}

impl From<Rational> for CirclePoint {
    fn from(r: Rational) -> Self {
        CirclePoint::new(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn reduction() {
        assert_eq!(q(6, 4), q(3, 2));
        assert_eq!(q(6, 4).to_string(), "3/2");
        assert_eq!(q(-2, -4), q(1, 2));
        assert_eq!(q(2, -4).to_string(), "-1/2");
    }

    #[test]
    fn arithmetic() {
        assert_eq!(q(1, 3) + q(2, 3), Rational::one());
        assert_eq!(q(1, 2) * q(3, 5), q(3, 10));
        assert_eq!(q(1, 2).checked_div(&q(3, 4)).unwrap(), q(2, 3));
        assert!(matches!(
            q(1, 2).checked_div(&Rational::zero()),
            Err(Error::DivisionByZero)
        ));
        assert!(matches!(Rational::new(1, 0), Err(Error::DivisionByZero)));
    }

    #[test]
    fn ordering_is_total() {
        let mut v = vec![q(1, 2), q(-3, 7), q(5, 3), Rational::zero()];
        v.sort();
        assert_eq!(v, vec![q(-3, 7), Rational::zero(), q(1, 2), q(5, 3)]);
    }

    #[test]
    fn dyadic_detection() {
        assert!(q(3, 8).is_dyadic());
        assert!(!q(1, 3).is_dyadic());
        assert!(Rational::zero().is_dyadic());
        assert!(q(7, 1).is_dyadic());
    }

    #[test]
    fn log2_exact() {
        assert_eq!(q(8, 1).log2_exact(), Some(3));
        assert_eq!(q(1, 16).log2_exact(), Some(-4));
        assert_eq!(Rational::one().log2_exact(), Some(0));
        assert_eq!(q(3, 4).log2_exact(), None);
        assert_eq!(q(-2, 1).log2_exact(), None);
    }

    #[test]
    fn pow2() {
        assert_eq!(Rational::pow2(5), q(32, 1));
        assert_eq!(Rational::pow2(-3), q(1, 8));
        assert_eq!(Rational::pow2(0), Rational::one());
    }

    #[test]
    fn circle_normalization() {
        assert_eq!(
            CirclePoint::new(q(7, 4)),
            CirclePoint::from_ratio(3, 4).unwrap()
        );
        assert_eq!(
            CirclePoint::new(q(-1, 4)),
            CirclePoint::from_ratio(3, 4).unwrap()
        );
        assert_eq!(CirclePoint::new(q(3, 1)), CirclePoint::zero());
    }

    #[test]
    fn circle_distance() {
        let p = |n, d| CirclePoint::from_ratio(n, d).unwrap();
        assert_eq!(p(0, 1).dist(&p(3, 4)), q(1, 4));
        assert_eq!(p(1, 3).dist(&p(1, 3)), Rational::zero());
        assert_eq!(p(1, 8).dist(&p(7, 8)), q(1, 4));
        assert_eq!(p(1, 8).dist(&p(7, 8)), p(7, 8).dist(&p(1, 8)));
    }

    #[test]
    fn to_f64_handles_huge_values() {
        let big = Rational::pow2(2000);
        let half = Rational::pow2(2000)
            .checked_div(&Rational::pow2(2001))
            .unwrap();
        assert_eq!(half.to_f64(), 0.5);
        assert_eq!((-half).to_f64(), -0.5);
        assert_eq!(big.to_f64(), f64::INFINITY);
        assert_eq!(Rational::pow2(-2000).to_f64(), 0.0);
        let third = Rational::new(1, 3).unwrap();
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(Rational::zero().to_f64(), 0.0);
    }

    #[test]
    fn parse_roundtrip() {
        let r: Rational = "17/128".parse().unwrap();
        assert_eq!(r, q(17, 128));
        let r: Rational = "-5".parse().unwrap();
        assert_eq!(r, q(-5, 1));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x/2".parse::<Rational>().is_err());
    }
}
