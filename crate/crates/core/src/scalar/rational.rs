use alloc::string::{String, ToString};
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
use core::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Scalar, ScalarError, Sign};

/// Arbitrary-precision rational number, always in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, ScalarError> {
        let d: BigInt = denom.into();
        if d.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer.into(), d)))
    }

    /// Builds `numer / denom` without reducing. The caller guarantees the
    /// pair is already canonical.
    pub(crate) fn from_canonical_parts(numer: BigInt, denom: BigInt) -> Self {
        debug_assert!(denom.is_positive());
        Rational(BigRational::new_raw(numer, denom))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// `base^(-exp)`, used for the doubly exponential surrogate chains.
    pub fn inverse_power(base: u32, exp: u32) -> Self {
        let den = num_traits::pow(BigInt::from(base), exp as usize);
        Rational(BigRational::new_raw(BigInt::one(), den))
    }

    /// The value as an `i64`, if it is an integer in range.
    pub fn to_i64_exact(&self) -> Option<i64> {
        if self.denom().is_one() {
            self.numer().to_i64()
        } else {
            None
        }
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

    pub fn recip(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ScalarError> {
        if other.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &other.0))
    }

    pub fn pow(&self, e: u32) -> Self {
        Rational(num_traits::pow(self.0.clone(), e as usize))
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn signum(&self) -> Sign {
        match self.0.numer().sign() {
            BigSign::Plus => Sign::Positive,
            BigSign::Minus => Sign::Negative,
            BigSign::NoSign => Sign::Zero,
        }
    }

    /// Nearest binary64; exact zeros stay exact.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        self.0.to_f64().unwrap_or(if self.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
    }

    /// Bit length of numerator plus denominator; a rough size measure.
    pub fn size_bits(&self) -> u64 {
        self.numer().bits() + self.denom().bits()
    }

    pub fn from_biguint_ratio(n: BigUint, d: BigUint) -> Result<Self, ScalarError> {
        Self::new(BigInt::from(n), BigInt::from(d))
    }

    /// Parses the canonical `"p/q"` form (or a bare integer `"p"`), rejecting
    /// anything that is not already in lowest terms.
    pub fn parse_canonical(s: &str) -> Result<Self, ScalarError> {
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let n = parse_int(n)?;
        let d = parse_int(d)?;
        if !d.is_positive() {
            return Err(ScalarError::Parse(alloc::format!("denominator must be positive in {s:?}")));
        }
        if !n.gcd(&d).is_one() {
            return Err(ScalarError::Parse(alloc::format!("{s:?} is not in lowest terms")));
        }
        Ok(Rational::from_canonical_parts(n, d))
    }

    /// Canonical `"p/q"` rendering (the denominator is always written).
    pub fn to_canonical_string(&self) -> String {
        let mut s = self.numer().to_string();
        s.push('/');
        s.push_str(&self.denom().to_string());
        s
    }
}

fn parse_int(s: &str) -> Result<BigInt, ScalarError> {
    let t = s.trim();
    let digits = t.strip_prefix('-').unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ScalarError::Parse(alloc::format!("not an integer: {s:?}")));
    }
    BigInt::from_str(t).map_err(|_| ScalarError::Parse(alloc::format!("not an integer: {s:?}")))
}

impl FromStr for Rational {
    type Err = ScalarError;

    /// Lenient parse: accepts non-reduced fractions and reduces them.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('/') {
            Some((n, d)) => Rational::new(parse_int(n)?, parse_int(d)?),
            None => Ok(Rational::from_integer(parse_int(s)?)),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.size_bits() > 512 {
            write!(f, "Rational(~{} bits)", self.size_bits())
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational::from_integer(v)
    }
}

impl<'a> Add<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn add(self, rhs: &'a Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn sub(self, rhs: &'a Rational) -> Rational {
        Rational(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn mul(self, rhs: &'a Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

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

impl Scalar for Rational {
    fn int_like(&self, v: i64) -> Self {
        Rational::from(v)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        self.checked_div(other)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sign(&self) -> Sign {
        self.signum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn field_examples() {
        assert_eq!(&q(1, 3) + &q(1, 6), q(1, 2));
        assert_eq!(&Rational::zero() * &q(-17, 5), Rational::zero());
        assert_eq!(q(39, 8).checked_div(&q(13, 8)).unwrap(), Rational::from(3));
        // independent check: 39 * 8 == 3 * 13 * 8
        assert_eq!(39 * 8, 3 * 13 * 8);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(q(1, 2).checked_div(&Rational::zero()), Err(ScalarError::DivisionByZero));
        assert!(Rational::new(1, 0).is_err());
        assert!(Rational::zero().recip().is_err());
    }

    #[test]
    fn canonical_form_after_ops() {
        let x = q(6, -4);
        assert_eq!(x.numer(), &BigInt::from(-3));
        assert_eq!(x.denom(), &BigInt::from(2));
        let y = &x * &q(2, 3);
        assert_eq!(y.to_canonical_string(), "-1/1");
    }

    #[test]
    fn cmp_is_total_order() {
        let mut v = alloc::vec![q(1, 2), q(-3, 7), q(5, 3), q(0, 1), q(1, 2)];
        v.sort();
        assert_eq!(v, alloc::vec![q(-3, 7), q(0, 1), q(1, 2), q(1, 2), q(5, 3)]);
        assert_eq!(q(2, 4).cmp(&q(1, 2)), core::cmp::Ordering::Equal);
    }

    #[test]
    fn canonical_parse() {
        assert_eq!(Rational::parse_canonical("28647/7010").unwrap(), q(28647, 7010));
        assert_eq!(Rational::parse_canonical("-4").unwrap(), q(-4, 1));
        assert!(Rational::parse_canonical("2/4").is_err());
        assert!(Rational::parse_canonical("1/-2").is_err());
        assert!(Rational::parse_canonical("1/0").is_err());
        assert!(Rational::parse_canonical("x/2").is_err());
        assert_eq!("2/4".parse::<Rational>().unwrap(), q(1, 2));
    }

    #[test]
    fn inverse_power() {
        assert_eq!(Rational::inverse_power(10, 4), q(1, 10_000));
    }
}
