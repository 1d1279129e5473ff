use core::cmp::Ordering;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Rational, ScalarError};

/// Directed rounding: `Down` is toward negative infinity, `Up` toward
/// positive infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

impl Round {
    pub fn flip(self) -> Round {
        match self {
            Round::Down => Round::Up,
            Round::Up => Round::Down,
        }
    }
}

/// Binary floating-point number `(-1)^neg * mant * 2^exp` with an
/// arbitrary-size mantissa and an arbitrary-size exponent.
///
/// Canonical form: zero is `(false, 0, 0)`; otherwise the mantissa is odd.
/// Precision is not stored here; every rounding operation takes it as an
/// argument.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BigFloat {
    neg: bool,
    mant: BigUint,
    exp: BigInt,
}

impl BigFloat {
    pub fn zero() -> Self {
        BigFloat { neg: false, mant: BigUint::zero(), exp: BigInt::zero() }
    }

    pub fn one() -> Self {
        BigFloat { neg: false, mant: BigUint::one(), exp: BigInt::zero() }
    }

    /// `2^exp`.
    pub fn pow2(exp: BigInt) -> Self {
        BigFloat { neg: false, mant: BigUint::one(), exp }
    }

    pub fn from_parts(neg: bool, mant: BigUint, exp: BigInt) -> Self {
        if mant.is_zero() {
            return Self::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        BigFloat { neg, mant: mant >> tz, exp: exp + BigInt::from(tz) }
    }

    pub fn from_int(n: &BigInt) -> Self {
        Self::from_parts(n.is_negative(), n.magnitude().clone(), BigInt::zero())
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_int(&BigInt::from(n))
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    pub fn is_positive(&self) -> bool {
        !self.neg && !self.is_zero()
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mant
    }

    pub fn exponent(&self) -> &BigInt {
        &self.exp
    }

    /// `floor(log2 |x|)`; `None` for zero.
    pub fn top(&self) -> Option<BigInt> {
        if self.is_zero() {
            None
        } else {
            Some(&self.exp + BigInt::from(self.mant.bits() - 1))
        }
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        BigFloat { neg: !self.neg, mant: self.mant.clone(), exp: self.exp.clone() }
    }

    pub fn abs(&self) -> Self {
        BigFloat { neg: false, mant: self.mant.clone(), exp: self.exp.clone() }
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_pow2(&self, k: &BigInt) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        BigFloat { neg: self.neg, mant: self.mant.clone(), exp: &self.exp + k }
    }

    fn round_parts(neg: bool, mant: BigUint, exp: BigInt, prec: u64, dir: Round) -> Self {
        let bits = mant.bits();
        if bits <= prec {
            return Self::from_parts(neg, mant, exp);
        }
        let shift = bits - prec;
        let inexact = mant.trailing_zeros().map_or(false, |tz| tz < shift);
        let mut q = mant >> shift;
        let away = match dir {
            Round::Up => !neg,
            Round::Down => neg,
        };
        if inexact && away {
            q += 1u32;
        }
        Self::from_parts(neg, q, exp + BigInt::from(shift))
    }

    /// Rounds to at most `prec` mantissa bits in direction `dir`.
    pub fn round_to(&self, prec: u64, dir: Round) -> Self {
        Self::round_parts(self.neg, self.mant.clone(), self.exp.clone(), prec, dir)
    }

    fn signed_mant(&self) -> BigInt {
        let m = BigInt::from(self.mant.clone());
        if self.neg {
            -m
        } else {
            m
        }
    }

    /// Exact sum, valid when the exponents are within reach of each other.
    fn add_aligned(a: &Self, b: &Self, prec: u64, dir: Round) -> Self {
        let e = if a.exp < b.exp { a.exp.clone() } else { b.exp.clone() };
        let sa = (&a.exp - &e).to_u64().expect("aligned shift fits");
        let sb = (&b.exp - &e).to_u64().expect("aligned shift fits");
        let sum = (a.signed_mant() << sa) + (b.signed_mant() << sb);
        let neg = sum.is_negative();
        Self::round_parts(neg, sum.magnitude().clone(), e, prec, dir)
    }

    /// `a + b` rounded to `prec` bits in direction `dir`.
    ///
    /// An operand far below the rounding position of the other only acts as
    /// a sticky bit; it is replaced by a power of two that rounds the same
    /// way, so exponent gaps of any size cost nothing.
    pub fn add(a: &Self, b: &Self, prec: u64, dir: Round) -> Self {
        if a.is_zero() {
            return b.round_to(prec, dir);
        }
        if b.is_zero() {
            return a.round_to(prec, dir);
        }
        let (ta, tb) = (a.top().unwrap(), b.top().unwrap());
        let (big, small, tsmall) = if ta >= tb { (a, b, tb) } else { (b, a, ta) };
        let tbig = big.top().unwrap();
        let limit = &tbig - BigInt::from(prec) - 1;
        let m = if big.exp < limit { big.exp.clone() } else { limit };
        if tsmall < &m - 1 {
            let sticky = BigFloat { neg: small.neg, mant: BigUint::one(), exp: m - 2 };
            return Self::add_aligned(big, &sticky, prec, dir);
        }
        Self::add_aligned(big, small, prec, dir)
    }

    pub fn sub(a: &Self, b: &Self, prec: u64, dir: Round) -> Self {
        Self::add(a, &b.neg(), prec, dir)
    }

    /// Exact product (mantissa bits add up).
    pub fn mul_exact(a: &Self, b: &Self) -> Self {
        if a.is_zero() || b.is_zero() {
            return Self::zero();
        }
        BigFloat { neg: a.neg != b.neg, mant: &a.mant * &b.mant, exp: &a.exp + &b.exp }
    }

    pub fn mul(a: &Self, b: &Self, prec: u64, dir: Round) -> Self {
        Self::mul_exact(a, b).round_to(prec, dir)
    }

    pub fn div(a: &Self, b: &Self, prec: u64, dir: Round) -> Result<Self, ScalarError> {
        if b.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if a.is_zero() {
            return Ok(Self::zero());
        }
        let want = prec + 2 + b.mant.bits();
        let shift = want.saturating_sub(a.mant.bits());
        let (q, r) = (&a.mant << shift).div_rem(&b.mant);
        let mut exp = &a.exp - &b.exp - BigInt::from(shift);
        let mut q = q;
        if !r.is_zero() {
            // sticky bit below the rounding position
            q = (q << 1u32) | BigUint::one();
            exp -= 1;
        }
        Ok(Self::round_parts(a.neg != b.neg, q, exp, prec, dir))
    }

    /// Nearest-ish rounding of a rational to `prec` bits in direction `dir`.
    pub fn from_rational(q: &Rational, prec: u64, dir: Round) -> Self {
        let n = Self::from_int(q.numer());
        let d = Self::from_int(q.denom());
        Self::div(&n, &d, prec, dir).expect("rational denominators are positive")
    }

    /// Exact rational value, or `None` when the binary exponent is too large
    /// to expand (beyond 2^26 bits).
    pub fn to_rational(&self) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        let e = self.exp.to_i64()?;
        if e.unsigned_abs() > 1 << 26 {
            return None;
        }
        let m = self.signed_mant();
        if e >= 0 {
            Some(Rational::from_integer(m << (e as u64)))
        } else {
            let d = BigInt::one() << ((-e) as u64);
            Some(Rational::from_canonical_parts(m, d))
        }
    }

    /// Nearest binary64 (ties away from zero); exact zero maps to `0.0`.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        let (m, e) = if bits > 53 {
            let shift = bits - 53;
            let mut q = &self.mant >> shift;
            if self.mant.bit(shift - 1) {
                q += 1u32;
            }
            (q, &self.exp + BigInt::from(shift))
        } else {
            (self.mant.clone(), self.exp.clone())
        };
        let m = m.to_u64().unwrap() as f64;
        let v = match e.to_i32() {
            Some(e) if e > -1300 && e < 1100 => libm::scalbn(m, e),
            _ if e.is_negative() => 0.0,
            _ => f64::INFINITY,
        };
        if self.neg {
            -v
        } else {
            v
        }
    }

    /// `floor(x * 2^w)` together with a flag telling whether it was exact.
    pub(crate) fn to_fixed_floor(&self, w: u64) -> (BigInt, bool) {
        let e = &self.exp + BigInt::from(w);
        let m = self.signed_mant();
        if !e.is_negative() {
            let s = e.to_u64().expect("fixed-point shift fits");
            return (m << s, true);
        }
        let s = (-e).to_u64().unwrap_or(u64::MAX);
        if s >= self.mant.bits() + 1 {
            let f = if m.is_negative() { BigInt::from(-1) } else { BigInt::zero() };
            return (f, false);
        }
        let exact = self.mant.trailing_zeros().map_or(true, |tz| tz >= s);
        // arithmetic shift floors toward negative infinity
        (m >> s, exact)
    }

    fn cmp_magnitude(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (ta, tb) = (self.top().unwrap(), other.top().unwrap());
        if ta != tb {
            return ta.cmp(&tb);
        }
        let e = if self.exp < other.exp { self.exp.clone() } else { other.exp.clone() };
        let sa = (&self.exp - &e).to_u64().unwrap();
        let sb = (&other.exp - &e).to_u64().unwrap();
        (&self.mant << sa).cmp(&(&other.mant << sb))
    }

    pub fn sign_i8(&self) -> i8 {
        if self.is_zero() {
            0
        } else if self.neg {
            -1
        } else {
            1
        }
    }

    pub fn min<'a>(a: &'a Self, b: &'a Self) -> &'a Self {
        if a <= b {
            a
        } else {
            b
        }
    }

    pub fn max<'a>(a: &'a Self, b: &'a Self) -> &'a Self {
        if a >= b {
            a
        } else {
            b
        }
    }
}

impl Ord for BigFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.sign_i8(), other.sign_i8());
        if sa != sb {
            return sa.cmp(&sb);
        }
        match sa {
            0 => Ordering::Equal,
            1 => self.cmp_magnitude(other),
            _ => other.cmp_magnitude(self),
        }
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let approx = self.to_f64();
        if approx != 0.0 && approx.is_finite() {
            write!(f, "{approx:e}")
        } else {
            write!(f, "{}2^{} ({} bits)", if self.neg { "-" } else { "" }, self.top().unwrap(), self.mant.bits())
        }
    }
}

impl From<BigInt> for BigFloat {
    fn from(n: BigInt) -> Self {
        Self::from_int(&n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bf(n: i64) -> BigFloat {
        BigFloat::from_i64(n)
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn canonical_mantissa_is_odd() {
        let x = bf(12);
        assert_eq!(x.mantissa(), &BigUint::from(3u32));
        assert_eq!(x.exponent(), &BigInt::from(2));
        assert_eq!(x.top(), Some(BigInt::from(3)));
    }

    #[test]
    fn directed_rounding_brackets_one_third() {
        let lo = BigFloat::from_rational(&q(1, 3), 64, Round::Down);
        let hi = BigFloat::from_rational(&q(1, 3), 64, Round::Up);
        assert!(lo < hi);
        assert!(lo.to_rational().unwrap() < q(1, 3));
        assert!(hi.to_rational().unwrap() > q(1, 3));
        let gap = &hi.to_rational().unwrap() - &lo.to_rational().unwrap();
        assert!(gap <= q(1, 1) .checked_div(&Rational::from_integer(BigInt::one() << 64u32)).unwrap());
    }

    #[test]
    fn negative_rounding_directions() {
        let lo = BigFloat::from_rational(&q(-1, 3), 32, Round::Down);
        let hi = BigFloat::from_rational(&q(-1, 3), 32, Round::Up);
        assert!(lo.to_rational().unwrap() < q(-1, 3));
        assert!(hi.to_rational().unwrap() > q(-1, 3));
    }

    #[test]
    fn sticky_addition_across_huge_exponent_gap() {
        let tiny = BigFloat::pow2(BigInt::from(-1_000_000_000_000i64));
        let fourteen = bf(14);
        let up = BigFloat::add(&fourteen, &tiny, 64, Round::Up);
        let down = BigFloat::add(&fourteen, &tiny, 64, Round::Down);
        assert_eq!(down, fourteen);
        assert!(up > fourteen);
        assert_eq!(BigFloat::sub(&up, &fourteen, 64, Round::Down).top(), Some(BigInt::from(3 - 63)));
        // subtracting a tiny amount from a power of two crosses the binade
        let eight = bf(8);
        let d = BigFloat::sub(&eight, &tiny, 64, Round::Down);
        let u = BigFloat::sub(&eight, &tiny, 64, Round::Up);
        assert!(d < eight);
        assert_eq!(u, eight);
    }

    #[test]
    fn exact_products_and_comparison() {
        let a = BigFloat::from_rational(&q(3, 4), 8, Round::Down);
        let b = bf(-6);
        let p = BigFloat::mul_exact(&a, &b);
        assert_eq!(p.to_rational().unwrap(), q(-9, 2));
        assert!(p < a);
        assert!(bf(-1) > bf(-2));
        assert_eq!(bf(0).cmp(&BigFloat::zero()), Ordering::Equal);
    }

    #[test]
    fn division_exact_when_representable() {
        let x = BigFloat::div(&bf(39), &bf(8), 32, Round::Down).unwrap();
        assert_eq!(x.to_rational().unwrap(), q(39, 8));
        assert!(BigFloat::div(&bf(1), &BigFloat::zero(), 32, Round::Up).is_err());
    }

    #[test]
    fn f64_conversion() {
        assert_eq!(bf(14).to_f64(), 14.0);
        assert_eq!(BigFloat::pow2(BigInt::from(-31778)).to_f64(), 0.0);
        let third = BigFloat::from_rational(&q(1, 3), 200, Round::Down);
        assert_eq!(third.to_f64(), 1.0 / 3.0);
    }

    #[test]
    fn fixed_point_floor() {
        let x = BigFloat::from_rational(&q(-5, 4), 32, Round::Down);
        assert_eq!(x.to_fixed_floor(1), (BigInt::from(-3), false));
        assert_eq!(x.to_fixed_floor(2), (BigInt::from(-5), true));
    }
}
