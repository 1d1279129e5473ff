use core::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{BigFloat, Rational, Round, Scalar, ScalarError, Sign};

/// Closed interval `[lo, hi]` of big floats, carried at `precision_bits`.
///
/// Every operation rounds `lo` down and `hi` up, so whenever the true
/// operands lie in the inputs the true result lies in the output.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FloatInterval {
    lo: BigFloat,
    hi: BigFloat,
    prec: u64,
}

pub const MIN_PRECISION: u64 = 32;

impl FloatInterval {
    pub fn new(lo: BigFloat, hi: BigFloat, prec: u64) -> Result<Self, ScalarError> {
        if lo > hi {
            return Err(ScalarError::Parse(alloc::format!("interval lower bound exceeds upper bound")));
        }
        Ok(FloatInterval { lo, hi, prec: prec.max(MIN_PRECISION) })
    }

    /// Exact point interval (the value is not rounded).
    pub fn point(x: BigFloat, prec: u64) -> Self {
        FloatInterval { lo: x.clone(), hi: x, prec: prec.max(MIN_PRECISION) }
    }

    pub fn from_i64(v: i64, prec: u64) -> Self {
        Self::point(BigFloat::from_i64(v), prec).rounded()
    }

    pub fn zero(prec: u64) -> Self {
        Self::point(BigFloat::zero(), prec)
    }

    /// Tightest enclosure of `q` with `prec`-bit endpoints.
    pub fn from_rational(q: &Rational, prec: u64) -> Self {
        let prec = prec.max(MIN_PRECISION);
        FloatInterval {
            lo: BigFloat::from_rational(q, prec, Round::Down),
            hi: BigFloat::from_rational(q, prec, Round::Up),
            prec,
        }
    }

    fn rounded(self) -> Self {
        let p = self.prec;
        FloatInterval { lo: self.lo.round_to(p, Round::Down), hi: self.hi.round_to(p, Round::Up), prec: p }
    }

    pub fn lo(&self) -> &BigFloat {
        &self.lo
    }

    pub fn hi(&self) -> &BigFloat {
        &self.hi
    }

    pub fn precision_bits(&self) -> u64 {
        self.prec
    }

    pub fn with_precision(&self, prec: u64) -> Self {
        FloatInterval { lo: self.lo.clone(), hi: self.hi.clone(), prec: prec.max(MIN_PRECISION) }.rounded()
    }

    fn join_prec(&self, other: &Self) -> u64 {
        self.prec.max(other.prec)
    }

    pub fn add(&self, other: &Self) -> Self {
        let p = self.join_prec(other);
        FloatInterval {
            lo: BigFloat::add(&self.lo, &other.lo, p, Round::Down),
            hi: BigFloat::add(&self.hi, &other.hi, p, Round::Up),
            prec: p,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p = self.join_prec(other);
        FloatInterval {
            lo: BigFloat::sub(&self.lo, &other.hi, p, Round::Down),
            hi: BigFloat::sub(&self.hi, &other.lo, p, Round::Up),
            prec: p,
        }
    }

    pub fn neg(&self) -> Self {
        FloatInterval { lo: self.hi.neg(), hi: self.lo.neg(), prec: self.prec }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let p = self.join_prec(other);
        // exact endpoint products, then one directed rounding each way
        let cands = [
            BigFloat::mul_exact(&self.lo, &other.lo),
            BigFloat::mul_exact(&self.lo, &other.hi),
            BigFloat::mul_exact(&self.hi, &other.lo),
            BigFloat::mul_exact(&self.hi, &other.hi),
        ];
        let mut lo = &cands[0];
        let mut hi = &cands[0];
        for c in &cands[1..] {
            lo = BigFloat::min(lo, c);
            hi = BigFloat::max(hi, c);
        }
        FloatInterval { lo: lo.round_to(p, Round::Down), hi: hi.round_to(p, Round::Up), prec: p }
    }

    pub fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        if other.contains_zero() {
            return Err(ScalarError::DivisorContainsZero);
        }
        let p = self.join_prec(other);
        let mut lo: Option<BigFloat> = None;
        let mut hi: Option<BigFloat> = None;
        for a in [&self.lo, &self.hi] {
            for b in [&other.lo, &other.hi] {
                let d = BigFloat::div(a, b, p, Round::Down)?;
                let u = BigFloat::div(a, b, p, Round::Up)?;
                lo = Some(match lo {
                    Some(l) if l <= d => l,
                    _ => d,
                });
                hi = Some(match hi {
                    Some(h) if h >= u => h,
                    _ => u,
                });
            }
        }
        Ok(FloatInterval { lo: lo.unwrap(), hi: hi.unwrap(), prec: p })
    }

    pub fn recip(&self) -> Result<Self, ScalarError> {
        FloatInterval::from_i64(1, self.prec).div(self)
    }

    /// Positive if `lo > 0`, Negative if `hi < 0`, Unknown otherwise.
    pub fn sign_certificate(&self) -> Sign {
        if self.lo.is_positive() {
            Sign::Positive
        } else if self.hi.is_negative() {
            Sign::Negative
        } else {
            Sign::Unknown
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_point_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains_rational(&self, q: &Rational) -> bool {
        let lo_ok = match self.lo.to_rational() {
            Some(l) => l <= *q,
            None => le_unexpandable(&self.lo, q),
        };
        let hi_ok = match self.hi.to_rational() {
            Some(h) => *q <= h,
            None => le_unexpandable(&self.hi.neg(), &-q),
        };
        lo_ok && hi_ok
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// `hi - lo`, rounded up.
    pub fn width(&self) -> BigFloat {
        BigFloat::sub(&self.hi, &self.lo, self.prec, Round::Up)
    }

    /// Widens both endpoints outward by one unit in the last place at this
    /// interval's precision.
    pub fn widen_ulp(&self) -> Self {
        fn ulp(x: &BigFloat, p: u64) -> BigFloat {
            match x.top() {
                Some(t) => BigFloat::pow2(t - BigInt::from(p) + 1),
                None => BigFloat::zero(),
            }
        }
        let p = self.prec;
        let (ul, uh) = (ulp(&self.lo, p), ulp(&self.hi, p));
        let spread = BigFloat::max(&ul, &uh).clone();
        FloatInterval {
            lo: BigFloat::sub(&self.lo, &spread, p + 2, Round::Down),
            hi: BigFloat::add(&self.hi, &spread, p + 2, Round::Up),
            prec: p,
        }
    }

    /// Exponent of the upper endpoint, `floor(log2 hi)`.
    pub fn top_exponent(&self) -> Option<BigInt> {
        if self.hi.is_zero() {
            self.lo.top()
        } else {
            self.hi.top()
        }
    }

    /// Midpoint rounded to nearest double.
    pub fn to_f64(&self) -> f64 {
        if self.is_point_zero() {
            return 0.0;
        }
        let mid = BigFloat::add(&self.lo, &self.hi, self.prec + 1, Round::Down);
        mid.mul_pow2(&BigInt::from(-1)).to_f64()
    }

    pub fn to_rational_lo(&self) -> Option<Rational> {
        self.lo.to_rational()
    }
}

/// Decides `x <= q` when `x` has an exponent too large to expand exactly.
/// Such an `x` is either astronomically small or astronomically large in
/// magnitude compared with any rational that fits in memory.
fn le_unexpandable(x: &BigFloat, q: &Rational) -> bool {
    let tiny = x.top().map_or(true, |t| t < BigInt::zero());
    match (x.is_negative(), tiny) {
        (false, true) => q.is_positive(),
        (true, true) => !q.is_negative(),
        (false, false) => false,
        (true, false) => true,
    }
}

impl fmt::Debug for FloatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]@{}", self.lo, self.hi, self.prec)
    }
}

impl Scalar for FloatInterval {
    fn int_like(&self, v: i64) -> Self {
        FloatInterval::from_i64(v, self.prec)
    }
    fn add(&self, other: &Self) -> Self {
        FloatInterval::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        FloatInterval::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        FloatInterval::mul(self, other)
    }
    fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        FloatInterval::div(self, other)
    }
    fn neg(&self) -> Self {
        FloatInterval::neg(self)
    }
    fn sign(&self) -> Sign {
        if self.is_point_zero() {
            Sign::Zero
        } else {
            self.sign_certificate()
        }
    }
}
