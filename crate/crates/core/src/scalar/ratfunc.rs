use core::fmt;

use super::{Rational, Scalar, ScalarError, Sign, UniPoly};

/// Rational function `num / den` in one variable.
///
/// Canonical form: `gcd(num, den) = 1` and `den` is monic (so its leading
/// coefficient is positive). The zero function is `0 / 1`. Two functions
/// are equal iff their canonical forms are identical.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: UniPoly,
    den: UniPoly,
}

impl RatFunc {
    pub fn new(num: UniPoly, den: UniPoly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::ZeroPolynomial);
        }
        Ok(Self::normalize(num, den))
    }

    /// Cancels the polynomial gcd and makes the denominator monic.
    pub fn normalize(num: UniPoly, den: UniPoly) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return RatFunc { num, den: UniPoly::one() };
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = (num.div_rem(&g).unwrap().0, den.div_rem(&g).unwrap().0);
        let lead = den.leading().unwrap().recip().unwrap();
        num = num.scale(&lead);
        den = den.scale(&lead);
        RatFunc { num, den }
    }

    pub fn zero() -> Self {
        RatFunc { num: UniPoly::zero(), den: UniPoly::one() }
    }

    pub fn from_poly(p: UniPoly) -> Self {
        RatFunc { num: p, den: UniPoly::one() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(UniPoly::constant(c))
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(Rational::from(c))
    }

    pub fn x() -> Self {
        Self::from_poly(UniPoly::x())
    }

    pub fn numerator(&self) -> &UniPoly {
        &self.num
    }

    pub fn denominator(&self) -> &UniPoly {
        &self.den
    }

    /// True iff the canonical numerator is the zero polynomial: an exact
    /// decision for every value of the variable at once.
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::normalize(self.num.mul(&other.den).add(&other.num.mul(&self.den)), self.den.mul(&other.den))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::normalize(self.num.mul(&other.den).sub(&other.num.mul(&self.den)), self.den.mul(&other.den))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::normalize(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        if other.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::normalize(self.num.mul(&other.den), self.den.mul(&other.num)))
    }

    pub fn neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn eval(&self, h: &Rational) -> Result<Rational, ScalarError> {
        self.num.eval(h).checked_div(&self.den.eval(h))
    }
}

/// Rational functions form a field, so the entry formulas can be
/// evaluated symbolically. `sign` is only decided for the zero function.
impl Scalar for RatFunc {
    fn int_like(&self, v: i64) -> Self {
        RatFunc::from_int(v)
    }
    fn add(&self, other: &Self) -> Self {
        RatFunc::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        RatFunc::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        RatFunc::mul(self, other)
    }
    fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        RatFunc::div(self, other)
    }
    fn neg(&self) -> Self {
        RatFunc::neg(self)
    }
    fn sign(&self) -> Sign {
        if self.is_zero() {
            Sign::Zero
        } else {
            Sign::Unknown
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(c: &[i64]) -> UniPoly {
        UniPoly::from_ints(c)
    }

    fn rf(n: &[i64], d: &[i64]) -> RatFunc {
        RatFunc::new(poly(n), poly(d)).unwrap()
    }

    #[test]
    fn self_cancellation() {
        let f = rf(&[21, 8, 4, -1], &[21, 1, 3]);
        assert!(f.sub(&f).is_zero());
        assert_eq!(f.sub(&f), RatFunc::zero());
    }

    #[test]
    fn factor_cancellation() {
        let f = rf(&[-1, 0, 1], &[-1, 1]);
        assert_eq!(f.numerator(), &poly(&[1, 1]));
        assert_eq!(f.denominator(), &UniPoly::one());
    }

    #[test]
    fn canonical_denominator_is_monic() {
        let f = rf(&[2], &[-4, -2]);
        assert_eq!(f.denominator(), &poly(&[2, 1]));
        assert_eq!(f.numerator(), &poly(&[-1]));
    }

    #[test]
    fn odd_row_entry_simplifies() {
        // h/(7+h^2) + (4 + h - h/(7+h^2)) = 4 + h
        let h = RatFunc::x();
        let frac = h.div(&RatFunc::from_poly(poly(&[7, 0, 1]))).unwrap();
        let entry = RatFunc::from_poly(poly(&[4, 1])).sub(&frac);
        assert_eq!(frac.add(&entry), RatFunc::from_poly(poly(&[4, 1])));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(RatFunc::new(poly(&[1]), UniPoly::zero()).is_err());
        assert!(RatFunc::x().div(&RatFunc::zero()).is_err());
        assert!(rf(&[0], &[1, 1]).is_zero());
    }

    fn small_poly() -> impl Strategy<Value = UniPoly> {
        proptest::collection::vec(-9i64..=9, 1..=6).prop_map(|c| UniPoly::from_ints(&c))
    }

    proptest! {
        #[test]
        fn multiply_then_divide_is_identity(
            fn_ in small_poly(), fd in small_poly(), gn in small_poly(), gd in small_poly()
        ) {
            prop_assume!(!fd.is_zero() && !gn.is_zero() && !gd.is_zero());
            let f = RatFunc::new(fn_, fd).unwrap();
            let g = RatFunc::new(gn, gd).unwrap();
            let back = f.mul(&g).div(&g).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
