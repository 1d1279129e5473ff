use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{Rational, ScalarError};

/// Dense univariate polynomial with rational coefficients in ascending
/// degree order. Canonical: no trailing zero coefficients, so the zero
/// polynomial is the empty list.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The indeterminate.
    pub fn x() -> Self {
        Self::from_coeffs(vec![Rational::zero(), Rational::one()])
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().map_or(false, Rational::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| Rational::from(c)).collect())
    }

    /// Product of `(x - r)` over the given roots.
    pub fn from_roots(roots: &[Rational]) -> Self {
        roots.iter().fold(Self::one(), |acc, r| acc.mul(&Self::from_coeffs(vec![-r, Rational::one()])))
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs((0..n).map(|i| &self.coeff(i) + &other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs((0..n).map(|i| &self.coeff(i) - &other.coeff(i)).collect())
    }

    pub fn neg(&self) -> Self {
        UniPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Self::from_coeffs(out)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| &(&acc * x) + c)
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * &Rational::from(i as i64)).collect(),
        )
    }

    /// `p(-x)`.
    pub fn reflect(&self) -> Self {
        Self::from_coeffs(
            self.coeffs.iter().enumerate().map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() }).collect(),
        )
    }

    /// Euclidean division: `self = q * d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self), ScalarError> {
        let dl = d.leading().ok_or(ScalarError::ZeroPolynomial)?;
        let dd = d.coeffs.len() - 1;
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut q = vec![Rational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].checked_div(dl)?;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] = &r[k + j] - &(&c * dc);
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        Ok((Self::from_coeffs(q), Self::from_coeffs(r)))
    }

    pub fn rem(&self, d: &Self) -> Result<Self, ScalarError> {
        Ok(self.div_rem(d)?.1)
    }

    /// Divides by the leading coefficient; the zero polynomial stays zero.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(l) => {
                let inv = l.recip().expect("leading coefficient is nonzero");
                self.scale(&inv)
            }
        }
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b).expect("divisor is nonzero");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `p / gcd(p, p')`: same distinct roots, all simple.
    pub fn square_free_part(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::ZeroPolynomial);
        }
        let g = self.gcd(&self.derivative());
        Ok(self.div_rem(&g)?.0)
    }

    /// Multiplicity of the root `0`.
    pub fn zero_root_multiplicity(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})h")?,
                _ => write!(f, "({c})h^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_trailing_zeros() {
        let p = UniPoly::from_ints(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert!(UniPoly::from_ints(&[0, 0]).is_zero());
        assert_eq!(UniPoly::from_ints(&[3]).sub(&UniPoly::from_ints(&[3])), UniPoly::zero());
    }

    #[test]
    fn division_and_gcd() {
        // (h^2 - 1) = (h - 1)(h + 1)
        let p = UniPoly::from_ints(&[-1, 0, 1]);
        let d = UniPoly::from_ints(&[-1, 1]);
        let (q, r) = p.div_rem(&d).unwrap();
        assert_eq!(q, UniPoly::from_ints(&[1, 1]));
        assert!(r.is_zero());
        assert_eq!(p.gcd(&UniPoly::from_ints(&[2, 2])), UniPoly::from_ints(&[1, 1]));
        assert!(p.div_rem(&UniPoly::zero()).is_err());
    }

    #[test]
    fn square_free_part_drops_multiplicity() {
        // (x+1)(x-2)^2 = x^3 - 3x^2 + 4
        let p = UniPoly::from_ints(&[4, 0, -3, 1]);
        let sf = p.square_free_part().unwrap();
        assert_eq!(sf.monic(), UniPoly::from_ints(&[-2, -1, 1]));
    }

    #[test]
    fn eval_and_reflect() {
        let p = UniPoly::from_ints(&[21, 8, 4, -1]);
        assert_eq!(p.eval(&Rational::from(5)), Rational::from(36));
        assert_eq!(p.eval(&Rational::from(7)), Rational::from(-70));
        assert_eq!(p.reflect().eval(&Rational::from(2)), p.eval(&Rational::from(-2)));
        assert_eq!(UniPoly::from_ints(&[0, 0, 3, 1]).zero_root_multiplicity(), 2);
    }
}
