//! Numeric substrate: exact rationals, outward-rounded big-float intervals
//! with unbounded exponents, univariate polynomials and rational functions,
//! Sturm root counting and determinants.

mod bigfloat;
mod det;
mod exp;
mod interval;
mod matrix;
mod poly;
mod ratfunc;
mod rational;
mod sturm;

use core::fmt;

pub use bigfloat::{BigFloat, Round};
pub use det::{exact_determinant, exact_determinant_sign, interval_determinant, DEFAULT_EXACT_DET_LIMIT};
pub use exp::{exp_exponent_budget, interval_exp, ln2_bounds};
pub use interval::FloatInterval;
pub use matrix::Matrix;
pub use poly::UniPoly;
pub use ratfunc::RatFunc;
pub use rational::Rational;
pub use sturm::{count_roots_with_multiplicity, sturm_count_roots, sturm_sequence, Bound};

/// Errors raised by the numeric kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScalarError {
    DivisionByZero,
    /// Interval divisor straddles or touches zero.
    DivisorContainsZero,
    ZeroPolynomial,
    NotSquare { rows: usize, cols: usize },
    /// Exact determinant requested above the configured dimension limit.
    TooLarge { n: usize, limit: usize },
    /// `exp` of a positive argument whose magnitude exceeds the exponent budget.
    ExpOverflow,
    Parse(alloc::string::String),
}

impl fmt::Display for ScalarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarError::DivisionByZero => write!(f, "division by zero"),
            ScalarError::DivisorContainsZero => write!(f, "interval divisor contains zero"),
            ScalarError::ZeroPolynomial => write!(f, "operation undefined for the zero polynomial"),
            ScalarError::NotSquare { rows, cols } => write!(f, "matrix is {rows}x{cols}, not square"),
            ScalarError::TooLarge { n, limit } => {
                write!(f, "exact determinant of size {n} exceeds limit {limit}")
            }
            ScalarError::ExpOverflow => write!(f, "exp argument exceeds the exponent budget"),
            ScalarError::Parse(s) => write!(f, "parse error: {s}"),
        }
    }
}

/// Certified sign of a scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
    /// Exactly zero (an exact rational zero or the point interval `[0, 0]`).
    Zero,
    /// An interval that contains zero but is not the point zero.
    Unknown,
}

/// Field operations shared by the exact and the interval scalar modes.
///
/// Constants are created "like" an existing value so that interval
/// precision travels with the data instead of being ambient.
pub trait Scalar: Clone + fmt::Debug {
    fn int_like(&self, v: i64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Result<Self, ScalarError>;
    fn neg(&self) -> Self;
    fn sign(&self) -> Sign;

    fn zero_like(&self) -> Self {
        self.int_like(0)
    }
    fn one_like(&self) -> Self {
        self.int_like(1)
    }
}
