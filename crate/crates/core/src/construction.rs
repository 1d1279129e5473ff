//! The structured matrices: the 3×3 sign matrix Λ, the chain of scales
//! `h_1 > h_2 > … > h_k > 0`, the 2k×3 factor `B` and the 2k×2k product
//! `A = B Λ Bᵀ`.
//!
//! Two scalar modes share one generic code path: exact rationals for a
//! rational surrogate chain, and outward-rounded big-float intervals for
//! the transcendental chain `h_{i+1} = exp(-1 / h_i)`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::scalar::{interval_exp, FloatInterval, Matrix, Rational, Scalar, ScalarError, Sign, UniPoly};

/// Scalar representation shared by every matrix of a bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarMode {
    PaperInterval { precision_bits: u64 },
    SurrogateExact,
}

/// Rational stand-in for the transcendental chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurrogateSpec {
    /// `h_i = base^(-2^i)`.
    DoublyExponential { base: u32 },
    /// Explicit values, used from the front.
    Explicit(Vec<Rational>),
}

impl Default for SurrogateSpec {
    fn default() -> Self {
        SurrogateSpec::DoublyExponential { base: 10 }
    }
}

impl fmt::Display for SurrogateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurrogateSpec::DoublyExponential { base } => write!(f, "pow:{base}"),
            SurrogateSpec::Explicit(v) => {
                write!(f, "list:")?;
                for (i, q) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", q.to_canonical_string())?;
                }
                Ok(())
            }
        }
    }
}

/// Accepts `default`, `pow:B` (B ≥ 2) and `list:p/q,p/q,...`.
impl FromStr for SurrogateSpec {
    type Err = ConstructionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| ConstructionError::Validation(alloc::format!("surrogate spec `{s}`: {m}"));
        if s == "default" {
            return Ok(SurrogateSpec::default());
        }
        if let Some(b) = s.strip_prefix("pow:") {
            let base: u32 = b.parse().map_err(|_| bad("base is not an integer"))?;
            if base < 2 {
                return Err(bad("base must be at least 2"));
            }
            return Ok(SurrogateSpec::DoublyExponential { base });
        }
        if let Some(list) = s.strip_prefix("list:") {
            let values = list
                .split(',')
                .map(|t| t.trim().parse::<Rational>().map_err(|_| bad("entry is not a rational")))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(SurrogateSpec::Explicit(values));
        }
        Err(bad("expected `default`, `pow:B` or `list:...`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainOrigin {
    PaperChain { h1: Rational },
    Surrogate(SurrogateSpec),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    InvalidK(usize),
    InvalidH1(Rational),
    Validation(String),
    /// The chain value at this 1-based index could not be certified
    /// positive and strictly below its predecessor.
    PrecisionExhausted { index: usize },
    Shape(String),
    Scalar(ScalarError),
}

impl From<ScalarError> for ConstructionError {
    fn from(e: ScalarError) -> Self {
        ConstructionError::Scalar(e)
    }
}

impl fmt::Display for ConstructionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstructionError::InvalidK(k) => write!(f, "k must be at least 1 (got {k})"),
            ConstructionError::InvalidH1(h) => write!(f, "h1 must lie in (0, 1) (got {h})"),
            ConstructionError::Validation(m) => write!(f, "{m}"),
            ConstructionError::PrecisionExhausted { index } => {
                write!(f, "precision exhausted: h_{index} cannot be certified positive and decreasing")
            }
            ConstructionError::Shape(m) => write!(f, "shape error: {m}"),
            ConstructionError::Scalar(e) => write!(f, "{e}"),
        }
    }
}

/// Scalars a bundle can be built from.
pub trait ModeScalar: Scalar {
    /// Within-pair entries of `A` are set to an exact zero instead of
    /// being evaluated (they vanish identically in `h`).
    const SYMBOLIC_PAIR_ZERO: bool;

    fn mode_of(values: &[Self]) -> ScalarMode;

    /// `A` as this mode builds it from the chain and `B`.
    fn build_a_for(values: &[Self], b: &Matrix<Self>, lambda: &Matrix<i64>) -> Result<Matrix<Self>, ConstructionError>;
}

impl ModeScalar for Rational {
    const SYMBOLIC_PAIR_ZERO: bool = false;

    fn mode_of(_: &[Self]) -> ScalarMode {
        ScalarMode::SurrogateExact
    }

    fn build_a_for(_: &[Self], b: &Matrix<Self>, lambda: &Matrix<i64>) -> Result<Matrix<Self>, ConstructionError> {
        build_a_with(b, lambda, false)
    }
}

impl ModeScalar for FloatInterval {
    const SYMBOLIC_PAIR_ZERO: bool = true;

    fn mode_of(values: &[Self]) -> ScalarMode {
        let precision_bits = values.iter().map(FloatInterval::precision_bits).max().unwrap_or(0);
        ScalarMode::PaperInterval { precision_bits }
    }

    /// Entries come from the expanded polynomial form, so entries far
    /// below the working precision keep their sign.
    fn build_a_for(values: &[Self], b: &Matrix<Self>, lambda: &Matrix<i64>) -> Result<Matrix<Self>, ConstructionError> {
        if b.rows() != 2 * values.len() {
            return Err(ConstructionError::Shape(alloc::format!("B has {} rows for {} chain values", b.rows(), values.len())));
        }
        build_a_expanded(values, lambda, true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HChain<S> {
    values: Vec<S>,
    mode: ScalarMode,
    origin: ChainOrigin,
}

impl<S: ModeScalar> HChain<S> {
    /// Wraps values without checking the positivity and decrease
    /// invariants; for negative controls and deserialization.
    pub fn from_values_unchecked(values: Vec<S>, origin: ChainOrigin) -> Self {
        let mode = S::mode_of(&values);
        HChain { values, mode, origin }
    }

    /// Checks that every value is certified positive and certified
    /// strictly below its predecessor.
    pub fn validate(&self) -> Result<(), ConstructionError> {
        for (i, h) in self.values.iter().enumerate() {
            let positive = h.sign() == Sign::Positive;
            let decreasing = i == 0 || self.values[i - 1].sub(h).sign() == Sign::Positive;
            if !(positive && decreasing) {
                return Err(ConstructionError::PrecisionExhausted { index: i + 1 });
            }
        }
        Ok(())
    }
}

impl<S> HChain<S> {
    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn mode(&self) -> ScalarMode {
        self.mode
    }

    pub fn origin(&self) -> &ChainOrigin {
        &self.origin
    }
}

/// `h_1 = h1`, `h_{i+1} = exp(-1 / h_i)` in interval arithmetic at `prec`
/// bits. `h_1` is stored as the tightest `prec`-bit enclosure of `h1`.
pub fn hchain_paper(k: usize, h1: &Rational, prec: u64) -> Result<HChain<FloatInterval>, ConstructionError> {
    if k == 0 {
        return Err(ConstructionError::InvalidK(k));
    }
    if !(h1.is_positive() && *h1 < Rational::one()) {
        return Err(ConstructionError::InvalidH1(h1.clone()));
    }
    let mut values = vec![FloatInterval::from_rational(h1, prec)];
    for i in 1..k {
        let prev = &values[i - 1];
        let arg = prev.recip().map_err(|_| ConstructionError::PrecisionExhausted { index: i })?.neg();
        let next = interval_exp(&arg, prec).map_err(|_| ConstructionError::PrecisionExhausted { index: i + 1 })?;
        values.push(next);
    }
    let chain = HChain::from_values_unchecked(values, ChainOrigin::PaperChain { h1: h1.clone() });
    chain.validate()?;
    Ok(chain)
}

/// Exact rational chain described by `spec`.
pub fn hchain_surrogate(k: usize, spec: &SurrogateSpec) -> Result<HChain<Rational>, ConstructionError> {
    if k == 0 {
        return Err(ConstructionError::InvalidK(k));
    }
    let values: Vec<Rational> = match spec {
        SurrogateSpec::DoublyExponential { base } => {
            if *base < 2 {
                return Err(ConstructionError::Validation(alloc::format!("surrogate base {base} is below 2")));
            }
            (1..=k)
                .map(|i| {
                    let e = u32::try_from(1u64 << i)
                        .map_err(|_| ConstructionError::Validation(alloc::format!("k = {k} is too large")))?;
                    Ok(Rational::inverse_power(*base, e))
                })
                .collect::<Result<_, ConstructionError>>()?
        }
        SurrogateSpec::Explicit(list) => {
            if list.len() < k {
                return Err(ConstructionError::Validation(alloc::format!(
                    "surrogate list has {} values, k = {k}",
                    list.len()
                )));
            }
            list[..k].to_vec()
        }
    };
    for (i, h) in values.iter().enumerate() {
        if !h.is_positive() {
            return Err(ConstructionError::Validation(alloc::format!("h_{} = {h} is not positive", i + 1)));
        }
        if i > 0 && values[i - 1] <= *h {
            return Err(ConstructionError::Validation(alloc::format!(
                "h_{} = {h} is not below h_{} = {}",
                i + 1,
                i,
                values[i - 1]
            )));
        }
    }
    Ok(HChain::from_values_unchecked(values, ChainOrigin::Surrogate(spec.clone())))
}

/// Sign matrix with `-1` at positions (2,3) and (3,2) and `1` elsewhere.
pub fn build_lambda() -> Matrix<i64> {
    Matrix::from_fn(3, 3, |r, s| if (r, s) == (1, 2) || (r, s) == (2, 1) { -1 } else { 1 })
}

/// `(1, 4 + h - h/(7 + h²), 6 + h)`.
pub fn b_row_odd<S: Scalar>(h: &S) -> Result<[S; 3], ScalarError> {
    let c = |v| h.int_like(v);
    let second = c(4).add(h).sub(&h.div(&c(7).add(&h.mul(h)))?);
    Ok([c(1), second, c(6).add(h)])
}

/// `(1, 14 + h, (21 + 8h + 4h² - h³) / (21 + h + 3h²))`.
pub fn b_row_even<S: Scalar>(h: &S) -> Result<[S; 3], ScalarError> {
    let c = |v| h.int_like(v);
    let h2 = h.mul(h);
    let h3 = h2.mul(h);
    let num = c(21).add(&c(8).mul(h)).add(&c(4).mul(&h2)).sub(&h3);
    let den = c(21).add(h).add(&c(3).mul(&h2));
    Ok([c(1), c(14).add(h), num.div(&den)?])
}

/// Rows `2i-1, 2i` (1-based) are the odd and even rows at `h_i`.
pub fn build_b_from_values<S: Scalar>(values: &[S]) -> Result<Matrix<S>, ScalarError> {
    let mut rows = Vec::with_capacity(2 * values.len());
    for h in values {
        rows.push(b_row_odd(h)?.to_vec());
        rows.push(b_row_even(h)?.to_vec());
    }
    Matrix::from_rows(rows)
}

pub fn build_b<S: ModeScalar>(chain: &HChain<S>) -> Result<Matrix<S>, ScalarError> {
    build_b_from_values(chain.values())
}

fn lambda_times_row<S: Scalar>(lambda: &Matrix<i64>, row: &[S]) -> Vec<S> {
    (0..3)
        .map(|r| {
            let mut acc: Option<S> = None;
            for (s, x) in row.iter().enumerate() {
                let term = match *lambda.get(r, s) {
                    1 => x.clone(),
                    -1 => x.neg(),
                    v => x.mul(&x.int_like(v)),
                };
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term),
                });
            }
            acc.expect("three columns")
        })
        .collect()
}

/// `A = B Λ Bᵀ`, each unordered pair `{p, q}` computed once and mirrored.
/// With `symbolic_pair_zero`, the within-pair entries `(2i-1, 2i)` are set
/// to an exact zero instead of being evaluated.
pub fn build_a_with<S: Scalar>(
    b: &Matrix<S>,
    lambda: &Matrix<i64>,
    symbolic_pair_zero: bool,
) -> Result<Matrix<S>, ConstructionError> {
    if b.cols() != 3 || lambda.rows() != 3 || lambda.cols() != 3 {
        return Err(ConstructionError::Shape(alloc::format!(
            "B is {}x{}, Λ is {}x{}",
            b.rows(),
            b.cols(),
            lambda.rows(),
            lambda.cols()
        )));
    }
    let n = b.rows();
    let u: Vec<Vec<S>> = (0..n).map(|p| lambda_times_row(lambda, b.row(p))).collect();
    let mut upper: Vec<Option<S>> = vec![None; n * n];
    for p in 0..n {
        for q in p..n {
            let v = if symbolic_pair_zero && p % 2 == 0 && q == p + 1 {
                b.get(p, 0).zero_like()
            } else {
                let r = b.row(q);
                u[p][0].mul(&r[0]).add(&u[p][1].mul(&r[1])).add(&u[p][2].mul(&r[2]))
            };
            upper[p * n + q] = Some(v);
        }
    }
    Ok(Matrix::from_fn(n, n, |p, q| {
        let (i, j) = if p <= q { (p, q) } else { (q, p) };
        upper[i * n + j].clone().expect("upper triangle filled")
    }))
}

pub fn build_a<S: ModeScalar>(b: &Matrix<S>, lambda: &Matrix<i64>) -> Result<Matrix<S>, ConstructionError> {
    build_a_with(b, lambda, S::SYMBOLIC_PAIR_ZERO)
}

/// A row of `B` as integer polynomials over one common denominator.
struct RowPolys {
    num: [UniPoly; 3],
    den: UniPoly,
}

fn odd_row_polys() -> RowPolys {
    let den = UniPoly::from_ints(&[7, 0, 1]);
    let num = [den.clone(), UniPoly::from_ints(&[28, 6, 4, 1]), UniPoly::from_ints(&[6, 1]).mul(&den)];
    RowPolys { num, den }
}

fn even_row_polys() -> RowPolys {
    let den = UniPoly::from_ints(&[21, 1, 3]);
    let num = [den.clone(), UniPoly::from_ints(&[14, 1]).mul(&den), UniPoly::from_ints(&[21, 8, 4, -1])];
    RowPolys { num, den }
}

/// Coefficients `c[i][j]` of `s^i t^j` in `num_x(s) Λ num_y(t)ᵀ`.
fn cross_numerator(x: &RowPolys, y: &RowPolys, lambda: &Matrix<i64>) -> Vec<Vec<Rational>> {
    let dx = x.num.iter().filter_map(UniPoly::degree).max().unwrap_or(0);
    let dy = y.num.iter().filter_map(UniPoly::degree).max().unwrap_or(0);
    let mut c = vec![vec![Rational::zero(); dy + 1]; dx + 1];
    for (r, px) in x.num.iter().enumerate() {
        for (s, py) in y.num.iter().enumerate() {
            let l = Rational::from(*lambda.get(r, s));
            for (i, a) in px.coeffs().iter().enumerate() {
                for (j, b) in py.coeffs().iter().enumerate() {
                    c[i][j] = &c[i][j] + &(&l * &(a * b));
                }
            }
        }
    }
    c
}

fn powers<S: Scalar>(h: &S, n: usize) -> Vec<S> {
    let mut p = vec![h.one_like()];
    for i in 1..=n {
        let next = p[i - 1].mul(h);
        p.push(next);
    }
    p
}

fn eval_poly<S: Scalar>(p: &UniPoly, pw: &[S]) -> S {
    p.coeffs().iter().enumerate().fold(pw[0].zero_like(), |acc, (i, c)| acc.add(&pw[i].mul(&int_coeff(&pw[0], c))))
}

fn int_coeff<S: Scalar>(like: &S, c: &Rational) -> S {
    like.int_like(c.to_i64_exact().expect("row polynomials have small integer coefficients"))
}

/// `A` from the chain directly: entry `(p, q)` is the expanded bivariate
/// numerator evaluated monomial by monomial at `(h_i, h_j)`, over the
/// product of the two row denominators. Every chain value is positive, so
/// an entry whose true value is tiny is not swamped by cancelling `O(1)`
/// terms as it is in `B Λ Bᵀ`.
pub fn build_a_expanded<S: Scalar>(
    values: &[S],
    lambda: &Matrix<i64>,
    symbolic_pair_zero: bool,
) -> Result<Matrix<S>, ConstructionError> {
    if lambda.rows() != 3 || lambda.cols() != 3 {
        return Err(ConstructionError::Shape(alloc::format!("Λ is {}x{}", lambda.rows(), lambda.cols())));
    }
    let rows = [odd_row_polys(), even_row_polys()];
    let cross: Vec<Vec<Vec<Vec<Rational>>>> =
        rows.iter().map(|x| rows.iter().map(|y| cross_numerator(x, y, lambda)).collect()).collect();
    let pw: Vec<Vec<S>> = values.iter().map(|h| powers(h, 6)).collect();
    let dens: Vec<[S; 2]> = pw.iter().map(|p| [eval_poly(&rows[0].den, p), eval_poly(&rows[1].den, p)]).collect();
    let n = 2 * values.len();
    let mut upper: Vec<Option<S>> = vec![None; n * n];
    for p in 0..n {
        for q in p..n {
            let (i, j, kp, kq) = (p / 2, q / 2, p % 2, q % 2);
            let v = if symbolic_pair_zero && kp == 0 && q == p + 1 {
                values[i].zero_like()
            } else {
                let c = &cross[kp][kq];
                let mut num = values[i].zero_like();
                for (a, row) in c.iter().enumerate() {
                    for (b, coeff) in row.iter().enumerate() {
                        if coeff.is_zero() {
                            continue;
                        }
                        let term = pw[i][a].mul(&pw[j][b]).mul(&int_coeff(&values[i], coeff));
                        num = num.add(&term);
                    }
                }
                num.div(&dens[i][kp].mul(&dens[j][kq]))?
            };
            upper[p * n + q] = Some(v);
        }
    }
    Ok(Matrix::from_fn(n, n, |p, q| {
        let (i, j) = if p <= q { (p, q) } else { (q, p) };
        upper[i * n + j].clone().expect("upper triangle filled")
    }))
}

/// Λ, the chain, `B` and `A` in one scalar mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle<S> {
    pub chain: HChain<S>,
    pub lambda: Matrix<i64>,
    pub b: Matrix<S>,
    pub a: Matrix<S>,
}

impl<S: ModeScalar> Bundle<S> {
    pub fn from_chain(chain: HChain<S>) -> Result<Self, ConstructionError> {
        let lambda = build_lambda();
        let b = build_b(&chain)?;
        let a = S::build_a_for(chain.values(), &b, &lambda)?;
        Ok(Bundle { chain, lambda, b, a })
    }

    pub fn k(&self) -> usize {
        self.chain.k()
    }

    pub fn mode(&self) -> ScalarMode {
        self.chain.mode()
    }
}

impl Bundle<Rational> {
    pub fn surrogate(k: usize, spec: &SurrogateSpec) -> Result<Self, ConstructionError> {
        Self::from_chain(hchain_surrogate(k, spec)?)
    }
}

impl Bundle<FloatInterval> {
    pub fn paper(k: usize, h1: &Rational, prec: u64) -> Result<Self, ConstructionError> {
        Self::from_chain(hchain_paper(k, h1, prec)?)
    }

    /// Feeds exact chain values through the interval path.
    pub fn from_rational_chain(chain: &HChain<Rational>, prec: u64) -> Result<Self, ConstructionError> {
        let values = chain.values().iter().map(|q| FloatInterval::from_rational(q, prec)).collect();
        Self::from_chain(HChain::from_values_unchecked(values, chain.origin().clone()))
    }
}

/// A bundle in either scalar mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyBundle {
    Exact(Bundle<Rational>),
    Interval(Bundle<FloatInterval>),
}

impl AnyBundle {
    pub fn k(&self) -> usize {
        match self {
            AnyBundle::Exact(b) => b.k(),
            AnyBundle::Interval(b) => b.k(),
        }
    }

    pub fn mode(&self) -> ScalarMode {
        match self {
            AnyBundle::Exact(b) => b.mode(),
            AnyBundle::Interval(b) => b.mode(),
        }
    }

    pub fn origin(&self) -> &ChainOrigin {
        match self {
            AnyBundle::Exact(b) => b.chain.origin(),
            AnyBundle::Interval(b) => b.chain.origin(),
        }
    }

    /// `A` rounded entrywise to the nearest double (interval midpoints).
    pub fn a_to_f64(&self) -> Matrix<f64> {
        match self {
            AnyBundle::Exact(b) => b.a.map(Rational::to_f64),
            AnyBundle::Interval(b) => b.a.map(FloatInterval::to_f64),
        }
    }
}

impl From<Bundle<Rational>> for AnyBundle {
    fn from(b: Bundle<Rational>) -> Self {
        AnyBundle::Exact(b)
    }
}

impl From<Bundle<FloatInterval>> for AnyBundle {
    fn from(b: Bundle<FloatInterval>) -> Self {
        AnyBundle::Interval(b)
    }
}
