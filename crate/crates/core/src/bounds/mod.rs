//! Lower bounds on the nonnegative rank from the zero pattern, and the
//! bracket combining them with numerical upper bounds.

mod cover;

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::scalar::{Matrix, Sign};
use crate::verify::{CertificateReport, ClaimId, Verdict, VerifyScalar};

pub use cover::{maximal_rectangles, rectangle_cover_lower_bound, CoverOutcome, DEFAULT_NODE_BUDGET, MAX_EXACT_CELLS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundsError {
    InvalidK,
    /// The zero pattern of `A` was not certified.
    PatternNotCertified(Option<Verdict>),
    NotCertified(Verdict),
    OutOfBounds { row: usize, col: usize },
    TooLarge { cells: usize, limit: usize },
    /// A numerical upper bound fell below a certified lower bound.
    Inconsistent { lower: usize, upper: usize },
}

impl fmt::Display for BoundsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundsError::InvalidK => write!(f, "k must be at least 1"),
            BoundsError::PatternNotCertified(v) => {
                write!(f, "zero pattern is {}; refusing to threshold", v.map_or("missing", |v| v.as_str()))
            }
            BoundsError::NotCertified(v) => write!(f, "verification is {}, not certified", v.as_str()),
            BoundsError::OutOfBounds { row, col } => write!(f, "zero position ({row}, {col}) is out of bounds"),
            BoundsError::TooLarge { cells, limit } => write!(
                f,
                "pattern has {cells} cells, above the exact limit {limit}; use the pair-pattern bound instead"
            ),
            BoundsError::Inconsistent { lower, upper } => {
                write!(f, "upper bound {upper} undercuts certified lower bound {lower}")
            }
        }
    }
}

/// Zero/nonzero pattern of a matrix. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportPattern {
    n_rows: usize,
    n_cols: usize,
    zeros: BTreeSet<(usize, usize)>,
}

impl SupportPattern {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        zeros: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, BoundsError> {
        let zeros: BTreeSet<_> = zeros.into_iter().collect();
        if let Some(&(row, col)) = zeros.iter().find(|&&(r, c)| r >= n_rows || c >= n_cols) {
            return Err(BoundsError::OutOfBounds { row, col });
        }
        Ok(SupportPattern { n_rows, n_cols, zeros })
    }

    pub fn all_ones(n_rows: usize, n_cols: usize) -> Self {
        SupportPattern { n_rows, n_cols, zeros: BTreeSet::new() }
    }

    /// Zeros at the within-pair positions `(2i, 2i+1)` and `(2i+1, 2i)`.
    pub fn pair_pattern(k: usize) -> Self {
        let zeros = (0..k).flat_map(|i| [(2 * i, 2 * i + 1), (2 * i + 1, 2 * i)]).collect();
        SupportPattern { n_rows: 2 * k, n_cols: 2 * k, zeros }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn zeros(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.zeros.iter().copied()
    }

    pub fn zero_count(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_zero(&self, r: usize, c: usize) -> bool {
        self.zeros.contains(&(r, c))
    }

    pub fn is_support(&self, r: usize, c: usize) -> bool {
        r < self.n_rows && c < self.n_cols && !self.is_zero(r, c)
    }

    pub fn support_count(&self) -> usize {
        self.n_rows * self.n_cols - self.zeros.len()
    }

    pub fn is_transpose_closed(&self) -> bool {
        self.n_rows == self.n_cols && self.zeros.iter().all(|&(r, c)| self.zeros.contains(&(c, r)))
    }

    pub fn with_zero(&self, r: usize, c: usize) -> Result<Self, BoundsError> {
        let mut p = self.clone();
        if r >= p.n_rows || c >= p.n_cols {
            return Err(BoundsError::OutOfBounds { row: r, col: c });
        }
        p.zeros.insert((r, c));
        Ok(p)
    }

    /// Restriction to the given rows and columns, reindexed.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let zeros = rows
            .iter()
            .enumerate()
            .flat_map(|(i, &r)| cols.iter().enumerate().filter(move |&(_, &c)| self.is_zero(r, c)).map(move |(j, _)| (i, j)))
            .collect();
        SupportPattern { n_rows: rows.len(), n_cols: cols.len(), zeros }
    }
}

/// Zero-avoiding combinatorial rectangle `rows × cols`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rectangle {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Rectangle {
    /// Nonempty and free of zero positions.
    pub fn is_valid_for(&self, p: &SupportPattern) -> bool {
        !self.rows.is_empty()
            && !self.cols.is_empty()
            && self.rows.iter().all(|&r| self.cols.iter().all(|&c| p.is_support(r, c)))
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.rows.contains(&r) && self.cols.contains(&c)
    }
}

/// Zero pattern of a verified `A`. Only exact zeros count; an entry of
/// unknown sign is never treated as zero.
pub fn extract_pattern<S: VerifyScalar>(a: &Matrix<S>, report: &CertificateReport) -> Result<SupportPattern, BoundsError> {
    match report.verdict_of(ClaimId::ZeroPattern) {
        Some(Verdict::Certified) => {}
        other => return Err(BoundsError::PatternNotCertified(other)),
    }
    let zeros = (0..a.rows())
        .flat_map(|p| (0..a.cols()).map(move |q| (p, q)))
        .filter(|&(p, q)| a.get(p, q).sign() == Sign::Zero);
    SupportPattern::new(a.rows(), a.cols(), zeros)
}

/// Smallest integer strictly greater than `log2 k`, i.e. `floor(log2 k) + 1`.
/// At powers of two the log is integral and strict excess needs the `+1`.
pub fn pair_pattern_lower_bound(k: usize) -> Result<usize, BoundsError> {
    if k == 0 {
        return Err(BoundsError::InvalidK);
    }
    Ok((usize::BITS - k.leading_zeros()) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerSource {
    LinearRank,
    PairPattern,
    RectangleCover,
}

impl LowerSource {
    pub fn as_str(self) -> &'static str {
        match self {
            LowerSource::LinearRank => "linear_rank",
            LowerSource::PairPattern => "pair_pattern",
            LowerSource::RectangleCover => "rectangle_cover",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperSource {
    Dimension,
    /// Smallest inner dimension at which NMF reached the threshold, with
    /// the residual it reached. Numerical evidence, not a proof.
    NmfNumerical { residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankBracket {
    pub lower: usize,
    pub lower_source: LowerSource,
    pub upper: usize,
    pub upper_source: UpperSource,
    pub linear_rank: usize,
    pub pair_bound: usize,
    pub rectangle_bound: Option<usize>,
}

impl RankBracket {
    /// Nonnegative rank certified strictly above the linear rank.
    pub fn exhibits_gap(&self) -> bool {
        self.lower > self.linear_rank
    }
}

/// Combines the certified lower bounds with the dimension and an optional
/// NMF threshold `(r, residual)`.
pub fn rank_bracket(
    report: &CertificateReport,
    rectangle: Option<&CoverOutcome>,
    nmf: Option<(usize, f64)>,
) -> Result<RankBracket, BoundsError> {
    if report.overall != Verdict::Certified {
        return Err(BoundsError::NotCertified(report.overall));
    }
    let k = report.k;
    let linear_rank = 3;
    let pair_bound = pair_pattern_lower_bound(k)?;
    let rectangle_bound = rectangle.map(CoverOutcome::lower_bound);
    let mut lower = linear_rank;
    let mut lower_source = LowerSource::LinearRank;
    for (v, src) in [(Some(pair_bound), LowerSource::PairPattern), (rectangle_bound, LowerSource::RectangleCover)] {
        if let Some(v) = v.filter(|&v| v > lower) {
            lower = v;
            lower_source = src;
        }
    }
    let (mut upper, mut upper_source) = (2 * k, UpperSource::Dimension);
    if let Some((r, residual)) = nmf.filter(|&(r, _)| r < 2 * k) {
        upper = r;
        upper_source = UpperSource::NmfNumerical { residual };
    }
    if upper < lower {
        return Err(BoundsError::Inconsistent { lower, upper });
    }
    Ok(RankBracket { lower, lower_source, upper, upper_source, linear_rank, pair_bound, rectangle_bound })
}

#[cfg(test)]
mod tests;
