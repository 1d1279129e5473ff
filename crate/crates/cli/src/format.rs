//! JSON matrix files. Entries are never JSON numbers: rationals are
//! `"p/q"` strings and interval endpoints carry hex mantissas and decimal
//! exponent strings.

use num_bigint::{BigInt, BigUint};
use nnrank_core::scalar::{BigFloat, FloatInterval, Matrix, Rational};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("expected a {expected} matrix, found {found}")]
    Kind { expected: &'static str, found: &'static str },
    #[error("{0}")]
    Shape(String),
    #[error("entry ({row}, {col}): {msg}")]
    Entry { row: usize, col: usize, msg: String },
    #[error("missing metadata field `{0}`")]
    MissingMeta(&'static str),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    ExactRational,
    BigfloatInterval,
}

impl MatrixKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixKind::ExactRational => "exact-rational",
            MatrixKind::BigfloatInterval => "bigfloat-interval",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// `paper` or `surrogate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate_spec: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoint {
    /// `"+"`, `"-"` or `"0"`.
    pub sign: String,
    pub mantissa_hex: String,
    pub exponent: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalEntry {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Rational(String),
    Interval(IntervalEntry),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub schema_version: u32,
    pub kind: MatrixKind,
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub meta: ModeMeta,
    pub entries: Vec<Vec<Entry>>,
    /// Chain values the rows of `B` were built from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<Vec<Entry>>,
}

pub fn endpoint(x: &BigFloat) -> Endpoint {
    let sign = if x.is_zero() {
        "0"
    } else if x.is_negative() {
        "-"
    } else {
        "+"
    };
    Endpoint { sign: sign.into(), mantissa_hex: x.mantissa().to_str_radix(16), exponent: x.exponent().to_string() }
}

pub fn parse_endpoint(e: &Endpoint) -> Result<BigFloat, String> {
    let mant = BigUint::parse_bytes(e.mantissa_hex.as_bytes(), 16)
        .filter(|_| !e.mantissa_hex.is_empty() && e.mantissa_hex.bytes().all(|b| b.is_ascii_hexdigit()))
        .ok_or_else(|| format!("bad mantissa_hex {:?}", e.mantissa_hex))?;
    let exp: BigInt = e.exponent.parse().map_err(|_| format!("bad exponent {:?}", e.exponent))?;
    let neg = match e.sign.as_str() {
        "+" => false,
        "-" => true,
        "0" => {
            return if mant == BigUint::default() && exp == BigInt::default() {
                Ok(BigFloat::zero())
            } else {
                Err("sign 0 with nonzero mantissa or exponent".into())
            }
        }
        other => return Err(format!("bad sign {other:?}")),
    };
    let x = BigFloat::from_parts(neg, mant, exp);
    if x.is_zero() {
        return Err(format!("sign {} with zero mantissa", e.sign));
    }
    if endpoint(&x) != *e {
        return Err("endpoint is not in canonical form (odd mantissa)".into());
    }
    Ok(x)
}

pub fn rational_entry(q: &Rational) -> Entry {
    Entry::Rational(q.to_canonical_string())
}

pub fn interval_entry(x: &FloatInterval) -> Entry {
    Entry::Interval(IntervalEntry { lo: endpoint(x.lo()), hi: endpoint(x.hi()) })
}

pub fn parse_rational_entry(e: &Entry) -> Result<Rational, String> {
    match e {
        Entry::Rational(s) => Rational::parse_canonical(s).map_err(|err| format!("{err}")),
        Entry::Interval(_) => Err("expected a \"p/q\" string".into()),
    }
}

pub fn parse_interval_entry(e: &Entry, prec: u64) -> Result<FloatInterval, String> {
    match e {
        Entry::Interval(iv) => {
            let lo = parse_endpoint(&iv.lo)?;
            let hi = parse_endpoint(&iv.hi)?;
            FloatInterval::new(lo, hi, prec).map_err(|err| format!("{err}"))
        }
        Entry::Rational(_) => Err("expected an interval object".into()),
    }
}

impl MatrixFile {
    pub fn from_rational(m: &Matrix<Rational>, meta: ModeMeta) -> Self {
        MatrixFile {
            schema_version: SCHEMA_VERSION,
            kind: MatrixKind::ExactRational,
            rows: m.rows(),
            cols: m.cols(),
            meta,
            entries: m.iter_rows().map(|r| r.iter().map(rational_entry).collect()).collect(),
            chain: None,
        }
    }

    pub fn from_integers(m: &Matrix<i64>, meta: ModeMeta) -> Self {
        Self::from_rational(&m.map(|&v| Rational::from(v)), meta)
    }

    /// `meta.precision_bits` should be set; it is what the parser uses.
    pub fn from_interval(m: &Matrix<FloatInterval>, meta: ModeMeta) -> Self {
        MatrixFile {
            schema_version: SCHEMA_VERSION,
            kind: MatrixKind::BigfloatInterval,
            rows: m.rows(),
            cols: m.cols(),
            meta,
            entries: m.iter_rows().map(|r| r.iter().map(interval_entry).collect()).collect(),
            chain: None,
        }
    }

    fn check_header(&self, expected: MatrixKind) -> Result<(), FormatError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(FormatError::Schema(self.schema_version));
        }
        if self.kind != expected {
            return Err(FormatError::Kind { expected: expected.as_str(), found: self.kind.as_str() });
        }
        if self.entries.len() != self.rows || self.entries.iter().any(|r| r.len() != self.cols) {
            return Err(FormatError::Shape(format!("entries do not form a {}x{} array", self.rows, self.cols)));
        }
        Ok(())
    }

    fn parse_all<T>(&self, f: impl Fn(&Entry) -> Result<T, String>) -> Result<Matrix<T>, FormatError> {
        let rows = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.iter()
                    .enumerate()
                    .map(|(j, e)| f(e).map_err(|msg| FormatError::Entry { row: i, col: j, msg }))
                    .collect::<Result<Vec<T>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        if rows.is_empty() {
            return Ok(Matrix::from_fn(0, self.cols, |_, _| unreachable!()));
        }
        Matrix::from_rows(rows).map_err(|e| FormatError::Shape(e.to_string()))
    }

    pub fn to_rational(&self) -> Result<Matrix<Rational>, FormatError> {
        self.check_header(MatrixKind::ExactRational)?;
        self.parse_all(parse_rational_entry)
    }

    pub fn to_integers(&self) -> Result<Matrix<i64>, FormatError> {
        let m = self.to_rational()?;
        m.try_map(|q| q.to_i64_exact().ok_or_else(|| FormatError::Invalid(format!("{q} is not a small integer"))))
    }

    pub fn precision(&self) -> Result<u64, FormatError> {
        self.meta.precision_bits.ok_or(FormatError::MissingMeta("precision_bits"))
    }

    pub fn to_interval(&self) -> Result<Matrix<FloatInterval>, FormatError> {
        self.check_header(MatrixKind::BigfloatInterval)?;
        let prec = self.precision()?;
        self.parse_all(|e| parse_interval_entry(e, prec))
    }

    /// Entries rounded to doubles, for either kind.
    pub fn to_f64(&self) -> Result<Matrix<f64>, FormatError> {
        match self.kind {
            MatrixKind::ExactRational => Ok(self.to_rational()?.map(Rational::to_f64)),
            MatrixKind::BigfloatInterval => Ok(self.to_interval()?.map(FloatInterval::to_f64)),
        }
    }

    /// Pretty JSON with a trailing newline; the bytes that get hashed.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("matrix files always serialize");
        v.push(b'\n');
        v
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, FormatError> {
        let f: MatrixFile = serde_json::from_slice(bytes)?;
        if f.schema_version != SCHEMA_VERSION {
            return Err(FormatError::Schema(f.schema_version));
        }
        Ok(f)
    }
}
