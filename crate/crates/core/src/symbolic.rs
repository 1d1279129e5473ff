//! Identities and sign facts about the row formulas that hold for every
//! value of `h` at once, decided with exact polynomial arithmetic.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::construction::{b_row_even, b_row_odd};
use crate::scalar::{sturm_count_roots, Bound, RatFunc, Rational, Scalar, Sign, UniPoly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolicClaim {
    PairOrthogonality,
    DenominatorsPositive,
    EntryPositivityRange,
}

impl SymbolicClaim {
    pub fn id(self) -> &'static str {
        match self {
            SymbolicClaim::PairOrthogonality => "symbolic.pair_orthogonality",
            SymbolicClaim::DenominatorsPositive => "symbolic.denominators_positive",
            SymbolicClaim::EntryPositivityRange => "symbolic.entry_positivity_range",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolicVerdict {
    Proved,
    Refuted,
}

/// Real-root count of one polynomial on `(lo, hi]`, plus its value at a
/// sample point inside the root-free region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootCountWitness {
    pub label: String,
    pub poly: UniPoly,
    pub lo: Bound,
    pub hi: Bound,
    pub roots: usize,
    pub sample_point: Rational,
    pub sample_value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolicWitness {
    /// Canonical form of the function claimed to vanish, with named
    /// intermediate sums.
    Identity { value: RatFunc, intermediates: Vec<(String, RatFunc)> },
    RootCounts(Vec<RootCountWitness>),
    /// `h_star` is the largest multiple of the resolution below the
    /// smallest positive root of `binding`.
    PositivityRange { h_star: Rational, resolution: Rational, binding: UniPoly, counts: Vec<RootCountWitness> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicCertificate {
    pub claim: SymbolicClaim,
    pub verdict: SymbolicVerdict,
    pub witness: SymbolicWitness,
}

impl SymbolicCertificate {
    pub fn is_proved(&self) -> bool {
        self.verdict == SymbolicVerdict::Proved
    }

    /// Upper end of the certified positivity range, if this certificate
    /// carries one.
    pub fn h_star(&self) -> Option<&Rational> {
        match &self.witness {
            SymbolicWitness::PositivityRange { h_star, .. } => Some(h_star),
            _ => None,
        }
    }
}

impl fmt::Display for SymbolicCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}", self.claim.id(), self.verdict)
    }
}

fn symbolic_rows() -> ([RatFunc; 3], [RatFunc; 3]) {
    let h = RatFunc::x();
    let odd = b_row_odd(&h).expect("7 + h^2 is not the zero polynomial");
    let even = b_row_even(&h).expect("21 + h + 3h^2 is not the zero polynomial");
    (odd, even)
}

/// `odd(h) Λ even(h)ᵀ`, grouped by the columns of `Λ`:
/// `s1 (r1 + r2 + r3) + s2 (r1 + r2 - r3) + s3 (r1 - r2 + r3)`.
pub fn verify_pair_orthogonality() -> SymbolicCertificate {
    let ([r1, r2, r3], [s1, s2, s3]) = symbolic_rows();
    let g1 = r1.add(&r2).add(&r3);
    let g2 = r1.add(&r2).sub(&r3);
    let g3 = r1.sub(&r2).add(&r3);
    let f = s1.mul(&g1).add(&s2.mul(&g2)).add(&s3.mul(&g3));
    let verdict = if f.is_zero() { SymbolicVerdict::Proved } else { SymbolicVerdict::Refuted };
    SymbolicCertificate {
        claim: SymbolicClaim::PairOrthogonality,
        verdict,
        witness: SymbolicWitness::Identity {
            value: f,
            intermediates: alloc::vec![
                ("r1+r2+r3".into(), g1),
                ("r1+r2-r3".into(), g2),
                ("r1-r2+r3".into(), g3),
            ],
        },
    }
}

fn count_witness(label: &str, poly: &UniPoly, lo: Bound, hi: Bound, sample: Rational) -> RootCountWitness {
    let roots = sturm_count_roots(poly, &lo, &hi).expect("nonzero polynomial");
    RootCountWitness {
        label: label.into(),
        poly: poly.clone(),
        lo,
        hi,
        roots,
        sample_value: poly.eval(&sample),
        sample_point: sample,
    }
}

/// The two denominators `7 + h²` and `21 + h + 3h²` have no real roots and
/// are positive at 0, hence positive everywhere.
pub fn verify_denominators_positive() -> SymbolicCertificate {
    let polys = [("7+h^2", UniPoly::from_ints(&[7, 0, 1])), ("21+h+3h^2", UniPoly::from_ints(&[21, 1, 3]))];
    let counts: Vec<RootCountWitness> = polys
        .iter()
        .map(|(label, p)| count_witness(label, p, Bound::NegInf, Bound::PosInf, Rational::zero()))
        .collect();
    let ok = counts.iter().all(|w| w.roots == 0 && w.sample_value.is_positive());
    SymbolicCertificate {
        claim: SymbolicClaim::DenominatorsPositive,
        verdict: if ok { SymbolicVerdict::Proved } else { SymbolicVerdict::Refuted },
        witness: SymbolicWitness::RootCounts(counts),
    }
}

/// Resolution of the positivity range.
pub const RANGE_RESOLUTION: i64 = 1000;
/// Search cap for the positivity range, in units of the resolution.
const RANGE_CAP: i64 = 1_000_000_000;

/// Largest `H*` (a multiple of 1/1000) such that all row entries are
/// certified positive on `(0, H*]`.
///
/// Every entry is a rational function; it is positive on `(0, H]` iff its
/// numerator and denominator have no root there and their signs agree at
/// `H`. The binding polynomial is the first to acquire a positive root.
pub fn verify_b_entry_positivity_range() -> SymbolicCertificate {
    let (odd, even) = symbolic_rows();
    let mut factors: Vec<(String, UniPoly)> = Vec::new();
    for (name, row) in [("odd", &odd), ("even", &even)] {
        for (j, e) in row.iter().enumerate() {
            for (part, p) in [("num", e.numerator()), ("den", e.denominator())] {
                if !p.is_constant() {
                    factors.push((alloc::format!("{name}[{}].{part}", j + 1), p.clone()));
                }
            }
        }
    }
    let resolution = Rational::new(1, RANGE_RESOLUTION).expect("nonzero");
    let at = |m: i64| Rational::new(m, RANGE_RESOLUTION).expect("nonzero");
    let root_free = |m: i64| {
        factors
            .iter()
            .all(|(_, p)| sturm_count_roots(p, &Bound::Finite(Rational::zero()), &Bound::Finite(at(m))).unwrap() == 0)
    };
    // largest m with no root of any factor in (0, m/1000]
    let (mut lo, mut hi) = (0i64, 1i64);
    while hi < RANGE_CAP && root_free(hi) {
        lo = hi;
        hi *= 2;
    }
    if hi >= RANGE_CAP && root_free(hi) {
        lo = hi;
    } else {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if root_free(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let h_star = at(lo);
    let binding = factors
        .iter()
        .find(|(_, p)| sturm_count_roots(p, &Bound::Finite(Rational::zero()), &Bound::Finite(at(lo + 1))).unwrap() > 0)
        .map(|(_, p)| p.clone())
        .unwrap_or_default();
    let counts: Vec<RootCountWitness> = factors
        .iter()
        .map(|(label, p)| count_witness(label, p, Bound::Finite(Rational::zero()), Bound::Finite(h_star.clone()), h_star.clone()))
        .collect();
    let entries_positive = lo > 0
        && odd.iter().chain(even.iter()).all(|e| e.eval(&h_star).map(|v| v.sign() == Sign::Positive).unwrap_or(false));
    let ok = entries_positive && counts.iter().all(|w| w.roots == 0);
    SymbolicCertificate {
        claim: SymbolicClaim::EntryPositivityRange,
        verdict: if ok { SymbolicVerdict::Proved } else { SymbolicVerdict::Refuted },
        witness: SymbolicWitness::PositivityRange { h_star, resolution, binding, counts },
    }
}

pub fn all_symbolic_certificates() -> Vec<SymbolicCertificate> {
    alloc::vec![verify_pair_orthogonality(), verify_denominators_positive(), verify_b_entry_positivity_range()]
}
