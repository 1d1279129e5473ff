//! Per-instance certification of the matrix-level claims about a bundle:
//! symmetry, the zero pattern, rank three, negative principal 3×3 minors
//! and the inertia.

mod checks;
mod inertia;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::construction::{hchain_surrogate, AnyBundle, Bundle, ChainOrigin, ModeScalar, ScalarMode};
use crate::scalar::{exact_determinant, interval_determinant, FloatInterval, Matrix, Rational, ScalarError};
use crate::symbolic::{all_symbolic_certificates, SymbolicCertificate, SymbolicClaim, SymbolicVerdict};

pub use checks::{
    certify_rank_three, verify_chain_range, verify_principal_minors, verify_symmetry, verify_zero_pattern,
    MinorSelection,
};
pub use inertia::{char_cubic, inertia_from_cubic, verify_inertia, InertiaTriple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Certified,
    Falsified,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Certified => "certified",
            Verdict::Falsified => "falsified",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Falsified dominates Inconclusive, which dominates Certified.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Falsified, _) | (_, Falsified) => Falsified,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Certified,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClaimId {
    Symmetry,
    ZeroPattern,
    RankThree,
    PrincipalMinors,
    Inertia,
    ChainRange,
    Symbolic(SymbolicClaim),
}

impl ClaimId {
    pub fn id(self) -> &'static str {
        match self {
            ClaimId::Symmetry => "symmetry",
            ClaimId::ZeroPattern => "zero_pattern",
            ClaimId::RankThree => "rank_three",
            ClaimId::PrincipalMinors => "principal_3x3_minors",
            ClaimId::Inertia => "inertia",
            ClaimId::ChainRange => "chain_in_positive_range",
            ClaimId::Symbolic(s) => s.id(),
        }
    }

    pub fn all() -> [ClaimId; 9] {
        [
            ClaimId::Symbolic(SymbolicClaim::PairOrthogonality),
            ClaimId::Symbolic(SymbolicClaim::DenominatorsPositive),
            ClaimId::Symbolic(SymbolicClaim::EntryPositivityRange),
            ClaimId::ChainRange,
            ClaimId::Symmetry,
            ClaimId::ZeroPattern,
            ClaimId::RankThree,
            ClaimId::PrincipalMinors,
            ClaimId::Inertia,
        ]
    }

    pub fn from_id(s: &str) -> Option<ClaimId> {
        ClaimId::all().into_iter().find(|c| c.id() == s)
    }
}

/// Evidence attached to a claim. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Holds by construction of the data structure.
    Structural(String),
    Entry { p: usize, q: usize, value: String },
    EntryPair { p: usize, q: usize, a_pq: String, a_qp: String },
    Minor { rows: Vec<usize>, cols: Vec<usize>, value: String },
    Count { checked: usize, label: String },
    Note(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimEntry {
    pub claim: ClaimId,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub precision_bits: Option<u64>,
    pub micros: u64,
}

impl ClaimEntry {
    fn new(claim: ClaimId, verdict: Verdict, witnesses: Vec<Witness>) -> Self {
        ClaimEntry { claim, verdict, witnesses, precision_bits: None, micros: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateReport {
    pub k: usize,
    pub mode: ScalarMode,
    pub claims: Vec<ClaimEntry>,
    pub symbolic: Vec<SymbolicCertificate>,
    pub inertia: Option<InertiaTriple>,
    /// Precisions tried in order; empty in exact mode.
    pub precision_trace: Vec<u64>,
    pub overall: Verdict,
}

impl CertificateReport {
    pub fn claim(&self, id: ClaimId) -> Option<&ClaimEntry> {
        self.claims.iter().find(|c| c.claim == id)
    }

    pub fn verdict_of(&self, id: ClaimId) -> Option<Verdict> {
        self.claim(id).map(|c| c.verdict)
    }
}

/// Wall-clock source; the core crate has no clock of its own.
pub trait Clock {
    fn now_micros(&self) -> u64;
}

/// Reports zero elapsed time.
pub struct NoClock;

impl Clock for NoClock {
    fn now_micros(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOptions {
    pub minors: MinorSelection,
    /// Ceiling for automatic precision doubling in interval mode.
    pub max_precision_bits: u64,
    /// Number of random 4×4 minors of `A` checked to vanish in exact mode.
    pub rank_spot_checks: usize,
    pub seed: u64,
}

pub const DEFAULT_MAX_PRECISION_BITS: u64 = 1 << 20;

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            minors: MinorSelection::Auto,
            max_precision_bits: DEFAULT_MAX_PRECISION_BITS,
            rank_spot_checks: 20,
            seed: 0x5eed,
        }
    }
}

/// Three-way comparison of scalars that may be enclosures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equality {
    Equal,
    Different,
    Undecided,
}

/// Mode-specific operations the checks need.
pub trait VerifyScalar: ModeScalar {
    fn det(m: &Matrix<Self>) -> Result<Self, ScalarError>;
    fn compare(a: &Self, b: &Self) -> Equality;
    fn render(&self) -> String;
    fn precision(&self) -> Option<u64>;
    fn is_exact() -> bool;
    /// `q` in this mode, at the precision of `like`.
    fn from_rational_like(like: &Self, q: &Rational) -> Self;
    fn cubic_signs(coeffs: &[Self; 4]) -> inertia::CubicSigns;
}

impl VerifyScalar for Rational {
    fn det(m: &Matrix<Self>) -> Result<Self, ScalarError> {
        exact_determinant(m)
    }

    fn compare(a: &Self, b: &Self) -> Equality {
        if a == b {
            Equality::Equal
        } else {
            Equality::Different
        }
    }

    fn render(&self) -> String {
        if self.size_bits() <= 256 {
            self.to_canonical_string()
        } else {
            alloc::format!("~{:e} (exact, {} bits)", self.to_f64(), self.size_bits())
        }
    }

    fn precision(&self) -> Option<u64> {
        None
    }

    fn is_exact() -> bool {
        true
    }

    fn from_rational_like(_: &Self, q: &Rational) -> Self {
        q.clone()
    }

    fn cubic_signs(coeffs: &[Self; 4]) -> inertia::CubicSigns {
        inertia::exact_cubic_signs(coeffs)
    }
}

impl VerifyScalar for FloatInterval {
    fn det(m: &Matrix<Self>) -> Result<Self, ScalarError> {
        interval_determinant(m)
    }

    fn compare(a: &Self, b: &Self) -> Equality {
        if a == b {
            Equality::Equal
        } else if !a.intersects(b) {
            Equality::Different
        } else {
            Equality::Undecided
        }
    }

    fn render(&self) -> String {
        alloc::format!("{self:?}")
    }

    fn precision(&self) -> Option<u64> {
        Some(self.precision_bits())
    }

    fn is_exact() -> bool {
        false
    }

    fn from_rational_like(like: &Self, q: &Rational) -> Self {
        FloatInterval::from_rational(q, like.precision_bits())
    }

    fn cubic_signs(coeffs: &[Self; 4]) -> inertia::CubicSigns {
        inertia::interval_cubic_signs(coeffs)
    }
}

fn timed<C: Clock + ?Sized>(clock: &C, f: impl FnOnce() -> ClaimEntry) -> ClaimEntry {
    let t0 = clock.now_micros();
    let mut e = f();
    e.micros = clock.now_micros().saturating_sub(t0);
    e
}

fn symbolic_entry(cert: &SymbolicCertificate) -> ClaimEntry {
    let verdict = match cert.verdict {
        SymbolicVerdict::Proved => Verdict::Certified,
        SymbolicVerdict::Refuted => Verdict::Falsified,
    };
    ClaimEntry::new(ClaimId::Symbolic(cert.claim), verdict, alloc::vec![Witness::Note(alloc::format!("{cert}"))])
}

fn verify_generic<S: VerifyScalar, C: Clock + ?Sized>(
    bundle: &Bundle<S>,
    symbolic: &[SymbolicCertificate],
    opts: &VerifyOptions,
    clock: &C,
) -> (Vec<ClaimEntry>, Option<InertiaTriple>) {
    let orthogonality_proved = symbolic
        .iter()
        .any(|c| c.claim == SymbolicClaim::PairOrthogonality && c.verdict == SymbolicVerdict::Proved);
    let h_star = symbolic.iter().find_map(|c| c.h_star().cloned());
    let mut claims: Vec<ClaimEntry> = symbolic.iter().map(symbolic_entry).collect();
    claims.push(timed(clock, || verify_chain_range(bundle, h_star.as_ref())));
    claims.push(timed(clock, || verify_symmetry(&bundle.a)));
    claims.push(timed(clock, || verify_zero_pattern(&bundle.a, orthogonality_proved)));
    claims.push(timed(clock, || certify_rank_three(bundle, opts)));
    claims.push(timed(clock, || verify_principal_minors(&bundle.a, &opts.minors, opts.seed)));
    let mut triple = None;
    claims.push(timed(clock, || {
        let (t, e) = verify_inertia(bundle);
        triple = t;
        e
    }));
    let precision = bundle.chain.values().first().and_then(S::precision);
    for c in &mut claims {
        if !matches!(c.claim, ClaimId::Symbolic(_)) {
            c.precision_bits = precision;
        }
    }
    (claims, triple)
}

fn overall(claims: &[ClaimEntry]) -> Verdict {
    claims.iter().fold(Verdict::Certified, |acc, c| acc.combine(c.verdict))
}

/// Rebuilds an interval bundle at a higher precision from its chain origin.
fn rebuild_interval(bundle: &Bundle<FloatInterval>, prec: u64) -> Option<Bundle<FloatInterval>> {
    match bundle.chain.origin() {
        ChainOrigin::PaperChain { h1 } => Bundle::paper(bundle.k(), h1, prec).ok(),
        ChainOrigin::Surrogate(spec) => {
            let chain = hchain_surrogate(bundle.k(), spec).ok()?;
            Bundle::from_rational_chain(&chain, prec).ok()
        }
    }
}

/// Every entry of the original must intersect the rebuilt enclosure.
fn consistent_with(original: &Bundle<FloatInterval>, rebuilt: &Bundle<FloatInterval>) -> Option<Witness> {
    let n = original.a.rows();
    if rebuilt.a.rows() != n || original.b.rows() != rebuilt.b.rows() {
        return Some(Witness::Note("rebuilt bundle has a different shape".into()));
    }
    for p in 0..n {
        for q in 0..n {
            if !original.a.get(p, q).intersects(rebuilt.a.get(p, q)) {
                return Some(Witness::Entry {
                    p,
                    q,
                    value: alloc::format!("{:?} vs regenerated {:?}", original.a.get(p, q), rebuilt.a.get(p, q)),
                });
            }
        }
    }
    None
}

/// Runs every check, aggregating into one report. In interval mode an
/// Inconclusive outcome (with nothing Falsified) triggers regeneration of
/// the bundle from its chain origin at doubled precision, up to
/// `opts.max_precision_bits`.
pub fn full_verify<C: Clock + ?Sized>(bundle: &AnyBundle, opts: &VerifyOptions, clock: &C) -> CertificateReport {
    let symbolic = all_symbolic_certificates();
    match bundle {
        AnyBundle::Exact(b) => {
            let (claims, inertia) = verify_generic(b, &symbolic, opts, clock);
            CertificateReport {
                k: b.k(),
                mode: b.mode(),
                overall: overall(&claims),
                claims,
                symbolic,
                inertia,
                precision_trace: Vec::new(),
            }
        }
        AnyBundle::Interval(b) => {
            let start = match b.mode() {
                ScalarMode::PaperInterval { precision_bits } => precision_bits,
                ScalarMode::SurrogateExact => 0,
            };
            let mut trace = alloc::vec![start];
            let (mut claims, mut inertia) = verify_generic(b, &symbolic, opts, clock);
            let mut mode = b.mode();
            let mut prec = start;
            while overall(&claims) == Verdict::Inconclusive && prec.saturating_mul(2) <= opts.max_precision_bits {
                prec *= 2;
                let Some(rebuilt) = rebuild_interval(b, prec) else {
                    break;
                };
                trace.push(prec);
                let (c, i) = verify_generic(&rebuilt, &symbolic, opts, clock);
                claims = c;
                inertia = i;
                mode = rebuilt.mode();
                if let Some(w) = consistent_with(b, &rebuilt) {
                    let entry = claims.iter_mut().find(|c| c.claim == ClaimId::RankThree).expect("rank claim present");
                    entry.verdict = Verdict::Falsified;
                    entry.witnesses.push(w);
                }
            }
            CertificateReport {
                k: b.k(),
                mode,
                overall: overall(&claims),
                claims,
                symbolic,
                inertia,
                precision_trace: trace,
            }
        }
    }
}

impl fmt::Display for CertificateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.claims {
            writeln!(f, "{:<34} {}", c.claim.id(), c.verdict.as_str())?;
        }
        write!(f, "overall: {}", self.overall.as_str())
    }
}
