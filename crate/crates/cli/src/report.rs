//! `report.json`: claim verdicts, inertia, rank bracket and NMF summary.

use std::fmt::Write as _;

use nnrank_core::bounds::{CoverOutcome, RankBracket, UpperSource};
use nnrank_core::construction::ScalarMode;
use nnrank_core::nmf::ProbeResult;
use nnrank_core::symbolic::{SymbolicCertificate, SymbolicWitness};
use nnrank_core::verify::{CertificateReport, ClaimEntry, ClaimId, InertiaTriple, Verdict, Witness};
use serde::{Deserialize, Serialize};

use crate::format::FormatError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessDto {
    Structural { note: String },
    Entry { p: usize, q: usize, value: String },
    EntryPair { p: usize, q: usize, a_pq: String, a_qp: String },
    Minor { rows: Vec<usize>, cols: Vec<usize>, value: String },
    Count { checked: usize, label: String },
    Note { note: String },
}

impl From<&Witness> for WitnessDto {
    fn from(w: &Witness) -> Self {
        match w.clone() {
            Witness::Structural(note) => WitnessDto::Structural { note },
            Witness::Entry { p, q, value } => WitnessDto::Entry { p, q, value },
            Witness::EntryPair { p, q, a_pq, a_qp } => WitnessDto::EntryPair { p, q, a_pq, a_qp },
            Witness::Minor { rows, cols, value } => WitnessDto::Minor { rows, cols, value },
            Witness::Count { checked, label } => WitnessDto::Count { checked, label },
            Witness::Note(note) => WitnessDto::Note { note },
        }
    }
}

impl WitnessDto {
    fn to_witness(&self) -> Witness {
        match self.clone() {
            WitnessDto::Structural { note } => Witness::Structural(note),
            WitnessDto::Entry { p, q, value } => Witness::Entry { p, q, value },
            WitnessDto::EntryPair { p, q, a_pq, a_qp } => Witness::EntryPair { p, q, a_pq, a_qp },
            WitnessDto::Minor { rows, cols, value } => Witness::Minor { rows, cols, value },
            WitnessDto::Count { checked, label } => Witness::Count { checked, label },
            WitnessDto::Note { note } => Witness::Note(note),
        }
    }

    fn summary(&self) -> String {
        match self {
            WitnessDto::Structural { note } | WitnessDto::Note { note } => note.clone(),
            WitnessDto::Entry { p, q, value } => format!("A[{p},{q}] = {value}"),
            WitnessDto::EntryPair { p, q, a_pq, a_qp } => format!("A[{p},{q}] = {a_pq} vs A[{q},{p}] = {a_qp}"),
            WitnessDto::Minor { rows, value, .. } => format!("minor {rows:?} = {value}"),
            WitnessDto::Count { checked, label } => format!("{checked} checked: {label}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimDto {
    pub id: String,
    pub verdict: String,
    pub precision_bits: Option<u64>,
    pub micros: u64,
    pub witnesses: Vec<WitnessDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicDto {
    pub id: String,
    pub verdict: String,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InertiaDto {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectangleDto {
    /// `exact` or `timed_out`.
    pub status: String,
    pub lower: usize,
    pub upper: usize,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketDto {
    pub lower: usize,
    pub lower_source: String,
    pub upper: usize,
    pub upper_source: String,
    pub nmf_residual: Option<f64>,
    pub linear_rank: usize,
    pub pair_bound: usize,
    pub rectangle: Option<RectangleDto>,
    pub gap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r: usize,
    pub best_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmfDto {
    pub algorithm: String,
    pub seed: u64,
    pub restarts: usize,
    pub max_iterations: usize,
    pub threshold: f64,
    pub curve: Vec<CurvePoint>,
    pub threshold_rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_micros: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub tool_version: String,
    pub bundle_digest: String,
    pub k: usize,
    /// `surrogate-exact` or `paper-interval`.
    pub mode: String,
    pub precision_bits: Option<u64>,
    pub overall: String,
    pub claims: Vec<ClaimDto>,
    pub symbolic: Vec<SymbolicDto>,
    pub inertia: Option<InertiaDto>,
    pub precision_trace: Vec<u64>,
    pub timings: Timings,
    #[serde(default)]
    pub rank_bracket: Option<BracketDto>,
    #[serde(default)]
    pub nmf: Option<NmfDto>,
}

pub fn parse_verdict(s: &str) -> Option<Verdict> {
    [Verdict::Certified, Verdict::Falsified, Verdict::Inconclusive].into_iter().find(|v| v.as_str() == s)
}

fn symbolic_detail(c: &SymbolicCertificate) -> String {
    match &c.witness {
        SymbolicWitness::Identity { value, .. } => format!("expanded numerator: {}", value.numerator()),
        SymbolicWitness::RootCounts(counts) => counts
            .iter()
            .map(|w| format!("{}: {} real roots", w.label, w.roots))
            .collect::<Vec<_>>()
            .join("; "),
        SymbolicWitness::PositivityRange { h_star, binding, .. } => {
            format!("entries positive on (0, {h_star}]; binding factor {binding}")
        }
    }
}

fn claim_dto(c: &ClaimEntry) -> ClaimDto {
    ClaimDto {
        id: c.claim.id().into(),
        verdict: c.verdict.as_str().into(),
        precision_bits: c.precision_bits,
        micros: c.micros,
        witnesses: c.witnesses.iter().map(WitnessDto::from).collect(),
    }
}

impl ReportFile {
    pub fn from_report(r: &CertificateReport, digest: &str, total_micros: u64) -> Self {
        let (mode, precision_bits) = match r.mode {
            ScalarMode::SurrogateExact => ("surrogate-exact", None),
            ScalarMode::PaperInterval { precision_bits } => ("paper-interval", Some(precision_bits)),
        };
        ReportFile {
            schema_version: REPORT_SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            bundle_digest: digest.into(),
            k: r.k,
            mode: mode.into(),
            precision_bits,
            overall: r.overall.as_str().into(),
            claims: r.claims.iter().map(claim_dto).collect(),
            symbolic: r
                .symbolic
                .iter()
                .map(|c| SymbolicDto {
                    id: c.claim.id().into(),
                    verdict: if c.is_proved() { "proved" } else { "refuted" }.into(),
                    detail: symbolic_detail(c),
                })
                .collect(),
            inertia: r.inertia.map(|t| InertiaDto { n_plus: t.n_plus, n_minus: t.n_minus, n_zero: t.n_zero }),
            precision_trace: r.precision_trace.clone(),
            timings: Timings { total_micros },
            rank_bracket: None,
            nmf: None,
        }
    }

    pub fn overall_verdict(&self) -> Result<Verdict, FormatError> {
        parse_verdict(&self.overall).ok_or_else(|| FormatError::Invalid(format!("unknown verdict {:?}", self.overall)))
    }

    /// The claim verdicts as a core report, enough for bracketing. The
    /// symbolic certificates are not carried back.
    pub fn to_certificate_report(&self) -> Result<CertificateReport, FormatError> {
        let bad = |m: String| FormatError::Invalid(m);
        let mode = match (self.mode.as_str(), self.precision_bits) {
            ("surrogate-exact", _) => ScalarMode::SurrogateExact,
            ("paper-interval", Some(p)) => ScalarMode::PaperInterval { precision_bits: p },
            (m, _) => return Err(bad(format!("unknown mode {m:?}"))),
        };
        let claims = self
            .claims
            .iter()
            .map(|c| {
                let claim = ClaimId::from_id(&c.id).ok_or_else(|| bad(format!("unknown claim id {:?}", c.id)))?;
                let verdict = parse_verdict(&c.verdict).ok_or_else(|| bad(format!("unknown verdict {:?}", c.verdict)))?;
                Ok(ClaimEntry {
                    claim,
                    verdict,
                    witnesses: c.witnesses.iter().map(WitnessDto::to_witness).collect(),
                    precision_bits: c.precision_bits,
                    micros: c.micros,
                })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        Ok(CertificateReport {
            k: self.k,
            mode,
            claims,
            symbolic: Vec::new(),
            inertia: self.inertia.map(|t| InertiaTriple { n_plus: t.n_plus, n_minus: t.n_minus, n_zero: t.n_zero }),
            precision_trace: self.precision_trace.clone(),
            overall: self.overall_verdict()?,
        })
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("reports always serialize");
        v.push(b'\n');
        v
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, FormatError> {
        let r: ReportFile = serde_json::from_slice(bytes)?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(FormatError::Schema(r.schema_version));
        }
        Ok(r)
    }

    /// Nonnegative rank lower bound for the headline: the stored bracket,
    /// else the linear rank and pair bound.
    pub fn headline_lower(&self) -> usize {
        match &self.rank_bracket {
            Some(b) => b.lower,
            None => nnrank_core::bounds::pair_pattern_lower_bound(self.k).unwrap_or(1).max(3),
        }
    }

    pub fn headline(&self) -> String {
        let certified = self.overall == Verdict::Certified.as_str();
        let one_negative = self.inertia.is_some_and(|t| t.n_minus == 1);
        if certified && one_negative {
            format!("rank = 3, one negative eigenvalue, nonnegative rank ≥ {}", self.headline_lower())
        } else {
            format!("not certified (overall {})", self.overall)
        }
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "bundle  {}", self.bundle_digest);
        let prec = self.precision_bits.map(|p| format!(" at {p} bits")).unwrap_or_default();
        let _ = writeln!(s, "k = {}, mode {}{prec}", self.k, self.mode);
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<34} {:<13} {}", "claim", "verdict", "evidence");
        for c in &self.claims {
            let ev = c.witnesses.first().map(WitnessDto::summary).unwrap_or_default();
            let _ = writeln!(s, "{:<34} {:<13} {}", c.id, c.verdict, ev);
        }
        let _ = writeln!(s);
        match self.inertia {
            Some(t) => {
                let _ = writeln!(s, "eigenvalue signs (n+, n-, n0) = ({}, {}, {})", t.n_plus, t.n_minus, t.n_zero);
            }
            None => {
                let _ = writeln!(s, "eigenvalue signs not determined");
            }
        }
        if let Some(b) = &self.rank_bracket {
            let _ = writeln!(s, "{}", bracket_line(b));
        }
        if let Some(n) = &self.nmf {
            let t = n.threshold_rank.map_or("none".into(), |r| r.to_string());
            let _ = writeln!(s, "nmf ({}) smallest r with residual <= {:e}: {t}", n.algorithm, n.threshold);
        }
        let _ = writeln!(s, "overall: {}", self.overall);
        let _ = writeln!(s, "{}", self.headline());
        s
    }
}

pub fn bracket_line(b: &BracketDto) -> String {
    format!(
        "rank={}, rank_+ ∈ [{}, {}]  (lower: {}, upper: {})",
        b.linear_rank, b.lower, b.upper, b.lower_source, b.upper_source
    )
}

pub fn bracket_dto(b: &RankBracket, rect: Option<&CoverOutcome>) -> BracketDto {
    let (upper_source, nmf_residual) = match b.upper_source {
        UpperSource::Dimension => ("dimension", None),
        UpperSource::NmfNumerical { residual } => ("nmf_numerical", Some(residual)),
    };
    BracketDto {
        lower: b.lower,
        lower_source: b.lower_source.as_str().into(),
        upper: b.upper,
        upper_source: upper_source.into(),
        nmf_residual,
        linear_rank: b.linear_rank,
        pair_bound: b.pair_bound,
        rectangle: rect.map(|c| RectangleDto {
            status: match c {
                CoverOutcome::Exact { .. } => "exact",
                CoverOutcome::TimedOut { .. } => "timed_out",
            }
            .into(),
            lower: c.lower_bound(),
            upper: c.upper_bound(),
            nodes: c.nodes(),
        }),
        gap: b.exhibits_gap(),
    }
}

/// Rectangle-cover result as stored in a report; the cover itself is not kept.
pub fn cover_from_dto(r: &RectangleDto) -> CoverOutcome {
    if r.status == "exact" {
        CoverOutcome::Exact { value: r.lower, cover: Vec::new(), nodes: r.nodes }
    } else {
        CoverOutcome::TimedOut { best_lower: r.lower, best_upper: r.upper, nodes: r.nodes }
    }
}

pub fn nmf_dto(p: &ProbeResult, algorithm: &str, seed: u64, restarts: usize, max_iterations: usize) -> NmfDto {
    NmfDto {
        algorithm: algorithm.into(),
        seed,
        restarts,
        max_iterations,
        threshold: p.threshold,
        curve: p.curve.iter().map(|c| CurvePoint { r: c.r, best_residual: c.best_residual }).collect(),
        threshold_rank: p.threshold_rank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nnrank_core::construction::{Bundle, SurrogateSpec};
    use nnrank_core::verify::{full_verify, NoClock, VerifyOptions};

    fn k2_report() -> (CertificateReport, ReportFile) {
        let b = Bundle::surrogate(2, &SurrogateSpec::default()).unwrap();
        let core = full_verify(&b.into(), &VerifyOptions::default(), &NoClock);
        let file = ReportFile::from_report(&core, "00", 5);
        (core, file)
    }

    #[test]
    fn json_round_trip() {
        let (_, file) = k2_report();
        assert_eq!(ReportFile::parse(&file.canonical_bytes()).unwrap(), file);
    }

    #[test]
    fn claims_survive_conversion_back() {
        let (core, file) = k2_report();
        let back = file.to_certificate_report().unwrap();
        assert_eq!(back.claims, core.claims);
        assert_eq!(back.inertia, core.inertia);
        assert_eq!(back.overall, core.overall);
    }

    #[test]
    fn verdicts_are_restricted() {
        let (_, mut file) = k2_report();
        file.claims[0].verdict = "probably".into();
        assert!(file.to_certificate_report().is_err());
        assert_eq!(parse_verdict("certified"), Some(Verdict::Certified));
        assert_eq!(parse_verdict("Certified"), None);
    }

    #[test]
    fn headline_uses_the_bracket_when_present() {
        let (core, mut file) = k2_report();
        assert!(file.headline().ends_with("nonnegative rank ≥ 3"));
        let b = nnrank_core::bounds::rank_bracket(&core, None, Some((3, 1e-12))).unwrap();
        file.rank_bracket = Some(bracket_dto(&b, None));
        assert_eq!(file.rank_bracket.as_ref().unwrap().upper_source, "nmf_numerical");
        assert!(file.render_text().contains("rank=3, rank_+ ∈ [3, 3]"));
    }

    #[test]
    fn uncertified_headline() {
        let (_, mut file) = k2_report();
        file.overall = "inconclusive".into();
        assert_eq!(file.headline(), "not certified (overall inconclusive)");
    }
}
