use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ClaimEntry, ClaimId, Equality, Verdict, VerifyScalar, VerifyOptions, Witness};
use crate::construction::{build_a, build_lambda, Bundle};
use crate::scalar::{Matrix, Rational, Sign};

/// Failure witnesses kept per claim.
const MAX_WITNESSES: usize = 16;

/// Which principal 3×3 minors to certify.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MinorSelection {
    /// Exhaustive when the dimension is at most 20, otherwise a seeded
    /// sample of 200.
    Auto,
    Exhaustive,
    Sampled { count: usize },
}

pub const AUTO_EXHAUSTIVE_MAX_DIM: usize = 20;
pub const DEFAULT_MINOR_SAMPLE: usize = 200;

struct Tally {
    verdict: Verdict,
    witnesses: Vec<Witness>,
    failures: usize,
}

impl Tally {
    fn new() -> Self {
        Tally { verdict: Verdict::Certified, witnesses: Vec::new(), failures: 0 }
    }

    fn fail(&mut self, verdict: Verdict, w: Witness) {
        self.verdict = self.verdict.combine(verdict);
        self.failures += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w);
        }
    }

    fn finish(mut self, claim: ClaimId, summary: Witness) -> ClaimEntry {
        if self.failures > self.witnesses.len() {
            self.witnesses.push(Witness::Note(alloc::format!("{} failures in total", self.failures)));
        }
        self.witnesses.insert(0, summary);
        ClaimEntry::new(claim, self.verdict, self.witnesses)
    }
}

/// Verdict for "x is strictly positive".
fn positive_verdict(s: Sign) -> Verdict {
    match s {
        Sign::Positive => Verdict::Certified,
        Sign::Negative | Sign::Zero => Verdict::Falsified,
        Sign::Unknown => Verdict::Inconclusive,
    }
}

/// Each chain value is positive, below its predecessor and at most `H*`.
pub fn verify_chain_range<S: VerifyScalar>(bundle: &Bundle<S>, h_star: Option<&Rational>) -> ClaimEntry {
    let mut t = Tally::new();
    let values = bundle.chain.values();
    for (i, h) in values.iter().enumerate() {
        let v = positive_verdict(h.sign());
        if v != Verdict::Certified {
            t.fail(v, Witness::Note(alloc::format!("h_{} = {} is not certified positive", i + 1, h.render())));
        }
        if i > 0 {
            let v = positive_verdict(values[i - 1].sub(h).sign());
            if v != Verdict::Certified {
                t.fail(v, Witness::Note(alloc::format!("h_{} is not certified below h_{}", i + 1, i)));
            }
        }
        match h_star {
            Some(hs) => {
                let margin = S::from_rational_like(h, hs).sub(h);
                let v = match margin.sign() {
                    Sign::Positive | Sign::Zero => Verdict::Certified,
                    Sign::Negative => Verdict::Falsified,
                    Sign::Unknown => Verdict::Inconclusive,
                };
                if v != Verdict::Certified {
                    t.fail(v, Witness::Note(alloc::format!("h_{} = {} exceeds H* = {hs}", i + 1, h.render())));
                }
            }
            None => t.fail(Verdict::Inconclusive, Witness::Note("no positivity range available".into())),
        }
    }
    let bound = h_star.map_or_else(|| String::from("?"), |h| alloc::format!("{h}"));
    t.finish(ClaimId::ChainRange, Witness::Count { checked: values.len(), label: alloc::format!("chain values in (0, {bound}]") })
}

/// `A_pq = A_qp` for every pair.
pub fn verify_symmetry<S: VerifyScalar>(a: &Matrix<S>) -> ClaimEntry {
    let mut t = Tally::new();
    if !a.is_square() {
        t.fail(Verdict::Falsified, Witness::Note(alloc::format!("A is {}x{}", a.rows(), a.cols())));
        return t.finish(ClaimId::Symmetry, Witness::Count { checked: 0, label: "pairs".into() });
    }
    let n = a.rows();
    let mut checked = 0;
    for p in 0..n {
        for q in p + 1..n {
            checked += 1;
            let v = match S::compare(a.get(p, q), a.get(q, p)) {
                Equality::Equal => continue,
                Equality::Different => Verdict::Falsified,
                Equality::Undecided => Verdict::Inconclusive,
            };
            t.fail(v, Witness::EntryPair { p, q, a_pq: a.get(p, q).render(), a_qp: a.get(q, p).render() });
        }
    }
    let summary = if S::is_exact() {
        Witness::Count { checked, label: "off-diagonal pairs compared exactly".into() }
    } else {
        Witness::Structural("each unordered pair is computed once and mirrored".into())
    };
    t.finish(ClaimId::Symmetry, summary)
}

fn is_pair_position(p: usize, q: usize) -> bool {
    p / 2 == q / 2 && p != q
}

/// Zeros exactly at the within-pair positions and strictly positive
/// entries everywhere else (diagonal included).
///
/// In interval mode the within-pair entries are exact zeros whose
/// justification is the symbolic orthogonality identity.
pub fn verify_zero_pattern<S: VerifyScalar>(a: &Matrix<S>, orthogonality_proved: bool) -> ClaimEntry {
    let mut t = Tally::new();
    let n = a.rows();
    if !a.is_square() || n % 2 != 0 {
        t.fail(Verdict::Falsified, Witness::Note(alloc::format!("A is {}x{}, not 2k x 2k", a.rows(), a.cols())));
        return t.finish(ClaimId::ZeroPattern, Witness::Count { checked: 0, label: "entries".into() });
    }
    let mut positive = 0;
    let mut zeros = 0;
    for p in 0..n {
        for q in 0..n {
            let x = a.get(p, q);
            let s = x.sign();
            if is_pair_position(p, q) {
                let v = match (S::is_exact(), s) {
                    (true, Sign::Zero) => Verdict::Certified,
                    (false, Sign::Zero | Sign::Unknown) if orthogonality_proved => Verdict::Certified,
                    (false, Sign::Zero | Sign::Unknown) => Verdict::Inconclusive,
                    (_, Sign::Unknown) => Verdict::Inconclusive,
                    _ => Verdict::Falsified,
                };
                if v == Verdict::Certified {
                    zeros += 1;
                } else {
                    t.fail(v, Witness::Entry { p, q, value: x.render() });
                }
            } else {
                let v = positive_verdict(s);
                if v == Verdict::Certified {
                    positive += 1;
                } else {
                    t.fail(v, Witness::Entry { p, q, value: x.render() });
                }
            }
        }
    }
    if !S::is_exact() && !orthogonality_proved {
        t.fail(Verdict::Falsified, Witness::Note("within-pair zeros lack the symbolic identity".into()));
    }
    let summary = Witness::Count {
        checked: n * n,
        label: alloc::format!("{zeros} within-pair zeros, {positive} positive entries"),
    };
    t.finish(ClaimId::ZeroPattern, summary)
}

fn triples(n: usize) -> impl Iterator<Item = [usize; 3]> {
    (0..n).flat_map(move |i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |l| [i, j, l])))
}

fn binomial3(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// Distinct sorted index sets of size `m` from `0..n`, deterministic in `seed`.
fn sample_index_sets(n: usize, m: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let total = if m == 3 { binomial3(n) } else { usize::MAX };
    let target = count.min(total);
    let mut guard = 0usize;
    while seen.len() < target && guard < 100 * target + 100 {
        guard += 1;
        let mut idx = rand::seq::index::sample(&mut rng, n, m).into_vec();
        idx.sort_unstable();
        seen.insert(idx);
    }
    seen.into_iter().collect()
}

/// Rank exactly three.
///
/// Upper bound: `A` is rebuilt from the chain and compared entrywise, and
/// in interval mode must also meet `B Λ Bᵀ` (it factors through three
/// columns); in exact mode a seeded sample of
/// 4×4 minors of `A` must also vanish. Lower bound: a 3×3 minor of `B` with
/// a certified nonzero determinant, trying rows {1, 2, 3} first.
pub fn certify_rank_three<S: VerifyScalar>(bundle: &Bundle<S>, opts: &VerifyOptions) -> ClaimEntry {
    let mut t = Tally::new();
    let b = &bundle.b;
    let a = &bundle.a;
    if bundle.lambda != build_lambda() {
        t.fail(Verdict::Falsified, Witness::Note("Λ differs from the sign matrix".into()));
    }
    match S::build_a_for(bundle.chain.values(), b, &bundle.lambda) {
        Ok(expected) if expected.rows() == a.rows() && expected.cols() == a.cols() => {
            for p in 0..a.rows() {
                for q in 0..a.cols() {
                    let v = match S::compare(a.get(p, q), expected.get(p, q)) {
                        Equality::Equal => continue,
                        Equality::Different => Verdict::Falsified,
                        Equality::Undecided => Verdict::Inconclusive,
                    };
                    t.fail(
                        v,
                        Witness::Entry { p, q, value: alloc::format!("{} but the chain gives {}", a.get(p, q).render(), expected.get(p, q).render()) },
                    );
                }
            }
        }
        _ => t.fail(Verdict::Falsified, Witness::Note("A does not have the shape of B Λ Bᵀ".into())),
    }
    // in interval mode A is built from the chain, so B Λ Bᵀ must still enclose the same matrix
    if !S::is_exact() {
        if let Some(product) = build_a(b, &bundle.lambda).ok().filter(|m| m.rows() == a.rows() && m.cols() == a.cols()) {
            for p in 0..a.rows() {
                for q in 0..a.cols() {
                    if S::compare(a.get(p, q), product.get(p, q)) == Equality::Different {
                        t.fail(
                            Verdict::Falsified,
                            Witness::Entry { p, q, value: alloc::format!("{} is disjoint from B Λ Bᵀ = {}", a.get(p, q).render(), product.get(p, q).render()) },
                        );
                    }
                }
            }
        }
    }
    let n = a.rows();
    if S::is_exact() && n >= 4 && a.is_square() {
        for (i, rows) in sample_index_sets(n, 4, opts.rank_spot_checks, opts.seed).into_iter().enumerate() {
            let cols = sample_index_sets(n, 4, 1, opts.seed.wrapping_add(1 + i as u64)).remove(0);
            let m = a.select(&rows, &cols);
            match S::det(&m) {
                Ok(d) if d.sign() == Sign::Zero => {}
                Ok(d) => t.fail(Verdict::Falsified, Witness::Minor { rows, cols, value: d.render() }),
                Err(e) => t.fail(Verdict::Inconclusive, Witness::Note(alloc::format!("{e}"))),
            }
        }
    }
    if b.rows() < 3 {
        t.fail(
            Verdict::Falsified,
            Witness::Note(alloc::format!(
                "B has {} rows, so rank(A) <= {}; the construction needs k >= 2 (and k >= 3 for its regime)",
                b.rows(),
                b.rows()
            )),
        );
        return t.finish(ClaimId::RankThree, Witness::Structural("A = B Λ Bᵀ factors through 3 columns".into()));
    }
    let default = [0usize, 1, 2];
    let mut found: Option<Witness> = None;
    let mut all_zero = true;
    for rows in core::iter::once(default).chain(triples(b.rows()).filter(|r| *r != default)) {
        let m = b.select(&rows, &[0, 1, 2]);
        let Ok(d) = S::det(&m) else {
            all_zero = false;
            continue;
        };
        match d.sign() {
            Sign::Positive | Sign::Negative => {
                found = Some(Witness::Minor { rows: rows.to_vec(), cols: vec![0, 1, 2], value: d.render() });
                break;
            }
            Sign::Unknown => all_zero = false,
            Sign::Zero => {}
        }
    }
    match found {
        Some(w) => t.witnesses.push(w),
        None if all_zero && S::is_exact() => {
            t.fail(Verdict::Falsified, Witness::Note("every 3x3 minor of B vanishes: rank(A) < 3".into()))
        }
        None => t.fail(Verdict::Inconclusive, Witness::Note("no 3x3 minor of B certified nonzero".into())),
    }
    t.finish(ClaimId::RankThree, Witness::Structural("A = B Λ Bᵀ factors through 3 columns".into()))
}

/// Index triples selected for the principal-minor check, in increasing
/// lexicographic order.
pub fn selected_triples(n: usize, selection: &MinorSelection, seed: u64) -> Vec<[usize; 3]> {
    let sample = |count: usize| {
        sample_index_sets(n, 3, count, seed).into_iter().map(|v| [v[0], v[1], v[2]]).collect::<Vec<_>>()
    };
    match selection {
        MinorSelection::Exhaustive => triples(n).collect(),
        MinorSelection::Auto if n <= AUTO_EXHAUSTIVE_MAX_DIM => triples(n).collect(),
        MinorSelection::Auto => sample(DEFAULT_MINOR_SAMPLE),
        MinorSelection::Sampled { count } => sample(*count),
    }
}

/// Every selected principal 3×3 minor of `A` is certified negative.
pub fn verify_principal_minors<S: VerifyScalar>(a: &Matrix<S>, selection: &MinorSelection, seed: u64) -> ClaimEntry {
    let mut t = Tally::new();
    if !a.is_square() {
        t.fail(Verdict::Falsified, Witness::Note(alloc::format!("A is {}x{}", a.rows(), a.cols())));
        return t.finish(ClaimId::PrincipalMinors, Witness::Count { checked: 0, label: "principal minors".into() });
    }
    let chosen = selected_triples(a.rows(), selection, seed);
    for tri in &chosen {
        let m = a.principal(tri);
        let (v, value) = match S::det(&m) {
            Ok(d) => {
                let v = match d.sign() {
                    Sign::Negative => Verdict::Certified,
                    Sign::Positive | Sign::Zero => Verdict::Falsified,
                    Sign::Unknown => Verdict::Inconclusive,
                };
                (v, d.render())
            }
            Err(e) => (Verdict::Inconclusive, alloc::format!("{e}")),
        };
        if v != Verdict::Certified {
            t.fail(v, Witness::Minor { rows: tri.to_vec(), cols: tri.to_vec(), value });
        }
    }
    let label = alloc::format!("principal 3x3 minors of {}", binomial3(a.rows()));
    t.finish(ClaimId::PrincipalMinors, Witness::Count { checked: chosen.len(), label })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_enumeration_counts() {
        assert_eq!(triples(6).count(), 20);
        assert_eq!(triples(18).count(), 816);
        assert_eq!(triples(4).collect::<Vec<_>>(), vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]);
    }

    #[test]
    fn sampling_is_deterministic_and_distinct() {
        let a = selected_triples(30, &MinorSelection::Auto, 9);
        assert_eq!(a.len(), DEFAULT_MINOR_SAMPLE);
        assert_eq!(a, selected_triples(30, &MinorSelection::Auto, 9));
        let set: BTreeSet<_> = a.iter().collect();
        assert_eq!(set.len(), a.len());
        assert!(a.iter().all(|t| t[0] < t[1] && t[1] < t[2] && t[2] < 30));
        assert_eq!(selected_triples(6, &MinorSelection::Sampled { count: 500 }, 1).len(), 20);
    }

    #[test]
    fn pair_positions() {
        assert!(is_pair_position(0, 1) && is_pair_position(1, 0) && is_pair_position(4, 5));
        assert!(!is_pair_position(1, 2) && !is_pair_position(3, 3));
    }
}
