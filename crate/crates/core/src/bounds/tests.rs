use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::construction::{AnyBundle, Bundle, ScalarMode, SurrogateSpec};
use crate::scalar::{BigFloat, FloatInterval, Rational};
use num_bigint::BigInt;
use crate::verify::{full_verify, NoClock, VerifyOptions};

/// Minimum cover by subset enumeration over maximal rectangles found by
/// checking every row set and column set.
pub(crate) fn brute_force_cover(p: &SupportPattern) -> usize {
    let (n, m) = (p.n_rows(), p.n_cols());
    let support: Vec<(usize, usize)> =
        (0..n).flat_map(|r| (0..m).map(move |c| (r, c))).filter(|&(r, c)| p.is_support(r, c)).collect();
    if support.is_empty() {
        return 0;
    }
    let valid = |rs: u32, cs: u32| {
        rs != 0 && cs != 0 && (0..n).all(|r| rs >> r & 1 == 0 || (0..m).all(|c| cs >> c & 1 == 0 || p.is_support(r, c)))
    };
    let mut maximal = Vec::new();
    for rs in 1u32..1 << n {
        for cs in 1u32..1 << m {
            if !valid(rs, cs) {
                continue;
            }
            let grow_r = (0..n).any(|r| rs >> r & 1 == 0 && valid(rs | 1 << r, cs));
            let grow_c = (0..m).any(|c| cs >> c & 1 == 0 && valid(rs, cs | 1 << c));
            if !grow_r && !grow_c {
                maximal.push((rs, cs));
            }
        }
    }
    let covers = |set: u64| {
        support.iter().all(|&(r, c)| {
            maximal.iter().enumerate().any(|(i, &(rs, cs))| set >> i & 1 == 1 && rs >> r & 1 == 1 && cs >> c & 1 == 1)
        })
    };
    (0u64..1 << maximal.len()).filter(|&s| covers(s)).map(|s| s.count_ones() as usize).min().unwrap()
}

fn pattern(n: usize, m: usize, zeros: &[(usize, usize)]) -> SupportPattern {
    SupportPattern::new(n, m, zeros.iter().copied()).unwrap()
}

fn exact(p: &SupportPattern) -> usize {
    match rectangle_cover_lower_bound(p, DEFAULT_NODE_BUDGET).unwrap() {
        CoverOutcome::Exact { value, cover, .. } => {
            assert_eq!(cover.len(), value);
            for rect in &cover {
                assert!(rect.is_valid_for(p));
            }
            for r in 0..p.n_rows() {
                for c in 0..p.n_cols() {
                    if p.is_support(r, c) {
                        assert!(cover.iter().any(|rect| rect.contains(r, c)));
                    }
                }
            }
            value
        }
        other => panic!("budget exhausted: {other:?}"),
    }
}

#[test]
fn pair_bound_table() {
    let got: Vec<usize> = (1..=9).map(|k| pair_pattern_lower_bound(k).unwrap()).collect();
    assert_eq!(got, vec![1, 2, 2, 3, 3, 3, 3, 4, 4]);
    assert_eq!(pair_pattern_lower_bound(16).unwrap(), 5);
    assert_eq!(pair_pattern_lower_bound(0), Err(BoundsError::InvalidK));
    for k in 1usize..200 {
        let b = pair_pattern_lower_bound(k).unwrap();
        assert!(1 << (b - 1) <= k && k < 1 << b);
    }
}

#[test]
fn small_cover_values() {
    assert_eq!(exact(&SupportPattern::all_ones(2, 2)), 1);
    assert_eq!(exact(&pattern(3, 3, &[(0, 0), (1, 1), (2, 2)])), 3);
    assert_eq!(exact(&SupportPattern::pair_pattern(1)), 2);
    assert_eq!(exact(&SupportPattern::pair_pattern(2)), 4);
    assert_eq!(exact(&SupportPattern::pair_pattern(3)), 4);
    assert_eq!(exact(&SupportPattern::pair_pattern(4)), 5);
    assert_eq!(exact(&pattern(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)])), 0);
}

#[test]
fn pair_pattern_shape() {
    let p = SupportPattern::pair_pattern(2);
    let z: Vec<_> = p.zeros().collect();
    assert_eq!(z, vec![(0, 1), (1, 0), (2, 3), (3, 2)]);
    assert!(p.is_transpose_closed());
}

#[test]
fn maximal_rectangles_of_diagonal_zero_pattern() {
    // complement of the identity: maximal rectangles are S × (complement of S)
    let p = pattern(3, 3, &[(0, 0), (1, 1), (2, 2)]);
    let rects = maximal_rectangles(&p);
    assert_eq!(rects.len(), 6);
    for r in &rects {
        assert!(r.is_valid_for(&p));
        assert_eq!(r.rows.len() + r.cols.len(), 3);
    }
}

#[test]
fn adding_a_zero_can_lower_the_cover() {
    let p = pattern(2, 2, &[(0, 1)]);
    assert_eq!(exact(&p), 2);
    assert_eq!(exact(&p.with_zero(1, 1).unwrap()), 1);
}

#[test]
fn too_large_patterns_are_refused() {
    let p = SupportPattern::pair_pattern(11);
    assert!(matches!(rectangle_cover_lower_bound(&p, 10), Err(BoundsError::TooLarge { cells: 484, limit: 400 })));
}

#[test]
fn tiny_budget_times_out_with_sound_bounds() {
    let p = SupportPattern::pair_pattern(4);
    match rectangle_cover_lower_bound(&p, 20).unwrap() {
        CoverOutcome::TimedOut { best_lower, best_upper, .. } => {
            assert!(best_lower <= 5 && 5 <= best_upper);
        }
        other => panic!("expected timeout, got {other:?}"),
    }
}

#[test]
fn extract_pattern_from_verified_bundles() {
    for k in 1..=2 {
        let b = Bundle::surrogate(k, &SurrogateSpec::default()).unwrap();
        let r = full_verify(&AnyBundle::Exact(b.clone()), &VerifyOptions::default(), &NoClock);
        let p = extract_pattern(&b.a, &r).unwrap();
        assert_eq!(p, SupportPattern::pair_pattern(k));
    }
    let all_pos = crate::scalar::Matrix::from_fn(3, 3, |_, _| Rational::one());
    let b = Bundle::surrogate(1, &SurrogateSpec::default()).unwrap();
    let r = full_verify(&AnyBundle::Exact(b), &VerifyOptions::default(), &NoClock);
    assert_eq!(extract_pattern(&all_pos, &r).unwrap().zero_count(), 0);
}

#[test]
fn extract_pattern_refuses_inconclusive_zeros() {
    let mut b = Bundle::paper(3, &Rational::new(1, 10).unwrap(), 256).unwrap();
    let tiny = BigFloat::pow2(BigInt::from(-300));
    let straddle = FloatInterval::new(tiny.neg(), tiny, 256).unwrap();
    b.a.set(2, 5, straddle.clone());
    b.a.set(5, 2, straddle);
    let opts = VerifyOptions { max_precision_bits: 0, ..VerifyOptions::default() };
    let r = full_verify(&AnyBundle::Interval(b.clone()), &opts, &NoClock);
    assert_eq!(
        extract_pattern(&b.a, &r),
        Err(BoundsError::PatternNotCertified(Some(Verdict::Inconclusive)))
    );
}

fn certified_report(k: usize) -> CertificateReport {
    CertificateReport {
        k,
        mode: ScalarMode::SurrogateExact,
        claims: Vec::new(),
        symbolic: Vec::new(),
        inertia: None,
        precision_trace: Vec::new(),
        overall: Verdict::Certified,
    }
}

#[test]
fn bracket_examples() {
    let b9 = rank_bracket(&certified_report(9), None, None).unwrap();
    assert_eq!((b9.lower, b9.lower_source, b9.upper), (4, LowerSource::PairPattern, 18));
    assert!(b9.exhibits_gap());
    let b3 = rank_bracket(&certified_report(3), None, None).unwrap();
    assert_eq!((b3.lower, b3.lower_source), (3, LowerSource::LinearRank));
    assert!(!b3.exhibits_gap());
    assert_eq!(rank_bracket(&certified_report(16), None, None).unwrap().lower, 5);
}

#[test]
fn bracket_with_rectangle_cover_and_nmf() {
    let cover = rectangle_cover_lower_bound(&SupportPattern::pair_pattern(3), DEFAULT_NODE_BUDGET).unwrap();
    let b = rank_bracket(&certified_report(3), Some(&cover), Some((5, 1e-12))).unwrap();
    assert_eq!((b.lower, b.lower_source), (4, LowerSource::RectangleCover));
    assert_eq!(b.upper, 5);
    assert!(matches!(b.upper_source, UpperSource::NmfNumerical { .. }));
    assert!(b.exhibits_gap());
    assert_eq!(
        rank_bracket(&certified_report(3), Some(&cover), Some((3, 1e-12))),
        Err(BoundsError::Inconsistent { lower: 4, upper: 3 })
    );
}

#[test]
fn bracket_requires_certified_report() {
    let mut r = certified_report(3);
    r.overall = Verdict::Inconclusive;
    assert_eq!(rank_bracket(&r, None, None), Err(BoundsError::NotCertified(Verdict::Inconclusive)));
}

fn small_pattern() -> impl Strategy<Value = SupportPattern> {
    (1usize..=4, 1usize..=4, any::<u16>()).prop_map(|(n, m, bits)| {
        let zeros = (0..n * m).filter(|i| bits >> i & 1 == 1).map(|i| (i / m, i % m));
        SupportPattern::new(n, m, zeros).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn branch_and_bound_matches_brute_force(p in small_pattern()) {
        prop_assert_eq!(exact(&p), brute_force_cover(&p));
    }

    #[test]
    fn zero_with_support_on_both_sides_forces_two(p in small_pattern()) {
        let forced = p.zeros().any(|(r, c)| {
            (0..p.n_cols()).any(|j| p.is_support(r, j)) && (0..p.n_rows()).any(|i| p.is_support(i, c))
        });
        if forced {
            prop_assert!(exact(&p) >= 2);
        }
    }

    #[test]
    fn submatrix_cover_never_exceeds_whole(p in small_pattern(), rmask in 1u8..16, cmask in 1u8..16) {
        let rows: Vec<usize> = (0..p.n_rows()).filter(|i| rmask >> i & 1 == 1).collect();
        let cols: Vec<usize> = (0..p.n_cols()).filter(|i| cmask >> i & 1 == 1).collect();
        prop_assume!(!rows.is_empty() && !cols.is_empty());
        prop_assert!(exact(&p.submatrix(&rows, &cols)) <= exact(&p));
    }
}
