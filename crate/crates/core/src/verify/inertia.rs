use alloc::string::String;
use alloc::vec::Vec;

use super::{ClaimEntry, ClaimId, Verdict, VerifyScalar, Witness};
use crate::construction::Bundle;
use crate::scalar::{
    count_roots_with_multiplicity, Bound, FloatInterval, Matrix, Rational, Scalar, Sign, UniPoly,
};

/// Counts of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InertiaTriple {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

/// Root signs of a real-rooted monic cubic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CubicSigns {
    Decided { plus: usize, minus: usize, zero: usize },
    /// Some coefficient sign could not be certified.
    Undecided(String),
    /// Fewer than three real roots: impossible for the spectra handled
    /// here, so this signals an implementation bug.
    NonReal { plus: usize, minus: usize, zero: usize },
}

/// Coefficients `[c0, c1, c2, c3]` (ascending) of `det(λI - Λ BᵀB)`.
///
/// `Λ BᵀB` has the same nonzero eigenvalues as `B Λ Bᵀ`.
pub fn char_cubic<S: Scalar>(b: &Matrix<S>, lambda: &Matrix<i64>) -> [S; 4] {
    let one = b.get(0, 0).one_like();
    let zero = one.zero_like();
    let g = Matrix::from_fn(3, 3, |i, j| {
        (0..b.rows()).fold(zero.clone(), |acc, p| acc.add(&b.get(p, i).mul(b.get(p, j))))
    });
    let m = Matrix::from_fn(3, 3, |i, j| {
        (0..3).fold(zero.clone(), |acc, s| {
            let l = *lambda.get(i, s);
            let term = g.get(s, j).mul(&one.int_like(l));
            acc.add(&term)
        })
    });
    let e = |i: usize, j: usize| m.get(i, j);
    let trace = e(0, 0).add(e(1, 1)).add(e(2, 2));
    let minor2 = |i: usize, j: usize| e(i, i).mul(e(j, j)).sub(&e(i, j).mul(e(j, i)));
    let c2 = minor2(0, 1).add(&minor2(0, 2)).add(&minor2(1, 2));
    let det = e(0, 0)
        .mul(&e(1, 1).mul(e(2, 2)).sub(&e(1, 2).mul(e(2, 1))))
        .sub(&e(0, 1).mul(&e(1, 0).mul(e(2, 2)).sub(&e(1, 2).mul(e(2, 0)))))
        .add(&e(0, 2).mul(&e(1, 0).mul(e(2, 1)).sub(&e(1, 1).mul(e(2, 0)))));
    [det.neg(), c2, trace.neg(), one]
}

pub(crate) fn exact_cubic_signs(c: &[Rational; 4]) -> CubicSigns {
    let p = UniPoly::from_coeffs(c.to_vec());
    let zero = p.zero_root_multiplicity();
    let origin = Bound::Finite(Rational::zero());
    let plus = count_roots_with_multiplicity(&p, &origin, &Bound::PosInf).expect("monic cubic is nonzero");
    let nonpos = count_roots_with_multiplicity(&p, &Bound::NegInf, &origin).expect("monic cubic is nonzero");
    let minus = nonpos - zero;
    if plus + minus + zero == 3 {
        CubicSigns::Decided { plus, minus, zero }
    } else {
        CubicSigns::NonReal { plus, minus, zero }
    }
}

fn sign_variations(signs: &[Sign]) -> usize {
    let nz: Vec<Sign> = signs.iter().copied().filter(|s| *s != Sign::Zero).collect();
    nz.windows(2).filter(|w| w[0] != w[1]).count()
}

fn flip(s: Sign) -> Sign {
    match s {
        Sign::Positive => Sign::Negative,
        Sign::Negative => Sign::Positive,
        other => other,
    }
}

/// Sturm cross-checks are skipped above this total coefficient size.
const CROSS_CHECK_MAX_BITS: u64 = 8192;

/// Descartes' rule of signs, which is exact for real-rooted polynomials,
/// applied to certified coefficient signs; cross-checked by Sturm counts
/// on the cubic whose coefficients are the lower endpoints when those are
/// small enough.
pub(crate) fn interval_cubic_signs(c: &[FloatInterval; 4]) -> CubicSigns {
    let signs: Vec<Sign> = c.iter().map(FloatInterval::sign_certificate_or_zero).collect();
    if let Some(i) = signs.iter().position(|s| *s == Sign::Unknown) {
        return CubicSigns::Undecided(alloc::format!("sign of coefficient c{i} = {:?} is not certified", c[i]));
    }
    let descending: Vec<Sign> = signs.iter().rev().copied().collect();
    let reflected: Vec<Sign> = signs.iter().enumerate().rev().map(|(i, s)| if i % 2 == 1 { flip(*s) } else { *s }).collect();
    let zero = signs.iter().take_while(|s| **s == Sign::Zero).count();
    let plus = sign_variations(&descending);
    let minus = sign_variations(&reflected);
    let reps: Option<Vec<Rational>> = c.iter().map(FloatInterval::to_rational_lo).collect();
    let reps = reps.filter(|r| r.iter().map(Rational::size_bits).sum::<u64>() <= CROSS_CHECK_MAX_BITS);
    if let Some(r) = reps {
        let arr = [r[0].clone(), r[1].clone(), r[2].clone(), r[3].clone()];
        match exact_cubic_signs(&arr) {
            CubicSigns::Decided { plus: p2, minus: m2, zero: z2 } if (p2, m2, z2) == (plus, minus, zero) => {}
            other => {
                return CubicSigns::Undecided(alloc::format!(
                    "Descartes gives ({plus}, {minus}, {zero}) but the representative cubic gives {other:?}"
                ))
            }
        }
    }
    if plus + minus + zero == 3 {
        CubicSigns::Decided { plus, minus, zero }
    } else {
        CubicSigns::NonReal { plus, minus, zero }
    }
}

impl FloatInterval {
    /// Like `sign_certificate`, but the point zero is `Zero`.
    fn sign_certificate_or_zero(&self) -> Sign {
        if self.is_point_zero() {
            Sign::Zero
        } else {
            self.sign_certificate()
        }
    }
}

/// Inertia of `A` read off the characteristic cubic of `Λ BᵀB`.
pub fn inertia_from_cubic<S: VerifyScalar>(coeffs: &[S; 4], dim: usize) -> Result<InertiaTriple, String> {
    match S::cubic_signs(coeffs) {
        CubicSigns::Decided { plus, minus, .. } => {
            Ok(InertiaTriple { n_plus: plus, n_minus: minus, n_zero: dim.saturating_sub(plus + minus) })
        }
        CubicSigns::Undecided(why) => Err(why),
        CubicSigns::NonReal { plus, minus, zero } => {
            Err(alloc::format!("cubic has only {} real roots ({plus}+, {minus}-, {zero} zero)", plus + minus + zero))
        }
    }
}

/// Certifies the inertia `(2, 1, 2k - 3)`.
pub fn verify_inertia<S: VerifyScalar>(bundle: &Bundle<S>) -> (Option<InertiaTriple>, ClaimEntry) {
    let b = &bundle.b;
    let n = b.rows();
    if n == 0 || b.cols() != 3 {
        let e = ClaimEntry::new(ClaimId::Inertia, Verdict::Falsified, alloc::vec![Witness::Note("B is not 2k x 3".into())]);
        return (None, e);
    }
    let coeffs = char_cubic(b, &bundle.lambda);
    let rendered = alloc::format!(
        "det(λI - Λ BᵀB) coefficients (ascending): [{}, {}, {}, {}]",
        coeffs[0].render(),
        coeffs[1].render(),
        coeffs[2].render(),
        coeffs[3].render()
    );
    let nonreal = matches!(S::cubic_signs(&coeffs), CubicSigns::NonReal { .. });
    match inertia_from_cubic(&coeffs, n) {
        Ok(t) => {
            let expected = InertiaTriple { n_plus: 2, n_minus: 1, n_zero: n.saturating_sub(3) };
            let verdict = if t == expected && n >= 3 { Verdict::Certified } else { Verdict::Falsified };
            let note = alloc::format!("inertia ({}, {}, {})", t.n_plus, t.n_minus, t.n_zero);
            (Some(t), ClaimEntry::new(ClaimId::Inertia, verdict, alloc::vec![Witness::Note(note), Witness::Note(rendered)]))
        }
        Err(why) => {
            let verdict = if nonreal { Verdict::Falsified } else { Verdict::Inconclusive };
            (None, ClaimEntry::new(ClaimId::Inertia, verdict, alloc::vec![Witness::Note(why), Witness::Note(rendered)]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::build_lambda;

    fn identity3() -> Matrix<Rational> {
        Matrix::from_fn(3, 3, |i, j| Rational::from((i == j) as i64))
    }

    #[test]
    fn lambda_alone_has_inertia_two_one() {
        let c = char_cubic(&identity3(), &build_lambda());
        assert_eq!(c.to_vec(), [4, 0, -3, 1].iter().map(|&v| Rational::from(v)).collect::<Vec<_>>());
        let t = inertia_from_cubic(&c, 3).unwrap();
        assert_eq!(t, InertiaTriple { n_plus: 2, n_minus: 1, n_zero: 0 });
    }

    #[test]
    fn interval_route_agrees_on_lambda() {
        let b = identity3().map(|q| FloatInterval::from_rational(q, 64));
        let c = char_cubic(&b, &build_lambda());
        let t = inertia_from_cubic(&c, 3).unwrap();
        assert_eq!(t, InertiaTriple { n_plus: 2, n_minus: 1, n_zero: 0 });
    }

    #[test]
    fn descartes_sign_variations() {
        use Sign::*;
        assert_eq!(sign_variations(&[Positive, Negative, Zero, Positive]), 2);
        assert_eq!(sign_variations(&[Positive, Positive]), 0);
    }

    #[test]
    fn wide_coefficients_are_undecided() {
        use crate::scalar::BigFloat;
        let wide = FloatInterval::new(BigFloat::from_i64(-1), BigFloat::from_i64(1), 64).unwrap();
        let one = FloatInterval::from_i64(1, 64);
        let c = [wide.clone(), one.clone(), wide, one];
        assert!(matches!(interval_cubic_signs(&c), CubicSigns::Undecided(_)));
    }
}
