use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{BigFloat, FloatInterval, Matrix, Rational, Round, ScalarError, Sign};

pub const DEFAULT_EXACT_DET_LIMIT: usize = 32;

/// Largest size for which the interval fallback expands by cofactors
/// instead of using the row-norm product bound.
const EXPANSION_LIMIT: usize = 5;

fn check_square<T>(m: &Matrix<T>, limit: usize) -> Result<(), ScalarError> {
    if !m.is_square() {
        return Err(ScalarError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if m.rows() > limit {
        return Err(ScalarError::TooLarge { n: m.rows(), limit });
    }
    Ok(())
}

/// Fraction-free elimination on the row-integerized matrix. Returns the
/// integer determinant of the scaled matrix and the product of the row
/// scale factors (always positive).
fn bareiss(m: &Matrix<Rational>) -> (BigInt, BigInt) {
    let n = m.rows();
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = m
        .iter_rows()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            scale *= &l;
            row.iter().map(|q| q.numer() * (&l / q.denom())).collect()
        })
        .collect();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return (BigInt::zero(), scale);
        };
        if p != k {
            a.swap(p, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = if n == 0 { BigInt::one() } else { a[n - 1][n - 1].clone() };
    (if negate { -det } else { det }, scale)
}

/// Exact determinant of a rational matrix of size at most `limit`.
pub fn exact_determinant_with_limit(m: &Matrix<Rational>, limit: usize) -> Result<Rational, ScalarError> {
    check_square(m, limit)?;
    let (det, scale) = bareiss(m);
    Rational::new(det, scale)
}

pub fn exact_determinant(m: &Matrix<Rational>) -> Result<Rational, ScalarError> {
    exact_determinant_with_limit(m, DEFAULT_EXACT_DET_LIMIT)
}

/// Sign of the exact determinant without forming the reduced fraction.
pub fn exact_determinant_sign(m: &Matrix<Rational>) -> Result<Sign, ScalarError> {
    check_square(m, DEFAULT_EXACT_DET_LIMIT)?;
    let (det, _) = bareiss(m);
    Ok(match det.sign() {
        num_bigint::Sign::Plus => Sign::Positive,
        num_bigint::Sign::Minus => Sign::Negative,
        num_bigint::Sign::NoSign => Sign::Zero,
    })
}

fn mignitude(x: &FloatInterval) -> Option<BigFloat> {
    match x.sign_certificate() {
        Sign::Positive => Some(x.lo().clone()),
        Sign::Negative => Some(x.hi().neg()),
        _ => None,
    }
}

fn magnitude(x: &FloatInterval) -> BigFloat {
    BigFloat::max(&x.lo().abs(), &x.hi().abs()).clone()
}

fn working_precision(m: &Matrix<FloatInterval>) -> u64 {
    m.iter_rows().flatten().map(FloatInterval::precision_bits).max().unwrap_or(super::interval::MIN_PRECISION)
}

fn eliminate(m: &Matrix<FloatInterval>) -> Option<FloatInterval> {
    let n = m.rows();
    let mut a = m.to_rows();
    let mut det: Option<FloatInterval> = None;
    let mut negate = false;
    for k in 0..n {
        let (p, _) = (k..n)
            .filter_map(|r| mignitude(&a[r][k]).map(|g| (r, g)))
            .max_by(|x, y| x.1.cmp(&y.1))?;
        if p != k {
            a.swap(p, k);
            negate = !negate;
        }
        let pivot = a[k][k].clone();
        for i in k + 1..n {
            let f = a[i][k].div(&pivot).ok()?;
            for j in k + 1..n {
                a[i][j] = a[i][j].sub(&f.mul(&a[k][j]));
            }
        }
        det = Some(match det {
            None => pivot,
            Some(d) => d.mul(&pivot),
        });
    }
    let det = det?;
    Some(if negate { det.neg() } else { det })
}

fn cofactor_expansion(m: &Matrix<FloatInterval>, prec: u64) -> FloatInterval {
    let n = m.rows();
    if n == 1 {
        return m.get(0, 0).clone();
    }
    let mut acc = FloatInterval::zero(prec);
    for j in 0..n {
        let entry = m.get(0, j);
        if entry.is_point_zero() {
            continue;
        }
        let rest: Vec<usize> = (0..n).filter(|&c| c != j).collect();
        let rows: Vec<usize> = (1..n).collect();
        let term = entry.mul(&cofactor_expansion(&m.select(&rows, &rest), prec));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// `|det| <= prod_i sum_j |a_ij|`.
fn row_norm_bound(m: &Matrix<FloatInterval>, prec: u64) -> FloatInterval {
    let mut bound = BigFloat::one();
    for row in m.iter_rows() {
        let mut s = BigFloat::zero();
        for x in row {
            s = BigFloat::add(&s, &magnitude(x), prec, Round::Up);
        }
        bound = BigFloat::mul(&bound, &s, prec, Round::Up);
    }
    FloatInterval::new(bound.neg(), bound, prec).expect("symmetric bound is ordered")
}

/// Enclosure of the determinant of an interval matrix: elimination with
/// mignitude pivoting; if no pivot excludes zero, cofactor expansion for
/// small sizes or the row-norm product bound otherwise.
pub fn interval_determinant(m: &Matrix<FloatInterval>) -> Result<FloatInterval, ScalarError> {
    check_square(m, usize::MAX)?;
    let prec = working_precision(m);
    if m.rows() == 0 {
        return Ok(FloatInterval::from_i64(1, prec));
    }
    if let Some(d) = eliminate(m) {
        return Ok(d);
    }
    if m.rows() <= EXPANSION_LIMIT {
        Ok(cofactor_expansion(m, prec))
    } else {
        Ok(row_norm_bound(m, prec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use alloc::vec;
    use proptest::prelude::*;

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| Rational::from(v)).collect()).collect()).unwrap()
    }

    fn to_interval(m: &Matrix<Rational>, prec: u64) -> Matrix<FloatInterval> {
        m.map(|x| FloatInterval::from_rational(x, prec))
    }

    /// Independent oracle: Leibniz formula over all permutations.
    fn leibniz(m: &Matrix<Rational>) -> Rational {
        fn perms(n: usize) -> Vec<(Vec<usize>, bool)> {
            if n == 0 {
                return vec![(vec![], false)];
            }
            let mut out = Vec::new();
            for (p, odd) in perms(n - 1) {
                for pos in 0..=p.len() {
                    let mut np = p.clone();
                    np.insert(pos, n - 1);
                    let swaps = p.len() - pos;
                    out.push((np, odd ^ (swaps % 2 == 1)));
                }
            }
            out
        }
        let mut acc = Rational::zero();
        for (p, odd) in perms(m.rows()) {
            let mut t = Rational::one();
            for (i, &j) in p.iter().enumerate() {
                t = &t * m.get(i, j);
            }
            acc = if odd { &acc - &t } else { &acc + &t };
        }
        acc
    }

    #[test]
    fn lambda_determinant() {
        let lambda = q(&[&[1, 1, 1], &[1, 1, -1], &[1, -1, 1]]);
        assert_eq!(exact_determinant(&lambda).unwrap(), Rational::from(-4));
        assert_eq!(exact_determinant_sign(&lambda).unwrap(), Sign::Negative);
        let iv = interval_determinant(&to_interval(&lambda, 64)).unwrap();
        assert!(iv.contains_rational(&Rational::from(-4)));
        assert_eq!(iv.sign_certificate(), Sign::Negative);
    }

    #[test]
    fn identical_rows() {
        let m = q(&[&[1, 2, 3], &[1, 2, 3], &[4, 5, 7]]);
        assert_eq!(exact_determinant(&m).unwrap(), Rational::zero());
        assert_eq!(exact_determinant_sign(&m).unwrap(), Sign::Zero);
        let iv = interval_determinant(&to_interval(&m, 64)).unwrap();
        assert!(iv.contains_zero());
    }

    #[test]
    fn shape_and_limit_errors() {
        let m = q(&[&[1, 2, 3], &[4, 5, 6]]);
        assert_eq!(exact_determinant(&m), Err(ScalarError::NotSquare { rows: 2, cols: 3 }));
        let big = Matrix::from_fn(4, 4, |i, j| Rational::from((i == j) as i64));
        assert_eq!(exact_determinant_with_limit(&big, 3), Err(ScalarError::TooLarge { n: 4, limit: 3 }));
        assert!(interval_determinant(&to_interval(&m, 64)).is_err());
    }

    #[test]
    fn rational_entries() {
        let m = Matrix::from_rows(vec![
            vec![Rational::new(1, 2).unwrap(), Rational::new(1, 3).unwrap()],
            vec![Rational::new(1, 5).unwrap(), Rational::new(1, 7).unwrap()],
        ])
        .unwrap();
        assert_eq!(exact_determinant(&m).unwrap(), Rational::new(1, 210).unwrap());
    }

    #[test]
    fn straddling_pivots_fall_back() {
        let prec = 64;
        let fuzzy = FloatInterval::new(BigFloat::from_i64(-1), BigFloat::from_i64(1), prec).unwrap();
        let one = FloatInterval::from_i64(1, prec);
        let m = Matrix::from_fn(2, 2, |i, j| if i == j { fuzzy.clone() } else { one.clone() });
        let d = interval_determinant(&m).unwrap();
        // fuzzy^2 - 1 covers [-2, 0]
        assert!(d.contains_rational(&Rational::from(-2)) && d.contains_zero());
        let m6 = Matrix::from_fn(6, 6, |_, _| fuzzy.clone());
        let d6 = interval_determinant(&m6).unwrap();
        assert!(d6.contains_zero());
        assert_eq!(d6.sign_certificate(), Sign::Unknown);
    }

    proptest! {
        #[test]
        fn bareiss_matches_leibniz(n in 1usize..=5, seed in proptest::collection::vec((-20i64..=20, 1i64..=6), 25)) {
            let m = Matrix::from_fn(n, n, |i, j| {
                let (a, b) = seed[i * 5 + j];
                Rational::new(a, b).unwrap()
            });
            let exact = exact_determinant(&m).unwrap();
            prop_assert_eq!(&exact, &leibniz(&m));
            let iv = interval_determinant(&to_interval(&m, 80)).unwrap();
            prop_assert!(iv.contains_rational(&exact));
            prop_assert_eq!(exact_determinant_sign(&m).unwrap(), exact.sign());
        }
    }
}
