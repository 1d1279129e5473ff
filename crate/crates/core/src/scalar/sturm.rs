use alloc::vec::Vec;

use super::{Rational, ScalarError, Sign, UniPoly};

/// End point of a root-counting interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl From<Rational> for Bound {
    fn from(q: Rational) -> Self {
        Bound::Finite(q)
    }
}

/// Sturm chain `p0 = sqfree(p), p1 = p0', p_{i+1} = -rem(p_{i-1}, p_i)`.
pub fn sturm_sequence(p: &UniPoly) -> Result<Vec<UniPoly>, ScalarError> {
    let p0 = p.square_free_part()?;
    let mut seq = alloc::vec![p0.clone(), p0.derivative()];
    loop {
        let n = seq.len();
        if seq[n - 1].is_zero() {
            seq.pop();
            break;
        }
        let r = seq[n - 2].rem(&seq[n - 1])?;
        if r.is_zero() {
            break;
        }
        seq.push(r.neg());
    }
    Ok(seq)
}

fn sign_at(p: &UniPoly, at: &Bound) -> Sign {
    let s = match at {
        Bound::Finite(x) => return p.eval(x).signum(),
        Bound::PosInf => p.leading().map(Rational::signum),
        Bound::NegInf => p.leading().map(|l| {
            let s = l.signum();
            if p.degree().unwrap() % 2 == 1 {
                match s {
                    Sign::Positive => Sign::Negative,
                    Sign::Negative => Sign::Positive,
                    other => other,
                }
            } else {
                s
            }
        }),
    };
    s.unwrap_or(Sign::Zero)
}

fn variations(seq: &[UniPoly], at: &Bound) -> usize {
    let mut count = 0;
    let mut last: Option<Sign> = None;
    for p in seq {
        let s = sign_at(p, at);
        if s == Sign::Zero {
            continue;
        }
        if let Some(l) = last {
            if l != s {
                count += 1;
            }
        }
        last = Some(s);
    }
    count
}

fn ordered(a: &Bound, b: &Bound) -> bool {
    match (a, b) {
        (Bound::NegInf, Bound::NegInf) | (Bound::PosInf, _) | (_, Bound::NegInf) => false,
        (Bound::NegInf, _) | (_, Bound::PosInf) => true,
        (Bound::Finite(x), Bound::Finite(y)) => x < y,
    }
}

/// Number of distinct real roots of `p` in `(a, b]`.
pub fn sturm_count_roots(p: &UniPoly, a: &Bound, b: &Bound) -> Result<usize, ScalarError> {
    let seq = sturm_sequence(p)?;
    if !ordered(a, b) {
        return Ok(0);
    }
    Ok(variations(&seq, a).saturating_sub(variations(&seq, b)))
}

/// Number of real roots of `p` in `(a, b]` counted with multiplicity:
/// the sum of distinct-root counts over `g0 = p, g_{j+1} = gcd(g_j, g_j')`.
pub fn count_roots_with_multiplicity(p: &UniPoly, a: &Bound, b: &Bound) -> Result<usize, ScalarError> {
    if p.is_zero() {
        return Err(ScalarError::ZeroPolynomial);
    }
    let mut total = 0;
    let mut g = p.clone();
    while !g.is_constant() {
        total += sturm_count_roots(&g, a, b)?;
        g = g.gcd(&g.derivative());
    }
    Ok(total)
}
