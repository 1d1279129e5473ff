//! Outward-rounded `exp` for big-float intervals with unbounded exponents.
//!
//! `e^x = 2^n * e^r` with `n = round(x / ln 2)` and `|r| <= ln 2 / 2`. The
//! reduction is done in fixed point with `ln 2` bracketed to
//! `log2|x| + p + guard` bits, so the result keeps its full relative
//! precision however large `|x|` is, and the exponent `n` is an
//! arbitrary-size integer. `e^r` is then bracketed by two fixed-point
//! evaluations (floors for the lower bound, ceilings for the upper bound)
//! of a Taylor series after `s` halvings, followed by `s` squarings.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{BigFloat, FloatInterval, Round, ScalarError};

const GUARD_BITS: u64 = 64;

/// Largest `floor(log2 |x|)` for which `exp` performs a full argument
/// reduction at precision `prec`. Beyond it, negative arguments collapse to
/// `[0, 2^(-2^budget)]` and positive ones overflow.
pub fn exp_exponent_budget(prec: u64) -> u64 {
    (4 * prec).max(1 << 16)
}

fn atanh_recip_bounds(n: u32, w: u64) -> (BigUint, BigUint) {
    let n = BigUint::from(n);
    let n2 = &n * &n;
    let mut power = (BigUint::one() << w) / &n;
    let mut sum = BigUint::zero();
    let mut terms: u64 = 0;
    let mut j: u64 = 0;
    while !power.is_zero() {
        sum += &power / BigUint::from(2 * j + 1);
        power /= &n2;
        j += 1;
        terms += 1;
    }
    // each term is low by < 3 ulps and the dropped tail is < 3 ulps
    let hi = &sum + BigUint::from(3 * (terms + 1));
    (sum, hi)
}

/// Fixed-point bracket of ln 2: `lo <= ln(2) * 2^w <= hi`.
///
/// Uses `ln 2 = 18 atanh(1/26) - 2 atanh(1/4801) + 8 atanh(1/8749)`.
pub fn ln2_bounds(w: u64) -> (BigUint, BigUint) {
    let extra = 12 + u64::from(64 - w.leading_zeros());
    let wx = w + extra;
    let (a_lo, a_hi) = atanh_recip_bounds(26, wx);
    let (b_lo, b_hi) = atanh_recip_bounds(4801, wx);
    let (c_lo, c_hi) = atanh_recip_bounds(8749, wx);
    let lo = 18u32 * a_lo + 8u32 * c_lo - 2u32 * b_hi;
    let hi = 18u32 * a_hi + 8u32 * c_hi - 2u32 * b_lo;
    (lo >> extra, ceil_shift_u(&hi, extra))
}

fn ceil_shift_u(x: &BigUint, s: u64) -> BigUint {
    let q = x >> s;
    if (&q << s) == *x {
        q
    } else {
        q + 1u32
    }
}

fn floor_shift(x: &BigInt, s: u64) -> BigInt {
    x >> s
}

fn ceil_shift(x: &BigInt, s: u64) -> BigInt {
    -((-x) >> s)
}

fn mul_shift(a: &BigUint, b: &BigUint, s: u64, dir: Round) -> BigUint {
    let p = a * b;
    match dir {
        Round::Down => p >> s,
        Round::Up => ceil_shift_u(&p, s),
    }
}

fn div_small(a: BigUint, d: u64, dir: Round) -> BigUint {
    let (q, r) = a.div_rem(&BigUint::from(d));
    if dir == Round::Up && !r.is_zero() {
        q + 1u32
    } else {
        q
    }
}

/// Bound on `e^(r * 2^-w) * 2^w` for `r >= 0` with `r * 2^-w < 1`.
fn exp_fixed_nonneg(r: &BigUint, w: u64, dir: Round) -> BigUint {
    let s = (num_integer::sqrt(w) / 2).max(8);
    let ww = w + s + 16;
    let one = BigUint::one() << ww;
    let x = r << 16u32;
    let mut sum = one.clone();
    let mut term = one;
    let mut j: u64 = 1;
    loop {
        term = div_small(mul_shift(&term, &x, ww, dir), j, dir);
        match dir {
            Round::Down => {
                if term.is_zero() {
                    break;
                }
                sum += &term;
            }
            Round::Up => {
                sum += &term;
                // remaining tail is at most the last term (x < 1/2)
                if term <= BigUint::one() {
                    sum += 1u32;
                    break;
                }
            }
        }
        j += 1;
    }
    for _ in 0..s {
        sum = mul_shift(&sum, &sum, ww, dir);
    }
    match dir {
        Round::Down => sum >> (ww - w),
        Round::Up => ceil_shift_u(&sum, ww - w),
    }
}

/// Bound on `e^(r * 2^-w) * 2^w` for `|r| * 2^-w < 1`.
fn exp_fixed(r: &BigInt, w: u64, dir: Round) -> BigUint {
    if !r.is_negative() {
        return exp_fixed_nonneg(r.magnitude(), w, dir);
    }
    let z = exp_fixed_nonneg(r.magnitude(), w, dir.flip());
    let (q, rem) = (BigUint::one() << (2 * w)).div_rem(&z);
    if dir == Round::Up && !rem.is_zero() {
        q + 1u32
    } else {
        q
    }
}

/// Cache for the ln 2 bracket, reused by both endpoints of an interval.
#[derive(Default)]
struct Ln2Cache {
    w: u64,
    lo: BigUint,
    hi: BigUint,
}

impl Ln2Cache {
    fn get(&mut self, w: u64) -> (BigUint, BigUint) {
        if self.w < w || self.lo.is_zero() {
            let (lo, hi) = ln2_bounds(w);
            self.w = w;
            self.lo = lo;
            self.hi = hi;
        }
        let d = self.w - w;
        (&self.lo >> d, ceil_shift_u(&self.hi, d))
    }
}

fn exp_bound(x: &BigFloat, prec: u64, dir: Round, ln2: &mut Ln2Cache) -> Result<BigFloat, ScalarError> {
    let Some(t) = x.top() else {
        return Ok(BigFloat::one());
    };
    if t < BigInt::from(-(prec as i64) - 8) {
        // |x| far below one ulp of 1: 1 + x <= e^x <= 1 + 2x (x > 0) or 1 + x/2 (x < 0)
        let one = BigFloat::one();
        return Ok(match (dir, x.is_negative()) {
            (Round::Down, _) => BigFloat::add(&one, x, prec, Round::Down),
            (Round::Up, false) => BigFloat::add(&one, &x.mul_pow2(&BigInt::one()), prec, Round::Up),
            (Round::Up, true) => BigFloat::add(&one, &x.mul_pow2(&BigInt::from(-1)), prec, Round::Up),
        });
    }
    let budget = exp_exponent_budget(prec);
    if t > BigInt::from(budget) {
        if !x.is_negative() {
            return Err(ScalarError::ExpOverflow);
        }
        // x <= -2^budget, so e^x <= 2^(-2^budget)
        return Ok(match dir {
            Round::Down => BigFloat::zero(),
            Round::Up => BigFloat::pow2(-(BigInt::one() << budget)),
        });
    }
    let t_pos = t.to_i64().unwrap().max(0) as u64;
    let w = t_pos + prec + GUARD_BITS;
    let (xf, exact) = x.to_fixed_floor(w);
    let x_hi = if exact { xf.clone() } else { &xf + 1 };
    let x_lo = xf;
    let (l_lo, l_hi) = ln2.get(w);
    let (l_lo, l_hi) = (BigInt::from(l_lo), BigInt::from(l_hi));
    // nearest integer to x / ln 2
    let n = {
        let twice = (&x_lo << 1u32) + &l_lo;
        twice.div_floor(&(&l_lo << 1u32))
    };
    let (nl_min, nl_max) = if n.is_negative() { (&n * &l_hi, &n * &l_lo) } else { (&n * &l_lo, &n * &l_hi) };
    let r_lo = &x_lo - nl_max;
    let r_hi = &x_hi - nl_min;
    let w2 = prec + GUARD_BITS;
    let drop = w - w2;
    let r = match dir {
        Round::Down => floor_shift(&r_lo, drop),
        Round::Up => ceil_shift(&r_hi, drop),
    };
    let y = exp_fixed(&r, w2, dir);
    Ok(BigFloat::from_parts(false, y, n - BigInt::from(w2)).round_to(prec, dir))
}

/// Interval containing `e^x` for every `x` in the input, with `prec`-bit
/// endpoints.
pub fn interval_exp(x: &FloatInterval, prec: u64) -> Result<FloatInterval, ScalarError> {
    let prec = prec.max(super::interval::MIN_PRECISION);
    let mut cache = Ln2Cache::default();
    let lo = exp_bound(x.lo(), prec, Round::Down, &mut cache)?;
    let hi = exp_bound(x.hi(), prec, Round::Up, &mut cache)?;
    FloatInterval::new(lo, hi, prec)
}
