//! Exact integer and rational combinatorics, plus logarithms of exact ratios
//! that stay accurate when the operands have far more bits than an `f64`
//! exponent can represent.

use std::f64::consts::LN_2;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type ExactInt = BigInt;
pub type ExactRatio = BigRational;

/// Product of the integers `lo..=hi` by binary splitting, so that the large
/// multiplications are balanced.
pub fn range_product(lo: u64, hi: u64) -> BigUint {
    if lo > hi {
        return BigUint::one();
    }
    if hi - lo < 16 {
        let mut acc = BigUint::one();
        let mut word: u64 = 1;
        for k in lo..=hi {
            match word.checked_mul(k) {
                Some(w) => word = w,
                None => {
                    acc *= word;
                    word = k;
                }
            }
        }
        return acc * word;
    }
    let mid = lo + (hi - lo) / 2;
    range_product(lo, mid) * range_product(mid + 1, hi)
}

pub fn factorial(k: u64) -> ExactInt {
    BigInt::from(range_product(2, k))
}

/// Binomial coefficient C(a, b), zero when `b` lies outside `0..=a`.
pub fn binomial(a: u64, b: i64) -> ExactInt {
    BigInt::from(binomial_unsigned(a, b))
}

pub(crate) fn binomial_unsigned(a: u64, b: i64) -> BigUint {
    if b < 0 || b as u64 > a {
        return BigUint::zero();
    }
    let k = (b as u64).min(a - b as u64);
    if k < 48 {
        let mut acc = BigUint::one();
        for i in 1..=k {
            acc *= a - k + i;
            acc /= i;
        }
        acc
    } else {
        range_product(a - k + 1, a) / range_product(2, k)
    }
}

/// Top 64 bits of `x` and the number of bits shifted away.
fn leading_bits(x: &BigUint) -> (u64, u64) {
    let bits = x.bits();
    if bits <= 64 {
        (x.to_u64().unwrap_or(0), 0)
    } else {
        let shift = bits - 64;
        ((x >> shift).to_u64().unwrap_or(u64::MAX), shift)
    }
}

/// `x * 2^k` without intermediate overflow or premature underflow.
fn scale_by_pow2(mut x: f64, mut k: i64) -> f64 {
    while k > 1000 {
        x *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        x *= 2f64.powi(-1000);
        k += 1000;
    }
    x * 2f64.powi(k as i32)
}

/// `num / den` as an `f64`, for unsigned big integers of any size.
pub(crate) fn quotient_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let (a, sa) = leading_bits(num);
    let (b, sb) = leading_bits(den);
    scale_by_pow2(a as f64 / b as f64, sa as i64 - sb as i64)
}

/// Natural log of `num / den` for positive big integers.
///
/// The ratio is written as `2^e (1 + y)` with `1 + y` in `[0.75, 1.5)`; `y`
/// is formed from an exact big-integer difference, so the result keeps full
/// relative precision both for huge operands and for ratios close to one.
pub fn ln_quotient(num: &BigUint, den: &BigUint) -> Result<f64> {
    if num.is_zero() || den.is_zero() {
        return Err(Error::NonPositiveLog);
    }
    let bit_gap = num.bits() as i64 - den.bits() as i64;
    let (a, _) = leading_bits(num);
    let (b, _) = leading_bits(den);
    // mantissas normalised to [0.5, 1)
    let ma = a as f64 / 2f64.powi(64 - a.leading_zeros() as i32);
    let mb = b as f64 / 2f64.powi(64 - b.leading_zeros() as i32);
    let q = ma / mb;
    let exponent = if q >= 1.5 {
        bit_gap + 1
    } else if q < 0.75 {
        bit_gap - 1
    } else {
        bit_gap
    };
    let (scaled_num, scaled_den) = if exponent >= 0 {
        (BigInt::from(num.clone()), BigInt::from(den << exponent as u64))
    } else {
        (BigInt::from(num << (-exponent) as u64), BigInt::from(den.clone()))
    };
    let diff = &scaled_num - &scaled_den;
    let y = match diff.sign() {
        Sign::NoSign => 0.0,
        Sign::Plus => quotient_to_f64(diff.magnitude(), scaled_den.magnitude()),
        Sign::Minus => -quotient_to_f64(diff.magnitude(), scaled_den.magnitude()),
    };
    Ok(y.ln_1p() + exponent as f64 * LN_2)
}

/// Natural log of a positive big integer.
pub fn ln_int(x: &BigInt) -> Result<f64> {
    if !x.is_positive() {
        return Err(Error::NonPositiveLog);
    }
    ln_quotient(x.magnitude(), &BigUint::one())
}

pub fn ln_ratio(r: &ExactRatio) -> Result<f64> {
    if !r.is_positive() {
        return Err(Error::NonPositiveLog);
    }
    ln_quotient(r.numer().magnitude(), r.denom().magnitude())
}

pub fn ratio_to_f64(r: &ExactRatio) -> f64 {
    let magnitude = quotient_to_f64(r.numer().magnitude(), r.denom().magnitude());
    if r.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// Compensated (Neumaier) summation.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Shannon entropy in nats of an exactly normalised distribution.
pub fn shannon_entropy(p: &[ExactRatio]) -> Result<f64> {
    let mut sum = BigRational::zero();
    for x in p {
        if x.is_negative() {
            return Err(Error::NegativeProbability(x.to_string()));
        }
        sum += x;
    }
    if !sum.is_one() {
        return Err(Error::NotNormalized {
            sum: sum.to_string(),
        });
    }
    let mut terms = Vec::with_capacity(p.len());
    for x in p.iter().filter(|x| !x.is_zero()) {
        terms.push(-ratio_to_f64(x) * ln_ratio(x)?);
    }
    Ok(compensated_sum(terms))
}

/// Shannon entropy of the distribution `weights / Σ weights` given as
/// non-negative integer weights over a common denominator.
pub fn shannon_entropy_weights(weights: &[BigUint]) -> Result<f64> {
    let total: BigUint = weights.iter().sum();
    if total.is_zero() {
        return Err(Error::NotNormalized { sum: "0".into() });
    }
    let mut terms = Vec::with_capacity(weights.len());
    for w in weights.iter().filter(|w| !w.is_zero()) {
        terms.push(-quotient_to_f64(w, &total) * ln_quotient(w, &total)?);
    }
    Ok(compensated_sum(terms))
}

/// Reduces `num / den` to lowest terms as an [`ExactRatio`].
pub fn exact_ratio(num: &BigUint, den: &BigUint) -> ExactRatio {
    let g = num.gcd(den);
    BigRational::new_raw(BigInt::from(num / &g), BigInt::from(den / &g))
}
