//! Angular-momentum bookkeeping: half-integer labels, squared Clebsch–Gordan
//! coefficients and the distribution of total spin `J` produced when a block
//! of `n` spin-up particles is coupled to a block of `m` particles whose spins
//! are either down (orthogonal) or tilted by an angle `theta`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{
    binomial_unsigned, compensated_sum, exact_ratio, ln_int, quotient_to_f64, ratio_to_f64,
    shannon_entropy_weights, ExactRatio,
};

/// A quantum number stored as twice its value, so `J = 3/2` is `HalfInt(3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const fn from_twice(twice_value: i64) -> Self {
        HalfInt(twice_value)
    }

    pub const fn from_int(value: i64) -> Self {
        HalfInt(2 * value)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// `2J + 1`, the multiplicity of a spin-`J` multiplet.
    pub const fn multiplicity(self) -> i64 {
        self.0 + 1
    }

    /// `J(J + 1)` as an exact rational.
    pub fn casimir(self) -> BigRational {
        BigRational::new(BigInt::from(self.0 * (self.0 + 2)), BigInt::from(4))
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Relative angle of the right-hand spins, `|↗⟩ = cos(θ/2)|↑⟩ + sin(θ/2)|↓⟩`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SpinAngle(f64);

impl SpinAngle {
    pub const IDENTICAL: SpinAngle = SpinAngle(0.0);
    pub const ORTHOGONAL: SpinAngle = SpinAngle(std::f64::consts::PI);

    pub fn new(theta: f64) -> Result<Self> {
        if (0.0..=std::f64::consts::PI).contains(&theta) {
            Ok(SpinAngle(theta))
        } else {
            Err(Error::InvalidArgument(format!(
                "spin angle {theta} outside [0, pi]"
            )))
        }
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// `sin²(θ/2)`, the probability that a tilted spin reads as down.
    pub fn flip_probability(self) -> f64 {
        let s = (self.0 / 2.0).sin();
        s * s
    }
}

/// Exact distribution over total spin `J` for the orthogonal-spin initial
/// state, held as integer weights over one common denominator.
///
/// Entries run from `J = N/2` down to `J = |n - m|/2` in unit steps; smaller
/// `J` have zero weight and are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorDistribution {
    n: u64,
    m: u64,
    entries: Vec<(HalfInt, BigUint)>,
    denominator: BigUint,
}

impl SectorDistribution {
    pub fn particles(&self) -> u64 {
        self.n + self.m
    }

    pub fn counts(&self) -> (u64, u64) {
        (self.n, self.m)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn j_values(&self) -> impl Iterator<Item = HalfInt> + '_ {
        self.entries.iter().map(|(j, _)| *j)
    }

    /// Unnormalised integer weights; `weight / denominator` is `p_J`.
    pub fn weights(&self) -> impl Iterator<Item = (HalfInt, &BigUint)> + '_ {
        self.entries.iter().map(|(j, w)| (*j, w))
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    /// `p_J` in lowest terms; zero for a `J` outside the support.
    pub fn probability(&self, j: HalfInt) -> ExactRatio {
        self.entries
            .iter()
            .find(|(jj, _)| *jj == j)
            .map(|(_, w)| exact_ratio(w, &self.denominator))
            .unwrap_or_else(BigRational::zero)
    }

    pub fn probabilities(&self) -> Vec<(HalfInt, ExactRatio)> {
        self.entries
            .iter()
            .map(|(j, w)| (*j, exact_ratio(w, &self.denominator)))
            .collect()
    }

    pub fn probabilities_f64(&self) -> Vec<(HalfInt, f64)> {
        self.entries
            .iter()
            .map(|(j, w)| (*j, quotient_to_f64(w, &self.denominator)))
            .collect()
    }

    /// Exact check that the weights add up to the denominator.
    pub fn is_normalized(&self) -> bool {
        let total: BigUint = self.entries.iter().map(|(_, w)| w).sum();
        total == self.denominator
    }

    pub fn shannon_entropy(&self) -> f64 {
        let weights: Vec<BigUint> = self.entries.iter().map(|(_, w)| w.clone()).collect();
        // weights are positive and sum to the denominator by construction
        shannon_entropy_weights(&weights).unwrap_or(0.0)
    }

    /// `Σ_J p_J f(J)` evaluated in double precision with exact weights.
    pub fn expectation(&self, mut f: impl FnMut(HalfInt) -> f64) -> f64 {
        compensated_sum(
            self.entries
                .iter()
                .map(|(j, w)| quotient_to_f64(w, &self.denominator) * f(*j)),
        )
    }

    /// `Σ_J p_J f(J)` for an exact rational observable.
    pub fn expectation_exact(&self, mut f: impl FnMut(HalfInt) -> BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (j, w) in &self.entries {
            acc += f(*j) * BigRational::from_integer(BigInt::from(w.clone()));
        }
        acc / BigRational::from_integer(BigInt::from(self.denominator.clone()))
    }
}

/// Sector distribution `p_J = (2J+1) n! m! / ((N/2+J+1)! (N/2-J)!)` for `n`
/// spins up coupled to `m` spins down.
///
/// With `k = N/2 - J` this is `(2J+1) C(N+1, k) / ((N+1) C(N, n))`, which is
/// what is stored.
pub fn pj_orthogonal(n: u64, m: u64) -> Result<SectorDistribution> {
    if n + m == 0 {
        return Err(Error::EmptySystem);
    }
    let total = n + m;
    let mut entries = Vec::with_capacity(n.min(m) as usize + 1);
    let mut row = BigUint::one();
    for k in 0..=n.min(m) {
        let multiplicity = total - 2 * k + 1;
        entries.push((
            HalfInt::from_twice((total - 2 * k) as i64),
            &row * multiplicity,
        ));
        row *= total + 1 - k;
        row /= k + 1;
    }
    let denominator = binomial_unsigned(total, n as i64) * (total + 1);
    Ok(SectorDistribution {
        n,
        m,
        entries,
        denominator,
    })
}

fn is_valid_projection(j: HalfInt, m: HalfInt) -> bool {
    j.twice() >= 0 && m.twice().abs() <= j.twice() && (j.twice() - m.twice()) % 2 == 0
}

/// `|⟨j1 m1; j2 m2 | J M⟩|²` from Racah's closed form.
///
/// The coefficient is `S · sqrt(P)` with `S` a signed rational sum and `P` a
/// rational prefactor, so the square `S² P` is exact. Any invalid label or
/// forbidden coupling gives zero.
pub fn cg_squared(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> ExactRatio {
    if !is_valid_projection(j1, m1) || !is_valid_projection(j2, m2) || !is_valid_projection(j, m)
    {
        return BigRational::zero();
    }
    if m1.twice() + m2.twice() != m.twice() {
        return BigRational::zero();
    }
    let (tj1, tj2, tj) = (j1.twice(), j2.twice(), j.twice());
    if (tj1 + tj2 + tj) % 2 != 0 || tj < (tj1 - tj2).abs() || tj > tj1 + tj2 {
        return BigRational::zero();
    }
    // all of these are integers once the triangle and parity checks pass
    let a = (tj1 + tj2 - tj) / 2;
    let b = (tj1 - tj2 + tj) / 2;
    let c = (-tj1 + tj2 + tj) / 2;
    let top = (tj1 + tj2 + tj) / 2 + 1;
    let (j1_minus, j1_plus) = ((tj1 - m1.twice()) / 2, (tj1 + m1.twice()) / 2);
    let (j2_minus, j2_plus) = ((tj2 - m2.twice()) / 2, (tj2 + m2.twice()) / 2);
    let (j_minus, j_plus) = ((tj - m.twice()) / 2, (tj + m.twice()) / 2);

    let fact: Vec<BigInt> = {
        let mut v = Vec::with_capacity(top as usize + 1);
        let mut acc = BigInt::one();
        v.push(acc.clone());
        for k in 1..=top {
            acc *= k;
            v.push(acc.clone());
        }
        v
    };
    let f = |k: i64| &fact[k as usize];

    let offset_a = (tj - tj2 + m1.twice()) / 2; // J - j2 + m1
    let offset_b = (tj - tj1 - m2.twice()) / 2; // J - j1 - m2
    let k_min = 0.max(-offset_a).max(-offset_b);
    let k_max = a.min(j1_minus).min(j2_plus);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let denom = f(k) * f(a - k) * f(j1_minus - k) * f(j2_plus - k) * f(offset_a + k) * f(offset_b + k);
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return sum;
    }
    let prefactor = BigRational::new(
        BigInt::from(tj + 1) * f(b) * f(c) * f(a) * f(j_plus) * f(j_minus) * f(j1_minus)
            * f(j1_plus)
            * f(j2_minus)
            * f(j2_plus),
        f(top).clone(),
    );
    &sum * &sum * prefactor
}

/// Distribution `q_M` of total `S_z` for `n` spins up and `m` spins tilted by
/// `theta`, from `M = N/2` down to `M = (n - m)/2`.
///
/// Flipping `k` of the tilted spins is binomial with success probability
/// `sin²(θ/2)`: `q = C(m, k) cos(θ/2)^{2(m-k)} sin(θ/2)^{2k}`.
pub fn qm_distribution(n: u64, m: u64, theta: SpinAngle) -> Result<Vec<(HalfInt, f64)>> {
    if n + m == 0 {
        return Err(Error::EmptySystem);
    }
    let total = (n + m) as i64;
    let x = theta.flip_probability();
    let y = 1.0 - x;
    let mut out = Vec::with_capacity(m as usize + 1);
    for k in 0..=m {
        let up_factor = m - k;
        let q = if (k > 0 && x == 0.0) || (up_factor > 0 && y == 0.0) {
            0.0
        } else {
            let mut log_q = ln_int(&BigInt::from(binomial_unsigned(m, k as i64)))?;
            if k > 0 {
                log_q += k as f64 * x.ln();
            }
            if up_factor > 0 {
                log_q += up_factor as f64 * y.ln();
            }
            log_q.exp()
        };
        out.push((HalfInt::from_twice(total - 2 * k as i64), q));
    }
    Ok(out)
}

/// Squared Clebsch–Gordan table for coupling `n` up spins with `m` spins of
/// arbitrary projection, independent of the tilt angle.
///
/// Row `k` holds `|C(n/2, n/2; m/2, M - n/2; J, M)|²` for `M = N/2 - k`,
/// column `i` is `J = N/2 - i`.
#[derive(Debug, Clone)]
pub struct PartialSpinTable {
    n: u64,
    m: u64,
    js: Vec<HalfInt>,
    cg: Vec<Vec<f64>>,
}

impl PartialSpinTable {
    pub fn new(n: u64, m: u64) -> Result<Self> {
        if n + m == 0 {
            return Err(Error::EmptySystem);
        }
        let total = (n + m) as i64;
        let js: Vec<HalfInt> = (0..=n.min(m) as i64)
            .map(|i| HalfInt::from_twice(total - 2 * i))
            .collect();
        let j1 = HalfInt::from_twice(n as i64);
        let j2 = HalfInt::from_twice(m as i64);
        let mut cg = Vec::with_capacity(m as usize + 1);
        for k in 0..=m as i64 {
            let big_m = HalfInt::from_twice(total - 2 * k);
            let m2 = HalfInt::from_twice(big_m.twice() - n as i64);
            cg.push(
                js.iter()
                    .map(|&j| ratio_to_f64(&cg_squared(j1, j1, j2, m2, j, big_m)))
                    .collect(),
            );
        }
        Ok(PartialSpinTable { n, m, js, cg })
    }

    /// `p_J(θ) = Σ_M q_M |C(n/2, n/2; m/2, M - n/2; J, M)|²`.
    pub fn pj(&self, theta: SpinAngle) -> Result<Vec<(HalfInt, f64)>> {
        let q = qm_distribution(self.n, self.m, theta)?;
        let mut out: Vec<(HalfInt, f64)> = self.js.iter().map(|&j| (j, 0.0)).collect();
        for ((_, qm), row) in q.iter().zip(&self.cg) {
            if *qm == 0.0 {
                continue;
            }
            for (slot, c) in out.iter_mut().zip(row) {
                slot.1 += qm * c;
            }
        }
        Ok(out)
    }
}

/// Sector distribution for partially distinguishable spins at angle `theta`.
pub fn pj_partial(n: u64, m: u64, theta: SpinAngle) -> Result<Vec<(HalfInt, f64)>> {
    PartialSpinTable::new(n, m)?.pj(theta)
}

#[cfg(test)]
pub(crate) fn factorial_ratio_pj(n: u64, m: u64, j: HalfInt) -> ExactRatio {
    let total = (n + m) as i64;
    let upper = (total + j.twice()) / 2 + 1;
    let lower = (total - j.twice()) / 2;
    BigRational::new(
        BigInt::from(j.multiplicity()) * crate::exactmath::factorial(n) * crate::exactmath::factorial(m),
        crate::exactmath::factorial(upper as u64) * crate::exactmath::factorial(lower as u64),
    )
}
