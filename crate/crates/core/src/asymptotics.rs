//! Limits and expansion terms that the exact formulas converge to: the
//! low-density gap, the large-`n` behaviour of `H(p)`, and the `d = 2` boson
//! (condensate) limit of the ignorant observer's entropy change.

use num_bigint::BigInt;
use num_rational::BigRational;
use statrs::function::factorial::ln_binomial;

use crate::dimensions::Statistics;
use crate::error::{Error, Result};
use crate::exactmath::{compensated_sum, ExactRatio};
use crate::spin_algebra::{pj_orthogonal, HalfInt};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Limit of the `d = 2` boson work variance, `π²/24`.
pub const BEC_VARIANCE_LIMIT: f64 = std::f64::consts::PI * std::f64::consts::PI / 24.0;

/// Constant term of the large-`n` Shannon entropy, `γ/2 - ln 2 + 1`.
pub fn hp_constant() -> f64 {
    EULER_GAMMA / 2.0 - std::f64::consts::LN_2 + 1.0
}

/// `H(p) + n²/(2d²)`, the predicted gap `ΔS_info - ΔS_igno` for `n = m`
/// particles per side when `d ≫ n²`.
pub fn low_density_gap_prediction(n: u64, d: u64) -> Result<f64> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("n and d must be positive".into()));
    }
    let hp = pj_orthogonal(n, n)?.shannon_entropy();
    let (nf, df) = (n as f64, d as f64);
    Ok(hp + nf * nf / (2.0 * df * df))
}

/// First- and second-order terms in the `1/d` expansion of the per-sector
/// entropy change. For fermions these are `T1 = -R1` and `T2 = R2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTerms {
    pub r1: f64,
    pub r2: f64,
}

fn check_sector(n: u64, j: HalfInt) -> Result<()> {
    let twice = j.twice();
    if twice < 0 || twice as u64 > 2 * n || twice % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "J = {j} is not a sector of {n} + {n} spins"
        )));
    }
    Ok(())
}

/// Expansion terms with `d` factored out: `(d R1, d² R2)` as exact rationals.
pub fn expansion_terms_exact(n: u64, j: HalfInt, statistics: Statistics) -> Result<(ExactRatio, ExactRatio)> {
    check_sector(n, j)?;
    let k = j.casimir();
    let nn = BigRational::from_integer(BigInt::from(n));
    let two = BigRational::from_integer(BigInt::from(2));
    let one = BigRational::from_integer(BigInt::from(1));
    let r1 = &k - &nn;
    // J(J+1)(J²+J+2) = K(K+2)
    let r2 = (&two * &nn * &nn - &two * &nn * (&two * &k + &one) + &k * (&k + &two)) / &two;
    Ok(match statistics {
        Statistics::Boson => (r1, r2),
        Statistics::Fermion => (-r1, r2),
    })
}

/// `R1 = (J(J+1) - n)/d` and
/// `R2 = [2n² - 2n(2J(J+1)+1) + J(J+1)(J²+J+2)] / (2d²)`.
pub fn expansion_terms(n: u64, d: u64, j: HalfInt, statistics: Statistics) -> Result<ExpansionTerms> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let (r1, r2) = expansion_terms_exact(n, j, statistics)?;
    let df = d as f64;
    Ok(ExpansionTerms {
        r1: crate::exactmath::ratio_to_f64(&r1) / df,
        r2: crate::exactmath::ratio_to_f64(&r2) / (df * df),
    })
}

/// `Σ_J p_J · d R1(J)` in exact arithmetic; vanishes identically.
pub fn first_order_moment(n: u64, statistics: Statistics) -> Result<ExactRatio> {
    let dist = pj_orthogonal(n, n)?;
    let mut failure = None;
    let value = dist.expectation_exact(|j| match expansion_terms_exact(n, j, statistics) {
        Ok((r1, _)) => r1,
        Err(e) => {
            failure = Some(e);
            BigRational::from_integer(BigInt::from(0))
        }
    });
    failure.map_or(Ok(value), Err)
}

/// `Σ_J p_J · d² (R2 - R1²/2)` in exact arithmetic; equals `-n²/2`.
pub fn second_order_moment(n: u64, statistics: Statistics) -> Result<ExactRatio> {
    let dist = pj_orthogonal(n, n)?;
    let mut failure = None;
    let two = BigRational::from_integer(BigInt::from(2));
    let value = dist.expectation_exact(|j| match expansion_terms_exact(n, j, statistics) {
        Ok((r1, r2)) => r2 - &r1 * &r1 / &two,
        Err(e) => {
            failure = Some(e);
            BigRational::from_integer(BigInt::from(0))
        }
    });
    failure.map_or(Ok(value), Err)
}

/// Large-`n` asymptote of `H(p)` for `n = m`: `½ ln n + γ/2 - ln 2 + 1`.
pub fn hp_asymptote(n: u64) -> f64 {
    0.5 * (n as f64).ln() + hp_constant()
}

/// Large-`n` asymptote of the `d = 2` boson ignorant entropy change,
/// `½ ln n + ln 2 - γ/2`.
pub fn bec_limit_mean(n: u64) -> f64 {
    0.5 * (n as f64).ln() + std::f64::consts::LN_2 - EULER_GAMMA / 2.0
}

/// `ln p_J` from log-gamma binomials,
/// `ln(2J+1) + ln C(N+1, N/2-J) - ln(N+1) - ln C(N, n)`.
pub fn ln_pj_log_gamma(n: u64, m: u64, j: HalfInt) -> Result<f64> {
    let total = n + m;
    let twice = j.twice();
    if total == 0 {
        return Err(Error::EmptySystem);
    }
    if twice < (n as i64 - m as i64).abs() || twice > total as i64 || (total as i64 - twice) % 2 != 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let k = (total - twice as u64) / 2;
    Ok((j.multiplicity() as f64).ln() + ln_binomial(total + 1, k)
        - ((total + 1) as f64).ln()
        - ln_binomial(total, n))
}

/// `H(p)` evaluated entirely in log space; agrees with the exact-weight
/// route to better than `1e-9` and costs no big-integer work.
pub fn shannon_entropy_log_gamma(n: u64, m: u64) -> Result<f64> {
    let total = n + m;
    let mut terms = Vec::with_capacity(n.min(m) as usize + 1);
    for k in 0..=n.min(m) {
        let lp = ln_pj_log_gamma(n, m, HalfInt::from_twice((total - 2 * k) as i64))?;
        terms.push(-lp.exp() * lp);
    }
    Ok(compensated_sum(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixing_entropy::{
        delta_s_ignorant, delta_s_informed, work_variance, MixingScenario,
    };
    use std::f64::consts::LN_2;

    fn boson(n: u64, d: u64) -> MixingScenario {
        MixingScenario::new(n, n, d, Statistics::Boson).unwrap()
    }

    #[test]
    fn constants() {
        assert!((hp_constant() - 0.595_460_652).abs() < 1e-9);
        assert!((hp_asymptote(1) - hp_constant()).abs() < 1e-15);
        assert!((bec_limit_mean(1) - 0.404_539_348).abs() < 1e-9);
        assert!((BEC_VARIANCE_LIMIT - 0.411_233_5).abs() < 1e-7);
        assert!((hp_asymptote(4096) - (0.5 * 4096f64.ln() + hp_constant())).abs() < 1e-15);
    }

    #[test]
    fn gap_prediction_examples() {
        assert!((low_density_gap_prediction(1, 100).unwrap() - (LN_2 + 5e-5)).abs() < 1e-14);
        let hp = pj_orthogonal(4, 4).unwrap().shannon_entropy();
        assert!((low_density_gap_prediction(4, 10_000).unwrap() - (hp + 8e-8)).abs() < 1e-14);
    }

    #[test]
    fn gap_residual_shrinks_cubically() {
        let residual = |d: u64| {
            let s = boson(4, d);
            delta_s_informed(&s) - delta_s_ignorant(&s).unwrap() - low_density_gap_prediction(4, d).unwrap()
        };
        let ratio = residual(200).abs() / residual(400).abs();
        assert!(ratio >= 6.0, "ratio {ratio}");
    }

    #[test]
    fn linear_term_root() {
        // J(J+1) = n for n = 2, J = 1 and n = 6, J = 2
        for (n, j) in [(2u64, 1i64), (6, 2), (12, 3)] {
            let t = expansion_terms(n, 100, HalfInt::from_int(j), Statistics::Boson).unwrap();
            assert_eq!(t.r1, 0.0);
        }
        let b = expansion_terms(3, 10, HalfInt::from_int(2), Statistics::Boson).unwrap();
        let f = expansion_terms(3, 10, HalfInt::from_int(2), Statistics::Fermion).unwrap();
        assert_eq!(b.r1, -f.r1);
        assert_eq!(b.r2, f.r2);
        assert!(expansion_terms(3, 10, HalfInt::from_twice(3), Statistics::Boson).is_err());
    }

    #[test]
    fn moments_exact() {
        for n in 1..=50u64 {
            for stats in [Statistics::Boson, Statistics::Fermion] {
                assert_eq!(first_order_moment(n, stats).unwrap(), BigRational::from_integer(0.into()));
                let expect = BigRational::new(BigInt::from(-((n * n) as i64)), BigInt::from(2));
                assert_eq!(second_order_moment(n, stats).unwrap(), expect);
            }
        }
    }

    #[test]
    fn log_gamma_entropy_matches_exact() {
        for (n, m) in [(1, 1), (3, 5), (40, 40), (200, 150), (1024, 1024)] {
            let exact = pj_orthogonal(n, m).unwrap().shannon_entropy();
            let lg = shannon_entropy_log_gamma(n, m).unwrap();
            assert!((exact - lg).abs() < 1e-9, "n={n} m={m}: {exact} vs {lg}");
        }
    }

    #[test]
    fn hp_converges_to_asymptote() {
        let mut last = f64::INFINITY;
        for n in [64u64, 256, 1024, 4096] {
            let gap = (shannon_entropy_log_gamma(n, n).unwrap() - hp_asymptote(n)).abs();
            assert!(gap < last, "n={n}");
            last = gap;
        }
        assert!(last < 0.02);
    }

    #[test]
    fn condensate_limit() {
        // the residual changes sign near n = 100, so it only shrinks
        // monotonically past its turning point
        let residual = |n: u64| delta_s_ignorant(&boson(n, 2)).unwrap() - bec_limit_mean(n);
        assert!(residual(16) > 0.0 && residual(64) < 0.0);
        let mut last = f64::INFINITY;
        for n in [256u64, 1024, 4096] {
            let gap = residual(n).abs();
            assert!(gap < last, "n={n}");
            assert!(gap * (n as f64).sqrt() < 5e-3, "n={n}");
            last = gap;
        }
        let v = work_variance(&boson(1024, 2)).unwrap();
        assert!((v / BEC_VARIANCE_LIMIT - 1.0).abs() < 0.05, "variance {v}");
    }
}
