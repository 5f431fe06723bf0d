//! Entropy changes for mixing `n` particles from the left half of a box with
//! `m` particles from the right half, with the box divided into `d` cells.
//!
//! All entropies are in nats. Every logarithm is taken of an exact ratio of
//! configuration counts or sector dimensions; sector probabilities enter as
//! exact weights and are only converted to `f64` when averaging.

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use crate::dimensions::{dim_sector, Statistics};
use crate::error::{Error, Result};
use crate::exactmath::{binomial_unsigned, compensated_sum, ln_quotient, ExactInt};
use crate::spin_algebra::{
    pj_orthogonal, qm_distribution, HalfInt, PartialSpinTable, SectorDistribution, SpinAngle,
};

/// Particle counts on each side, total cell count and particle statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MixingScenario {
    n: u64,
    m: u64,
    d: u64,
    statistics: Statistics,
}

impl MixingScenario {
    pub fn new(n: u64, m: u64, d: u64, statistics: Statistics) -> Result<Self> {
        if d < 2 || d % 2 != 0 {
            return Err(Error::InvalidCellCount(d));
        }
        if n + m == 0 {
            return Err(Error::EmptySystem);
        }
        if statistics == Statistics::Fermion {
            let side = d / 2;
            for count in [n, m] {
                if count > side {
                    return Err(Error::FermionCapacity {
                        particles: count,
                        cells: side,
                    });
                }
            }
        }
        Ok(MixingScenario {
            n,
            m,
            d,
            statistics,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn cells(&self) -> u64 {
        self.d
    }

    pub fn particles(&self) -> u64 {
        self.n + self.m
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    fn half(&self) -> u64 {
        self.d / 2
    }
}

/// `k_B T` in the same energy unit as the extracted work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Temperature(f64);

impl Temperature {
    pub fn new(kt: f64) -> Result<Self> {
        if kt.is_finite() && kt > 0.0 {
            Ok(Temperature(kt))
        } else {
            Err(Error::InvalidArgument(format!("kT = {kt} must be positive and finite")))
        }
    }

    pub fn kt(self) -> f64 {
        self.0
    }
}

impl Default for Temperature {
    fn default() -> Self {
        Temperature(1.0)
    }
}

/// Number of ways to place `particles` indistinguishable particles in `cells`
/// cells, with or without the one-per-cell restriction.
fn occupancy_count(particles: u64, cells: u64, exclusion: bool) -> BigUint {
    if exclusion {
        binomial_unsigned(cells, particles as i64)
    } else {
        binomial_unsigned(particles + cells - 1, particles as i64)
    }
}

fn initial_configurations(s: &MixingScenario) -> BigUint {
    let exclusion = s.statistics == Statistics::Fermion;
    occupancy_count(s.n, s.half(), exclusion) * occupancy_count(s.m, s.half(), exclusion)
}

/// Entropy of the initial thermal state: each side is uniformly mixed over
/// its own cell configurations.
pub fn initial_entropy(s: &MixingScenario) -> f64 {
    ln_quotient(&initial_configurations(s), &BigUint::from(1u8)).unwrap_or(0.0)
}

/// Classical state-counting entropy change, for distinguishable or
/// indistinguishable gases; `exclusion` forbids double occupancy.
pub fn classical_delta_s(s: &MixingScenario, distinguishable: bool, exclusion: bool) -> Result<f64> {
    let (n, m, d, half) = (s.n, s.m, s.d, s.half());
    if exclusion {
        for count in [n, m] {
            if count > half {
                return Err(Error::FermionCapacity {
                    particles: count,
                    cells: half,
                });
            }
        }
    }
    let initial = occupancy_count(n, half, exclusion) * occupancy_count(m, half, exclusion);
    let fin = if distinguishable {
        occupancy_count(n, d, exclusion) * occupancy_count(m, d, exclusion)
    } else {
        occupancy_count(n + m, d, exclusion)
    };
    ln_quotient(&fin, &initial)
}

/// Entropy change seen by an observer who can address the spin: the two
/// gases expand independently.
pub fn delta_s_informed(s: &MixingScenario) -> f64 {
    // exclusion feasibility is guaranteed by scenario validation
    classical_delta_s(s, true, s.statistics == Statistics::Fermion).unwrap_or(f64::NAN)
}

/// Entropy change when both gases carry the same spin: the final state is
/// maximally mixed on the fully symmetric (antisymmetric) spatial sector.
pub fn delta_s_identical(s: &MixingScenario) -> Result<f64> {
    let top = HalfInt::from_twice(s.particles() as i64);
    per_sector_delta_s(s, top)
}

/// Dimension `d_J` of the spatial block paired with total spin `J`.
pub fn sector_dimension(s: &MixingScenario, j: HalfInt) -> Result<ExactInt> {
    dim_sector(s.statistics, s.particles(), s.d, j)
}

/// `ln d_J - S_initial`, the entropy gained inside sector `J`.
pub fn per_sector_delta_s(s: &MixingScenario, j: HalfInt) -> Result<f64> {
    let dim = sector_dimension(s, j)?;
    ln_quotient(dim.magnitude(), &initial_configurations(s))
}

fn sector_gains(s: &MixingScenario, js: impl Iterator<Item = HalfInt>) -> Result<Vec<(HalfInt, f64)>> {
    js.map(|j| per_sector_delta_s(s, j).map(|v| (j, v))).collect()
}

fn weighted_mean(weights: &[(HalfInt, f64)], values: &[(HalfInt, f64)]) -> f64 {
    compensated_sum(weights.iter().zip(values).map(|((_, p), (_, v))| p * v))
}

fn weighted_variance(weights: &[(HalfInt, f64)], values: &[(HalfInt, f64)]) -> f64 {
    let mean = weighted_mean(weights, values);
    compensated_sum(
        weights
            .iter()
            .zip(values)
            .map(|((_, p), (_, v))| p * (v - mean) * (v - mean)),
    )
}

/// Entropy change for the observer blind to spin, orthogonal spins:
/// `Σ_J p_J (ln d_J - S_initial)`.
pub fn delta_s_ignorant(s: &MixingScenario) -> Result<f64> {
    let dist = pj_orthogonal(s.n, s.m)?;
    let gains = sector_gains(s, dist.j_values())?;
    Ok(weighted_mean(&dist.probabilities_f64(), &gains))
}

/// Variance over sectors of the per-sector entropy change.
pub fn work_variance(s: &MixingScenario) -> Result<f64> {
    let dist = pj_orthogonal(s.n, s.m)?;
    let gains = sector_gains(s, dist.j_values())?;
    Ok(weighted_variance(&dist.probabilities_f64(), &gains))
}

/// Informed-observer entropy change for right-hand spins tilted by `theta`:
/// the average over `q_M` of the entropy gained in each fixed-`M` block.
pub fn delta_s_informed_partial(s: &MixingScenario, theta: SpinAngle) -> Result<f64> {
    let total = s.particles() as i64;
    let exclusion = s.statistics == Statistics::Fermion;
    let initial = initial_configurations(s);
    let q = qm_distribution(s.n, s.m, theta)?;
    let mut terms = Vec::with_capacity(q.len());
    for (big_m, weight) in q {
        if weight == 0.0 {
            continue;
        }
        let down = ((total - big_m.twice()) / 2) as u64;
        let up = ((total + big_m.twice()) / 2) as u64;
        let block = occupancy_count(down, s.d, exclusion) * occupancy_count(up, s.d, exclusion);
        terms.push(weight * ln_quotient(&block, &initial)?);
    }
    Ok(compensated_sum(terms))
}

/// Ignorant-observer entropy change for spins tilted by `theta`; only the
/// sector weights change.
pub fn delta_s_ignorant_partial(s: &MixingScenario, theta: SpinAngle) -> Result<f64> {
    let weights = PartialSpinTable::new(s.n, s.m)?.pj(theta)?;
    let gains = sector_gains(s, weights.iter().map(|(j, _)| *j))?;
    Ok(weighted_mean(&weights, &gains))
}

/// Work obtained when the free-energy bound is saturated: `kT ΔS`.
pub fn extractable_work(delta_s: f64, t: Temperature) -> f64 {
    t.kt() * delta_s
}

/// Per-sector row of a [`MixingReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct SectorReport {
    pub j: HalfInt,
    pub probability: f64,
    pub dimension: ExactInt,
    pub delta_s: f64,
}

/// Every entropy change for one scenario, plus the sector breakdown of the
/// ignorant observer's protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    pub scenario: MixingScenario,
    pub theta: SpinAngle,
    pub delta_s_informed: f64,
    pub delta_s_ignorant: f64,
    pub delta_s_identical: f64,
    pub delta_s_classical_dist: f64,
    pub delta_s_classical_indist: f64,
    /// Exact orthogonal-spin distribution; sector weights at other angles are
    /// in `sectors`.
    pub sector_distribution: SectorDistribution,
    pub sectors: Vec<SectorReport>,
    pub shannon_hp: f64,
    pub work_variance: f64,
}

impl MixingReport {
    pub fn per_sector_delta_s(&self) -> Vec<(HalfInt, f64)> {
        self.sectors.iter().map(|r| (r.j, r.delta_s)).collect()
    }

    /// Whether the sector weights are the exact orthogonal-spin ones.
    pub fn is_orthogonal(&self) -> bool {
        self.theta == SpinAngle::ORTHOGONAL
    }

    pub fn work_informed(&self, t: Temperature) -> f64 {
        extractable_work(self.delta_s_informed, t)
    }

    pub fn work_ignorant(&self, t: Temperature) -> f64 {
        extractable_work(self.delta_s_ignorant, t)
    }

    pub fn work_identical(&self, t: Temperature) -> f64 {
        extractable_work(self.delta_s_identical, t)
    }
}

fn build_report(
    s: &MixingScenario,
    theta: SpinAngle,
    weights: Vec<(HalfInt, f64)>,
    shannon_hp: f64,
    delta_s_informed: f64,
) -> Result<MixingReport> {
    let exclusion = s.statistics == Statistics::Fermion;
    let gains = sector_gains(s, weights.iter().map(|(j, _)| *j))?;
    let sectors = weights
        .iter()
        .zip(&gains)
        .map(|(&(j, probability), &(_, delta_s))| {
            Ok(SectorReport {
                j,
                probability,
                dimension: sector_dimension(s, j)?,
                delta_s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MixingReport {
        scenario: *s,
        theta,
        delta_s_informed,
        delta_s_ignorant: weighted_mean(&weights, &gains),
        delta_s_identical: delta_s_identical(s)?,
        delta_s_classical_dist: classical_delta_s(s, true, exclusion)?,
        delta_s_classical_indist: classical_delta_s(s, false, exclusion)?,
        sector_distribution: pj_orthogonal(s.n, s.m)?,
        sectors,
        shannon_hp,
        work_variance: weighted_variance(&weights, &gains),
    })
}

/// Full report for orthogonal spins.
pub fn mixing_report(s: &MixingScenario) -> Result<MixingReport> {
    let dist = pj_orthogonal(s.n, s.m)?;
    build_report(
        s,
        SpinAngle::ORTHOGONAL,
        dist.probabilities_f64(),
        dist.shannon_entropy(),
        delta_s_informed(s),
    )
}

/// Full report for right-hand spins tilted by `theta`. At `theta = π` this is
/// exactly [`mixing_report`].
pub fn mixing_report_at(s: &MixingScenario, theta: SpinAngle) -> Result<MixingReport> {
    if theta == SpinAngle::ORTHOGONAL {
        return mixing_report(s);
    }
    let weights = PartialSpinTable::new(s.n, s.m)?.pj(theta)?;
    let shannon = compensated_sum(
        weights
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(_, p)| -p * p.ln()),
    );
    let informed = delta_s_informed_partial(s, theta)?;
    build_report(s, theta, weights, shannon, informed)
}

/// Exact orthogonal-spin sector dimensions for a scenario, largest `J` first.
pub fn scenario_dimensions(s: &MixingScenario) -> Result<Vec<(HalfInt, BigInt)>> {
    let dist = pj_orthogonal(s.n, s.m)?;
    dist.j_values()
        .map(|j| sector_dimension(s, j).map(|d| (j, d)))
        .collect()
}
