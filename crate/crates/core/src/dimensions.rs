//! Dimensions `d_J` of the spatial irreps paired with total spin `J`.
//!
//! Bosons pair the spin diagram `λ = (N/2 + J, N/2 - J)` with the same
//! spatial diagram; fermions pair it with the transpose. Both a closed form
//! and the general Weyl product are provided and must agree.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{binomial, factorial, ExactInt};
use crate::spin_algebra::HalfInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistics::Boson => "boson",
            Statistics::Fermion => "fermion",
        })
    }
}

impl FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "boson" | "bosons" | "b" => Ok(Statistics::Boson),
            "fermion" | "fermions" | "f" => Ok(Statistics::Fermion),
            other => Err(Error::InvalidArgument(format!(
                "unknown statistics '{other}' (expected boson or fermion)"
            ))),
        }
    }
}

/// Two-row Young diagram `(row1, row2)` with `row1 >= row2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct YoungDiagramTwoRow {
    row1: u64,
    row2: u64,
}

impl YoungDiagramTwoRow {
    pub fn new(row1: u64, row2: u64) -> Result<Self> {
        if row1 < row2 {
            return Err(Error::InvalidArgument(format!(
                "Young diagram rows ({row1}, {row2}) are not non-increasing"
            )));
        }
        Ok(YoungDiagramTwoRow { row1, row2 })
    }

    /// Diagram `(N/2 + J, N/2 - J)` of the spin sector `J`.
    pub fn for_sector(particles: u64, j: HalfInt) -> Result<Self> {
        let (upper, lower) = sector_rows(particles, j)?;
        Ok(YoungDiagramTwoRow {
            row1: upper,
            row2: lower,
        })
    }

    pub fn rows(&self) -> (u64, u64) {
        (self.row1, self.row2)
    }

    pub fn boxes(&self) -> u64 {
        self.row1 + self.row2
    }

    /// Row lengths of the transposed diagram, longest first.
    pub fn transposed_rows(&self) -> Vec<u64> {
        let mut rows = vec![2; self.row2 as usize];
        rows.extend(std::iter::repeat(1).take((self.row1 - self.row2) as usize));
        rows
    }
}

/// Validates `J` against `N` and returns `(N/2 + J, N/2 - J)`.
fn sector_rows(particles: u64, j: HalfInt) -> Result<(u64, u64)> {
    let twice_j = j.twice();
    let total = particles as i64;
    if twice_j < 0 || twice_j > total || (total - twice_j) % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "J = {j} is not a valid total spin for N = {particles}"
        )));
    }
    Ok((((total + twice_j) / 2) as u64, ((total - twice_j) / 2) as u64))
}

fn check_sizes(particles: u64, cells: u64) -> Result<()> {
    if particles == 0 {
        return Err(Error::InvalidArgument("particle number must be positive".into()));
    }
    if cells < 2 {
        return Err(Error::InvalidArgument(format!(
            "cell count d = {cells} must be at least 2"
        )));
    }
    Ok(())
}

/// `d_J^B = (2J+1) (N/2-J+d-2)! (N/2+J+d-1)! / ((N/2-J)! (N/2+J+1)! (d-1)! (d-2)!)`,
/// evaluated as `(2J+1) C(N/2+J+d-1, d-2) C(N/2-J+d-2, d-2) / (d-1)`.
pub fn dim_boson_sector(particles: u64, cells: u64, j: HalfInt) -> Result<ExactInt> {
    check_sizes(particles, cells)?;
    let (upper, lower) = sector_rows(particles, j)?;
    let k = cells as i64 - 2;
    let dim = BigInt::from(j.multiplicity())
        * binomial(upper + cells - 1, k)
        * binomial(lower + cells - 2, k)
        / (cells - 1);
    Ok(dim)
}

/// `d_J^F = (2J+1) d! (d+1)! / ((N/2+J+1)! (N/2-J)! (d-N/2+J+1)! (d-N/2-J)!)`,
/// evaluated as `(2J+1) C(d+1, N/2+J+1) C(d, N/2-J) / (d-N/2+J+1)`.
pub fn dim_fermion_sector(particles: u64, cells: u64, j: HalfInt) -> Result<ExactInt> {
    check_sizes(particles, cells)?;
    let (upper, lower) = sector_rows(particles, j)?;
    if upper > cells {
        return Err(Error::NonexistentSector {
            particles,
            cells,
            j,
        });
    }
    let dim = BigInt::from(j.multiplicity())
        * binomial(cells + 1, upper as i64 + 1)
        * binomial(cells, lower as i64)
        / (cells - lower + 1);
    Ok(dim)
}

pub fn dim_sector(statistics: Statistics, particles: u64, cells: u64, j: HalfInt) -> Result<ExactInt> {
    match statistics {
        Statistics::Boson => dim_boson_sector(particles, cells, j),
        Statistics::Fermion => dim_fermion_sector(particles, cells, j),
    }
}

/// Weyl dimension formula for the `U(d)` irrep with diagram `lambda` (or its
/// transpose): `Π_{i<j} (λ̃_i - λ̃_j) / Π_{k=1}^{d-1} k!` with
/// `λ̃ = λ + (d-1, d-2, …, 0)`.
pub fn dim_weyl_two_row(lambda: YoungDiagramTwoRow, cells: u64, transpose: bool) -> Result<ExactInt> {
    if cells == 0 {
        return Err(Error::InvalidArgument("cell count must be positive".into()));
    }
    let rows: Vec<u64> = if transpose {
        lambda.transposed_rows()
    } else {
        [lambda.row1, lambda.row2]
            .into_iter()
            .filter(|&r| r > 0)
            .collect()
    };
    if rows.len() as u64 > cells {
        return Err(Error::NonexistentSector {
            particles: lambda.boxes(),
            cells,
            j: HalfInt::from_twice(lambda.row1 as i64 - lambda.row2 as i64),
        });
    }
    let shifted: Vec<i64> = (0..cells as usize)
        .map(|i| rows.get(i).copied().unwrap_or(0) as i64 + (cells as usize - 1 - i) as i64)
        .collect();
    let mut numerator = BigInt::one();
    for i in 0..shifted.len() {
        for k in i + 1..shifted.len() {
            numerator *= shifted[i] - shifted[k];
        }
    }
    let mut denominator = BigInt::one();
    for k in 1..cells {
        denominator *= factorial(k);
    }
    Ok(numerator / denominator)
}

/// All `d_J` for `N` particles in `d` cells; for fermions only sectors with
/// `N/2 + J <= d` exist.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorDimensionTable {
    particles: u64,
    cells: u64,
    statistics: Statistics,
    entries: Vec<(HalfInt, ExactInt)>,
}

impl SectorDimensionTable {
    pub fn new(particles: u64, cells: u64, statistics: Statistics) -> Result<Self> {
        check_sizes(particles, cells)?;
        let mut entries = Vec::new();
        for twice_j in (0..=particles as i64).rev().step_by(2) {
            let j = HalfInt::from_twice(twice_j);
            match dim_sector(statistics, particles, cells, j) {
                Ok(dim) => entries.push((j, dim)),
                Err(Error::NonexistentSector { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(SectorDimensionTable {
            particles,
            cells,
            statistics,
            entries,
        })
    }

    pub fn particles(&self) -> u64 {
        self.particles
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn entries(&self) -> &[(HalfInt, ExactInt)] {
        &self.entries
    }

    pub fn get(&self, j: HalfInt) -> Option<&ExactInt> {
        self.entries.iter().find(|(jj, _)| *jj == j).map(|(_, d)| d)
    }

    /// `Σ_J (2J+1) d_J`, the dimension of the physical N-particle space.
    pub fn total_dimension(&self) -> ExactInt {
        self.entries
            .iter()
            .fold(BigInt::zero(), |acc, (j, d)| acc + d * j.multiplicity())
    }
}
