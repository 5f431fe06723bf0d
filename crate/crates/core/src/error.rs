use thiserror::Error;

use crate::spin_algebra::HalfInt;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("logarithm of a non-positive ratio")]
    NonPositiveLog,

    #[error("probabilities sum to {sum}, expected exactly 1")]
    NotNormalized { sum: String },

    #[error("negative probability {0}")]
    NegativeProbability(String),

    #[error("system has no particles (n = m = 0)")]
    EmptySystem,

    #[error("cell count d = {0} must be even and at least 2")]
    InvalidCellCount(u64),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("Pauli exclusion violated: {particles} fermions in {cells} cells")]
    FermionCapacity { particles: u64, cells: u64 },

    #[error("sector J = {j} does not exist for N = {particles}, d = {cells}")]
    NonexistentSector {
        particles: u64,
        cells: u64,
        j: HalfInt,
    },

    #[error("oracle state space of dimension {required} exceeds the cap {cap}")]
    ResourceCap { required: u128, cap: u128 },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
