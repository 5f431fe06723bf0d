//! Exact entropy changes and extractable work for mixing two gases of
//! identical bosons or fermions that differ only in an internal spin, as seen
//! by an observer who can address the spin and by one who cannot.
//!
//! Probabilities and dimensions are exact big-integer or rational values;
//! the `oracle` module rebuilds the same quantities by brute force on explicit
//! (anti)symmetrised many-body states for small systems.

pub mod asymptotics;
pub mod cli;
pub mod dimensions;
pub mod error;
pub mod exactmath;
pub mod mixing_entropy;
pub mod oracle;
pub mod spin_algebra;

pub use dimensions::{SectorDimensionTable, Statistics};
pub use error::{Error, Result};
pub use mixing_entropy::{MixingReport, MixingScenario, Temperature};
pub use spin_algebra::{HalfInt, SectorDistribution, SpinAngle};
