//! Brute-force verifier in first quantization.
//!
//! States are built explicitly on `(cells ⊗ spin)^⊗N` by (anti)symmetrising
//! product states over all `N!` permutations, spins are traced out, and the
//! Haar twirl over identical single-particle unitaries is computed exactly as
//! the Hilbert–Schmidt projection onto the span of permutation operators.
//! Nothing here uses the closed forms of the other modules.
//!
//! Single-particle basis index is `cell * 2 + spin` (`0 = ↑`, `1 = ↓`); particle
//! `0` is the most significant digit of a many-body index.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::dimensions::Statistics;
use crate::error::{Error, Result};
use crate::spin_algebra::{HalfInt, SpinAngle};

/// Default bound on the full Hilbert-space dimension `(2d)^N`.
pub const DEFAULT_CAP: u128 = 1500;

/// Environment variable that overrides [`DEFAULT_CAP`].
pub const CAP_ENV: &str = "GIBBS_ORACLE_CAP";

const SNAP_TOLERANCE: f64 = 1e-8;
const DENSITY_TOLERANCE: f64 = 1e-8;
const NEGATIVE_EIGENVALUE: f64 = -1e-10;

/// Which tensor factor an operator lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    CellSpin,
    Cell,
    Spin,
}

/// Dense complex operator on `N` copies of one local space.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub matrix: DMatrix<Complex64>,
    pub particles: usize,
    pub cells: usize,
    pub factor: Factor,
}

impl DenseOperator {
    pub fn zeros(particles: usize, cells: usize, factor: Factor) -> Self {
        let dim = local_dim(cells, factor).pow(particles as u32);
        DenseOperator {
            matrix: DMatrix::zeros(dim, dim),
            particles,
            cells,
            factor,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Maximally mixed state on the spatial factor.
    pub fn maximally_mixed(particles: usize, cells: usize) -> Self {
        let mut op = DenseOperator::zeros(particles, cells, Factor::Cell);
        let dim = op.dim();
        op.matrix.fill_diagonal(Complex64::new(1.0 / dim as f64, 0.0));
        op
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn is_diagonal(&self) -> bool {
        let dim = self.dim();
        for c in 0..dim {
            for r in 0..dim {
                if r != c && self.matrix[(r, c)].norm() > 1e-14 {
                    return false;
                }
            }
        }
        true
    }

    /// Eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.is_diagonal() {
            return self.matrix.diagonal().iter().map(|z| z.re).collect();
        }
        let hermitian = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(hermitian).eigenvalues.iter().copied().collect()
    }

    /// Hermitian, unit trace and positive semidefinite within `tol`.
    pub fn is_density(&self, tol: f64) -> bool {
        (self.trace() - Complex64::new(1.0, 0.0)).norm() <= tol
            && self.hermiticity_defect() <= tol
            && self.eigenvalues().iter().all(|&x| x >= -tol)
    }
}

fn local_dim(cells: usize, factor: Factor) -> usize {
    match factor {
        Factor::CellSpin => 2 * cells,
        Factor::Cell => cells,
        Factor::Spin => 2,
    }
}

/// Occupation vectors: `left[i]` particles in cell `i`, `right[i]` in cell
/// `d/2 + i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    left: Vec<u32>,
    right: Vec<u32>,
}

impl Configuration {
    pub fn new(left: Vec<u32>, right: Vec<u32>, statistics: Statistics) -> Result<Self> {
        if left.len() != right.len() || left.is_empty() {
            return Err(Error::InvalidArgument(
                "both sides need the same, non-zero number of cells".into(),
            ));
        }
        if statistics == Statistics::Fermion && left.iter().chain(&right).any(|&k| k > 1) {
            return Err(Error::InvalidArgument(
                "fermionic configuration with a doubly occupied cell".into(),
            ));
        }
        Ok(Configuration { left, right })
    }

    pub fn cells(&self) -> usize {
        2 * self.left.len()
    }

    pub fn counts(&self) -> (u64, u64) {
        let sum = |v: &[u32]| v.iter().map(|&k| k as u64).sum();
        (sum(&self.left), sum(&self.right))
    }

    /// Every configuration with `n` particles on the left and `m` on the right.
    pub fn enumerate(n: u64, m: u64, cells: usize, statistics: Statistics) -> Result<Vec<Self>> {
        if cells < 2 || cells % 2 != 0 {
            return Err(Error::InvalidCellCount(cells as u64));
        }
        let half = cells / 2;
        let cap = if statistics == Statistics::Fermion { 1 } else { u32::MAX };
        let lefts = occupations(n as u32, half, cap);
        let rights = occupations(m as u32, half, cap);
        let mut out = Vec::with_capacity(lefts.len() * rights.len());
        for l in &lefts {
            for r in &rights {
                out.push(Configuration {
                    left: l.clone(),
                    right: r.clone(),
                });
            }
        }
        Ok(out)
    }

    /// Cell index of each particle, left particles first.
    fn particle_cells(&self) -> (Vec<usize>, Vec<usize>) {
        let half = self.left.len();
        let expand = |occ: &[u32], offset: usize| {
            occ.iter()
                .enumerate()
                .flat_map(|(i, &k)| std::iter::repeat_n(i + offset, k as usize))
                .collect::<Vec<_>>()
        };
        (expand(&self.left, 0), expand(&self.right, half))
    }
}

fn occupations(particles: u32, cells: usize, max_per_cell: u32) -> Vec<Vec<u32>> {
    if cells == 0 {
        return if particles == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=particles.min(max_per_cell) {
        for mut rest in occupations(particles - first, cells - 1, max_per_cell) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Resource bound for the brute-force computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Oracle {
    pub cap: u128,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle { cap: DEFAULT_CAP }
    }
}

impl Oracle {
    pub fn with_cap(cap: u128) -> Self {
        Oracle { cap }
    }

    /// Cap from [`CAP_ENV`] when set and parseable, else the default.
    pub fn from_env() -> Self {
        std::env::var(CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map_or_else(Oracle::default, Oracle::with_cap)
    }

    pub fn admits(&self, particles: u64, cells: u64) -> bool {
        full_dimension(particles, cells).is_some_and(|dim| dim <= self.cap)
    }

    fn check(&self, particles: u64, cells: u64) -> Result<()> {
        match full_dimension(particles, cells) {
            Some(dim) if dim <= self.cap => Ok(()),
            Some(dim) => Err(Error::ResourceCap {
                required: dim,
                cap: self.cap,
            }),
            None => Err(Error::ResourceCap {
                required: u128::MAX,
                cap: self.cap,
            }),
        }
    }

    pub fn symmetrized_state(
        &self,
        c: &Configuration,
        theta: SpinAngle,
        statistics: Statistics,
    ) -> Result<DenseOperator> {
        let (n, m) = c.counts();
        self.check(n + m, c.cells() as u64)?;
        let psi = symmetrized_vector(c, theta, statistics)?;
        let mut op = DenseOperator::zeros((n + m) as usize, c.cells(), Factor::CellSpin);
        add_projector(&mut op.matrix, &psi, 1.0);
        Ok(op)
    }

    /// Uniform mixture of the symmetrised states of every configuration.
    pub fn initial_thermal_state(
        &self,
        n: u64,
        m: u64,
        cells: u64,
        theta: SpinAngle,
        statistics: Statistics,
    ) -> Result<DenseOperator> {
        if n + m == 0 {
            return Err(Error::EmptySystem);
        }
        self.check(n + m, cells)?;
        let configs = Configuration::enumerate(n, m, cells as usize, statistics)?;
        if configs.is_empty() {
            return Err(Error::FermionCapacity {
                particles: n.max(m),
                cells: cells / 2,
            });
        }
        let weight = 1.0 / configs.len() as f64;
        let mut op = DenseOperator::zeros((n + m) as usize, cells as usize, Factor::CellSpin);
        for c in &configs {
            let psi = symmetrized_vector(c, theta, statistics)?;
            add_projector(&mut op.matrix, &psi, weight);
        }
        Ok(op)
    }

    pub fn oracle_delta_s_ignorant(
        &self,
        n: u64,
        m: u64,
        cells: u64,
        theta: SpinAngle,
        statistics: Statistics,
    ) -> Result<f64> {
        let rho = self.initial_thermal_state(n, m, cells, theta, statistics)?;
        let rho_x = spin_partial_trace(&rho)?;
        let twirled = twirl_spatial(&rho_x)?;
        Ok(von_neumann_entropy(&twirled)? - von_neumann_entropy(&rho_x)?)
    }

    /// Spatial multiplicity of each total spin inside the physical subspace.
    ///
    /// `tr[P_± (I ⊗ P^J)] = (1/N!) Σ_π sgn(π) tr(Π_x) tr(Π_s P^J)`, where
    /// `tr(Π_x)` is counted over cell basis states and the spin factor uses
    /// explicit projectors; dividing by `2J+1` gives the block dimension.
    pub fn sector_dimensions_bruteforce(
        &self,
        particles: u64,
        cells: u64,
        statistics: Statistics,
    ) -> Result<BTreeMap<HalfInt, u128>> {
        if particles == 0 {
            return Err(Error::EmptySystem);
        }
        self.check(particles, cells)?;
        let n = particles as usize;
        let projectors = total_spin_projectors(n)?;
        let spin_perms = permutation_tables(n, 2);
        let cell_perms = permutation_tables(n, cells as usize);
        let mut out = BTreeMap::new();
        for (j, proj) in &projectors {
            let mut acc = 0.0;
            for (cell_table, spin_table) in cell_perms.iter().zip(&spin_perms) {
                let sign = match statistics {
                    Statistics::Boson => 1.0,
                    Statistics::Fermion => cell_table.sign,
                };
                let fixed = cell_table.image.iter().enumerate().filter(|(a, b)| a == *b).count();
                let spin_trace: f64 = spin_table
                    .image
                    .iter()
                    .enumerate()
                    .map(|(s, &t)| proj.matrix[(s, t)].re)
                    .sum();
                acc += sign * fixed as f64 * spin_trace;
            }
            let multiplicity = acc / cell_perms.len() as f64;
            let dim = multiplicity / j.multiplicity() as f64;
            let rounded = dim.round();
            if (dim - rounded).abs() > 1e-6 || rounded < 0.0 {
                return Err(Error::Internal(format!(
                    "non-integer sector dimension {dim} at J = {j}"
                )));
            }
            out.insert(*j, rounded as u128);
        }
        Ok(out)
    }
}

fn full_dimension(particles: u64, cells: u64) -> Option<u128> {
    (2 * cells as u128).checked_pow(u32::try_from(particles).ok()?)
}

type SparseVector = Vec<(usize, Complex64)>;

fn spin_vector(theta: SpinAngle) -> [Complex64; 2] {
    let half = theta.radians() / 2.0;
    // the endpoints are set exactly so that θ = π gives a clean ↓
    let (c, s) = if theta == SpinAngle::ORTHOGONAL {
        (0.0, 1.0)
    } else if theta == SpinAngle::IDENTICAL {
        (1.0, 0.0)
    } else {
        (half.cos(), half.sin())
    };
    [Complex64::new(c, 0.0), Complex64::new(s, 0.0)]
}

fn symmetrized_vector(c: &Configuration, theta: SpinAngle, statistics: Statistics) -> Result<SparseVector> {
    let (left, right) = c.particle_cells();
    let local = 2 * c.cells();
    let up = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let tilted = spin_vector(theta);
    let factors: Vec<(usize, [Complex64; 2])> = left
        .iter()
        .map(|&cell| (cell, up))
        .chain(right.iter().map(|&cell| (cell, tilted)))
        .collect();
    let n = factors.len();
    let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
    for perm in (0..n).permutations(n) {
        let sign = match statistics {
            Statistics::Boson => 1.0,
            Statistics::Fermion => permutation_sign(&perm),
        };
        let mut terms: SparseVector = vec![(0, Complex64::new(sign, 0.0))];
        for &slot in &perm {
            let (cell, spin) = factors[slot];
            let mut next = Vec::with_capacity(terms.len() * 2);
            for &(idx, amp) in &terms {
                for (s, a) in spin.iter().enumerate() {
                    if a.norm() > 0.0 {
                        next.push((idx * local + cell * 2 + s, amp * a));
                    }
                }
            }
            terms = next;
        }
        for (idx, amp) in terms {
            *acc.entry(idx).or_default() += amp;
        }
    }
    let norm = acc.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(Error::InvalidArgument(
            "symmetrisation annihilates this configuration".into(),
        ));
    }
    Ok(acc
        .into_iter()
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(i, a)| (i, a / norm))
        .collect())
}

fn add_projector(matrix: &mut DMatrix<Complex64>, psi: &SparseVector, weight: f64) {
    for &(r, a) in psi {
        for &(c, b) in psi {
            matrix[(r, c)] += a * b.conj() * weight;
        }
    }
}

fn permutation_sign(perm: &[usize]) -> f64 {
    let inversions = (0..perm.len())
        .flat_map(|i| (i + 1..perm.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| perm[i] > perm[j])
        .count();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Action of one permutation on the basis of `N` copies of a local space:
/// `Π |a_0 … a_{N-1}⟩ = |a_{σ(0)} … a_{σ(N-1)}⟩`, stored as `image[a]`.
struct PermutationTable {
    sign: f64,
    image: Vec<usize>,
}

fn permutation_tables(particles: usize, local: usize) -> Vec<PermutationTable> {
    let dim = local.pow(particles as u32);
    (0..particles)
        .permutations(particles)
        .map(|perm| {
            let image = (0..dim)
                .map(|a| {
                    let digits = to_digits(a, particles, local);
                    perm.iter().fold(0, |acc, &p| acc * local + digits[p])
                })
                .collect();
            PermutationTable {
                sign: permutation_sign(&perm),
                image,
            }
        })
        .collect()
}

fn to_digits(mut index: usize, particles: usize, local: usize) -> Vec<usize> {
    let mut digits = vec![0; particles];
    for slot in digits.iter_mut().rev() {
        *slot = index % local;
        index /= local;
    }
    digits
}

/// `ρ_x = tr_s ρ`.
pub fn spin_partial_trace(rho: &DenseOperator) -> Result<DenseOperator> {
    if rho.factor != Factor::CellSpin {
        return Err(Error::InvalidArgument("operator has no spin factor".into()));
    }
    let (n, d) = (rho.particles, rho.cells);
    let spatial = d.pow(n as u32);
    let spins = 1usize << n;
    // full index of (cell string a, spin string s)
    let full: Vec<usize> = (0..spatial)
        .flat_map(|a| {
            let cells = to_digits(a, n, d);
            (0..spins).map(move |s| {
                let spin = to_digits(s, n, 2);
                cells
                    .iter()
                    .zip(&spin)
                    .fold(0, |acc, (&c, &sp)| acc * 2 * d + c * 2 + sp)
            })
        })
        .collect();
    if rho.dim() != spatial * spins {
        return Err(Error::InvalidArgument("operator dimension does not match its layout".into()));
    }
    let mut out = DenseOperator::zeros(n, d, Factor::Cell);
    for b in 0..spatial {
        for a in 0..spatial {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..spins {
                acc += rho.matrix[(full[a * spins + s], full[b * spins + s])];
            }
            out.matrix[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Eigenprojectors of the total spin `S²` on `(C²)^⊗N`, keyed by `J`.
///
/// `S² = 3N/4 - N(N-1)/4 + Σ_{i<j} SWAP_ij`.
pub fn total_spin_projectors(particles: usize) -> Result<BTreeMap<HalfInt, DenseOperator>> {
    if particles == 0 || particles > 16 {
        return Err(Error::InvalidArgument(format!(
            "spin projectors need 1 <= N <= 16, got {particles}"
        )));
    }
    let dim = 1usize << particles;
    let nf = particles as f64;
    let mut casimir = DMatrix::<f64>::identity(dim, dim) * (0.75 * nf - nf * (nf - 1.0) / 4.0);
    for i in 0..particles {
        for j in i + 1..particles {
            for s in 0..dim {
                let bi = (s >> i) & 1;
                let bj = (s >> j) & 1;
                let t = if bi == bj { s } else { s ^ (1 << i) ^ (1 << j) };
                casimir[(t, s)] += 1.0;
            }
        }
    }
    let eig = SymmetricEigen::new(casimir);
    let mut out: BTreeMap<HalfInt, DenseOperator> = BTreeMap::new();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let j = (-1.0 + (1.0 + 4.0 * lambda).max(0.0).sqrt()) / 2.0;
        let twice = (2.0 * j).round() as i64;
        let snapped = HalfInt::from_twice(twice);
        let target = snapped.value() * (snapped.value() + 1.0);
        if (lambda - target).abs() > SNAP_TOLERANCE || (particles as i64 - twice) % 2 != 0 {
            return Err(Error::Internal(format!("S² eigenvalue {lambda} is not J(J+1)")));
        }
        let v = eig.eigenvectors.column(k);
        let entry = out
            .entry(snapped)
            .or_insert_with(|| DenseOperator::zeros(particles, 1, Factor::Spin));
        for c in 0..dim {
            for r in 0..dim {
                entry.matrix[(r, c)] += Complex64::new(v[r] * v[c], 0.0);
            }
        }
    }
    Ok(out)
}

/// `p_J = tr[ρ (I_cells ⊗ P^J)]` for a state on the full space.
pub fn sector_probabilities(rho: &DenseOperator) -> Result<BTreeMap<HalfInt, f64>> {
    if rho.factor != Factor::CellSpin {
        return Err(Error::InvalidArgument("operator has no spin factor".into()));
    }
    let (n, d) = (rho.particles, rho.cells);
    let spatial = d.pow(n as u32);
    let spins = 1usize << n;
    let full = |a: usize, s: usize| {
        let cells = to_digits(a, n, d);
        let spin = to_digits(s, n, 2);
        cells.iter().zip(&spin).fold(0, |acc, (&c, &sp)| acc * 2 * d + c * 2 + sp)
    };
    let index: Vec<Vec<usize>> = (0..spatial).map(|a| (0..spins).map(|s| full(a, s)).collect()).collect();
    let mut out = BTreeMap::new();
    for (j, proj) in total_spin_projectors(n)? {
        let mut acc = Complex64::new(0.0, 0.0);
        for row in &index {
            for (s, &fs) in row.iter().enumerate() {
                for (t, &ft) in row.iter().enumerate() {
                    acc += rho.matrix[(fs, ft)] * proj.matrix[(t, s)];
                }
            }
        }
        out.insert(j, acc.re);
    }
    Ok(out)
}

/// Haar twirl `∫ du u^⊗N ρ u^{†⊗N}` of a spatial operator, computed as the
/// orthogonal projection onto the span of the cell permutation operators.
pub fn twirl_spatial(rho_x: &DenseOperator) -> Result<DenseOperator> {
    if rho_x.factor != Factor::Cell {
        return Err(Error::InvalidArgument("twirl acts on spatial operators only".into()));
    }
    let (n, d) = (rho_x.particles, rho_x.cells);
    let tables = permutation_tables(n, d);
    let k = tables.len();
    let gram = DMatrix::<f64>::from_fn(k, k, |s, t| {
        tables[s]
            .image
            .iter()
            .zip(&tables[t].image)
            .filter(|(a, b)| a == b)
            .count() as f64
    });
    // t_σ = tr(Π_σ† ρ) = Σ_a ρ[Π_σ a, a]
    let overlaps: Vec<Complex64> = tables
        .iter()
        .map(|p| p.image.iter().enumerate().map(|(a, &pa)| rho_x.matrix[(pa, a)]).sum())
        .collect();
    let pinv = gram
        .svd(true, true)
        .pseudo_inverse(1e-9)
        .map_err(|e| Error::Internal(format!("Gram pseudo-inverse failed: {e}")))?;
    let re = &pinv * DVector::from_iterator(k, overlaps.iter().map(|z| z.re));
    let im = &pinv * DVector::from_iterator(k, overlaps.iter().map(|z| z.im));
    let mut out = DenseOperator::zeros(n, d, Factor::Cell);
    for (idx, p) in tables.iter().enumerate() {
        let c = Complex64::new(re[idx], im[idx]);
        for (a, &pa) in p.image.iter().enumerate() {
            out.matrix[(pa, a)] += c;
        }
    }
    let trace_in = rho_x.trace();
    if (out.trace() - trace_in).norm() > DENSITY_TOLERANCE
        || out.hermiticity_defect() > DENSITY_TOLERANCE
        || out.eigenvalues().iter().any(|&x| x < -DENSITY_TOLERANCE)
    {
        return Err(Error::Internal("twirl output is not a density operator".into()));
    }
    Ok(out)
}

/// `S(ρ) = -tr ρ ln ρ`; eigenvalues in `[-1e-10, 0)` count as zero.
pub fn von_neumann_entropy(rho: &DenseOperator) -> Result<f64> {
    let mut terms = Vec::new();
    for lambda in rho.eigenvalues() {
        if lambda < NEGATIVE_EIGENVALUE {
            return Err(Error::InvalidArgument(format!("negative eigenvalue {lambda}")));
        }
        if lambda > 0.0 {
            terms.push(-lambda * lambda.ln());
        }
    }
    Ok(crate::exactmath::compensated_sum(terms))
}

/// One point of the formula-versus-oracle grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCase {
    pub n: u64,
    pub m: u64,
    pub d: u64,
    pub theta: SpinAngle,
    pub statistics: Statistics,
}

/// The five spin angles checked at every grid point.
pub fn grid_angles() -> [SpinAngle; 5] {
    [0.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, PI].map(|t| SpinAngle::new(t).expect("angle in range"))
}

/// Every `(n, m, d, θ, statistics)` with `(2d)^N` within the cap, ordered by
/// `N`, `d`, `n`, statistics and angle.
pub fn verification_grid(oracle: &Oracle) -> Vec<OracleCase> {
    let mut out = Vec::new();
    let mut total = 1u64;
    while oracle.admits(total, 2) {
        let mut d = 2u64;
        while oracle.admits(total, d) {
            for n in (0..=total).rev() {
                let m = total - n;
                for statistics in [Statistics::Boson, Statistics::Fermion] {
                    if statistics == Statistics::Fermion && n.max(m) > d / 2 {
                        continue;
                    }
                    for theta in grid_angles() {
                        out.push(OracleCase {
                            n,
                            m,
                            d,
                            theta,
                            statistics,
                        });
                    }
                }
            }
            d += 2;
        }
        total += 1;
    }
    out
}

/// `(N, d)` pairs within the cap, for the sector-dimension comparison.
pub fn dimension_grid(oracle: &Oracle) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut total = 1u64;
    while oracle.admits(total, 2) {
        let mut d = 2u64;
        while oracle.admits(total, d) {
            out.push((total, d));
            d += 2;
        }
        total += 1;
    }
    out
}

/// Oracle entropy change and sector weights for one case.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub delta_s_ignorant: f64,
    pub sector_probabilities: BTreeMap<HalfInt, f64>,
}

impl Oracle {
    /// Builds the initial state once and derives both the entropy change and
    /// the sector weights from it.
    pub fn run_case(&self, case: &OracleCase) -> Result<OracleOutcome> {
        let rho = self.initial_thermal_state(case.n, case.m, case.d, case.theta, case.statistics)?;
        let probabilities = sector_probabilities(&rho)?;
        let rho_x = spin_partial_trace(&rho)?;
        drop(rho);
        let twirled = twirl_spatial(&rho_x)?;
        Ok(OracleOutcome {
            delta_s_ignorant: von_neumann_entropy(&twirled)? - von_neumann_entropy(&rho_x)?,
            sector_probabilities: probabilities,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn config(left: &[u32], right: &[u32], stat: Statistics) -> Configuration {
        Configuration::new(left.to_vec(), right.to_vec(), stat).unwrap()
    }

    #[test]
    fn two_particle_state() {
        let o = Oracle::default();
        let c = config(&[1], &[1], Statistics::Boson);
        let rho = o.symmetrized_state(&c, SpinAngle::ORTHOGONAL, Statistics::Boson).unwrap();
        // |12⟩|↑↓⟩ has index (0*2+0)*4 + (1*2+1) = 3, |21⟩|↓↑⟩ is (1*2+1)*4 + 0 = 12
        let h = 0.5;
        for (r, c) in [(3, 3), (3, 12), (12, 3), (12, 12)] {
            assert!(close(rho.matrix[(r, c)].re, h, 1e-15));
        }
        assert!(close(rho.trace().re, 1.0, 1e-15));
        assert!(rho.is_density(1e-12));
    }

    #[test]
    fn identical_spins_factorise() {
        let o = Oracle::default();
        let c = config(&[1, 0], &[0, 1], Statistics::Fermion);
        let rho = o.symmetrized_state(&c, SpinAngle::IDENTICAL, Statistics::Fermion).unwrap();
        let rho_x = spin_partial_trace(&rho).unwrap();
        assert!(close(von_neumann_entropy(&rho_x).unwrap(), 0.0, 1e-10));
        let probs = sector_probabilities(&rho).unwrap();
        assert!(close(probs[&HalfInt::from_int(1)], 1.0, 1e-12));
    }

    #[test]
    fn fermion_double_occupancy_rejected() {
        assert!(Configuration::new(vec![2], vec![0], Statistics::Fermion).is_err());
        assert!(Configuration::new(vec![2], vec![0], Statistics::Boson).is_ok());
    }

    #[test]
    fn thermal_state_examples() {
        let o = Oracle::default();
        let rho = o
            .initial_thermal_state(1, 1, 2, SpinAngle::ORTHOGONAL, Statistics::Boson)
            .unwrap();
        let purity = (&rho.matrix * &rho.matrix).trace().re;
        assert!(close(purity, 1.0, 1e-12));
        assert_eq!(Configuration::enumerate(1, 1, 4, Statistics::Boson).unwrap().len(), 4);
        let rho = o
            .initial_thermal_state(1, 1, 4, SpinAngle::ORTHOGONAL, Statistics::Boson)
            .unwrap();
        assert!(close(rho.trace().re, 1.0, 1e-12));
        assert!(close(von_neumann_entropy(&rho).unwrap(), 2.0 * LN_2, 1e-10));
    }

    #[test]
    fn partial_trace_examples() {
        let o = Oracle::default();
        let c = config(&[1], &[0], Statistics::Boson);
        let rho = o.symmetrized_state(&c, SpinAngle::ORTHOGONAL, Statistics::Boson).unwrap();
        let rho_x = spin_partial_trace(&rho).unwrap();
        assert!(close(rho_x.matrix[(0, 0)].re, 1.0, 1e-15));
        assert!(close(rho_x.matrix[(1, 1)].norm(), 0.0, 1e-15));

        let c = config(&[1], &[1], Statistics::Boson);
        let rho = o.symmetrized_state(&c, SpinAngle::ORTHOGONAL, Statistics::Boson).unwrap();
        let rho_x = spin_partial_trace(&rho).unwrap();
        assert!(close(rho_x.trace().re, 1.0, 1e-12));
        // ½|12⟩⟨12| + ½|21⟩⟨21| = ½ (symmetric pure) + ½ (antisymmetric pure)
        assert!(close(von_neumann_entropy(&rho_x).unwrap(), LN_2, 1e-12));
        assert!(spin_partial_trace(&rho_x).is_err());
    }

    #[test]
    fn spin_projector_ranks() {
        let p2 = total_spin_projectors(2).unwrap();
        assert!(close(p2[&HalfInt::from_int(0)].trace().re, 1.0, 1e-12));
        assert!(close(p2[&HalfInt::from_int(1)].trace().re, 3.0, 1e-12));
        let p3 = total_spin_projectors(3).unwrap();
        assert!(close(p3[&HalfInt::from_twice(3)].trace().re, 4.0, 1e-12));
        assert!(close(p3[&HalfInt::from_twice(1)].trace().re, 4.0, 1e-12));
        for n in 1..=6 {
            let total: f64 = total_spin_projectors(n).unwrap().values().map(|p| p.trace().re).sum();
            assert!(close(total, (1u64 << n) as f64, 1e-9));
        }
    }

    #[test]
    fn sector_probability_examples() {
        let o = Oracle::default();
        let rho = o
            .initial_thermal_state(1, 1, 2, SpinAngle::ORTHOGONAL, Statistics::Boson)
            .unwrap();
        let p = sector_probabilities(&rho).unwrap();
        assert!(close(p[&HalfInt::from_int(0)], 0.5, 1e-10));
        assert!(close(p[&HalfInt::from_int(1)], 0.5, 1e-10));
        let rho = o
            .initial_thermal_state(2, 1, 4, SpinAngle::ORTHOGONAL, Statistics::Boson)
            .unwrap();
        let p = sector_probabilities(&rho).unwrap();
        assert!(close(p[&HalfInt::from_twice(3)], 1.0 / 3.0, 1e-10));
        assert!(close(p[&HalfInt::from_twice(1)], 2.0 / 3.0, 1e-10));
        let rho = o
            .initial_thermal_state(2, 1, 4, SpinAngle::IDENTICAL, Statistics::Boson)
            .unwrap();
        let p = sector_probabilities(&rho).unwrap();
        assert!(close(p[&HalfInt::from_twice(3)], 1.0, 1e-10));
    }

    #[test]
    fn bruteforce_dimension_examples() {
        let o = Oracle::default();
        let b = o.sector_dimensions_bruteforce(2, 2, Statistics::Boson).unwrap();
        assert_eq!(b[&HalfInt::from_int(0)], 1);
        assert_eq!(b[&HalfInt::from_int(1)], 3);
        let f = o.sector_dimensions_bruteforce(2, 4, Statistics::Fermion).unwrap();
        assert_eq!(f[&HalfInt::from_int(0)], 10);
        assert_eq!(f[&HalfInt::from_int(1)], 6);
    }

    #[test]
    fn cap_is_enforced() {
        let o = Oracle::with_cap(64);
        assert!(matches!(
            o.initial_thermal_state(2, 1, 4, SpinAngle::ORTHOGONAL, Statistics::Boson),
            Err(Error::ResourceCap { required: 512, cap: 64 })
        ));
        assert!(o.admits(2, 4));
        assert!(!o.admits(2, 6));
    }

    #[test]
    fn grid_shape() {
        let pairs = dimension_grid(&Oracle::default());
        assert!(pairs.contains(&(1, 750)) && !pairs.contains(&(1, 752)));
        assert!(pairs.contains(&(2, 18)) && !pairs.contains(&(2, 20)));
        assert!(pairs.contains(&(3, 4)) && !pairs.contains(&(3, 6)));
        assert!(pairs.contains(&(4, 2)) && !pairs.contains(&(4, 4)));
        assert!(pairs.contains(&(5, 2)) && !pairs.iter().any(|&(n, _)| n >= 6));
        let small: Vec<_> = verification_grid(&Oracle::with_cap(64))
            .iter()
            .map(|c| (c.n + c.m, c.d))
            .unique()
            .collect();
        assert_eq!(small, vec![(1, 2), (1, 4), (1, 6), (1, 8), (1, 10), (1, 12), (1, 14), (1, 16), (1, 18), (1, 20), (1, 22), (1, 24), (1, 26), (1, 28), (1, 30), (1, 32), (2, 2), (2, 4), (3, 2)]);
    }

    #[test]
    fn twirl_properties() {
        let o = Oracle::default();
        let mixed = DenseOperator::maximally_mixed(2, 3);
        let t = twirl_spatial(&mixed).unwrap();
        assert!((&t.matrix - &mixed.matrix).iter().all(|z| z.norm() < 1e-10));

        let rho = o
            .initial_thermal_state(2, 1, 4, SpinAngle::new(1.0).unwrap(), Statistics::Boson)
            .unwrap();
        let rho_x = spin_partial_trace(&rho).unwrap();
        let once = twirl_spatial(&rho_x).unwrap();
        let twice = twirl_spatial(&once).unwrap();
        assert!((&twice.matrix - &once.matrix).iter().all(|z| z.norm() < 1e-9));
        assert!(close(once.trace().re, 1.0, 1e-10));
        for p in permutation_tables(3, 4) {
            let perm = DMatrix::<Complex64>::from_fn(64, 64, |r, c| {
                if p.image[c] == r {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let commutator = &perm * &once.matrix - &once.matrix * &perm;
            assert!(commutator.iter().all(|z| z.norm() < 1e-9));
        }
        assert!(von_neumann_entropy(&once).unwrap() >= von_neumann_entropy(&rho_x).unwrap() - 1e-9);
    }

    #[test]
    fn twirl_symmetric_pure_state() {
        // (|01⟩ + |10⟩)/√2 on two qutrit cells twirls to the uniform state on
        // the 6-dimensional symmetric subspace
        let mut rho = DenseOperator::zeros(2, 3, Factor::Cell);
        for (r, c) in [(1, 1), (1, 3), (3, 1), (3, 3)] {
            rho.matrix[(r, c)] = Complex64::new(0.5, 0.0);
        }
        let t = twirl_spatial(&rho).unwrap();
        let sym = DMatrix::<Complex64>::from_fn(9, 9, |r, c| {
            let swap = |i: usize| (i % 3) * 3 + i / 3;
            let mut v = 0.0;
            if r == c {
                v += 0.5;
            }
            if swap(c) == r {
                v += 0.5;
            }
            Complex64::new(v / 6.0, 0.0)
        });
        assert!((&t.matrix - &sym).iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn entropy_examples() {
        let o = Oracle::default();
        let c = config(&[1, 0], &[0, 1], Statistics::Boson);
        let pure = o.symmetrized_state(&c, SpinAngle::new(0.7).unwrap(), Statistics::Boson).unwrap();
        assert!(close(von_neumann_entropy(&pure).unwrap(), 0.0, 1e-10));
        for k in [1usize, 2, 3, 5] {
            let m = DenseOperator::maximally_mixed(1, k);
            assert!(close(von_neumann_entropy(&m).unwrap(), (k as f64).ln(), 1e-10));
        }
        let mut bad = DenseOperator::zeros(1, 2, Factor::Cell);
        bad.matrix[(0, 0)] = Complex64::new(1.5, 0.0);
        bad.matrix[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(von_neumann_entropy(&bad).is_err());
    }

    #[test]
    fn ignorant_examples() {
        let o = Oracle::default();
        let v = o
            .oracle_delta_s_ignorant(1, 1, 2, SpinAngle::ORTHOGONAL, Statistics::Boson)
            .unwrap();
        assert!(close(v, 0.5 * 0.75f64.ln() + LN_2, 1e-8));
        let b = o
            .oracle_delta_s_ignorant(1, 1, 4, SpinAngle::ORTHOGONAL, Statistics::Boson)
            .unwrap();
        let f = o
            .oracle_delta_s_ignorant(1, 1, 4, SpinAngle::ORTHOGONAL, Statistics::Fermion)
            .unwrap();
        assert!(close(b, f, 1e-8));
        assert!(close(b, 0.5 * (15.0f64 / 16.0).ln() + LN_2, 1e-8));
        let iden = o
            .oracle_delta_s_ignorant(1, 1, 4, SpinAngle::IDENTICAL, Statistics::Boson)
            .unwrap();
        assert!(close(iden, 1.25f64.ln() + LN_2, 1e-8));
    }
}
