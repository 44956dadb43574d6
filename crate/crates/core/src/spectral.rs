//! Finite-difference (tight-binding) Hamiltonian on the grid and its
//! lowest eigenpairs.
//!
//! Eigenvalues come from Sturm-sequence bisection; eigenvectors from
//! inverse iteration, orthogonalized against every previously converged
//! vector of the same block so that tunneling doublets and sextets stay
//! distinct.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::tridiagonal::{self, ShiftedLu};
use crate::units::UnitSystem;
use crate::wavefunction::{inner_product, Wavefunction};

/// Seed for the inverse-iteration starting vectors unless overridden.
pub const DEFAULT_SEED: u64 = 20_240_601;

const BISECTION_REL_WIDTH: f64 = 1e-12;
const INVERSE_ITERATION_REL_TOL: f64 = 1e-10;
const ACCEPTED_REL_RESIDUAL: f64 = 1e-8;

/// diag = 2t + V, off-diagonal = −t, t = ħ²/(2m h²).
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalHamiltonian {
    diagonal: Vec<f64>,
    hopping: f64,
    grid: Grid,
    units: UnitSystem,
}

pub fn assemble(potential: &[f64], grid: &Grid, units: &UnitSystem) -> Result<TridiagonalHamiltonian> {
    if potential.len() != grid.points() {
        return Err(Error::GridMismatch(format!(
            "{} potential samples for a grid of {} points",
            potential.len(),
            grid.points()
        )));
    }
    units.validate()?;
    let h = grid.spacing();
    let hopping = units.kinetic_scale() / (h * h);
    Ok(TridiagonalHamiltonian {
        diagonal: potential.iter().map(|v| 2.0 * hopping + v).collect(),
        hopping,
        grid: *grid,
        units: *units,
    })
}

impl TridiagonalHamiltonian {
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// The constant off-diagonal element, −t.
    pub fn off_diagonal(&self) -> f64 {
        -self.hopping
    }

    /// t = ħ²/(2m h²) in eV.
    pub fn hopping(&self) -> f64 {
        self.hopping
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn units(&self) -> &UnitSystem {
        &self.units
    }

    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }

    fn off_diagonal_vec(&self) -> Vec<f64> {
        vec![self.off_diagonal(); self.diagonal.len() - 1]
    }

    pub fn norm(&self) -> f64 {
        tridiagonal::max_row_sum(&self.diagonal, &self.off_diagonal_vec())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        tridiagonal::apply(&self.diagonal, &self.off_diagonal_vec(), x)
    }

    pub fn apply_complex(&self, psi: &Wavefunction) -> Vec<Complex64> {
        let a = psi.amplitudes();
        let re: Vec<f64> = a.iter().map(|z| z.re).collect();
        let im: Vec<f64> = a.iter().map(|z| z.im).collect();
        self.apply(&re)
            .into_iter()
            .zip(self.apply(&im))
            .map(|(r, i)| Complex64::new(r, i))
            .collect()
    }

    /// Number of eigenvalues strictly below `energy`.
    pub fn count_below(&self, energy: f64) -> usize {
        tridiagonal::sturm_count(&self.diagonal, &self.off_diagonal_vec(), energy)
    }

    /// SHA-256 over the grid, units and matrix entries.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.grid.length().to_le_bytes());
        hasher.update((self.grid.points() as u64).to_le_bytes());
        hasher.update(self.units.hbar.to_le_bytes());
        hasher.update(self.units.hbar2_over_2me.to_le_bytes());
        hasher.update(self.units.effective_mass_ratio.to_le_bytes());
        hasher.update(self.hopping.to_le_bytes());
        for d in &self.diagonal {
            hasher.update(d.to_le_bytes());
        }
        hex(&hasher.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub seed: u64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverStats {
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    pub bisection_steps: Vec<usize>,
    /// Adjacent eigenvalues that bisection could not separate in f64.
    pub unresolved_splittings: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    grid: Grid,
    units: UnitSystem,
    energies: Vec<f64>,
    states: Vec<Wavefunction>,
    fingerprint: String,
    stats: SolverStats,
}

impl EigenSolution {
    /// Reassembles a solution from stored parts, e.g. a cache entry.
    /// Call [`EigenSolution::verify`] before trusting it.
    pub fn from_parts(
        grid: Grid,
        units: UnitSystem,
        energies: Vec<f64>,
        vectors: Vec<Vec<f64>>,
        fingerprint: String,
        stats: SolverStats,
    ) -> Result<Self> {
        if energies.len() != vectors.len() || energies.is_empty() {
            return Err(Error::InvalidBasis(format!(
                "{} energies for {} eigenvectors",
                energies.len(),
                vectors.len()
            )));
        }
        let states = vectors
            .into_iter()
            .map(|v| Wavefunction::from_raw(grid, v.into_iter().map(|x| Complex64::new(x, 0.0)).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            units,
            energies,
            states,
            fingerprint,
            stats,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn units(&self) -> &UnitSystem {
        &self.units
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn states(&self) -> &[Wavefunction] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    /// Eigenvector `n` (0-based) as real amplitudes.
    pub fn real_state(&self, n: usize) -> Vec<f64> {
        self.states[n].amplitudes().iter().map(|z| z.re).collect()
    }

    /// Largest |⟨i|j⟩ − δᵢⱼ| over all pairs.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.states.iter().enumerate() {
            for (j, b) in self.states.iter().enumerate().skip(i) {
                let o = inner_product(a, b).expect("states share a grid");
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((o - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// ‖Hφᵢ − Eᵢφᵢ‖ under the discrete norm, for every state.
    pub fn residuals(&self, hamiltonian: &TridiagonalHamiltonian) -> Result<Vec<f64>> {
        self.grid.ensure_compatible(hamiltonian.grid())?;
        let h = self.grid.spacing();
        Ok((0..self.len())
            .map(|n| {
                let v = self.real_state(n);
                let hv = hamiltonian.apply(&v);
                let e = self.energies[n];
                (hv.iter().zip(&v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>() * h).sqrt()
            })
            .collect())
    }

    /// Residual tolerance guaranteed by the solver for this spectrum.
    pub fn residual_tolerance(&self, hamiltonian: &TridiagonalHamiltonian) -> f64 {
        accepted_residual(self.energies.last().copied().unwrap_or(0.0), hamiltonian.norm())
    }

    /// Re-checks orthonormality (1e-10), residuals and the ordering of a
    /// solution against the Hamiltonian it claims to diagonalize.
    pub fn verify(&self, hamiltonian: &TridiagonalHamiltonian) -> Result<()> {
        if self.fingerprint != hamiltonian.fingerprint() {
            return Err(Error::InvalidBasis("fingerprint does not match the Hamiltonian".into()));
        }
        if self.energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidBasis("energies are not ascending".into()));
        }
        let ortho = self.orthonormality_error();
        if !(ortho <= 1e-10) {
            return Err(Error::InvalidBasis(format!("orthonormality error {ortho:.3e}")));
        }
        let tolerance = self.residual_tolerance(hamiltonian);
        let residuals = self.residuals(hamiltonian)?;
        if let Some((state, &worst)) = residuals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .filter(|(_, &r)| !(r < tolerance))
        {
            return Err(Error::Convergence {
                state,
                worst_residual: worst,
                tolerance,
            });
        }
        Ok(())
    }
}

/// The 1e-8·E_K guarantee, floored at the f64 resolution of the matrix.
fn accepted_residual(top_energy: f64, norm: f64) -> f64 {
    (ACCEPTED_REL_RESIDUAL * top_energy.abs()).max(64.0 * f64::EPSILON * norm)
}

fn target_residual(top_energy: f64, norm: f64) -> f64 {
    (INVERSE_ITERATION_REL_TOL * top_energy.abs()).max(16.0 * f64::EPSILON * norm)
}

pub fn lowest_eigenpairs(hamiltonian: &TridiagonalHamiltonian, k: usize) -> Result<EigenSolution> {
    lowest_eigenpairs_with(hamiltonian, k, &SolverOptions::default())
}

/// A symmetric tridiagonal block the solver works on.
#[derive(Debug, Clone)]
struct Block {
    diag: Vec<f64>,
    off: Vec<f64>,
}

/// How block vectors map back onto the full grid.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Embedding {
    Full,
    Even,
    Odd,
}

impl Block {
    fn bisect(&self, count: usize, norm: f64) -> Vec<(f64, usize)> {
        let (lo, hi) = tridiagonal::gershgorin_bounds(&self.diag, &self.off);
        let pad = f64::EPSILON * norm + f64::MIN_POSITIVE;
        let abs_width = 1e-3 * f64::EPSILON * norm;
        (0..count)
            .into_par_iter()
            .map(|j| tridiagonal::bisect_eigenvalue(&self.diag, &self.off, j, lo - pad, hi + pad, BISECTION_REL_WIDTH, abs_width))
            .collect()
    }
}

/// Splits a mirror-symmetric Hamiltonian into its even and odd blocks.
///
/// For M = 2m the blocks are the leading m×m corner with the last diagonal
/// entry shifted by ∓t. For M = 2m + 1 the odd block is the leading m×m
/// corner and the even block adds the centre node, coupled by −√2·t in the
/// variable z = v_centre/√2.
fn parity_blocks(h: &TridiagonalHamiltonian) -> Option<(Block, Block)> {
    let d = h.diagonal();
    let n = d.len();
    if n < 3 || (0..n / 2).any(|i| d[i] != d[n - 1 - i]) {
        return None;
    }
    let e = h.off_diagonal();
    let m = n / 2;
    if n.is_multiple_of(2) {
        let mut even = d[..m].to_vec();
        let mut odd = even.clone();
        even[m - 1] += e;
        odd[m - 1] -= e;
        let off = vec![e; m - 1];
        Some((Block { diag: even, off: off.clone() }, Block { diag: odd, off }))
    } else {
        let even = d[..=m].to_vec();
        let mut even_off = vec![e; m];
        even_off[m - 1] = std::f64::consts::SQRT_2 * e;
        let odd = d[..m].to_vec();
        let odd_off = vec![e; m - 1];
        Some((Block { diag: even, off: even_off }, Block { diag: odd, off: odd_off }))
    }
}

fn embed(v: &[f64], embedding: Embedding, n: usize) -> Vec<f64> {
    if embedding == Embedding::Full {
        return v.to_vec();
    }
    let mut full = vec![0.0; n];
    let m = n / 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if embedding == Embedding::Even { 1.0 } else { -1.0 };
    for i in 0..m {
        full[i] = s * v[i];
        full[n - 1 - i] = sign * s * v[i];
    }
    if n % 2 == 1 && embedding == Embedding::Even {
        full[m] = v[m];
    }
    full
}

/// Lowest `k` eigenpairs, ascending.
///
/// Mirror-symmetric matrices are solved in their even and odd blocks and
/// the results interleaved even, odd, even, … (the n-th eigenvector of a
/// persymmetric Jacobi matrix has parity (−1)^(n−1)), which keeps tunneling
/// multiplets apart even when their splitting is below f64 resolution.
pub fn lowest_eigenpairs_with(
    hamiltonian: &TridiagonalHamiltonian,
    k: usize,
    options: &SolverOptions,
) -> Result<EigenSolution> {
    let n = hamiltonian.dimension();
    if k == 0 || k > n {
        return Err(Error::Domain(format!("requested {k} eigenpairs from a {n}-point grid")));
    }
    let norm = hamiltonian.norm();

    let plan: Vec<(Block, Embedding, usize)> = match parity_blocks(hamiltonian) {
        Some((even, odd)) => vec![(even, Embedding::Even, k.div_ceil(2)), (odd, Embedding::Odd, k / 2)],
        None => vec![(
            Block {
                diag: hamiltonian.diagonal().to_vec(),
                off: vec![hamiltonian.off_diagonal(); n - 1],
            },
            Embedding::Full,
            k,
        )],
    };

    // (block, local index) in ascending global order
    let bisected: Vec<Vec<(f64, usize)>> = plan.iter().map(|(b, _, count)| b.bisect(*count, norm)).collect();
    let order: Vec<(usize, usize)> = if plan.len() == 2 {
        (0..k).map(|g| (g % 2, g / 2)).collect()
    } else {
        (0..k).map(|g| (0, g)).collect()
    };
    let mut energies: Vec<f64> = order.iter().map(|&(b, j)| bisected[b][j].0).collect();
    let bisection_steps = order.iter().map(|&(b, j)| bisected[b][j].1).collect();
    for j in 1..k {
        if energies[j] < energies[j - 1] {
            energies[j] = energies[j - 1];
        }
    }
    let unresolved_splittings = energies.windows(2).filter(|w| w[1] <= w[0]).count();

    let top = energies[k - 1];
    let target = target_residual(top, norm);
    let accepted = accepted_residual(top, norm);
    let pivot_floor = f64::EPSILON * norm;
    let spacing = hamiltonian.grid().spacing();

    let mut vectors: Vec<Vec<Vec<f64>>> = vec![Vec::new(); plan.len()];
    let mut rngs: Vec<ChaCha8Rng> = (0..plan.len())
        .map(|b| ChaCha8Rng::seed_from_u64(options.seed.wrapping_add(b as u64)))
        .collect();
    let mut full_vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    let mut iterations = Vec::with_capacity(k);

    for (g, &(b, _)) in order.iter().enumerate() {
        let (block, embedding, _) = &plan[b];
        let (v, used) = inverse_iteration(block, energies[g], &vectors[b], &mut rngs[b], options, target, pivot_floor);
        let mut full = embed(&v, *embedding, n);
        let residual = euclidean_residual(hamiltonian, &full, energies[g]);
        if !(residual < accepted) {
            return Err(Error::Convergence {
                state: g,
                worst_residual: residual,
                tolerance: accepted,
            });
        }
        vectors[b].push(v);
        fix_sign(&mut full, spacing);
        full_vectors.push(full);
        residuals.push(residual);
        iterations.push(used);
    }

    let grid = *hamiltonian.grid();
    let scale = 1.0 / spacing.sqrt();
    let states = full_vectors
        .into_iter()
        .map(|v| Wavefunction::from_raw(grid, v.into_iter().map(|x| Complex64::new(x * scale, 0.0)).collect()))
        .collect::<Result<Vec<_>>>()?;

    Ok(EigenSolution {
        grid,
        units: *hamiltonian.units(),
        energies,
        states,
        fingerprint: hamiltonian.fingerprint(),
        stats: SolverStats {
            residuals,
            iterations,
            bisection_steps,
            unresolved_splittings,
        },
    })
}

/// Inverse iteration at a fixed shift, re-orthogonalized against the
/// block's converged vectors after every solve. Returns the best unit
/// vector seen and the number of iterations used.
fn inverse_iteration(
    block: &Block,
    shift: f64,
    converged: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
    options: &SolverOptions,
    target: f64,
    pivot_floor: f64,
) -> (Vec<f64>, usize) {
    let n = block.diag.len();
    let lu = ShiftedLu::factor(&block.diag, &block.off, shift, pivot_floor);
    let mut x = random_start(rng, n, converged);
    let mut best = (f64::INFINITY, x.clone());
    let mut extra = 0;
    let mut used = 0;
    for it in 1..=options.max_iterations.max(1) {
        used = it;
        lu.solve_in_place(&mut x);
        orthogonalize(&mut x, converged);
        if !rescale(&mut x) {
            x = random_start(rng, n, converged);
            continue;
        }
        let hx = tridiagonal::apply(&block.diag, &block.off, &x);
        let r = hx.iter().zip(&x).map(|(a, b)| (a - shift * b).powi(2)).sum::<f64>().sqrt();
        if r < best.0 {
            best = (r, x.clone());
        }
        if r <= target {
            // one extra sweep after reaching the target
            extra += 1;
            if extra > 1 {
                break;
            }
        }
    }
    (best.1, used)
}

fn random_start(rng: &mut ChaCha8Rng, n: usize, previous: &[Vec<f64>]) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        orthogonalize(&mut x, previous);
        if rescale(&mut x) {
            return x;
        }
    }
}

/// Two passes of modified Gram–Schmidt against unit vectors.
fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let proj: f64 = x.iter().zip(b).map(|(a, b)| a * b).sum();
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi -= proj * bi;
            }
        }
    }
}

fn rescale(x: &mut [f64]) -> bool {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    true
}

fn euclidean_residual(hamiltonian: &TridiagonalHamiltonian, x: &[f64], energy: f64) -> f64 {
    hamiltonian
        .apply(x)
        .iter()
        .zip(x)
        .map(|(hx, xi)| (hx - energy * xi).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// First component above 1e-12 (after discrete normalization) is positive.
fn fix_sign(v: &mut [f64], spacing: f64) {
    let threshold = 1e-12 * spacing.sqrt();
    if let Some(first) = v.iter().find(|x| x.abs() > threshold) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}
