//! On-disk eigenpair cache.
//!
//! One file per key: an 8-byte magic, a little-endian u32 version, a u64
//! metadata length, the JSON metadata, then K energies and K eigenvectors
//! as little-endian f64. Entries are re-verified against the Hamiltonian
//! on load and discarded if anything is off.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qwell::spectral::SolverStats;
use qwell::{EigenSolution, TridiagonalHamiltonian};

use crate::config::hex;
use crate::error::{io_error, CliResult};

const MAGIC: &[u8; 8] = b"QWELLEIG";
const VERSION: u32 = 1;

pub const CACHE_DIR_ENV: &str = "QWELL_CACHE_DIR";

#[derive(Debug, Serialize, Deserialize)]
struct Metadata {
    key: String,
    hamiltonian_fingerprint: String,
    length_nm: f64,
    points: usize,
    states: usize,
    seed: u64,
    units: qwell::UnitSystem,
    residuals: Vec<f64>,
    iterations: Vec<usize>,
    bisection_steps: Vec<usize>,
    unresolved_splittings: usize,
}

#[derive(Debug, Clone)]
pub struct EigenCache {
    dir: PathBuf,
}

/// Why a cache entry was not used.
#[derive(Debug, Clone, PartialEq)]
pub enum Miss {
    Absent,
    Invalid(String),
}

impl EigenCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `explicit` wins over the environment; `None` disables caching.
    pub fn resolve(explicit: Option<&Path>, disabled: bool) -> Option<Self> {
        if disabled {
            return None;
        }
        explicit
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(hamiltonian: &TridiagonalHamiltonian, states: usize, seed: u64) -> String {
        let mut h = Sha256::new();
        h.update(hamiltonian.fingerprint().as_bytes());
        h.update((states as u64).to_le_bytes());
        h.update(seed.to_le_bytes());
        hex(&h.finalize())
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.qweig"))
    }

    pub fn load(
        &self,
        hamiltonian: &TridiagonalHamiltonian,
        states: usize,
        seed: u64,
    ) -> Result<EigenSolution, Miss> {
        let key = Self::key(hamiltonian, states, seed);
        let bytes = match std::fs::read(self.path_for(&key)) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Miss::Absent),
            Err(e) => return Err(Miss::Invalid(e.to_string())),
        };
        let solution = decode(&bytes, &key).map_err(Miss::Invalid)?;
        solution
            .verify(hamiltonian)
            .map_err(|e| Miss::Invalid(format!("verification failed: {e}")))?;
        if solution.len() != states {
            return Err(Miss::Invalid("state count differs".into()));
        }
        Ok(solution)
    }

    /// Writes through a temporary file in the cache directory and renames
    /// it into place, so readers never see a partial entry.
    pub fn store(&self, solution: &EigenSolution, seed: u64) -> CliResult<PathBuf> {
        std::fs::create_dir_all(&self.dir).map_err(io_error(&self.dir))?;
        let key = key_for_solution(solution, seed);
        let path = self.path_for(&key);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(io_error(&self.dir))?;
        tmp.write_all(&encode(solution, &key, seed)).map_err(io_error(tmp.path()))?;
        tmp.as_file().sync_all().map_err(io_error(tmp.path()))?;
        tmp.persist(&path).map_err(|e| io_error(&path)(e.error))?;
        Ok(path)
    }
}

fn key_for_solution(solution: &EigenSolution, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(solution.fingerprint().as_bytes());
    h.update((solution.len() as u64).to_le_bytes());
    h.update(seed.to_le_bytes());
    hex(&h.finalize())
}

fn encode(solution: &EigenSolution, key: &str, seed: u64) -> Vec<u8> {
    let stats = solution.stats();
    let meta = Metadata {
        key: key.to_owned(),
        hamiltonian_fingerprint: solution.fingerprint().to_owned(),
        length_nm: solution.grid().length(),
        points: solution.grid().points(),
        states: solution.len(),
        seed,
        units: *solution.units(),
        residuals: stats.residuals.clone(),
        iterations: stats.iterations.clone(),
        bisection_steps: stats.bisection_steps.clone(),
        unresolved_splittings: stats.unresolved_splittings,
    };
    let json = serde_json::to_vec(&meta).expect("metadata serializes");
    let mut out = Vec::with_capacity(24 + json.len() + 8 * solution.len() * (1 + meta.points));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for e in solution.energies() {
        out.extend_from_slice(&e.to_le_bytes());
    }
    for n in 0..solution.len() {
        for x in solution.real_state(n) {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

fn decode(bytes: &[u8], expected_key: &str) -> Result<EigenSolution, String> {
    let mut cursor = bytes;
    let mut take = |n: usize| -> Result<&[u8], String> {
        if cursor.len() < n {
            return Err("truncated file".into());
        }
        let (head, rest) = cursor.split_at(n);
        cursor = rest;
        Ok(head)
    };
    if take(8)? != MAGIC {
        return Err("bad magic".into());
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let meta_len = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let meta: Metadata = serde_json::from_slice(take(meta_len)?).map_err(|e| e.to_string())?;
    if meta.key != expected_key {
        return Err("key mismatch".into());
    }
    let mut floats = |count: usize| -> Result<Vec<f64>, String> {
        Ok(take(8 * count)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    };
    let energies = floats(meta.states)?;
    let vectors = (0..meta.states)
        .map(|_| floats(meta.points))
        .collect::<Result<Vec<_>, _>>()?;
    if !cursor.is_empty() {
        return Err("trailing bytes".into());
    }
    let grid = qwell::Grid::new(meta.length_nm, meta.points).map_err(|e| e.to_string())?;
    EigenSolution::from_parts(
        grid,
        meta.units,
        energies,
        vectors,
        meta.hamiltonian_fingerprint,
        SolverStats {
            residuals: meta.residuals,
            iterations: meta.iterations,
            bisection_steps: meta.bisection_steps,
            unresolved_splittings: meta.unresolved_splittings,
        },
    )
    .map_err(|e| e.to_string())
}
