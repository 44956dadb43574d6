use crate::error::Result;
use crate::grid::Grid;
use crate::potential::{build_multiwell, sample_with, MultiWellSpec, PotentialProfile, SamplingRule};
use crate::spectral::{assemble, lowest_eigenpairs_with, EigenSolution, SolverOptions, TridiagonalHamiltonian};
use crate::units::UnitSystem;

/// Numerical settings shared by every solve of one study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSetup {
    pub grid_points: usize,
    pub units: UnitSystem,
    pub sampling: SamplingRule,
    pub options: SolverOptions,
}

impl SolveSetup {
    pub fn new(grid_points: usize, units: UnitSystem) -> Self {
        Self {
            grid_points,
            units,
            sampling: SamplingRule::default(),
            options: SolverOptions::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.options.seed = seed;
        self
    }

    pub fn with_sampling(mut self, sampling: SamplingRule) -> Self {
        self.sampling = sampling;
        self
    }

    /// Profile, grid and Hamiltonian, without solving.
    pub fn discretize(&self, spec: MultiWellSpec) -> Result<(PotentialProfile, Grid, TridiagonalHamiltonian)> {
        let profile = build_multiwell(spec)?;
        let grid = Grid::new(spec.total_length, self.grid_points)?;
        let samples = sample_with(&profile, &grid, self.sampling)?;
        let hamiltonian = assemble(&samples, &grid, &self.units)?;
        Ok((profile, grid, hamiltonian))
    }

    pub fn solve(&self, spec: MultiWellSpec, states: usize) -> Result<SolvedProfile> {
        let (profile, grid, hamiltonian) = self.discretize(spec)?;
        let basis = lowest_eigenpairs_with(&hamiltonian, states, &self.options)?;
        Ok(SolvedProfile {
            profile,
            grid,
            hamiltonian,
            basis,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolvedProfile {
    pub profile: PotentialProfile,
    pub grid: Grid,
    pub hamiltonian: TridiagonalHamiltonian,
    pub basis: EigenSolution,
}
