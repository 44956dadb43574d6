//! Wave-function localization and tunneling dynamics in 1-D
//! multiple-quantum-well potentials.
//!
//! All quantities are in nm, eV and fs. Time along correlation traces is
//! the dimensionless τ = t/T_rev, with T_rev the revival time of an
//! infinite well spanning the whole structure.

// NaN-rejecting guards are written as !(x > y) on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod design;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod pipeline;
pub mod potential;
pub mod spectral;
pub mod tridiagonal;
pub mod units;
pub mod wavefunction;

pub use error::{Error, Result};
pub use grid::Grid;
pub use pipeline::{SolveSetup, SolvedProfile};
pub use potential::{build_multiwell, sample, MultiWellSpec, PotentialProfile, SamplingRule};
pub use spectral::{assemble, lowest_eigenpairs, EigenSolution, TridiagonalHamiltonian};
pub use units::UnitSystem;
pub use wavefunction::{inner_product, normalize, Wavefunction};
