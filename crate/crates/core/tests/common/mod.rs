#![allow(dead_code)]

use qwell::{MultiWellSpec, SolveSetup, SolvedProfile, UnitSystem};

/// Effective mass ratio of the strongly coupled reference scenarios.
pub const COUPLED_MASS: f64 = 0.007;

pub fn setup(points: usize, mass: f64) -> SolveSetup {
    SolveSetup::new(points, UnitSystem::with_mass_ratio(mass).unwrap())
}

pub fn multiwell(wells: usize, height: f64) -> MultiWellSpec {
    if wells == 1 {
        MultiWellSpec::single_well(100.0)
    } else {
        MultiWellSpec::new(100.0, wells, 4.2, height)
    }
}

pub fn solve(wells: usize, height: f64, mass: f64, points: usize, k: usize) -> SolvedProfile {
    setup(points, mass).solve(multiwell(wells, height), k).unwrap()
}
