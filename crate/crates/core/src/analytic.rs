//! Closed-form infinite square well: energies, eigenfunctions and the
//! revival time. These are the exact references for the numerical solver.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::units::UnitSystem;
use crate::wavefunction::Wavefunction;

#[derive(Debug, Clone)]
pub struct AnalyticEigenpair {
    pub n: usize,
    pub energy: f64,
    pub state: Wavefunction,
}

fn check_quantum_number(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::Domain("quantum number must be at least 1".into()));
    }
    Ok(())
}

fn check_length(length: f64) -> Result<()> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::Domain(format!("well length must be positive, got {length}")));
    }
    Ok(())
}

/// E_n = ħ²π²n²/(2mL²) in eV.
pub fn infinite_well_energy(n: usize, length: f64, units: &UnitSystem) -> Result<f64> {
    check_quantum_number(n)?;
    check_length(length)?;
    let k = n as f64 * PI / length;
    Ok(units.kinetic_scale() * k * k)
}

/// √(2/L) sin(nπx/L) on the interior nodes, renormalized under the
/// discrete inner product.
pub fn infinite_well_state(n: usize, grid: &Grid) -> Result<Wavefunction> {
    check_quantum_number(n)?;
    let length = grid.length();
    let amplitude = (2.0 / length).sqrt();
    Wavefunction::from_fn(*grid, |x| {
        Complex64::new(amplitude * (n as f64 * PI * x / length).sin(), 0.0)
    })
}

pub fn infinite_well_eigenpair(n: usize, grid: &Grid, units: &UnitSystem) -> Result<AnalyticEigenpair> {
    Ok(AnalyticEigenpair {
        n,
        energy: infinite_well_energy(n, grid.length(), units)?,
        state: infinite_well_state(n, grid)?,
    })
}

/// T_rev = 4mL²/(ħπ) in fs, so that T_rev·E₁ = 2πħ.
pub fn revival_time(length: f64, units: &UnitSystem) -> Result<f64> {
    check_length(length)?;
    Ok(4.0 * units.mass() * length * length / (units.hbar * PI))
}
