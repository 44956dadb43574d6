//! Complex amplitudes on a [`Grid`] and the discrete inner product.
//!
//! The inner product is the rectangle rule with weight `spacing`, the
//! quadrature under which the finite-difference Hamiltonian is symmetric.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: Grid,
    amplitudes: Vec<Complex64>,
}

impl Wavefunction {
    /// Wraps amplitudes as given, without normalizing them.
    pub fn from_raw(grid: Grid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.points() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.points()
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    /// Wraps amplitudes and scales them to unit discrete norm.
    pub fn new(grid: Grid, amplitudes: Vec<Complex64>) -> Result<Self> {
        normalize(&Self::from_raw(grid, amplitudes)?)
    }

    pub fn from_real(grid: Grid, amplitudes: &[f64]) -> Result<Self> {
        Self::new(grid, amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Samples `f` at the interior nodes and normalizes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.positions().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    /// |ψᵢ|² at every node.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }
}

/// ⟨a|b⟩ = Σ conj(aᵢ) bᵢ · spacing.
pub fn inner_product(a: &Wavefunction, b: &Wavefunction) -> Result<Complex64> {
    a.grid.ensure_compatible(&b.grid)?;
    let sum: Complex64 = a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(sum * a.grid.spacing())
}

pub fn normalize(psi: &Wavefunction) -> Result<Wavefunction> {
    let norm2 = psi.norm_squared();
    if !(norm2 > 0.0) || !norm2.is_finite() {
        return Err(Error::DegenerateState(format!(
            "cannot normalize a state with squared norm {norm2}"
        )));
    }
    Ok(psi.scaled(Complex64::new(1.0 / norm2.sqrt(), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> Grid {
        Grid::new(10.0, 64).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn state_from(values: &[(f64, f64)]) -> Wavefunction {
        let g = Grid::new(10.0, values.len()).unwrap();
        Wavefunction::from_raw(g, values.iter().map(|&(r, i)| c(r, i)).collect()).unwrap()
    }

    #[test]
    fn normalized_state_has_unit_self_overlap() {
        let psi = Wavefunction::from_fn(grid(), |x| c(x.sin(), 0.3 * x)).unwrap();
        let overlap = inner_product(&psi, &psi).unwrap();
        assert!((overlap.re - 1.0).abs() < 1e-12);
        assert!(overlap.im.abs() < 1e-12);
    }

    #[test]
    fn normalize_is_idempotent_on_normalized_input() {
        let psi = Wavefunction::from_fn(grid(), |x| c(x.cos(), 0.0)).unwrap();
        let again = normalize(&psi).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(again.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn normalize_is_scale_invariant() {
        let raw = Wavefunction::from_raw(grid(), grid().positions().map(|x| c(x, 1.0)).collect()).unwrap();
        let tripled = raw.scaled(c(3.0, 0.0));
        let a = normalize(&raw).unwrap();
        let b = normalize(&tripled).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_state_is_degenerate() {
        let zero = Wavefunction::from_raw(grid(), vec![Complex64::default(); 64]).unwrap();
        assert!(matches!(normalize(&zero), Err(Error::DegenerateState(_))));
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = Wavefunction::from_fn(grid(), |_| c(1.0, 0.0)).unwrap();
        let b = Wavefunction::from_fn(Grid::new(10.0, 65).unwrap(), |_| c(1.0, 0.0)).unwrap();
        assert!(matches!(inner_product(&a, &b), Err(Error::GridMismatch(_))));
        assert!(Wavefunction::from_raw(grid(), vec![c(1.0, 0.0); 3]).is_err());
    }

    fn amps(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
    }

    proptest! {
        #[test]
        fn inner_product_is_sesquilinear(
            a in amps(8), b in amps(8), cc in amps(8),
            alpha in (-2.0..2.0f64, -2.0..2.0f64), beta in (-2.0..2.0f64, -2.0..2.0f64),
        ) {
            let (a, b, cc) = (state_from(&a), state_from(&b), state_from(&cc));
            let (alpha, beta) = (c(alpha.0, alpha.1), c(beta.0, beta.1));
            let combo: Vec<Complex64> = b.amplitudes().iter().zip(cc.amplitudes())
                .map(|(x, y)| alpha * x + beta * y).collect();
            let combo = Wavefunction::from_raw(*b.grid(), combo).unwrap();
            let lhs = inner_product(&a, &combo).unwrap();
            let rhs = alpha * inner_product(&a, &b).unwrap() + beta * inner_product(&a, &cc).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12);
            let ab = inner_product(&a, &b).unwrap();
            let ba = inner_product(&b, &a).unwrap();
            prop_assert!((ab - ba.conj()).norm() < 1e-15);
        }

        #[test]
        fn normalize_twice_equals_once(a in amps(8)) {
            let raw = state_from(&a);
            prop_assume!(raw.norm_squared() > 1e-6);
            let once = normalize(&raw).unwrap();
            let twice = normalize(&once).unwrap();
            for (x, y) in once.amplitudes().iter().zip(twice.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }
}
