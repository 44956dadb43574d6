use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform mesh on `[0, length]` with hard walls at both ends.
///
/// Only the `points` interior nodes are stored; node `i` sits at
/// `(i + 1) * spacing` and the wall nodes are implicitly zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    length: f64,
    points: usize,
}

impl Grid {
    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Domain(format!("grid length must be positive, got {length}")));
        }
        if points < 3 {
            return Err(Error::Domain(format!("grid needs at least 3 interior points, got {points}")));
        }
        Ok(Self { length, points })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.points + 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.spacing()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.x(i))
    }

    /// Index of the node mirrored through `length / 2`.
    pub fn mirror(&self, i: usize) -> usize {
        self.points - 1 - i
    }

    pub fn ensure_compatible(&self, other: &Grid) -> Result<()> {
        if self.points != other.points || self.length != other.length {
            return Err(Error::GridMismatch(format!(
                "({} nm, {} points) vs ({} nm, {} points)",
                self.length, self.points, other.length, other.points
            )));
        }
        Ok(())
    }

    pub fn ensure_length(&self, length: f64) -> Result<()> {
        if (self.length - length).abs() > 1e-12 * length.abs().max(1.0) {
            return Err(Error::GridMismatch(format!(
                "grid spans {} nm but the profile spans {} nm",
                self.length, length
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_excludes_walls() {
        let grid = Grid::new(100.0, 1999).unwrap();
        assert_eq!(grid.spacing(), 0.05);
        assert_eq!(grid.x(0), 0.05);
        assert!((grid.x(grid.points() - 1) - 99.95).abs() < 1e-12);
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(Grid::new(1.0, 2).is_err());
        assert!(Grid::new(0.0, 10).is_err());
    }

    #[test]
    fn mismatch_is_reported() {
        let a = Grid::new(100.0, 10).unwrap();
        let b = Grid::new(100.0, 11).unwrap();
        let c = Grid::new(50.0, 10).unwrap();
        assert!(matches!(a.ensure_compatible(&b), Err(Error::GridMismatch(_))));
        assert!(matches!(a.ensure_compatible(&c), Err(Error::GridMismatch(_))));
        assert!(a.ensure_compatible(&a).is_ok());
    }
}
