//! Well-localized initial states built from ±1/√N superpositions of the
//! lowest N eigenstates, and barrier-height design for a target hop period.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{evolve, region_probabilities, SpectralState};
use crate::error::{Error, Result};
use crate::pipeline::SolveSetup;
use crate::potential::{MultiWellSpec, PotentialProfile};
use crate::spectral::EigenSolution;

/// Six-well coefficient signs, one row per target well.
pub const SIX_WELL_TABLE: [[i8; 6]; 6] = [
    [1, 1, 1, 1, 1, 1],
    [1, 1, 1, -1, -1, -1],
    [1, 1, -1, -1, 1, 1],
    [1, -1, -1, 1, 1, -1],
    [1, -1, 1, 1, -1, 1],
    [1, -1, 1, -1, 1, -1],
];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignPattern {
    signs: Vec<i8>,
    target_well: usize,
}

impl SignPattern {
    /// Signs must be ±1; the pattern is flipped if needed so that the
    /// first sign is +1 (a global phase).
    pub fn new(signs: Vec<i8>, target_well: usize) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::Domain("sign pattern is empty".into()));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Domain(format!("signs must be +1 or -1, got {signs:?}")));
        }
        if target_well >= signs.len() {
            return Err(Error::Domain(format!(
                "target well {target_well} out of range for {} wells",
                signs.len()
            )));
        }
        let flip = signs[0];
        Ok(Self {
            signs: signs.into_iter().map(|s| s * flip).collect(),
            target_well,
        })
    }

    /// Pattern number `mask` among the 2^(N−1) gauge-fixed patterns, in
    /// lexicographic order with +1 before −1.
    fn from_mask(well_count: usize, mask: usize, target_well: usize) -> Self {
        let signs = (0..well_count)
            .map(|i| {
                if i == 0 || mask >> (well_count - 1 - i) & 1 == 0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        Self { signs, target_well }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn target_well(&self) -> usize {
        self.target_well
    }

    pub fn well_count(&self) -> usize {
        self.signs.len()
    }

    pub fn magnitude(&self) -> f64 {
        1.0 / (self.signs.len() as f64).sqrt()
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        let m = self.magnitude();
        self.signs.iter().map(|&s| Complex64::new(f64::from(s) * m, 0.0)).collect()
    }

    /// e.g. `++-+`
    pub fn label(&self) -> String {
        self.signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
    }
}

/// c_n = signs[n]/√N for the lowest N states, zero above.
pub fn localized_state<'a>(basis: &'a EigenSolution, pattern: &SignPattern) -> Result<SpectralState<'a>> {
    if basis.len() < pattern.well_count() {
        return Err(Error::Domain(format!(
            "a {}-well pattern needs at least {} states, basis has {}",
            pattern.well_count(),
            pattern.well_count(),
            basis.len()
        )));
    }
    SpectralState::new(basis, &pattern.coefficients())
}

/// Row of the six-well table for `target_well` (0-based).
pub fn table_pattern(well_count: usize, target_well: usize) -> Result<SignPattern> {
    if well_count != 6 {
        return Err(Error::Domain(format!(
            "tabulated patterns exist for six wells only, requested {well_count}"
        )));
    }
    let row = SIX_WELL_TABLE
        .get(target_well)
        .ok_or_else(|| Error::Domain(format!("target well {target_well} out of range for six wells")))?;
    SignPattern::new(row.to_vec(), target_well)
}

/// Probability in every well of the t = 0 state built from `pattern`.
pub fn pattern_well_probabilities(
    basis: &EigenSolution,
    profile: &PotentialProfile,
    pattern: &SignPattern,
) -> Result<Vec<f64>> {
    let psi = evolve(&localized_state(basis, pattern)?, 0.0)?;
    Ok(region_probabilities(&psi, profile)?.wells)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternChoice {
    pub pattern: SignPattern,
    /// Probability in each well at t = 0.
    pub probabilities: Vec<f64>,
}

impl PatternChoice {
    pub fn target_probability(&self) -> f64 {
        self.probabilities[self.pattern.target_well]
    }

    /// Well holding the most probability.
    pub fn dominant_well(&self) -> usize {
        (0..self.probabilities.len())
            .max_by(|&a, &b| self.probabilities[a].total_cmp(&self.probabilities[b]).then(b.cmp(&a)))
            .unwrap_or(0)
    }
}

/// Exhaustive search over the 2^(N−1) gauge-fixed patterns for the one
/// that puts the most probability in `target_well`.
pub fn best_sign_pattern(
    basis: &EigenSolution,
    profile: &PotentialProfile,
    target_well: usize,
) -> Result<PatternChoice> {
    let n = profile.well_count();
    if target_well >= n {
        return Err(Error::Domain(format!("target well {target_well} out of range for {n} wells")));
    }
    if basis.len() < n {
        return Err(Error::Domain(format!("{n} wells need at least {n} states, basis has {}", basis.len())));
    }
    let candidates: Vec<PatternChoice> = (0..1usize << (n - 1))
        .into_par_iter()
        .map(|mask| {
            let pattern = SignPattern::from_mask(n, mask, target_well);
            let probabilities = pattern_well_probabilities(basis, profile, &pattern)?;
            Ok(PatternChoice { pattern, probabilities })
        })
        .collect::<Result<_>>()?;

    let mut best: Option<PatternChoice> = None;
    for c in candidates {
        let better = best
            .as_ref()
            .is_none_or(|b| c.target_probability() > b.target_probability() + 1e-12);
        if better {
            best = Some(c);
        }
    }
    Ok(best.expect("at least one pattern"))
}

/// One tabulated row checked against the brute-force optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRowCheck {
    pub table: PatternChoice,
    pub best: PatternChoice,
}

impl TableRowCheck {
    /// The row localizes in its claimed well.
    pub fn localizes(&self) -> bool {
        self.table.dominant_well() == self.table.pattern.target_well()
    }

    pub fn matches_best(&self) -> bool {
        self.table.pattern == self.best.pattern
    }
}

pub fn validate_six_well_table(basis: &EigenSolution, profile: &PotentialProfile) -> Result<Vec<TableRowCheck>> {
    (0..6)
        .map(|well| {
            let pattern = table_pattern(profile.well_count(), well)?;
            let probabilities = pattern_well_probabilities(basis, profile, &pattern)?;
            Ok(TableRowCheck {
                table: PatternChoice { pattern, probabilities },
                best: best_sign_pattern(basis, profile, well)?,
            })
        })
        .collect()
}

/// πħ/(E₂ − E₁) in fs: the first complete transfer between the two wells
/// under two-state truncation.
pub fn two_well_hop_period(basis: &EigenSolution) -> Result<f64> {
    let e = basis.energies();
    if e.len() < 2 {
        return Err(Error::InvalidBasis("hop period needs at least two states".into()));
    }
    let split = e[1] - e[0];
    if !(split > 0.0) {
        return Err(Error::InvalidBasis(format!("E2 - E1 = {split:e} eV is not positive")));
    }
    Ok(PI * basis.units().hbar / split)
}

/// Two-well geometry with the barrier height left open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierGeometry {
    pub total_length: f64,
    pub barrier_width: f64,
    pub well_depth_reference: f64,
}

impl BarrierGeometry {
    pub fn new(total_length: f64, barrier_width: f64) -> Self {
        Self {
            total_length,
            barrier_width,
            well_depth_reference: 0.0,
        }
    }

    pub fn with_height(&self, barrier_height: f64) -> MultiWellSpec {
        MultiWellSpec {
            total_length: self.total_length,
            well_count: 2,
            barrier_width: self.barrier_width,
            barrier_height,
            well_depth_reference: self.well_depth_reference,
        }
    }
}

pub fn hop_period_at(geometry: &BarrierGeometry, barrier_height: f64, setup: &SolveSetup) -> Result<f64> {
    two_well_hop_period(&setup.solve(geometry.with_height(barrier_height), 2)?.basis)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseDesign {
    pub barrier_height: f64,
    pub period: f64,
    pub target_period: f64,
    /// (height, period) pairs in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
}

pub const INVERSE_REL_TOLERANCE: f64 = 1e-3;

/// Bisects the barrier height until the two-well hop period is within
/// [`INVERSE_REL_TOLERANCE`] of `target_period` (fs).
pub fn inverse_barrier_height(
    geometry: &BarrierGeometry,
    target_period: f64,
    bracket: (f64, f64),
    setup: &SolveSetup,
) -> Result<InverseDesign> {
    let (mut lo, mut hi) = bracket;
    if !(lo >= 0.0 && hi > lo && target_period > 0.0) {
        return Err(Error::Domain(format!(
            "need 0 <= lo < hi and a positive target, got [{lo}, {hi}] eV and {target_period} fs"
        )));
    }
    let mut evaluations = Vec::new();
    let mut eval = |height: f64| -> Result<f64> {
        let p = hop_period_at(geometry, height, setup)?;
        evaluations.push((height, p));
        Ok(p)
    };

    let mut p_lo = eval(lo)?;
    let mut p_hi = eval(hi)?;
    if (p_lo - target_period) * (p_hi - target_period) > 0.0 {
        return Err(Error::Bracket {
            lo,
            hi,
            detail: format!("periods {p_lo:.6e} and {p_hi:.6e} fs both lie on one side of {target_period:.6e} fs"),
        });
    }
    let p_mid = eval(0.5 * (lo + hi))?;
    if !(p_lo < p_mid && p_mid < p_hi) {
        return Err(Error::NonMonotonic(format!(
            "periods at {lo}, {}, {hi} eV are {p_lo:.6e}, {p_mid:.6e}, {p_hi:.6e} fs",
            0.5 * (lo + hi)
        )));
    }

    for &(h, p) in [(lo, p_lo), (hi, p_hi)].iter() {
        if ((p - target_period) / target_period).abs() < INVERSE_REL_TOLERANCE {
            return Ok(InverseDesign {
                barrier_height: h,
                period: p,
                target_period,
                evaluations,
            });
        }
    }

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = eval(mid)?;
        if !(p_lo <= p && p <= p_hi) {
            return Err(Error::NonMonotonic(format!(
                "period {p:.6e} fs at {mid} eV leaves [{p_lo:.6e}, {p_hi:.6e}] fs"
            )));
        }
        if ((p - target_period) / target_period).abs() < INVERSE_REL_TOLERANCE {
            return Ok(InverseDesign {
                barrier_height: mid,
                period: p,
                target_period,
                evaluations,
            });
        }
        if p < target_period {
            lo = mid;
            p_lo = p;
        } else {
            hi = mid;
            p_hi = p;
        }
    }
    Err(Error::NonMonotonic(format!(
        "bisection stalled in [{lo}, {hi}] eV without reaching {target_period:.6e} fs"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_enumerate_in_lexicographic_order() {
        let labels: Vec<String> = (0..4).map(|m| SignPattern::from_mask(3, m, 0).label()).collect();
        assert_eq!(labels, ["+++", "++-", "+-+", "+--"]);
    }

    #[test]
    fn gauge_is_fixed_and_signs_validated() {
        let p = SignPattern::new(vec![-1, 1, -1], 2).unwrap();
        assert_eq!(p.signs(), &[1, -1, 1]);
        assert!(SignPattern::new(vec![1, 0], 0).is_err());
        assert!(SignPattern::new(vec![1, 1], 2).is_err());
        let norm: f64 = p.coefficients().iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn table_rows() {
        let s = 1.0 / 6f64.sqrt();
        let first = table_pattern(6, 0).unwrap();
        assert_eq!(first.signs(), &[1, 1, 1, 1, 1, 1]);
        assert!((first.magnitude() - s).abs() < 1e-15);
        assert_eq!(table_pattern(6, 1).unwrap().signs(), &[1, 1, 1, -1, -1, -1]);
        assert_eq!(table_pattern(6, 2).unwrap().signs(), &[1, 1, -1, -1, 1, 1]);
        assert_eq!(table_pattern(6, 3).unwrap().signs(), &[1, -1, -1, 1, 1, -1]);
        assert_eq!(table_pattern(6, 5).unwrap().signs(), &[1, -1, 1, -1, 1, -1]);
        assert!(matches!(table_pattern(4, 0), Err(Error::Domain(_))));
        assert!(matches!(table_pattern(6, 6), Err(Error::Domain(_))));
    }
}
