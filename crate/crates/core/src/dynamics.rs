//! Spectral propagation, correlation traces and hop detection.
//!
//! States are propagated by rotating eigenbasis coefficients,
//! c_n → c_n exp(−i E_n t/ħ), with time measured in units of the
//! infinite-well revival time of the full box, τ = t/T_rev.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::revival_time;
use crate::error::{Error, Result};
use crate::potential::{PotentialProfile, Region};
use crate::spectral::EigenSolution;
use crate::wavefunction::{inner_product, Wavefunction};

/// Minimum weight an initial state must keep inside the retained basis.
pub const MIN_CAPTURED_WEIGHT: f64 = 0.999;

/// Coefficients of a state in an eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState<'a> {
    basis: &'a EigenSolution,
    coefficients: Vec<Complex64>,
    captured_weight: f64,
}

impl<'a> SpectralState<'a> {
    /// Normalizes the coefficients; missing trailing coefficients are zero.
    pub fn new(basis: &'a EigenSolution, coefficients: &[Complex64]) -> Result<Self> {
        if coefficients.len() > basis.len() {
            return Err(Error::Domain(format!(
                "{} coefficients for a basis of {} states",
                coefficients.len(),
                basis.len()
            )));
        }
        let weight: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::DegenerateState("all coefficients are zero".into()));
        }
        let scale = 1.0 / weight.sqrt();
        let mut c: Vec<Complex64> = coefficients.iter().map(|c| c * scale).collect();
        c.resize(basis.len(), Complex64::default());
        Ok(Self {
            basis,
            coefficients: c,
            captured_weight: 1.0,
        })
    }

    pub fn basis(&self) -> &'a EigenSolution {
        self.basis
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Σ|c_n|² before renormalization (1 for states built from coefficients).
    pub fn captured_weight(&self) -> f64 {
        self.captured_weight
    }

    fn ensure_same_basis(&self, other: &SpectralState<'_>) -> Result<()> {
        let same = std::ptr::eq(self.basis, other.basis)
            || (self.basis.fingerprint() == other.basis.fingerprint()
                && self.basis.len() == other.basis.len()
                && self.basis.energies() == other.basis.energies());
        if same {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }
}

/// c_n = ⟨φ_n|ψ₀⟩, renormalized when at least [`MIN_CAPTURED_WEIGHT`] is captured.
pub fn project<'a>(psi0: &Wavefunction, basis: &'a EigenSolution) -> Result<SpectralState<'a>> {
    basis.grid().ensure_compatible(psi0.grid())?;
    let coefficients = basis
        .states()
        .iter()
        .map(|phi| inner_product(phi, psi0))
        .collect::<Result<Vec<_>>>()?;
    let captured: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
    if !(captured >= MIN_CAPTURED_WEIGHT) {
        return Err(Error::Truncation {
            captured,
            retained: basis.len(),
        });
    }
    let mut state = SpectralState::new(basis, &coefficients)?;
    state.captured_weight = captured;
    Ok(state)
}

/// Revival time (fs) of the infinite well spanning the basis grid.
pub fn basis_revival_time(basis: &EigenSolution) -> f64 {
    revival_time(basis.grid().length(), basis.units()).expect("grid length is positive")
}

/// Phase rates Ē_n/ħ = T_rev E_n/ħ per unit τ, optionally shifted so the
/// lowest level has zero rate (a global phase).
fn phase_rates(basis: &EigenSolution, relative: bool) -> Vec<f64> {
    let scale = basis_revival_time(basis) / basis.units().hbar;
    let origin = if relative { basis.energies()[0] } else { 0.0 };
    basis.energies().iter().map(|e| (e - origin) * scale).collect()
}

/// ψ(x, τ) = Σ c_n φ_n(x) exp(−i E_n τ T_rev/ħ).
pub fn evolve(state: &SpectralState<'_>, tau: f64) -> Result<Wavefunction> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("tau must be non-negative, got {tau}")));
    }
    let basis = state.basis;
    let rates = phase_rates(basis, false);
    let mut amplitudes = vec![Complex64::default(); basis.grid().points()];
    for ((c, phi), rate) in state.coefficients.iter().zip(basis.states()).zip(&rates) {
        if *c == Complex64::default() {
            continue;
        }
        let w = c * Complex64::from_polar(1.0, -rate * tau);
        for (a, p) in amplitudes.iter_mut().zip(phi.amplitudes()) {
            *a += w * p;
        }
    }
    Wavefunction::from_raw(*basis.grid(), amplitudes)
}

/// Uniform τ samples on `[0, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauAxis {
    pub max: f64,
    pub samples: usize,
}

impl Default for TauAxis {
    fn default() -> Self {
        Self { max: 2.0, samples: 2048 }
    }
}

impl TauAxis {
    pub fn new(max: f64, samples: usize) -> Result<Self> {
        if samples < 2 || !(max > 0.0 && max.is_finite()) {
            return Err(Error::Domain(format!(
                "tau axis needs max > 0 and at least 2 samples, got max {max}, {samples} samples"
            )));
        }
        Ok(Self { max, samples })
    }

    pub fn step(&self) -> f64 {
        self.max / (self.samples - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        let step = self.step();
        (0..self.samples).map(|i| i as f64 * step).collect()
    }
}

/// Squared overlaps sampled along τ.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace {
    pub tau: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
}

impl CorrelationTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        if self.tau.len() < 2 {
            0.0
        } else {
            self.tau[1] - self.tau[0]
        }
    }
}

/// ⟨ref(0)|ψ(τ)⟩ = Σ conj(r_n) c_n exp(−i Ē_n τ/ħ) up to a global phase.
fn overlap_with_rates(reference: &[Complex64], evolving: &[Complex64], rates: &[f64], tau: f64) -> Complex64 {
    reference
        .iter()
        .zip(evolving)
        .zip(rates)
        .map(|((r, c), rate)| r.conj() * c * Complex64::from_polar(1.0, -rate * tau))
        .sum()
}

/// Complex overlap ⟨reference(0)|evolving(τ)⟩ computed in coefficient space.
pub fn overlap_at(reference: &SpectralState<'_>, evolving: &SpectralState<'_>, tau: f64) -> Result<Complex64> {
    reference.ensure_same_basis(evolving)?;
    let rates = phase_rates(evolving.basis, false);
    Ok(overlap_with_rates(&reference.coefficients, &evolving.coefficients, &rates, tau))
}

fn trace(reference: &SpectralState<'_>, evolving: &SpectralState<'_>, axis: &TauAxis, label: String) -> CorrelationTrace {
    let rates = phase_rates(evolving.basis, true);
    let tau = axis.values();
    let values = tau
        .par_iter()
        .map(|&t| overlap_with_rates(&reference.coefficients, &evolving.coefficients, &rates, t).norm_sqr())
        .collect();
    CorrelationTrace { tau, values, label }
}

/// |A(τ)|² with A(τ) = Σ |c_n|² exp(i Ē_n τ/ħ).
pub fn autocorrelation(state: &SpectralState<'_>, axis: &TauAxis) -> CorrelationTrace {
    trace(state, state, axis, "autocorrelation".into())
}

/// One trace per reference: |⟨reference_k(0)|evolving(τ)⟩|².
pub fn well_correlation(
    references: &[SpectralState<'_>],
    evolving: &SpectralState<'_>,
    axis: &TauAxis,
) -> Result<Vec<CorrelationTrace>> {
    references
        .iter()
        .enumerate()
        .map(|(k, r)| {
            r.ensure_same_basis(evolving)?;
            Ok(trace(r, evolving, axis, format!("well_{}", k + 1)))
        })
        .collect()
}

/// Σ |ψᵢ|² h over the nodes inside well `well_index` (0-based).
pub fn probability_in_well(psi: &Wavefunction, profile: &PotentialProfile, well_index: usize) -> Result<f64> {
    if well_index >= profile.well_count() {
        return Err(Error::Domain(format!(
            "well index {well_index} out of range for {} wells",
            profile.well_count()
        )));
    }
    Ok(region_probabilities(psi, profile)?.wells[well_index])
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionProbabilities {
    pub wells: Vec<f64>,
    pub barriers: Vec<f64>,
}

impl RegionProbabilities {
    pub fn total(&self) -> f64 {
        self.wells.iter().chain(&self.barriers).sum()
    }
}

pub fn region_probabilities(psi: &Wavefunction, profile: &PotentialProfile) -> Result<RegionProbabilities> {
    let grid = psi.grid();
    let regions = profile.node_regions(grid)?;
    let n = profile.well_count();
    let mut wells = vec![0.0; n];
    let mut barriers = vec![0.0; n.saturating_sub(1)];
    let h = grid.spacing();
    for (a, region) in psi.amplitudes().iter().zip(regions) {
        let p = a.norm_sqr() * h;
        match region {
            Region::Well(k) => wells[k] += p,
            Region::Barrier(k) => barriers[k] += p,
        }
    }
    Ok(RegionProbabilities { wells, barriers })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopEvent {
    /// Parabolically refined peak time.
    pub tau: f64,
    /// Parabolically refined peak value.
    pub value: f64,
    /// Index of the sampled maximum.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopDetection {
    pub events: Vec<HopEvent>,
    /// Mean spacing of consecutive peaks; needs at least two peaks.
    pub period: Option<f64>,
}

/// Strict interior local maxima above `threshold`, refined by a parabola
/// through the sample and its two neighbours.
pub fn detect_hops(trace: &CorrelationTrace, threshold: f64) -> HopDetection {
    let v = &trace.values;
    let step = trace.step();
    let mut events = Vec::new();
    for i in 1..v.len().saturating_sub(1) {
        let (a, b, c) = (v[i - 1], v[i], v[i + 1]);
        if !(b > a && b > c && b > threshold) {
            continue;
        }
        let curvature = a - 2.0 * b + c;
        let delta = if curvature != 0.0 {
            (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        events.push(HopEvent {
            tau: trace.tau[i] + delta * step,
            value: b - 0.25 * (a - c) * delta,
            index: i,
        });
    }
    let period = mean_spacing(events.iter().map(|e| e.tau));
    HopDetection { events, period }
}

fn mean_spacing(times: impl Iterator<Item = f64>) -> Option<f64> {
    let times: Vec<f64> = times.collect();
    if times.len() < 2 {
        return None;
    }
    Some((times[times.len() - 1] - times[0]) / (times.len() - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellHop {
    /// 0-based well index.
    pub well: usize,
    pub event: HopEvent,
}

/// Localization history merged over all per-well traces.
#[derive(Debug, Clone, PartialEq)]
pub struct HopReport {
    pub threshold: f64,
    /// Starts with the initial localization at τ = 0, then every detected
    /// peak in τ order.
    pub hops: Vec<WellHop>,
    /// Mean τ between consecutive localizations.
    pub mean_interval: Option<f64>,
}

impl HopReport {
    /// First localization after the start, if any.
    pub fn first_hop(&self) -> Option<&WellHop> {
        self.hops.get(1)
    }
}

/// `traces[k]` must correlate against the state localized in well k;
/// `start_well` is where the evolving state begins.
pub fn hop_report(traces: &[CorrelationTrace], start_well: usize, threshold: f64) -> HopReport {
    let mut hops: Vec<WellHop> = traces
        .iter()
        .enumerate()
        .flat_map(|(well, t)| detect_hops(t, threshold).events.into_iter().map(move |event| WellHop { well, event }))
        .collect();
    hops.sort_by(|a, b| a.event.tau.total_cmp(&b.event.tau).then(a.well.cmp(&b.well)));
    if let Some(t) = traces.get(start_well) {
        hops.insert(
            0,
            WellHop {
                well: start_well,
                event: HopEvent {
                    tau: 0.0,
                    value: t.values.first().copied().unwrap_or(1.0),
                    index: 0,
                },
            },
        );
    }
    let mean_interval = mean_spacing(hops.iter().map(|h| h.event.tau));
    HopReport {
        threshold,
        hops,
        mean_interval,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn synthetic(values: impl Fn(f64) -> f64, axis: TauAxis) -> CorrelationTrace {
        let tau = axis.values();
        CorrelationTrace {
            values: tau.iter().map(|&t| values(t)).collect(),
            tau,
            label: "synthetic".into(),
        }
    }

    #[test]
    fn constant_trace_has_no_peaks() {
        let t = synthetic(|_| 1.0, TauAxis::default());
        let d = detect_hops(&t, 0.9);
        assert!(d.events.is_empty());
        assert_eq!(d.period, None);
    }

    #[test]
    fn synthetic_period_is_recovered() {
        let axis = TauAxis::new(2.0, 2048).unwrap();
        for p in [0.13, 0.37, 0.61] {
            let t = synthetic(|x| (PI * x / p).sin().powi(2), axis);
            let d = detect_hops(&t, 0.9);
            let period = d.period.unwrap();
            assert!((period - p).abs() < axis.step(), "p={p}: {period}");
            // closed-form peak locations (k + 1/2) p
            for (k, e) in d.events.iter().enumerate() {
                assert!((e.tau - (k as f64 + 0.5) * p).abs() < 0.05 * axis.step());
                assert!(e.value <= 1.0 + 1e-9 && e.value > 0.99);
            }
        }
    }

    #[test]
    fn peaks_below_threshold_are_ignored() {
        let axis = TauAxis::new(2.0, 500).unwrap();
        let t = synthetic(|x| 0.5 * (PI * x / 0.3).sin().powi(2), axis);
        assert!(detect_hops(&t, 0.9).events.is_empty());
        assert!(!detect_hops(&t, 0.4).events.is_empty());
    }

    #[test]
    fn report_merges_wells_in_time_order() {
        let axis = TauAxis::new(2.0, 4001).unwrap();
        let p = 0.4;
        let stay = synthetic(|x| (PI * x / (2.0 * p)).cos().powi(2), axis);
        let moved = synthetic(|x| (PI * x / (2.0 * p)).sin().powi(2), axis);
        let report = hop_report(&[stay, moved], 0, 0.9);
        let wells: Vec<usize> = report.hops.iter().map(|h| h.well).collect();
        assert_eq!(wells, vec![0, 1, 0, 1, 0]);
        assert!((report.mean_interval.unwrap() - p).abs() < 1e-3);
        assert!((report.first_hop().unwrap().event.tau - p).abs() < 1e-3);
    }

    #[test]
    fn tau_axis_validation() {
        assert!(TauAxis::new(2.0, 1).is_err());
        assert!(TauAxis::new(0.0, 10).is_err());
        let axis = TauAxis::new(1.0, 5).unwrap();
        assert_eq!(axis.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
