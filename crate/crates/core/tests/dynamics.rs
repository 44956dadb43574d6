mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use common::{solve, COUPLED_MASS};
use num_complex::Complex64;
use qwell::analytic::{infinite_well_eigenpair, revival_time};
use qwell::design::{localized_state, SignPattern};
use qwell::dynamics::{
    autocorrelation, basis_revival_time, detect_hops, evolve, hop_report, overlap_at, probability_in_well, project,
    region_probabilities, well_correlation, SpectralState, TauAxis,
};
use qwell::spectral::SolverStats;
use qwell::{inner_product, EigenSolution, Error, Grid, UnitSystem, Wavefunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn gaussian(grid: Grid, center: f64, width: f64) -> Wavefunction {
    Wavefunction::from_fn(grid, |x| c((-(x - center).powi(2) / (2.0 * width * width)).exp())).unwrap()
}

/// Infinite-well basis assembled from the closed-form levels and states.
fn analytic_basis(points: usize, k: usize) -> EigenSolution {
    let grid = Grid::new(100.0, points).unwrap();
    let units = UnitSystem::default();
    let pairs: Vec<_> = (1..=k).map(|n| infinite_well_eigenpair(n, &grid, &units).unwrap()).collect();
    EigenSolution::from_parts(
        grid,
        units,
        pairs.iter().map(|p| p.energy).collect(),
        pairs.iter().map(|p| p.state.amplitudes().iter().map(|z| z.re).collect()).collect(),
        "analytic".into(),
        SolverStats::default(),
    )
    .unwrap()
}

#[test]
fn projection_of_basis_combinations() {
    let s = solve(2, 0.5, COUPLED_MASS, 1000, 4);
    let b = &s.basis;
    let first = project(&b.states()[0], b).unwrap();
    assert!((first.coefficients()[0] - c(1.0)).norm() < 1e-10);
    assert!(first.coefficients()[1..].iter().all(|z| z.norm() < 1e-10));

    let mix: Vec<Complex64> = b.states()[0]
        .amplitudes()
        .iter()
        .zip(b.states()[1].amplitudes())
        .map(|(x, y)| (x + y) * FRAC_1_SQRT_2)
        .collect();
    let mix = project(&Wavefunction::from_raw(s.grid, mix).unwrap(), b).unwrap();
    assert!((mix.coefficients()[0] - c(FRAC_1_SQRT_2)).norm() < 1e-10);
    assert!((mix.coefficients()[1] - c(FRAC_1_SQRT_2)).norm() < 1e-10);
    assert!(mix.coefficients()[2..].iter().all(|z| z.norm() < 1e-10));

    let well1 = localized_state(b, &SignPattern::new(vec![1, 1], 0).unwrap()).unwrap();
    let back = project(&evolve(&well1, 0.0).unwrap(), b).unwrap();
    assert!((back.coefficients()[0] - c(0.5f64.sqrt())).norm() < 1e-10);
    assert!((back.coefficients()[1] - c(0.5f64.sqrt())).norm() < 1e-10);
}

#[test]
fn projection_outside_the_basis_is_a_truncation_error() {
    let s = solve(1, 0.0, 1.0, 1000, 2);
    let narrow = gaussian(s.grid, 30.0, 2.0);
    match project(&narrow, &s.basis) {
        Err(Error::Truncation { captured, retained }) => {
            assert!(captured < 0.999);
            assert_eq!(retained, 2);
        }
        other => panic!("expected truncation error, got {other:?}"),
    }
}

#[test]
fn evolution_at_zero_reconstructs_the_initial_state() {
    let s = solve(1, 0.0, 1.0, 2000, 10);
    let psi0 = gaussian(s.grid, 30.0, 10.0);
    let state = project(&psi0, &s.basis).unwrap();
    assert!(state.captured_weight() > 0.9999);
    let back = evolve(&state, 0.0).unwrap();
    let overlap = inner_product(&psi0, &back).unwrap();
    // within the captured weight
    assert!((overlap.norm_sqr() - state.captured_weight()).abs() < 1e-10);
}

#[test]
fn eigenstates_are_stationary() {
    let s = solve(4, 0.5, COUPLED_MASS, 800, 4);
    let state = SpectralState::new(&s.basis, &[c(0.0), c(0.0), c(1.0)]).unwrap();
    let start = evolve(&state, 0.0).unwrap();
    for tau in [0.1, 0.77, 1.9, 13.2] {
        let later = evolve(&state, tau).unwrap();
        for (a, b) in start.amplitudes().iter().zip(later.amplitudes()) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }
    let trace = autocorrelation(&state, &TauAxis::default());
    assert!(trace.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn evolution_is_unitary() {
    let s = solve(4, 0.5, COUPLED_MASS, 1000, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let coefficients: Vec<Complex64> = (0..8)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let state = SpectralState::new(&s.basis, &coefficients).unwrap();
    for _ in 0..100 {
        let tau = rng.gen_range(0.0..5.0);
        let psi = evolve(&state, tau).unwrap();
        assert!((psi.norm_squared() - 1.0).abs() < 1e-10, "tau {tau}");
    }
}

#[test]
fn autocorrelation_is_bounded_and_starts_at_one() {
    let s = solve(2, 0.6, COUPLED_MASS, 1000, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let coefficients: Vec<Complex64> = (0..6).map(|_| c(rng.gen_range(-1.0..1.0))).collect();
    let state = SpectralState::new(&s.basis, &coefficients).unwrap();
    let trace = autocorrelation(&state, &TauAxis::default());
    assert!((trace.values[0] - 1.0).abs() < 1e-14);
    assert!(trace.values.iter().all(|v| *v <= 1.0 + 1e-9 && *v >= 0.0));
    assert!(trace.tau.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn exact_revival_with_closed_form_levels() {
    let basis = analytic_basis(2000, 10);
    let state = project(&gaussian(*basis.grid(), 30.0, 10.0), &basis).unwrap();
    let a = overlap_at(&state, &state, 1.0).unwrap();
    assert!((a.norm_sqr() - 1.0).abs() < 1e-12, "{}", a.norm_sqr());
    let half = overlap_at(&state, &state, 0.5).unwrap().norm_sqr();
    assert!(half < 0.5, "packet should have moved at tau = 0.5, |A|^2 = {half}");
}

#[test]
fn near_revival_with_numerical_levels() {
    let s = solve(1, 0.0, 1.0, 2000, 10);
    let state = project(&gaussian(s.grid, 30.0, 10.0), &s.basis).unwrap();
    let a = overlap_at(&state, &state, 1.0).unwrap().norm_sqr();
    assert!(a >= 0.99, "|A(1)|^2 = {a}");
}

#[test]
fn two_level_infinite_well_autocorrelation() {
    let basis = analytic_basis(500, 2);
    let state = SpectralState::new(&basis, &[c(1.0), c(1.0)]).unwrap();
    let axis = TauAxis::new(1.0, 257).unwrap();
    let trace = autocorrelation(&state, &axis);
    let scale = basis_revival_time(&basis) / basis.units().hbar;
    let d = (basis.energies()[1] - basis.energies()[0]) * scale;
    for (tau, v) in trace.tau.iter().zip(&trace.values) {
        // direct double sum of the two phase factors
        let direct = (0.5 * Complex64::from_polar(1.0, basis.energies()[0] * scale * tau)
            + 0.5 * Complex64::from_polar(1.0, basis.energies()[1] * scale * tau))
        .norm_sqr();
        assert!((v - (d * tau / 2.0).cos().powi(2)).abs() < 1e-9);
        assert!((v - direct).abs() < 1e-9);
    }
}

#[test]
fn two_well_traces_follow_the_two_state_formula() {
    let s = solve(2, 0.5, COUPLED_MASS, 2000, 2);
    let b = &s.basis;
    let w1 = localized_state(b, &SignPattern::new(vec![1, 1], 0).unwrap()).unwrap();
    let w2 = localized_state(b, &SignPattern::new(vec![1, -1], 1).unwrap()).unwrap();
    let axis = TauAxis::default();
    let traces = well_correlation(&[w1.clone(), w2], &w1, &axis).unwrap();
    let scale = basis_revival_time(b) / b.units().hbar;
    let d = (b.energies()[1] - b.energies()[0]) * scale;
    for i in 0..axis.samples {
        let tau = traces[1].tau[i];
        assert!((traces[1].values[i] - (d * tau / 2.0).sin().powi(2)).abs() < 1e-6);
        assert!((traces[0].values[i] + traces[1].values[i] - 1.0).abs() < 1e-9);
    }
    assert_eq!(traces[0].label, "well_1");
    assert!((traces[0].values[0] - 1.0).abs() < 1e-12);
}

#[test]
fn coefficient_and_grid_overlaps_agree() {
    let s = solve(4, 0.5, COUPLED_MASS, 1000, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut random = || {
        let c: Vec<Complex64> = (0..6)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SpectralState::new(&s.basis, &c).unwrap()
    };
    let (reference, evolving) = (random(), random());
    let start = evolve(&reference, 0.0).unwrap();
    for tau in [0.0, 0.31, 1.27, 1.99] {
        let grid_space = inner_product(&start, &evolve(&evolving, tau).unwrap()).unwrap();
        let coefficient_space = overlap_at(&reference, &evolving, tau).unwrap();
        assert!((grid_space - coefficient_space).norm() < 1e-9);
    }
    let axis = TauAxis::new(1.0, 5).unwrap();
    let trace = &well_correlation(std::slice::from_ref(&reference), &evolving, &axis).unwrap()[0];
    for (tau, v) in trace.tau.iter().zip(&trace.values) {
        let direct = inner_product(&start, &evolve(&evolving, *tau).unwrap()).unwrap().norm_sqr();
        assert!((v - direct).abs() < 1e-9);
    }
}

#[test]
fn mismatched_bases_are_rejected() {
    let a = solve(2, 0.5, COUPLED_MASS, 500, 2);
    let b = solve(2, 0.6, COUPLED_MASS, 500, 2);
    let sa = SpectralState::new(&a.basis, &[c(1.0)]).unwrap();
    let sb = SpectralState::new(&b.basis, &[c(1.0)]).unwrap();
    assert!(matches!(
        well_correlation(&[sa], &sb, &TauAxis::default()),
        Err(Error::BasisMismatch)
    ));
}

#[test]
fn well_probabilities_are_complete_and_symmetric() {
    let s = solve(2, 0.5, 1.0, 2000, 2);
    let ground = &s.basis.states()[0];
    let p = region_probabilities(ground, &s.profile).unwrap();
    assert!((p.total() - 1.0).abs() < 1e-10);
    assert!((p.wells[0] - p.wells[1]).abs() < 1e-9);
    assert!((p.wells[0] - (0.5 - p.barriers[0] / 2.0)).abs() < 1e-9);
    assert!(matches!(probability_in_well(ground, &s.profile, 2), Err(Error::Domain(_))));

    let well1 = localized_state(&s.basis, &SignPattern::new(vec![1, 1], 0).unwrap()).unwrap();
    let psi = evolve(&well1, 0.0).unwrap();
    assert!(probability_in_well(&psi, &s.profile, 0).unwrap() > 0.9);
}

fn well2(b: &EigenSolution) -> SpectralState<'_> {
    localized_state(b, &SignPattern::new(vec![1, -1], 1).unwrap()).unwrap()
}

#[test]
fn hop_period_tracks_the_doublet_splitting() {
    let axis = TauAxis::default();
    let mut periods = Vec::new();
    for height in [0.5, 0.6] {
        let s = solve(2, height, COUPLED_MASS, 2000, 2);
        let b = &s.basis;
        let w1 = localized_state(b, &SignPattern::new(vec![1, 1], 0).unwrap()).unwrap();
        let w2 = localized_state(b, &SignPattern::new(vec![1, -1], 1).unwrap()).unwrap();
        let traces = well_correlation(&[w1.clone(), w2], &w1, &axis).unwrap();
        let t_hop = PI * b.units().hbar / (b.energies()[1] - b.energies()[0]) / basis_revival_time(b);

        let report = hop_report(&traces, 0, 0.9);
        let first = report.first_hop().unwrap();
        assert_eq!(first.well, 1);
        assert!((first.event.tau - t_hop).abs() < 0.01 * t_hop);
        let interval = report.mean_interval.unwrap();
        assert!((interval - t_hop).abs() < 0.01 * t_hop, "{interval} vs {t_hop}");
        // a single trace recurs every other hop
        let long = TauAxis::new(8.0, 8192).unwrap();
        let trace2 = &well_correlation(&[well2(b)], &w1, &long).unwrap()[0];
        let own = detect_hops(trace2, 0.9).period.unwrap();
        assert!((own - 2.0 * t_hop).abs() < 0.01 * 2.0 * t_hop);
        periods.push(interval);
    }
    assert!(periods[0] < periods[1]);
}

#[test]
fn infinite_well_revival_time_scales_with_length() {
    let units = UnitSystem::default();
    let t = revival_time(100.0, &units).unwrap();
    let basis = analytic_basis(200, 1);
    assert_eq!(basis_revival_time(&basis), t);
}
