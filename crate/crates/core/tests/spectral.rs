mod common;

use std::f64::consts::PI;

use common::{multiwell, setup, solve, COUPLED_MASS};
use qwell::analytic::{infinite_well_energy, infinite_well_state};
use qwell::spectral::{lowest_eigenpairs_with, SolverOptions};
use qwell::{assemble, lowest_eigenpairs, Error, Grid, UnitSystem};

fn flat(points: usize) -> qwell::TridiagonalHamiltonian {
    let grid = Grid::new(100.0, points).unwrap();
    assemble(&vec![0.0; points], &grid, &UnitSystem::default()).unwrap()
}

#[test]
fn three_node_chain_matches_closed_form() {
    let h = flat(3);
    let t = h.hopping();
    let sol = lowest_eigenpairs(&h, 3).unwrap();
    for (k, e) in sol.energies().iter().enumerate() {
        let expected = 2.0 * t * (1.0 - ((k + 1) as f64 * PI / 4.0).cos());
        assert!((e - expected).abs() < 1e-11 * expected, "k={}: {e} vs {expected}", k + 1);
    }
}

#[test]
fn constant_shift_moves_every_level() {
    let grid = Grid::new(100.0, 400).unwrap();
    let units = UnitSystem::default();
    let (profile, _, _) = setup(400, 1.0).discretize(multiwell(2, 0.05)).unwrap();
    let v = qwell::sample(&profile, &grid).unwrap();
    let shifted: Vec<f64> = v.iter().map(|x| x + 0.25).collect();
    let a = lowest_eigenpairs(&assemble(&v, &grid, &units).unwrap(), 5).unwrap();
    let b = lowest_eigenpairs(&assemble(&shifted, &grid, &units).unwrap(), 5).unwrap();
    for n in 0..5 {
        assert!((b.energies()[n] - a.energies()[n] - 0.25).abs() < 1e-9);
        let d = a
            .real_state(n)
            .iter()
            .zip(b.real_state(n))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-6, "state {n} moved by {d}");
    }
}

#[test]
fn halving_spacing_quadruples_hopping() {
    // 199 interior nodes -> h = L/200; 399 -> h = L/400
    let coarse = flat(199).hopping();
    let fine = flat(399).hopping();
    assert!((fine / coarse - 4.0).abs() < 1e-12);
}

#[test]
fn flat_profile_reproduces_infinite_well() {
    let units = UnitSystem::default();
    for (points, tol) in [(2000, 1e-3), (4000, 2.5e-4)] {
        let sol = lowest_eigenpairs(&flat(points), 10).unwrap();
        for n in 1..=10 {
            let exact = infinite_well_energy(n, 100.0, &units).unwrap();
            let rel = (sol.energies()[n - 1] - exact).abs() / exact;
            assert!(rel < tol, "{points} points, n={n}: rel error {rel:e}");
        }
    }
}

#[test]
fn analytic_states_nearly_diagonalize_the_hamiltonian() {
    let h = flat(2000);
    let grid = *h.grid();
    let e1 = infinite_well_energy(1, 100.0, h.units()).unwrap();
    let states: Vec<_> = (1..=5).map(|n| infinite_well_state(n, &grid).unwrap()).collect();
    for m in 0..5 {
        let hm = h.apply_complex(&states[m]);
        for n in 0..5 {
            if m == n {
                continue;
            }
            let element: f64 = states[n]
                .amplitudes()
                .iter()
                .zip(&hm)
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>()
                * grid.spacing();
            assert!(element.abs() < 1e-4 * e1, "<{}|H|{}> = {element:e}", n + 1, m + 1);
        }
    }
}

#[test]
fn two_well_doublet() {
    let s = solve(2, 0.5, 1.0, 2000, 3);
    let e = s.basis.energies();
    let split = e[1] - e[0];
    assert!(split > 0.0);
    assert!(split < 1e-3 * (e[2] - e[1]), "split {split:e}, gap {:e}", e[2] - e[1]);
}

#[test]
fn six_well_sextet_is_separated_from_seventh_level() {
    // the coupled band is wide but still narrower than the gap above it
    for (mass, margin) in [(1.0, 50.0), (COUPLED_MASS, 1.5)] {
        let s = solve(6, 0.5, mass, 2000, 7);
        let e = s.basis.energies();
        let width = e[5] - e[0];
        let gap = e[6] - e[5];
        assert!(gap > margin * width, "mass {mass}: sextet width {width:e}, gap {gap:e}");
    }
}

#[test]
fn level_count_agrees_with_sturm_count() {
    let s = solve(4, 0.5, COUPLED_MASS, 1000, 8);
    let e = s.basis.energies();
    for j in 0..7 {
        let mid = 0.5 * (e[j] + e[j + 1]);
        assert_eq!(s.hamiltonian.count_below(mid), j + 1);
    }
    assert_eq!(s.hamiltonian.count_below(e[0] * 0.5), 0);
}

#[test]
fn parity_alternates_in_symmetric_profiles() {
    for (wells, mass, points) in [
        (1, 1.0, 2000),
        (2, 1.0, 2000),
        (2, COUPLED_MASS, 2001),
        (4, 1.0, 2000),
        (4, COUPLED_MASS, 1999),
        (6, 1.0, 2000),
        (6, COUPLED_MASS, 2000),
    ] {
        let k = (2 * wells).max(4);
        let s = solve(wells, 0.5, mass, points, k);
        for n in 0..k {
            let v = s.basis.real_state(n);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let err = (0..points).map(|i| (v[i] - sign * v[points - 1 - i]).abs()).fold(0.0, f64::max);
            assert!(err < 1e-6, "{wells} wells, mass {mass}, state {}: {err:e}", n + 1);
        }
    }
}

#[test]
fn basis_is_orthonormal_with_small_residuals() {
    for (wells, mass) in [(1, 1.0), (2, 1.0), (2, COUPLED_MASS), (6, 1.0), (6, COUPLED_MASS)] {
        let s = solve(wells, 0.5, mass, 2000, 8);
        assert!(s.basis.orthonormality_error() < 1e-10);
        let top = s.basis.energies()[7];
        for r in s.basis.residuals(&s.hamiltonian).unwrap() {
            assert!(r < 1e-8 * top, "{wells} wells, mass {mass}: residual {r:e}");
        }
        assert!(s.basis.energies().windows(2).all(|w| w[0] <= w[1]));
        s.basis.verify(&s.hamiltonian).unwrap();
    }
}

#[test]
fn coupled_levels_are_strictly_ascending() {
    let s = solve(6, 0.6, COUPLED_MASS, 2000, 12);
    assert!(s.basis.energies().windows(2).all(|w| w[0] < w[1]));
    assert_eq!(s.basis.stats().unresolved_splittings, 0);
}

#[test]
fn eigenvectors_start_positive() {
    let s = solve(2, 0.5, COUPLED_MASS, 1000, 4);
    let h = s.grid.spacing();
    for n in 0..4 {
        let v = s.basis.real_state(n);
        let first = v.iter().find(|x| x.abs() * h.sqrt() > 1e-12).unwrap();
        assert!(*first > 0.0);
    }
}

/// Richardson consistency of the two-well levels under 1000 → 2000 → 4000
/// refinement. Grids of M = 1000·2^j − 1 nodes make h exactly halve.
#[test]
fn two_well_levels_converge_quadratically() {
    let levels: Vec<Vec<f64>> = [999, 1999, 3999]
        .iter()
        .map(|&m| solve(2, 0.5, COUPLED_MASS, m, 6).basis.energies().to_vec())
        .collect();
    for n in 0..6 {
        let (a, b, c) = (levels[0][n], levels[1][n], levels[2][n]);
        assert!((b - a) * (c - b) > 0.0, "level {} not monotone", n + 1);
        let ratio = (b - a) / (c - b);
        assert!((ratio - 4.0).abs() < 0.8, "level {}: ratio {ratio}", n + 1);
    }
}

#[test]
fn requested_count_is_validated() {
    let h = flat(10);
    assert!(matches!(lowest_eigenpairs(&h, 0), Err(Error::Domain(_))));
    assert!(matches!(lowest_eigenpairs(&h, 11), Err(Error::Domain(_))));
    assert_eq!(lowest_eigenpairs(&h, 10).unwrap().len(), 10);
}

#[test]
fn fixed_seed_is_deterministic() {
    let (_, _, h) = setup(800, COUPLED_MASS).discretize(multiwell(4, 0.5)).unwrap();
    let opts = SolverOptions::default();
    let a = lowest_eigenpairs_with(&h, 6, &opts).unwrap();
    let b = lowest_eigenpairs_with(&h, 6, &opts).unwrap();
    assert_eq!(a.energies(), b.energies());
    for n in 0..6 {
        assert_eq!(a.real_state(n), b.real_state(n));
    }
    assert_eq!(a.fingerprint(), h.fingerprint());
}

#[test]
fn fingerprint_tracks_the_hamiltonian() {
    let (_, _, a) = setup(500, 1.0).discretize(multiwell(2, 0.5)).unwrap();
    let (_, _, b) = setup(500, 1.0).discretize(multiwell(2, 0.6)).unwrap();
    let (_, _, c) = setup(500, 0.5).discretize(multiwell(2, 0.5)).unwrap();
    assert_ne!(a.fingerprint(), b.fingerprint());
    assert_ne!(a.fingerprint(), c.fingerprint());
    assert_eq!(a.fingerprint(), setup(500, 1.0).discretize(multiwell(2, 0.5)).unwrap().2.fingerprint());
}
