use qsync_core::linalg::{self, c, CMatrix};
use qsync_core::liouvillian::*;
use qsync_core::spin::{dephasing_block, qubit};
use qsync_core::TimeGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
    })
}

fn random_system(rng: &mut ChaCha8Rng, d: usize) -> OpenSystem {
    let a = random_matrix(rng, d, 1.0);
    let h = (&a + a.adjoint()).scale(0.5);
    let jumps = (0..rng.random_range(1..=3))
        .map(|_| random_matrix(rng, d, 0.3))
        .collect();
    OpenSystem::new(h, jumps).unwrap()
}

fn random_density(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let g = random_matrix(rng, d, 1.0);
    let rho = &g * g.adjoint();
    let tr = linalg::trace(&rho);
    rho / tr
}

#[test]
fn vectorization_round_trip_and_inner_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in 1..6 {
        let a = random_matrix(&mut rng, d, 1.0);
        let b = random_matrix(&mut rng, d, 1.0);
        assert_eq!(devectorize(&vectorize(&a).unwrap()).unwrap(), a);
        let inner = vectorize(&a).unwrap().dotc(&vectorize(&b).unwrap());
        let tr = linalg::trace(&(a.adjoint() * &b));
        assert!((inner - tr).norm() < 1e-12);
    }
}

#[test]
fn superoperator_matches_direct_master_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..40 {
        let d = rng.random_range(2..=6);
        let sys = random_system(&mut rng, d);
        let l = build_liouvillian(&sys);
        let rho = random_density(&mut rng, d);
        let via_l = devectorize(&l.apply(&vectorize(&rho).unwrap())).unwrap();
        let direct = lindblad_rhs(&sys, &rho);
        assert!(linalg::max_abs(&(via_l - direct)) < 1e-12);
    }
}

#[test]
fn constructed_liouvillians_are_valid_generators() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let d = rng.random_range(2..=6);
        let l = build_liouvillian(&random_system(&mut rng, d));
        assert!(l.trace_defect() < 1e-10);
        let dec = spectral_decompose(&l).unwrap();
        let vals = dec.eigenvalues();
        assert!(vals.iter().all(|z| z.re <= 1e-10));
        for z in vals {
            if z.im.abs() > 1e-8 {
                assert!(vals.iter().any(|w| (w - z.conj()).norm() < 1e-8), "no partner for {z}");
            }
        }
        assert!(!dec.stationary_indices().is_empty());
        let scale = linalg::max_abs(l.mat());
        assert!(linalg::max_abs(&(dec.reconstruct() - l.mat())) < 1e-8 * scale);
        let bi = dec.left() * dec.right();
        assert!(linalg::max_abs(&(bi - CMatrix::identity(d * d, d * d))) < 1e-8);
    }
}

#[test]
fn spectral_evolution_matches_matrix_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = TimeGrid::new(0.0, 6.0, 0.25).unwrap();
    for _ in 0..50 {
        let d = rng.random_range(2..=8);
        let sys = random_system(&mut rng, d);
        let l = build_liouvillian(&sys);
        let rho0 = random_density(&mut rng, d);
        let dec = spectral_decompose(&l).unwrap();
        let spectral = evolve_spectral(&dec, &rho0, &grid, &[]).unwrap();
        let exact = propagate_expm(&l, &rho0, &grid, &[]).unwrap();
        for (a, b) in spectral.states().iter().zip(exact.states()) {
            assert!(linalg::max_abs(&(a - b)) < 1e-8);
            assert!(linalg::hermitian_min_eigenvalue(a) > -1e-8);
        }
        assert!(spectral.max_trace_error() < 1e-8);
        assert!(spectral.max_hermiticity_error() < 1e-8);
    }
}

#[test]
fn eigenstate_of_hamiltonian_is_stationary() {
    let h = real_diag(&[0.0, 0.4, 1.3]);
    let sys = OpenSystem::new(h, vec![]).unwrap();
    let rho0 = real_diag(&[0.5, 0.3, 0.2]);
    let grid = TimeGrid::new(0.0, 10.0, 1.0).unwrap();
    let traj = evolve(&sys, &rho0, &grid, &[]).unwrap();
    for rho in traj.states() {
        assert!(linalg::max_abs(&(rho - &rho0)) < 1e-12);
    }
}

#[test]
fn qubit_population_decays_at_twice_the_rate() {
    let gamma: f64 = 0.07;
    let mut sm = CMatrix::zeros(2, 2);
    sm[(1, 0)] = c(gamma.sqrt(), 0.0);
    let sys = OpenSystem::new(real_diag(&[0.5, -0.5]), vec![sm]).unwrap();
    let rho0 = real_diag(&[1.0, 0.0]);
    let grid = TimeGrid::new(0.0, 30.0, 0.5).unwrap();
    let traj = evolve(&sys, &rho0, &grid, &[qubit::sigma_z()]).unwrap();
    for (k, t) in grid.times().iter().enumerate() {
        // The -2 gamma eigenvalue of the population sector.
        let exact = 2.0 * (-2.0 * gamma * t).exp() - 1.0;
        assert!((traj.real_series(0)[k] - exact).abs() < 1e-12);
    }
}

#[test]
fn common_bath_coherence_rates() {
    let gamma = 0.04;
    let model = dephasing_block(1.0, 1.0, gamma, 0.0, 0.0).unwrap();
    let l = build_liouvillian(&model.open_system().unwrap());
    let block = qsync_core::spin::restrict(&l, &qsync_core::spin::COHERENCE_SECTOR);
    let (vals, _) = linalg::eig_general(&block).unwrap();
    let mut rates: Vec<f64> = vals.iter().map(|z| -z.re).collect();
    rates.sort_by(f64::total_cmp);
    // Lower pair {0, 2 gamma}, upper pair {2 gamma (subradiant), 4 gamma
    // (superradiant)}.
    let want = [0.0, 2.0 * gamma, 2.0 * gamma, 4.0 * gamma];
    for (r, w) in rates.iter().zip(want) {
        assert!((r - w).abs() < 1e-12, "{rates:?}");
    }
}

#[test]
fn defective_generator_falls_back_to_expm() {
    // Driven decaying qubit at the exceptional point Omega = gamma / 4, where
    // two Bloch-equation eigenvalues coalesce. Whether or not the numerical
    // eigensystem is flagged as defective, `evolve` must stay accurate.
    let gamma: f64 = 0.4;
    let omega = gamma / 4.0;
    let mut sm = CMatrix::zeros(2, 2);
    sm[(1, 0)] = c(gamma.sqrt(), 0.0);
    let sys = OpenSystem::new(qubit::sigma_x().scale(omega), vec![sm]).unwrap();
    let l = build_liouvillian(&sys);
    let rho0 = real_diag(&[1.0, 0.0]);
    let grid = TimeGrid::new(0.0, 5.0, 0.5).unwrap();
    let traj = evolve(&sys, &rho0, &grid, &[]).unwrap();
    let exact = propagate_expm(&l, &rho0, &grid, &[]).unwrap();
    for (a, b) in traj.states().iter().zip(exact.states()) {
        assert!(linalg::max_abs(&(a - b)) < 1e-6);
    }
    assert!(traj.max_trace_error() < 1e-10);
}

#[test]
fn gap_ignores_stationary_modes() {
    let vals = [c(0.0, 0.0), c(-1e-12, 0.0), c(-0.3, 0.0), c(-0.5, 1.0), c(-0.5, -1.0)];
    let gap = timescale_gap_from_eigenvalues(&vals, 1e-6).unwrap();
    assert_eq!(gap.slow_rate, 0.3);
    assert!((gap.gap_ratio.unwrap() - 5.0 / 3.0).abs() < 1e-15);
    let single = [c(0.0, 0.0), c(-0.2, 0.0)];
    assert_eq!(timescale_gap_from_eigenvalues(&single, 1e-6).unwrap().gap_ratio, None);
}
