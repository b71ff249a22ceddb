//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! The process exits successfully even when a criterion fails so that the
//! remaining test binaries still run; set `QSYNC_ACCEPTANCE_STRICT=1` to turn
//! any FAIL into a nonzero exit status.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use qsync::artifact::RunArtifact;
use qsync::run::matching_distance;
use qsync::{load_scenario, run_scenario, run_sweep, Scenario};
use qsync_core::gaussian::*;
use qsync_core::linalg::{self, c, CMatrix, C64};
use qsync_core::liouvillian::*;
use qsync_core::spin::{
    build_local_bath_me, dephasing_block, excitation_sector, jw_modes, qubit, radiated_intensity, restrict,
    DephasingPairModel, OhmicBath, Secular,
};
use qsync_core::sync::{pearson_slice, GappedSeries};
use qsync_core::TimeGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"));
    load_scenario(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn run(name: &str) -> RunArtifact {
    run_scenario(&scenario(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn pearson_series(a: &RunArtifact, k: usize) -> GappedSeries {
    let g = &a.provenance.grid;
    GappedSeries {
        grid: TimeGrid::from_len(g.start, g.step, g.len).unwrap(),
        values: a.sync[k].pearson.clone(),
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cb = run("fig1_cb");
    let sb = run("fig1_sb");
    let elapsed = start.elapsed();
    let cb_pearson = pearson_series(&cb, 0);
    let cb_min = cb_pearson.min_abs(50.0, 100.0).unwrap_or(0.0);
    let sb_pearson = pearson_series(&sb, 0);
    let step = sb.provenance.grid.step;
    let n = ((30.0 / step).round()) as usize;
    let sb_spans: Vec<f64> = (0..=n)
        .map(|k| 50.0 + k as f64 * step)
        .filter(|&a| sb_pearson.sustained(a, a + 20.0, 0.9))
        .collect();
    let ok = cb_min >= 0.95 && sb_spans.is_empty() && elapsed < Duration::from_secs(10);
    check(
        ok,
        format!(
            "CB min |C| on [50, 100] = {cb_min:.5} (need >= 0.95), onset {:?}; SB sustained 20-spans: {}; SB min |C| {:.3}; {:.2} s",
            cb.sync[0].onset,
            sb_spans.len(),
            sb_pearson.min_abs(50.0, 100.0).unwrap_or(f64::NAN),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let (cb, sb) = pool.install(|| {
        (
            run_sweep(&scenario("fig2")).unwrap(),
            run_sweep(&scenario("fig2_sb")).unwrap(),
        )
    });
    let elapsed = start.elapsed();
    let cb = cb.sweep.unwrap().matrix();
    let sb = sb.sweep.unwrap().matrix();
    if cb.lambdas.len() != 20 || cb.omegas.len() != 20 {
        return Err(format!(
            "grid is {}x{}, expected 20x20",
            cb.lambdas.len(),
            cb.omegas.len()
        ));
    }
    let widths: Vec<usize> = (0..cb.lambdas.len()).map(|i| cb.sync_width(i, 0.9)).collect();
    let intervals = (0..cb.lambdas.len()).all(|i| cb.is_interval(i, 0.9));
    let monotone = widths.windows(2).all(|w| w[0] <= w[1]);
    let off = sb.fraction_above_off_resonance(0.9, 0.05);
    let ok = intervals && monotone && off < 0.05 && elapsed < Duration::from_secs(300);
    check(
        ok,
        format!(
            "CB widths {widths:?} (intervals {intervals}, non-decreasing {monotone}); SB off-resonance fraction {off:.3}; {:.1} s on one thread",
            elapsed.as_secs_f64()
        ),
    )
}

fn amplitude(a: &RunArtifact, name: &str, from: f64, to: f64) -> f64 {
    let t = a.trajectory.as_ref().unwrap();
    let col = t.column(name).unwrap();
    let (lo, hi) = t
        .times
        .iter()
        .zip(col)
        .filter(|(t, _)| **t >= from - 1e-9 && **t <= to + 1e-9)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| {
            (lo.min(*v), hi.max(*v))
        });
    hi - lo
}

fn criterion_3() -> Outcome {
    let a = run("fig3");
    let modes = a.modes.as_ref().unwrap();
    let n = modes.frequencies.len();
    // The antisymmetric mode has components of opposite sign on the two sites.
    let minus = (0..n)
        .find(|&m| modes.transform[m] * modes.transform[n + m] < 0.0)
        .ok_or("no antisymmetric mode")?;
    let kappa = modes.kappa[minus].iter().fold(0.0f64, |m, k| m.max(k.abs()));
    let mut ratios = Vec::new();
    for x in ["x1^2", "x2^2"] {
        ratios.push(amplitude(&a, x, 200.0, 220.0) / amplitude(&a, x, 50.0, 70.0));
    }
    let mins: Vec<f64> = (0..a.sync.len())
        .map(|k| pearson_series(&a, k).min_abs(200.0, 220.0).unwrap_or(0.0))
        .collect();
    let ok = kappa <= 1e-12 && ratios.iter().all(|r| *r > 0.5) && mins.len() == 2 && mins.iter().all(|m| *m >= 0.99);
    check(
        ok,
        format!("kappa_minus {kappa:.1e}; late/early amplitude {ratios:.3?}; min |C| on [200, 220] {mins:.5?}"),
    )
}

fn criterion_4() -> Outcome {
    let left = run("fig4_left");
    let right = run("fig4_right");
    let ratio = |a: &RunArtifact| {
        a.spectrum
            .as_ref()
            .and_then(|s| s.gap.as_ref())
            .and_then(|g| g.gap_ratio)
    };
    let (rl, rr) = (ratio(&left), ratio(&right));
    let (sl, sr) = (left.sync[0].sustained, right.sync[0].sustained);
    let ok = sl == Some(true) && sr == Some(false) && matches!((rl, rr), (Some(l), Some(r)) if l > r);
    check(
        ok,
        format!("omega2 = 0.7: sustained {sl:?}, gap ratio {rl:?}; omega2 = 0.99: sustained {sr:?}, gap ratio {rr:?}"),
    )
}

fn dephasing_draws(n: usize) -> Vec<DephasingPairModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..n)
        .map(|_| {
            dephasing_block(
                rng.random_range(0.5..1.5),
                rng.random_range(0.5..1.5),
                rng.random_range(0.001..0.1),
                0.0,
                rng.random_range(-0.1..0.1),
            )
            .unwrap()
        })
        .collect()
}

const GAMMA_Z: [f64; 6] = [0.0, 0.001, 0.005, 0.02, 0.05, 0.1];

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for base in dephasing_draws(100) {
        let ev0 = base.block_eigenvalues().unwrap();
        let mut previous = f64::INFINITY;
        for gz in GAMMA_Z {
            let ev = base.with_gamma_z(gz).unwrap().block_eigenvalues().unwrap();
            let expected: Vec<C64> = ev0.iter().map(|z| z - C64::new(4.0 * gz, 0.0)).collect();
            worst = worst.max(matching_distance(&ev, &expected));
            let ratio = timescale_gap_from_eigenvalues(&ev, 1e-6)
                .ok()
                .and_then(|g| g.gap_ratio)
                .unwrap_or(f64::INFINITY);
            // Equal ratios may differ in the last bit after the shift.
            if ratio > previous * (1.0 + 1e-12) {
                violations += 1;
            }
            previous = ratio;
        }
    }
    let scan = run("dephasing_shift").dephasing_scan.unwrap();
    let bundled = scan.max_shift_error.iter().cloned().fold(0.0, f64::max);
    let ok = worst < 1e-10 && bundled < 1e-10 && violations == 0;
    check(
        ok,
        format!(
            "max shift error {worst:.2e} over 100 draws x {} gamma_z (bundled {bundled:.2e}); gap-ratio increases: {violations}",
            GAMMA_Z.len()
        ),
    )
}

fn slowest_rate(values: &[C64]) -> f64 {
    values
        .iter()
        .map(|z| -z.re)
        .filter(|r| *r > 1e-8)
        .fold(f64::INFINITY, f64::min)
}

fn criterion_6() -> Outcome {
    let a = run("dephasing_shift");
    let t = a.trajectory.as_ref().unwrap();
    let (i, i0) = (t.column("I").unwrap(), t.column("I0").unwrap());
    let mut sup = i.iter().zip(i0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);

    let grid = TimeGrid::new(0.0, 100.0, 0.5).unwrap();
    let rho0 = qubit::product_density(&qubit::ket_plus(), &qubit::ket_e());
    let (mut rate_err, mut shift_err): (f64, f64) = (0.0, 0.0);
    for base in dephasing_draws(20) {
        let noisy = base.with_gamma_z(0.03).unwrap();
        let ta = evolve(&base.open_system().unwrap(), &rho0, &grid, &[]).unwrap();
        let tb = evolve(&noisy.open_system().unwrap(), &rho0, &grid, &[]).unwrap();
        let ia = radiated_intensity(ta.states(), &base.emission_rates()).unwrap();
        let ib = radiated_intensity(tb.states(), &noisy.emission_rates()).unwrap();
        sup = ia.iter().zip(&ib).map(|(x, y)| (x - y).abs()).fold(sup, f64::max);

        let l = build_liouvillian(&base.open_system().unwrap());
        let correlator = slowest_rate(&linalg::eig_general(&restrict(&l, &excitation_sector(0))).unwrap().0);
        // I(t) is quadratic in the coherence amplitudes, so its block decays
        // at twice the amplitude rate.
        let coherence0 = slowest_rate(&base.block_eigenvalues().unwrap());
        rate_err = rate_err.max((correlator / 2.0 - coherence0).abs());
        let coherence = slowest_rate(&noisy.block_eigenvalues().unwrap());
        shift_err = shift_err.max((coherence - coherence0 - 4.0 * 0.03).abs());
    }
    let ok = sup < 1e-10 && rate_err < 1e-8 && shift_err < 1e-10;
    check(
        ok,
        format!("sup |I - I0| {sup:.2e}; coherence vs correlator rate {rate_err:.2e}; 4 gamma_z shift error {shift_err:.2e}"),
    )
}

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

/// Trace defect, failure of `L(rho^dag) = L(rho)^dag` (which makes the
/// spectrum closed under conjugation), and the largest distance from an
/// eigenvalue to its nearest conjugate.
fn generator_defects(l: &Superoperator) -> (f64, f64, f64) {
    let d = l.dim();
    let m = l.mat();
    let swap = |k: usize| (k % d) * d + k / d;
    let mut hermiticity: f64 = 0.0;
    for a in 0..d * d {
        for b in 0..d * d {
            hermiticity = hermiticity.max((m[(swap(a), swap(b))].conj() - m[(a, b)]).norm());
        }
    }
    let vals = linalg::eig_general(m).unwrap().0;
    let scale = linalg::max_abs(m).max(1.0);
    let unpaired = vals
        .iter()
        .map(|z| vals.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    (l.trace_defect(), hermiticity / scale, unpaired / scale)
}

fn fock_variances(omega: f64, gamma: f64, temp: f64, r: f64, grid: &TimeGrid) -> (Vec<f64>, Vec<f64>, Superoperator) {
    let cutoff = fock::cutoff_for_squeezed_vacuum(r);
    let sys = fock::thermal_oscillator(omega, gamma, temp, cutoff).unwrap();
    let rho0 = fock::squeezed_vacuum_density(r, cutoff);
    let x = fock::position(omega, cutoff);
    let p = fock::momentum(omega, cutoff);
    let obs = [&x * &x, &p * &p];
    let traj = propagate_rk4(&sys, &rho0, grid, 0.02 / omega, &obs).unwrap();
    (traj.real_series(0), traj.real_series(1), build_liouvillian(&sys))
}

fn criterion_7() -> Outcome {
    let mut liouvillians = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = TimeGrid::new(0.0, 6.0, 0.25).unwrap();
    let mut spectral_err: f64 = 0.0;
    for _ in 0..50 {
        let d = rng.random_range(2..=8);
        let l = build_liouvillian(&random_system(&mut rng, d));
        let rho0 = random_density(&mut rng, d);
        let dec = spectral_decompose(&l).unwrap();
        let a = evolve_spectral(&dec, &rho0, &grid, &[]).unwrap();
        let b = propagate_expm(&l, &rho0, &grid, &[]).unwrap();
        for (x, y) in a.states().iter().zip(b.states()) {
            spectral_err = spectral_err.max(linalg::max_abs(&(x - y)));
        }
        liouvillians.push(l);
    }

    let (omega, gamma) = (1.0, 0.1);
    let fock_grid = TimeGrid::new(0.0, 30.0, 0.5).unwrap();
    let mut fock_err: f64 = 0.0;
    for (r, temp) in [(0.0, 0.0), (0.3, 0.0), (0.3, 0.5), (0.15, 0.25)] {
        let net = HarmonicNetwork::new(vec![omega], DMatrix::zeros(1, 1)).unwrap();
        let modes = diagonalize(&net).unwrap();
        let bath = BathConfig::new(BathKind::Separate, gamma, temp).unwrap();
        let diss = lindblad_coefficients(&modes, &bath, &effective_couplings(&modes, &bath).unwrap()).unwrap();
        let s0 = MomentState::squeezed_vacuum(&[omega], &[r]).unwrap();
        let traj = evolve_moments(&s0, &modes, &diss, &fock_grid).unwrap();
        let (fx, fp, l) = fock_variances(omega, gamma, temp, r, &fock_grid);
        for (k, (gx, gp)) in traj.site_position(0).iter().zip(traj.site_momentum(0)).enumerate() {
            fock_err = fock_err
                .max(((gx - fx[k]) / fx[k]).abs())
                .max(((gp - fp[k]) / fp[k]).abs());
        }
        liouvillians.push(l);
    }

    let bath = OhmicBath::new(0.005, 10.0).unwrap();
    for omega2 in [0.7, 0.99] {
        let model = jw_modes(1.0, omega2, 0.2).unwrap();
        for secular in [Secular::Full, Secular::Partial] {
            liouvillians.push(build_liouvillian(&build_local_bath_me(&model, &bath, secular).unwrap()));
        }
    }
    for base in dephasing_draws(20) {
        for gz in [0.0, 0.02] {
            liouvillians.push(build_liouvillian(
                &base.with_gamma_z(gz).unwrap().open_system().unwrap(),
            ));
        }
    }
    let (mut trace, mut hermiticity, mut pairs): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for l in &liouvillians {
        let (t, h, p) = generator_defects(l);
        trace = trace.max(t);
        hermiticity = hermiticity.max(h);
        pairs = pairs.max(p);
    }
    // Degenerate clusters in the truncated oscillator spectra are resolved by
    // the eigensolver only to about sqrt(eps); the structural check is exact.
    let ok = spectral_err < 1e-8 && fock_err < 1e-4 && trace < 1e-10 && hermiticity < 1e-14 && pairs < 1e-6;
    check(
        ok,
        format!(
            "spectral vs expm {spectral_err:.2e}; Gaussian vs Fock {fock_err:.2e} relative; over {} Liouvillians trace defect {trace:.2e}, conjugation defect {hermiticity:.2e}, eigenvalue pairing {pairs:.2e}",
            liouvillians.len()
        ),
    )
}

fn series_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (12usize..80).prop_flat_map(|n| {
        (
            prop::collection::vec(-1e3..1e3f64, n),
            prop::collection::vec(-1e3..1e3f64, n),
        )
    })
}

fn network(max_n: usize) -> impl Strategy<Value = HarmonicNetwork> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(0.5..2.0f64, n),
            prop::collection::vec(0.0..1.0f64, n * n),
            prop::collection::vec(prop::bool::weighted(0.3), n * n),
            prop::bool::ANY,
        )
            .prop_map(move |(w, lam, on, spring)| {
                let mut c = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..i {
                        if on[i * n + j] {
                            let v = if spring {
                                lam[i * n + j]
                            } else {
                                0.2 * lam[i * n + j] / n as f64
                            };
                            c[(i, j)] = v;
                            c[(j, i)] = v;
                        }
                    }
                }
                let form = if spring {
                    CouplingForm::Spring
                } else {
                    CouplingForm::Bilinear
                };
                HarmonicNetwork::with_form(w, c, form).unwrap()
            })
    })
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let pearson = runner(10_000).run(
        &(
            series_pair(),
            prop_oneof![-100.0..-1e-3f64, 1e-3..100.0f64],
            -1e3..1e3f64,
        ),
        |((a, b), alpha, beta)| {
            let Some(c) = pearson_slice(&a, &b) else { return Ok(()) };
            prop_assert!(c.abs() <= 1.0);
            prop_assert_eq!(Some(c), pearson_slice(&b, &a));
            let scaled: Vec<f64> = a.iter().map(|x| alpha * x + beta).collect();
            let cs = pearson_slice(&scaled, &b).unwrap();
            prop_assert!((cs - alpha.signum() * c).abs() < 1e-9);
            Ok(())
        },
    );
    if let Err(e) = pearson {
        failures.push(format!("pearson: {e}"));
    }
    let jw = runner(10_000).run(&(0.05..5.0f64, 0.05..5.0f64, -3.0..3.0f64), |(w1, w2, lambda)| {
        let m = jw_modes(w1, w2, lambda).unwrap();
        prop_assert!(m.fermionic_algebra_error() < 1e-10);
        prop_assert!(m.mode_condition_error() < 1e-10);
        Ok(())
    });
    if let Err(e) = jw {
        failures.push(format!("jw_modes: {e}"));
    }
    let orthogonal = runner(256).run(&network(16), |net| {
        let modes = diagonalize(&net).unwrap();
        let f = modes.transform();
        let n = net.n();
        prop_assert!((f.transpose() * f - DMatrix::<f64>::identity(n, n)).abs().max() < 1e-12);
        Ok(())
    });
    if let Err(e) = orthogonal {
        failures.push(format!("orthogonality: {e}"));
    }
    let symplectic = runner(48).run(
        &(
            network(16),
            prop::collection::vec((0.5..3.0f64, -0.8..0.8f64, -1.0..1.0f64), 16),
        ),
        |(net, seed)| {
            let n = net.n();
            let modes = diagonalize(&net).unwrap();
            let mut cov = DMatrix::zeros(2 * n, 2 * n);
            let mut mean = DVector::zeros(2 * n);
            for i in 0..n {
                let (nu, r, m) = seed[i];
                let w = net.frequencies()[i];
                cov[(i, i)] = nu * (-2.0 * r).exp() / w;
                cov[(n + i, n + i)] = nu * w * (2.0 * r).exp();
                mean[i] = m;
            }
            let s0 = MomentState::new(mean, cov).unwrap();
            let before = s0.symplectic_eigenvalues();
            let grid = TimeGrid::new(0.0, 5.0, 1.0).unwrap();
            let traj = evolve_moments(&s0, &modes, &ModeDissipation::dissipationless(n), &grid).unwrap();
            for state in traj.site_states() {
                for (x, y) in before.iter().zip(&state.symplectic_eigenvalues()) {
                    prop_assert!((x - y).abs() < 1e-8);
                }
            }
            Ok(())
        },
    );
    if let Err(e) = symplectic {
        failures.push(format!("symplectic spectrum: {e}"));
    }
    if failures.is_empty() {
        Ok("Pearson and jw_modes over 10^4 cases each; orthogonality over 256 and symplectic conservation over 48 networks with N <= 16".into())
    } else {
        Err(failures.join("; "))
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("harmonic pair, common vs separate bath", criterion_1),
        ("coupling-detuning sweep", criterion_2),
        ("stationary synchronization at resonance", criterion_3),
        ("spin pair in a local bath", criterion_4),
        ("dephasing shift identity", criterion_5),
        ("intensity invariance under dephasing", criterion_6),
        ("engine oracles", criterion_7),
        ("property suites", criterion_8),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let n = k + 1;
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS ({name}) {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL ({name}) {detail} [{secs:.1} s]");
            }
        }
    }
    println!("acceptance: {failed} criteria failed");
    let strict = std::env::var("QSYNC_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed > 0 && strict {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
