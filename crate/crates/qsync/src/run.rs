//! Dispatch from scenarios to the simulation engines.

use nalgebra::DMatrix;
use qsync_core::gaussian::{self, BathConfig, HarmonicNetwork, ModeDissipation, MomentState, NormalModes};
use qsync_core::liouvillian::{self, OpenSystem};
use qsync_core::spin::{self, qubit, DephasingPairModel, OhmicBath};
use qsync_core::sync::{self, Series};
use qsync_core::{linalg, CMatrix, TimeGrid, C64};

use crate::artifact::*;
use crate::error::{Error, Result};
use crate::scenario::{self, BathKind, Model, QubitState, Scenario};

/// Core model objects built from a scenario.
pub(crate) enum Prepared {
    Harmonic(HarmonicSetup),
    Spin {
        system: OpenSystem,
        rho0: CMatrix,
        /// Local master equation run alongside for comparison scenarios.
        local: Option<OpenSystem>,
    },
    Dephasing {
        model: DephasingPairModel,
        rho0: CMatrix,
    },
}

pub(crate) struct HarmonicSetup {
    pub frequencies: Vec<f64>,
    pub form: qsync_core::gaussian::CouplingForm,
    pub bath: BathConfig,
    pub squeezing: Vec<f64>,
    pub modes: NormalModes,
    pub dissipation: ModeDissipation,
    pub state0: MomentState,
    pub max_step: f64,
    pub step_override: Option<f64>,
}

impl Prepared {
    pub(crate) fn observable_names(&self) -> Vec<String> {
        match self {
            Prepared::Harmonic(h) => ["x", "p", "X", "P"]
                .iter()
                .flat_map(|q| (1..=h.modes.n()).map(move |i| format!("{q}{i}^2")))
                .collect(),
            Prepared::Spin { local, .. } => {
                let mut names: Vec<String> = SPIN_OBSERVABLES.iter().map(|s| s.to_string()).collect();
                if local.is_some() {
                    names.extend(SPIN_OBSERVABLES.iter().map(|s| format!("{s}_local")));
                }
                names
            }
            Prepared::Dephasing { .. } => SPIN_OBSERVABLES
                .iter()
                .map(|s| s.to_string())
                .chain(["I".to_string(), "I0".to_string()])
                .collect(),
        }
    }
}

const SPIN_OBSERVABLES: [&str; 6] = ["sx1", "sx2", "sy1", "sy2", "sz1", "sz2"];

fn spin_operator(name: &str) -> Option<CMatrix> {
    let (op, site) = match name {
        "sx1" => (qubit::sigma_x(), 0),
        "sx2" => (qubit::sigma_x(), 1),
        "sy1" => (qubit::sigma_y(), 0),
        "sy2" => (qubit::sigma_y(), 1),
        "sz1" => (qubit::sigma_z(), 0),
        "sz2" => (qubit::sigma_z(), 1),
        _ => return None,
    };
    Some(qubit::on_site(&op, site))
}

fn unit_of(name: &str) -> &'static str {
    match name.chars().next() {
        Some('x' | 'X') => "1/omega1",
        Some('p' | 'P') => "omega1",
        Some('I') => "omega1",
        _ => "1",
    }
}

fn ket(s: QubitState) -> qsync_core::CVector {
    match s {
        QubitState::Excited => qubit::ket_e(),
        QubitState::Ground => qubit::ket_g(),
        QubitState::Plus => qubit::ket_plus(),
    }
}

fn core_secular(s: scenario::Secular) -> spin::Secular {
    match s {
        scenario::Secular::Full => spin::Secular::Full,
        scenario::Secular::Partial => spin::Secular::Partial,
    }
}

pub(crate) fn core_form(f: scenario::CouplingForm) -> gaussian::CouplingForm {
    match f {
        scenario::CouplingForm::Bilinear => gaussian::CouplingForm::Bilinear,
        scenario::CouplingForm::Spring => gaussian::CouplingForm::Spring,
    }
}

fn harmonic_setup(
    frequencies: Vec<f64>,
    couplings: DMatrix<f64>,
    form: gaussian::CouplingForm,
    bath: BathConfig,
    squeezing: &[f64],
    max_step: Option<f64>,
    field: &str,
) -> Result<HarmonicSetup> {
    let network = HarmonicNetwork::with_form(frequencies.clone(), couplings, form)
        .map_err(Error::validation(format!("{field}.couplings")))?;
    let modes = gaussian::diagonalize(&network).map_err(Error::validation(format!("{field}.couplings")))?;
    let kappa = gaussian::effective_couplings(&modes, &bath).map_err(Error::validation(format!("{field}.bath")))?;
    let dissipation =
        gaussian::lindblad_coefficients(&modes, &bath, &kappa).map_err(Error::validation(format!("{field}.bath")))?;
    let state0 = MomentState::squeezed_vacuum(&frequencies, squeezing)
        .map_err(Error::validation(format!("{field}.squeezing")))?;
    let max_step_override = max_step;
    let max_step = match max_step {
        None => gaussian::default_step(&modes),
        Some(h) if h.is_finite() && h > 0.0 => h,
        Some(h) => {
            return Err(Error::invalid(
                format!("{field}.max_step"),
                format!("must be positive, got {h}"),
            ))
        }
    };
    Ok(HarmonicSetup {
        frequencies,
        form,
        bath,
        squeezing: squeezing.to_vec(),
        modes,
        dissipation,
        state0,
        max_step,
        step_override: max_step_override,
    })
}

pub(crate) fn prepare(s: &Scenario) -> Result<Prepared> {
    const FIELD: &str = "model.params";
    match &s.model {
        Model::Harmonic(p) => {
            let n = p.frequencies.len();
            if n == 0 {
                return Err(Error::invalid(
                    format!("{FIELD}.frequencies"),
                    "at least one oscillator is required",
                ));
            }
            if p.couplings.len() != n || p.couplings.iter().any(|row| row.len() != n) {
                return Err(Error::invalid(
                    format!("{FIELD}.couplings"),
                    format!("must be a {n}x{n} matrix"),
                ));
            }
            let couplings = DMatrix::from_fn(n, n, |i, j| p.couplings[i][j]);
            let kind = match p.bath.kind {
                BathKind::Separate => gaussian::BathKind::Separate,
                BathKind::Common => gaussian::BathKind::Common,
                BathKind::Local => match p.bath.site {
                    Some(site) if (1..=n).contains(&site) => gaussian::BathKind::Local { node: site - 1 },
                    _ => {
                        return Err(Error::invalid(
                            format!("{FIELD}.bath.site"),
                            format!("a local bath needs a site between 1 and {n}"),
                        ))
                    }
                },
            };
            if p.bath.kind != BathKind::Local && p.bath.site.is_some() {
                return Err(Error::invalid(
                    format!("{FIELD}.bath.site"),
                    "only local baths take a site",
                ));
            }
            let bath = BathConfig::new(kind, p.bath.gamma, p.bath.temperature)
                .map_err(Error::validation(format!("{FIELD}.bath")))?;
            let setup = harmonic_setup(
                p.frequencies.clone(),
                couplings,
                core_form(p.coupling_form),
                bath,
                &p.squeezing,
                p.max_step,
                FIELD,
            )?;
            Ok(Prepared::Harmonic(setup))
        }
        Model::SpinPairLocalBath(p) | Model::SpinLocalMeComparison(p) => {
            let model = spin::jw_modes(p.omega1, p.omega2, p.lambda).map_err(Error::validation(FIELD))?;
            let bath = OhmicBath::new(p.gamma0, p.cutoff).map_err(Error::validation(FIELD))?;
            let system =
                spin::build_local_bath_me(&model, &bath, core_secular(p.secular)).map_err(Error::validation(FIELD))?;
            let local = match s.model {
                Model::SpinLocalMeComparison(_) => {
                    let rate = spin::ohmic_spectral_density(p.omega1, &bath).map_err(Error::validation(FIELD))?;
                    Some(
                        spin::local_master_equation(p.omega1, p.omega2, p.lambda, [rate, 0.0])
                            .map_err(Error::validation(FIELD))?,
                    )
                }
                _ => None,
            };
            let rho0 = qubit::product_density(&ket(p.initial_state[0]), &ket(p.initial_state[1]));
            Ok(Prepared::Spin { system, rho0, local })
        }
        Model::SpinPairDephasing(p) => {
            let model =
                spin::dephasing_block(p.omega1, p.omega2, p.gamma, p.gamma_z, p.s).map_err(Error::validation(FIELD))?;
            let rho0 = qubit::product_density(&ket(p.initial_state[0]), &ket(p.initial_state[1]));
            Ok(Prepared::Dephasing { model, rho0 })
        }
    }
}

fn provenance(s: &Scenario, grid: &TimeGrid, command: &str) -> Provenance {
    Provenance {
        tool: TOOL.to_string(),
        version: VERSION.to_string(),
        command: command.to_string(),
        grid: GridInfo {
            start: grid.start(),
            step: grid.step(),
            len: grid.len(),
        },
        scenario: s.clone(),
    }
}

fn empty_artifact(s: &Scenario, grid: &TimeGrid, command: &str) -> RunArtifact {
    RunArtifact {
        provenance: provenance(s, grid, command),
        trajectory: None,
        sync: Vec::new(),
        modes: None,
        spectrum: None,
        dephasing_scan: None,
        sweep: None,
    }
}

/// Runs every analysis the scenario defines: the trajectory with its
/// synchronization reports, the spectrum, and the sweep or dephasing scan if
/// present.
pub fn run_scenario(s: &Scenario) -> Result<RunArtifact> {
    s.validate()?;
    let grid = s.grid()?;
    let prepared = prepare(s)?;
    let mut out = empty_artifact(s, &grid, "run");
    let table = trajectory(s, &prepared, &grid)?;
    out.sync = sync_reports(s, &table, &grid)?;
    out.trajectory = Some(table);
    fill_spectrum(s, &prepared, &mut out)?;
    if s.analysis.sweep.is_some() {
        out.sweep = Some(sweep_table(s, &prepared)?);
    }
    Ok(out)
}

/// Only the coupling-detuning sweep.
pub fn run_sweep(s: &Scenario) -> Result<RunArtifact> {
    s.validate()?;
    if s.analysis.sweep.is_none() {
        return Err(Error::Unsupported(format!(
            "scenario `{}` defines no analysis.sweep block",
            s.name
        )));
    }
    let grid = s.grid()?;
    let prepared = prepare(s)?;
    let mut out = empty_artifact(s, &grid, "sweep");
    out.sweep = Some(sweep_table(s, &prepared)?);
    Ok(out)
}

/// Only the generator spectrum, gap report and mode summary.
pub fn run_spectrum(s: &Scenario) -> Result<RunArtifact> {
    s.validate()?;
    let grid = s.grid()?;
    let prepared = prepare(s)?;
    let mut out = empty_artifact(s, &grid, "spectrum");
    fill_spectrum(s, &prepared, &mut out)?;
    Ok(out)
}

fn trajectory(s: &Scenario, prepared: &Prepared, grid: &TimeGrid) -> Result<Table> {
    let mut columns = Vec::with_capacity(s.observables.len());
    let mut push = |name: &str, values: Vec<f64>| {
        columns.push(Column {
            name: name.to_string(),
            unit: unit_of(name).to_string(),
            values,
        })
    };
    match prepared {
        Prepared::Harmonic(h) => {
            let traj = gaussian::evolve_moments_with_step(&h.state0, &h.modes, &h.dissipation, grid, h.max_step)
                .map_err(Error::simulation("moment integration"))?;
            for name in &s.observables {
                let values = traj
                    .observable(name)
                    .ok_or_else(|| Error::invalid("observables", format!("unknown observable `{name}`")))?;
                push(name, values);
            }
        }
        Prepared::Spin { system, rho0, local } => {
            let global = spin_series(system, rho0, grid, &s.observables, "")?;
            let local = match local {
                Some(sys) => spin_series(sys, rho0, grid, &s.observables, "_local")?,
                None => Vec::new(),
            };
            for name in &s.observables {
                let values = global
                    .iter()
                    .chain(&local)
                    .find(|(n, _)| n == name)
                    .map(|(_, v)| v.clone())
                    .ok_or_else(|| Error::invalid("observables", format!("unknown observable `{name}`")))?;
                push(name, values);
            }
        }
        Prepared::Dephasing { model, rho0 } => {
            let sys = model.open_system().map_err(Error::simulation("dephasing model"))?;
            let ops: Vec<(String, CMatrix)> = s
                .observables
                .iter()
                .filter_map(|n| spin_operator(n).map(|op| (n.clone(), op)))
                .collect();
            let obs: Vec<CMatrix> = ops.iter().map(|(_, o)| o.clone()).collect();
            let traj = liouvillian::evolve(&sys, rho0, grid, &obs).map_err(Error::simulation("spin evolution"))?;
            let rates = model.emission_rates();
            for name in &s.observables {
                let values = match name.as_str() {
                    "I" => spin::radiated_intensity(traj.states(), &rates).map_err(Error::simulation("intensity"))?,
                    "I0" => {
                        let clean = model.with_gamma_z(0.0).map_err(Error::simulation("dephasing model"))?;
                        let sys0 = clean.open_system().map_err(Error::simulation("dephasing model"))?;
                        let t0 =
                            liouvillian::evolve(&sys0, rho0, grid, &[]).map_err(Error::simulation("spin evolution"))?;
                        spin::radiated_intensity(t0.states(), &rates).map_err(Error::simulation("intensity"))?
                    }
                    _ => {
                        let k = ops
                            .iter()
                            .position(|(n, _)| n == name)
                            .ok_or_else(|| Error::invalid("observables", format!("unknown observable `{name}`")))?;
                        traj.real_series(k)
                    }
                };
                push(name, values);
            }
        }
    }
    Ok(Table {
        times: grid.times(),
        columns,
    })
}

fn spin_series(
    sys: &OpenSystem,
    rho0: &CMatrix,
    grid: &TimeGrid,
    wanted: &[String],
    suffix: &str,
) -> Result<Vec<(String, Vec<f64>)>> {
    let names: Vec<&str> = SPIN_OBSERVABLES
        .iter()
        .copied()
        .filter(|n| wanted.iter().any(|w| *w == format!("{n}{suffix}")))
        .collect();
    if names.is_empty() {
        return Ok(Vec::new());
    }
    let ops: Vec<CMatrix> = names
        .iter()
        .map(|n| spin_operator(n).expect("known spin observable"))
        .collect();
    let traj = liouvillian::evolve(sys, rho0, grid, &ops).map_err(Error::simulation("spin evolution"))?;
    Ok(names
        .iter()
        .enumerate()
        .map(|(k, n)| (format!("{n}{suffix}"), traj.real_series(k)))
        .collect())
}

fn sync_reports(s: &Scenario, table: &Table, grid: &TimeGrid) -> Result<Vec<SyncSummary>> {
    let a = &s.analysis;
    a.pairs
        .iter()
        .map(|[na, nb]| {
            let series = |name: &str| {
                let values = table
                    .column(name)
                    .ok_or_else(|| Error::invalid("analysis.pairs", format!("`{name}` was not recorded")))?;
                Series::new(*grid, values.to_vec()).map_err(Error::simulation(format!("series `{name}`")))
            };
            let report = sync::analyze(&series(na)?, &series(nb)?, a.window, a.threshold)
                .map_err(Error::simulation(format!("pearson({na}, {nb})")))?;
            let (sustained, min_abs) = match a.span {
                Some([from, to]) => (
                    Some(report.pearson.sustained(from, to, a.threshold)),
                    report.pearson.min_abs(from, to),
                ),
                None => (None, None),
            };
            Ok(SyncSummary {
                a: na.clone(),
                b: nb.clone(),
                window: a.window,
                threshold: a.threshold,
                pearson: report.pearson.values,
                onset: report.onset,
                span: a.span,
                sustained,
                min_abs,
            })
        })
        .collect()
}

fn sort_eigenvalues(values: &mut [C64]) {
    values.sort_by(|a, b| {
        (-a.re)
            .total_cmp(&-b.re)
            .then(a.im.abs().total_cmp(&b.im.abs()))
            .then(a.im.total_cmp(&b.im))
    });
}

fn pairs(values: &[C64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

fn gap_of(values: &[C64], tol_freq: f64) -> Result<Option<Gap>> {
    match liouvillian::timescale_gap_from_eigenvalues(values, tol_freq) {
        Ok(g) => Ok(Some(Gap::from(&g))),
        Err(qsync_core::Error::NoDecayingModes) => Ok(None),
        Err(e) => Err(Error::Simulation {
            context: "gap report".into(),
            source: e,
        }),
    }
}

fn liouvillian_spectrum(sys: &OpenSystem, tol_freq: f64) -> Result<Spectrum> {
    let l = liouvillian::build_liouvillian(sys);
    let (mut values, _) = linalg::eig_general(l.mat()).map_err(Error::simulation("Liouvillian spectrum"))?;
    sort_eigenvalues(&mut values);
    Ok(Spectrum {
        generator: "liouvillian".into(),
        gap: gap_of(&values, tol_freq)?,
        eigenvalues: pairs(&values),
    })
}

fn fill_spectrum(s: &Scenario, prepared: &Prepared, out: &mut RunArtifact) -> Result<()> {
    let tol = s.analysis.tol_freq;
    match prepared {
        Prepared::Harmonic(h) => {
            let n = h.modes.n();
            let kappa = h.dissipation.kappa();
            // Each mode's moment equations have eigenvalues -Gamma_m/2 +- i Omega_m.
            let mut values: Vec<C64> = h
                .modes
                .frequencies()
                .iter()
                .zip(h.dissipation.decay())
                .flat_map(|(&w, &g)| [C64::new(-g / 2.0, w), C64::new(-g / 2.0, -w)])
                .collect();
            sort_eigenvalues(&mut values);
            out.modes = Some(ModeSummary {
                frequencies: h.modes.frequencies().to_vec(),
                transform: (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| h.modes.transform()[(i, j)])
                    .collect(),
                kappa: (0..kappa.nrows())
                    .map(|m| kappa.row(m).iter().copied().collect())
                    .collect(),
                decay: h.dissipation.decay().to_vec(),
                noiseless: gaussian::detect_noiseless_modes(&h.dissipation, gaussian::NOISELESS_REL_TOL),
            });
            out.spectrum = Some(Spectrum {
                generator: "moment_generator".into(),
                gap: gap_of(&values, tol)?,
                eigenvalues: pairs(&values),
            });
        }
        Prepared::Spin { system, .. } => {
            out.spectrum = Some(liouvillian_spectrum(system, tol)?);
        }
        Prepared::Dephasing { model, .. } => {
            let sys = model.open_system().map_err(Error::simulation("dephasing model"))?;
            let mut spectrum = liouvillian_spectrum(&sys, tol)?;
            // The coherence block carries the synchronization-relevant modes.
            let block = model
                .block_eigenvalues()
                .map_err(Error::simulation("coherence block"))?;
            spectrum.gap = gap_of(&block, tol)?;
            out.spectrum = Some(spectrum);
            let Model::SpinPairDephasing(p) = &s.model else {
                unreachable!("dephasing setup from a dephasing scenario")
            };
            if !p.gamma_z_scan.is_empty() {
                out.dephasing_scan = Some(dephasing_scan(model, &p.gamma_z_scan, tol)?);
            }
        }
    }
    Ok(())
}

/// Largest distance from each element of `a` to its nearest unused partner
/// in `b`.
pub fn matching_distance(a: &[C64], b: &[C64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1));
        match best {
            Some((k, d)) => {
                used[k] = true;
                worst = worst.max(d);
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

fn dephasing_scan(model: &DephasingPairModel, scan: &[f64], tol: f64) -> Result<DephasingScan> {
    let base = model
        .with_gamma_z(0.0)
        .and_then(|m| m.block_eigenvalues())
        .map_err(Error::simulation("coherence block"))?;
    let mut out = DephasingScan {
        gamma_z: scan.to_vec(),
        eigenvalues: Vec::with_capacity(scan.len()),
        gap_ratio: Vec::with_capacity(scan.len()),
        max_shift_error: Vec::with_capacity(scan.len()),
    };
    for &gz in scan {
        let mut values = model
            .with_gamma_z(gz)
            .and_then(|m| m.block_eigenvalues())
            .map_err(Error::simulation(format!("coherence block at gamma_z = {gz}")))?;
        sort_eigenvalues(&mut values);
        let shifted: Vec<C64> = base.iter().map(|z| z - C64::new(4.0 * gz, 0.0)).collect();
        out.max_shift_error.push(matching_distance(&values, &shifted));
        out.gap_ratio.push(gap_of(&values, tol)?.and_then(|g| g.gap_ratio));
        out.eigenvalues.push(pairs(&values));
    }
    Ok(out)
}

fn sweep_table(s: &Scenario, prepared: &Prepared) -> Result<SweepTable> {
    let (Prepared::Harmonic(h), Some(spec)) = (prepared, &s.analysis.sweep) else {
        return Err(Error::Unsupported("sweeps are defined for harmonic pairs only".into()));
    };
    let [na, nb] = s.analysis.pairs[0].clone();
    let window = s.analysis.window;
    let t_end = spec.eval_time + window;
    let grid = TimeGrid::new(s.time.start, t_end, s.time.step).map_err(Error::validation("time"))?;
    let omega1 = h.frequencies[0];
    let runner = |lambda: f64, omega2: f64| -> qsync_core::Result<(Series, Series)> {
        let couplings = DMatrix::from_row_slice(2, 2, &[0.0, lambda, lambda, 0.0]);
        let setup = harmonic_setup(
            vec![omega1, omega2],
            couplings,
            h.form,
            h.bath,
            &h.squeezing,
            h.step_override,
            "sweep",
        )
        .map_err(|e| match e {
            Error::Validation { source, .. } => source,
            other => qsync_core::Error::InvalidParameter {
                name: "sweep",
                reason: other.to_string(),
            },
        })?;
        let traj =
            gaussian::evolve_moments_with_step(&setup.state0, &setup.modes, &setup.dissipation, &grid, setup.max_step)?;
        let get = |name: &str| {
            traj.observable(name).ok_or(qsync_core::Error::InvalidParameter {
                name: "analysis.pairs",
                reason: format!("unknown observable `{name}`"),
            })
        };
        Ok((Series::new(grid, get(&na)?)?, Series::new(grid, get(&nb)?)?))
    };
    let matrix = sync::arnold_sweep(
        &spec.lambda.values(),
        &spec.omega2.values(),
        runner,
        spec.eval_time,
        window,
    );
    Ok(SweepTable {
        lambdas: matrix.lambdas,
        omegas: matrix.omegas,
        eval_time: spec.eval_time,
        window,
        values: matrix.values,
    })
}
