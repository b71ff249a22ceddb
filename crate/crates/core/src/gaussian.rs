//! Gaussian dynamics of dissipative harmonic networks.
//!
//! A network `H = (p^T p + x^T K x) / 2` is diagonalized into normal modes
//! `X = F^T x`, each mode couples to its bath with an effective weight
//! `kappa_m`, and the secular normal-mode master equation closes on the first
//! and second moments. Those moment equations are integrated here with a
//! fixed-step fourth-order Runge-Kutta scheme.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{self, CMatrix, C64};

/// Orthogonality tolerance for the normal-mode matrix.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
/// Tolerance on `V + i sigma / 2 >= 0` for user-supplied states.
pub const PHYSICALITY_TOL: f64 = 1e-8;
/// Tolerance on the same condition along an integrated trajectory.
pub const INTEGRATION_PHYSICALITY_TOL: f64 = 1e-6;
/// Default relative threshold for [`detect_noiseless_modes`].
pub const NOISELESS_REL_TOL: f64 = 1e-10;

/// How off-diagonal couplings `lambda_ij` enter the potential matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingForm {
    /// `lambda_ij x_i x_j`: the potential matrix has `omega_i^2` on the
    /// diagonal and `lambda_ij` off the diagonal.
    #[default]
    Bilinear,
    /// `lambda_ij (x_i - x_j)^2 / 2`: the potential matrix has
    /// `omega_i^2 + sum_j lambda_ij` on the diagonal and `-lambda_ij` off it.
    /// Positive definite for any nonnegative couplings.
    Spring,
}

/// `N` unit-mass oscillators with frequencies `omega_i` and symmetric
/// couplings `lambda_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicNetwork {
    frequencies: Vec<f64>,
    couplings: DMatrix<f64>,
    form: CouplingForm,
    potential: DMatrix<f64>,
}

impl HarmonicNetwork {
    /// Network with bilinear couplings.
    pub fn new(frequencies: Vec<f64>, couplings: DMatrix<f64>) -> Result<Self> {
        Self::with_form(frequencies, couplings, CouplingForm::Bilinear)
    }

    pub fn with_form(frequencies: Vec<f64>, couplings: DMatrix<f64>, form: CouplingForm) -> Result<Self> {
        let n = frequencies.len();
        if n == 0 {
            return Err(Error::param("frequencies", "network needs at least one oscillator"));
        }
        if let Some(w) = frequencies.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::param(
                "frequencies",
                format!("must be positive and finite, got {w}"),
            ));
        }
        if couplings.nrows() != n || couplings.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: couplings.nrows().max(couplings.ncols()),
            });
        }
        for i in 0..n {
            if couplings[(i, i)] != 0.0 {
                return Err(Error::param("couplings", format!("diagonal entry {i} must be zero")));
            }
            for j in 0..i {
                let (a, b) = (couplings[(i, j)], couplings[(j, i)]);
                if !a.is_finite() || a != b {
                    return Err(Error::param(
                        "couplings",
                        format!("matrix must be symmetric and finite (entries ({i},{j}) and ({j},{i}))"),
                    ));
                }
            }
        }

        let mut potential = DMatrix::zeros(n, n);
        for i in 0..n {
            potential[(i, i)] = frequencies[i] * frequencies[i];
            for j in 0..n {
                if i == j {
                    continue;
                }
                match form {
                    CouplingForm::Bilinear => potential[(i, j)] = couplings[(i, j)],
                    CouplingForm::Spring => {
                        potential[(i, j)] = -couplings[(i, j)];
                        potential[(i, i)] += couplings[(i, j)];
                    }
                }
            }
        }
        check_positive_definite(&potential)?;

        Ok(HarmonicNetwork {
            frequencies,
            couplings,
            form,
            potential,
        })
    }

    /// Two oscillators with a single coupling `lambda`.
    pub fn pair(omega1: f64, omega2: f64, lambda: f64, form: CouplingForm) -> Result<Self> {
        let couplings = DMatrix::from_row_slice(2, 2, &[0.0, lambda, lambda, 0.0]);
        Self::with_form(vec![omega1, omega2], couplings, form)
    }

    pub fn n(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    pub fn form(&self) -> CouplingForm {
        self.form
    }

    /// The potential matrix `K` of `x^T K x / 2`.
    pub fn potential(&self) -> &DMatrix<f64> {
        &self.potential
    }
}

fn check_positive_definite(potential: &DMatrix<f64>) -> Result<()> {
    let min = linalg::symmetric_min_eigenvalue(potential);
    let scale = linalg::max_abs_real(potential).max(f64::MIN_POSITIVE);
    if !(min > 1e-13 * scale) {
        return Err(Error::NonPositiveDefinite { min_eigenvalue: min });
    }
    Ok(())
}

/// Eigenmode decomposition of a network: `F^T K F = diag(Omega^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalModes {
    transform: DMatrix<f64>,
    frequencies: Vec<f64>,
}

impl NormalModes {
    pub fn n(&self) -> usize {
        self.frequencies.len()
    }

    /// Columns are the eigenmodes; `X = F^T x`.
    pub fn transform(&self) -> &DMatrix<f64> {
        &self.transform
    }

    /// Mode frequencies, ascending.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// `blockdiag(F, F)`, mapping mode phase-space vectors to site ones.
    pub fn phase_space_transform(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        s.view_mut((0, 0), (n, n)).copy_from(&self.transform);
        s.view_mut((n, n), (n, n)).copy_from(&self.transform);
        s
    }
}

/// Diagonalizes the potential matrix. Modes are sorted by ascending frequency
/// and each column is signed so its largest-magnitude entry is positive.
pub fn diagonalize(network: &HarmonicNetwork) -> Result<NormalModes> {
    let (values, mut vectors) = linalg::symmetric_eigen_sorted(network.potential());
    let scale = linalg::max_abs_real(network.potential()).max(f64::MIN_POSITIVE);
    if let Some(&min) = values.first() {
        if !(min > 1e-13 * scale) {
            return Err(Error::NonPositiveDefinite { min_eigenvalue: min });
        }
    }
    for mut col in vectors.column_iter_mut() {
        let mut pivot = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[pivot].abs() + 1e-12 {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(NormalModes {
        transform: vectors,
        frequencies: values.iter().map(|v| v.sqrt()).collect(),
    })
}

/// Geometry of the environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathKind {
    /// One independent, identical bath per oscillator.
    Separate,
    /// A single bath coupled to the center of mass `sum_n x_n`.
    Common,
    /// A single bath coupled to oscillator `node` (zero-based).
    Local { node: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathConfig {
    kind: BathKind,
    gamma: f64,
    temperature: f64,
}

impl BathConfig {
    pub fn new(kind: BathKind, gamma: f64, temperature: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::param("gamma", format!("must be positive, got {gamma}")));
        }
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(Error::param(
                "temperature",
                format!("must be nonnegative, got {temperature}"),
            ));
        }
        Ok(BathConfig {
            kind,
            gamma,
            temperature,
        })
    }

    pub fn kind(&self) -> BathKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }
}

/// Effective mode-bath couplings, one row per mode and one column per bath.
///
/// Common bath: `kappa_m = sum_n F_nm`. Local bath on node `M`:
/// `kappa_m = F_Mm`. Separate baths: `K = F^T`.
pub fn effective_couplings(modes: &NormalModes, bath: &BathConfig) -> Result<DMatrix<f64>> {
    let f = modes.transform();
    let n = modes.n();
    match bath.kind() {
        BathKind::Separate => Ok(f.transpose()),
        BathKind::Common => Ok(DMatrix::from_fn(n, 1, |m, _| f.column(m).sum())),
        BathKind::Local { node } => {
            if node >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: node + 1,
                });
            }
            Ok(DMatrix::from_fn(n, 1, |m, _| f[(node, m)]))
        }
    }
}

/// Per-mode coefficients of the secular normal-mode master equation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDissipation {
    kappa: DMatrix<f64>,
    decay: Vec<f64>,
    diffusion: Vec<f64>,
}

impl ModeDissipation {
    pub fn new(kappa: DMatrix<f64>, decay: Vec<f64>, diffusion: Vec<f64>) -> Result<Self> {
        if decay.len() != diffusion.len() || kappa.nrows() != decay.len() {
            return Err(Error::DimensionMismatch {
                expected: decay.len(),
                found: diffusion.len().max(kappa.nrows()),
            });
        }
        if decay.iter().chain(&diffusion).any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::param("dissipation", "rates must be finite and nonnegative"));
        }
        Ok(ModeDissipation {
            kappa,
            decay,
            diffusion,
        })
    }

    /// No coupling to any environment: purely Hamiltonian moment dynamics.
    pub fn dissipationless(n: usize) -> Self {
        ModeDissipation {
            kappa: DMatrix::zeros(n, 1),
            decay: vec![0.0; n],
            diffusion: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.decay.len()
    }

    pub fn kappa(&self) -> &DMatrix<f64> {
        &self.kappa
    }

    /// Decay rates `Gamma_m`.
    pub fn decay(&self) -> &[f64] {
        &self.decay
    }

    /// Diffusion coefficients `D_m`.
    pub fn diffusion(&self) -> &[f64] {
        &self.diffusion
    }
}

/// `coth(Omega / 2T)`, with the `T -> 0` limit taken analytically.
pub fn thermal_factor(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        1.0
    } else {
        1.0 / (omega / (2.0 * temperature)).tanh()
    }
}

/// Mean thermal occupation `1 / (exp(Omega / T) - 1)`; zero at `T = 0`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        0.0
    } else {
        1.0 / (omega / temperature).exp_m1()
    }
}

/// Decay and diffusion coefficients for each normal mode.
///
/// Separate baths give `Gamma_m = gamma` and
/// `D_m = gamma Omega_m coth(Omega_m / 2T)`. A single (common or local) bath
/// weights both by `kappa_m^2`.
pub fn lindblad_coefficients(modes: &NormalModes, bath: &BathConfig, kappa: &DMatrix<f64>) -> Result<ModeDissipation> {
    let n = modes.n();
    if kappa.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: kappa.nrows(),
        });
    }
    let weights: Vec<f64> = match bath.kind() {
        BathKind::Separate => vec![1.0; n],
        BathKind::Common | BathKind::Local { .. } => {
            if kappa.ncols() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    found: kappa.ncols(),
                });
            }
            kappa.column(0).iter().map(|k| k * k).collect()
        }
    };
    let (decay, diffusion) = weights
        .iter()
        .zip(modes.frequencies())
        .map(|(w, &omega)| {
            let decay = bath.gamma() * w;
            (decay, decay * omega * thermal_factor(omega, bath.temperature()))
        })
        .unzip();
    ModeDissipation::new(kappa.clone(), decay, diffusion)
}

/// Modes whose couplings to every bath vanish, i.e. `|K_mb| <= rel_tol *
/// max|K|` for all `b`.
pub fn detect_noiseless_modes(diss: &ModeDissipation, rel_tol: f64) -> Vec<usize> {
    let k = diss.kappa();
    let threshold = rel_tol * linalg::max_abs_real(k);
    (0..k.nrows())
        .filter(|&m| k.row(m).iter().all(|x| x.abs() <= threshold))
        .collect()
}

/// First moments and symmetrized covariance matrix of a Gaussian state over
/// the phase-space vector `(x_1..x_N, p_1..p_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl MomentState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::param("mean", "phase-space dimension must be even and nonzero"));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: cov.nrows(),
            });
        }
        if mean.iter().chain(cov.iter()).any(|x| !x.is_finite()) {
            return Err(Error::param("cov", "entries must be finite"));
        }
        let scale = linalg::max_abs_real(&cov).max(1.0);
        if linalg::max_abs_real(&(&cov - cov.transpose())) > 1e-12 * scale {
            return Err(Error::param("cov", "covariance matrix must be symmetric"));
        }
        let state = MomentState { mean, cov };
        let min = state.uncertainty_min_eigenvalue();
        if min < -PHYSICALITY_TOL * scale {
            return Err(Error::Unphysical { min_eigenvalue: min });
        }
        Ok(state)
    }

    fn unchecked(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        MomentState { mean, cov }
    }

    /// Product of squeezed vacua, one per oscillator:
    /// `<x_n^2> = exp(-2 r_n) / (2 omega_n)`, `<p_n^2> = omega_n exp(2 r_n) / 2`.
    pub fn squeezed_vacuum(frequencies: &[f64], squeezing: &[f64]) -> Result<Self> {
        let n = frequencies.len();
        if squeezing.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: squeezing.len(),
            });
        }
        if frequencies.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::param("frequencies", "must be positive"));
        }
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            let (w, r) = (frequencies[i], squeezing[i]);
            cov[(i, i)] = (-2.0 * r).exp() / (2.0 * w);
            cov[(n + i, n + i)] = w * (2.0 * r).exp() / 2.0;
        }
        Self::new(DVector::zeros(2 * n), cov)
    }

    /// Number of oscillators.
    pub fn n(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// `<x_i^2>`, including the mean.
    pub fn position_second_moment(&self, i: usize) -> f64 {
        self.cov[(i, i)] + self.mean[i] * self.mean[i]
    }

    /// `<p_i^2>`, including the mean.
    pub fn momentum_second_moment(&self, i: usize) -> f64 {
        let k = self.n() + i;
        self.cov[(k, k)] + self.mean[k] * self.mean[k]
    }

    /// Applies a linear phase-space map `r -> S r`.
    pub fn transformed(&self, s: &DMatrix<f64>) -> Self {
        MomentState::unchecked(s * &self.mean, s * &self.cov * s.transpose())
    }

    /// Smallest eigenvalue of `V + i sigma / 2`, nonnegative for physical
    /// states.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let n = self.n();
        let mut m: CMatrix = linalg::to_complex(&self.cov);
        for i in 0..n {
            m[(i, n + i)] += C64::new(0.0, 0.5);
            m[(n + i, i)] -= C64::new(0.0, 0.5);
        }
        linalg::hermitian_min_eigenvalue(&m)
    }

    /// Symplectic eigenvalues (ascending); each is at least 1/2 for a
    /// physical state.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let n = self.n();
        let (vals, vecs) = linalg::symmetric_eigen_sorted(&self.cov);
        let sqrt_diag = DVector::from_iterator(2 * n, vals.iter().map(|v| v.max(0.0).sqrt()));
        let root = &vecs * DMatrix::from_diagonal(&sqrt_diag) * vecs.transpose();
        let root = linalg::to_complex(&root);
        let mut omega = CMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            omega[(i, n + i)] = C64::new(0.0, 1.0);
            omega[(n + i, i)] = C64::new(0.0, -1.0);
        }
        let h = &root * omega * &root;
        let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| a.total_cmp(b));
        eig.split_off(n)
    }
}

/// A sampled Gaussian trajectory kept in both the site and normal-mode bases.
#[derive(Debug, Clone)]
pub struct MomentTrajectory {
    grid: TimeGrid,
    mode_states: Vec<MomentState>,
    site_states: Vec<MomentState>,
}

impl MomentTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    pub fn mode_states(&self) -> &[MomentState] {
        &self.mode_states
    }

    pub fn site_states(&self) -> &[MomentState] {
        &self.site_states
    }

    pub fn n(&self) -> usize {
        self.site_states[0].n()
    }

    /// `<x_i^2>(t)` in the site basis.
    pub fn site_position(&self, i: usize) -> Vec<f64> {
        self.site_states.iter().map(|s| s.position_second_moment(i)).collect()
    }

    /// `<p_i^2>(t)` in the site basis.
    pub fn site_momentum(&self, i: usize) -> Vec<f64> {
        self.site_states.iter().map(|s| s.momentum_second_moment(i)).collect()
    }

    /// `<X_m^2>(t)` in the normal-mode basis.
    pub fn mode_position(&self, m: usize) -> Vec<f64> {
        self.mode_states.iter().map(|s| s.position_second_moment(m)).collect()
    }

    /// `<P_m^2>(t)` in the normal-mode basis.
    pub fn mode_momentum(&self, m: usize) -> Vec<f64> {
        self.mode_states.iter().map(|s| s.momentum_second_moment(m)).collect()
    }

    /// Series by name: `x{i}^2`, `p{i}^2` for sites and `X{m}^2`, `P{m}^2`
    /// for modes, all one-based.
    pub fn observable(&self, name: &str) -> Option<Vec<f64>> {
        let (head, rest) = name.split_at(name.char_indices().nth(1)?.0);
        let index: usize = rest.strip_suffix("^2")?.parse().ok()?;
        if index == 0 || index > self.n() {
            return None;
        }
        let k = index - 1;
        match head {
            "x" => Some(self.site_position(k)),
            "p" => Some(self.site_momentum(k)),
            "X" => Some(self.mode_position(k)),
            "P" => Some(self.mode_momentum(k)),
            _ => None,
        }
    }

    /// Every named site and mode series.
    pub fn observables(&self) -> Vec<(String, Vec<f64>)> {
        let mut out = Vec::with_capacity(4 * self.n());
        for prefix in ["x", "p", "X", "P"] {
            for i in 1..=self.n() {
                let name = format!("{prefix}{i}^2");
                let series = self.observable(&name).expect("valid observable name");
                out.push((name, series));
            }
        }
        out
    }
}

/// Generator of the moment equations in the normal-mode basis.
///
/// Mean: `d<X_m>/dt = <P_m> - Gamma_m/2 <X_m>`,
/// `d<P_m>/dt = -Omega_m^2 <X_m> - Gamma_m/2 <P_m>`.
/// Covariance: `dV/dt = A V + V A^T + diag(D_m / 2 Omega_m^2, D_m / 2)`.
struct MomentGenerator {
    n: usize,
    omega_sq: Vec<f64>,
    half_decay: Vec<f64>,
    noise: Vec<f64>,
}

impl MomentGenerator {
    fn new(modes: &NormalModes, diss: &ModeDissipation) -> Self {
        let n = modes.n();
        let omega_sq: Vec<f64> = modes.frequencies().iter().map(|w| w * w).collect();
        let mut noise = vec![0.0; 2 * n];
        for m in 0..n {
            noise[m] = diss.diffusion()[m] / (2.0 * omega_sq[m]);
            noise[n + m] = diss.diffusion()[m] / 2.0;
        }
        MomentGenerator {
            n,
            half_decay: diss.decay().iter().map(|g| g / 2.0).collect(),
            omega_sq,
            noise,
        }
    }

    fn mean_rhs(&self, mean: &DVector<f64>, out: &mut DVector<f64>) {
        let n = self.n;
        for m in 0..n {
            let (x, p) = (mean[m], mean[n + m]);
            out[m] = p - self.half_decay[m] * x;
            out[n + m] = -self.omega_sq[m] * x - self.half_decay[m] * p;
        }
    }

    fn cov_rhs(&self, cov: &DMatrix<f64>, scratch: &mut DMatrix<f64>, out: &mut DMatrix<f64>) {
        let n = self.n;
        let dim = 2 * n;
        for m in 0..n {
            let g = self.half_decay[m];
            let w2 = self.omega_sq[m];
            for j in 0..dim {
                let x = cov[(m, j)];
                let p = cov[(n + m, j)];
                scratch[(m, j)] = p - g * x;
                scratch[(n + m, j)] = -w2 * x - g * p;
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] = scratch[(i, j)] + scratch[(j, i)];
            }
            out[(i, i)] += self.noise[i];
        }
    }
}

/// Default integration step `0.01 / max(Omega_m)`.
pub fn default_step(modes: &NormalModes) -> f64 {
    let max = modes.frequencies().iter().cloned().fold(0.0, f64::max);
    0.01 / max
}

/// Integrates the moment equations from a site-basis initial state, sampling
/// on `grid` (whose start is the initial time).
pub fn evolve_moments(
    state0: &MomentState,
    modes: &NormalModes,
    diss: &ModeDissipation,
    grid: &TimeGrid,
) -> Result<MomentTrajectory> {
    evolve_moments_with_step(state0, modes, diss, grid, default_step(modes))
}

/// As [`evolve_moments`], with an explicit upper bound on the internal step.
/// Each output interval is split into equal substeps no longer than
/// `max_step`.
pub fn evolve_moments_with_step(
    state0: &MomentState,
    modes: &NormalModes,
    diss: &ModeDissipation,
    grid: &TimeGrid,
    max_step: f64,
) -> Result<MomentTrajectory> {
    let n = modes.n();
    if state0.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: state0.n(),
        });
    }
    if diss.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: diss.n(),
        });
    }
    if !(max_step.is_finite() && max_step > 0.0) {
        return Err(Error::param("max_step", format!("must be positive, got {max_step}")));
    }
    let substeps = (grid.step() / max_step).ceil().max(1.0) as usize;
    let h = grid.step() / substeps as f64;

    let to_sites = modes.phase_space_transform();
    let to_modes = to_sites.transpose();
    let initial = state0.transformed(&to_modes);
    let generator = MomentGenerator::new(modes, diss);
    let mut rk = Rk4::new(2 * n);
    let mut mean = initial.mean.clone();
    let mut cov = initial.cov.clone();

    let mut mode_states = Vec::with_capacity(grid.len());
    let mut site_states = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        if k > 0 {
            for _ in 0..substeps {
                rk.step(&generator, &mut mean, &mut cov, h);
            }
            cov = (&cov + cov.transpose()).scale(0.5);
            let sample = MomentState::unchecked(mean.clone(), cov.clone());
            let min = sample.uncertainty_min_eigenvalue();
            let scale = linalg::max_abs_real(&cov).max(1.0);
            if !(min >= -INTEGRATION_PHYSICALITY_TOL * scale) {
                return Err(Error::UnstableIntegration {
                    time: grid.time(k),
                    min_eigenvalue: min,
                });
            }
        }
        let state = MomentState::unchecked(mean.clone(), cov.clone());
        site_states.push(state.transformed(&to_sites));
        mode_states.push(state);
    }

    Ok(MomentTrajectory {
        grid: *grid,
        mode_states,
        site_states,
    })
}

/// Work buffers for the classical fourth-order Runge-Kutta step.
struct Rk4 {
    km: [DVector<f64>; 4],
    kc: [DMatrix<f64>; 4],
    mean_tmp: DVector<f64>,
    cov_tmp: DMatrix<f64>,
    scratch: DMatrix<f64>,
}

impl Rk4 {
    fn new(dim: usize) -> Self {
        Rk4 {
            km: std::array::from_fn(|_| DVector::zeros(dim)),
            kc: std::array::from_fn(|_| DMatrix::zeros(dim, dim)),
            mean_tmp: DVector::zeros(dim),
            cov_tmp: DMatrix::zeros(dim, dim),
            scratch: DMatrix::zeros(dim, dim),
        }
    }

    fn step(&mut self, g: &MomentGenerator, mean: &mut DVector<f64>, cov: &mut DMatrix<f64>, h: f64) {
        const NODES: [f64; 3] = [0.5, 0.5, 1.0];
        g.mean_rhs(mean, &mut self.km[0]);
        g.cov_rhs(cov, &mut self.scratch, &mut self.kc[0]);
        for s in 0..3 {
            let a = NODES[s] * h;
            self.mean_tmp.copy_from(mean);
            self.mean_tmp.axpy(a, &self.km[s], 1.0);
            self.cov_tmp.copy_from(cov);
            self.cov_tmp.zip_apply(&self.kc[s], |x, k| *x += a * k);
            let (done, rest) = self.km.split_at_mut(s + 1);
            let _ = done;
            g.mean_rhs(&self.mean_tmp, &mut rest[0]);
            let (_, rest) = self.kc.split_at_mut(s + 1);
            g.cov_rhs(&self.cov_tmp, &mut self.scratch, &mut rest[0]);
        }
        let w = h / 6.0;
        for i in 0..mean.len() {
            mean[i] += w * (self.km[0][i] + 2.0 * self.km[1][i] + 2.0 * self.km[2][i] + self.km[3][i]);
        }
        for (idx, x) in cov.iter_mut().enumerate() {
            *x += w * (self.kc[0][idx] + 2.0 * self.kc[1][idx] + 2.0 * self.kc[2][idx] + self.kc[3][idx]);
        }
    }
}
