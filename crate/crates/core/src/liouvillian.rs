//! Lindblad generators in Liouville space.
//!
//! Density matrices are vectorized row-major, `|i><j| -> i*d + j`, so that
//! `A rho B` maps to `(A ⊗ B^T) vec(rho)`. The dissipator carries the factor 2
//! on the jump term, `2 L rho L^† - {L^† L, rho}`, with rates absorbed into
//! the jump operators.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{self, CMatrix, CVector, C64, I};

/// Hermiticity tolerance for Hamiltonians.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Tolerance used to validate initial density matrices.
pub const DENSITY_TOL: f64 = 1e-10;
/// Eigenvalues with `|Re| ` below this are treated as non-decaying.
pub const STATIONARY_TOL: f64 = 1e-8;
/// Smallest admissible biorthogonal overlap before a spectrum is treated as
/// defective.
pub const MIN_OVERLAP: f64 = 1e-12;
/// Relative reconstruction residual accepted by [`spectral_decompose`].
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// A Hamiltonian and a set of jump operators on a `d`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenSystem {
    hamiltonian: CMatrix,
    jumps: Vec<CMatrix>,
}

impl OpenSystem {
    pub fn new(hamiltonian: CMatrix, jumps: Vec<CMatrix>) -> Result<Self> {
        let d = hamiltonian.nrows();
        if d == 0 || hamiltonian.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: hamiltonian.ncols(),
            });
        }
        if hamiltonian.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::param("hamiltonian", "entries must be finite"));
        }
        let scale = linalg::max_abs(&hamiltonian).max(1.0);
        if !linalg::is_hermitian(&hamiltonian, HERMITICITY_TOL * scale) {
            return Err(Error::param("hamiltonian", "must be Hermitian"));
        }
        for l in &jumps {
            if l.nrows() != d || l.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: l.nrows().max(l.ncols()),
                });
            }
            if l.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::param("jumps", "entries must be finite"));
            }
        }
        Ok(OpenSystem { hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[CMatrix] {
        &self.jumps
    }

    /// Adds jump operators to a copy of the system.
    pub fn with_jumps(&self, extra: impl IntoIterator<Item = CMatrix>) -> Result<Self> {
        let mut jumps = self.jumps.clone();
        jumps.extend(extra);
        OpenSystem::new(self.hamiltonian.clone(), jumps)
    }
}

/// Row-major vectorization of a square matrix.
pub fn vectorize(rho: &CMatrix) -> Result<CVector> {
    let d = rho.nrows();
    if rho.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho.ncols(),
        });
    }
    Ok(CVector::from_fn(d * d, |k, _| rho[(k / d, k % d)]))
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &CVector) -> Result<CMatrix> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: v.len(),
        });
    }
    Ok(CMatrix::from_fn(d, d, |i, j| v[i * d + j]))
}

/// Right-hand side of the master equation evaluated directly on `rho`.
pub fn lindblad_rhs(sys: &OpenSystem, rho: &CMatrix) -> CMatrix {
    let h = sys.hamiltonian();
    let mut out = (h * rho - rho * h) * (-I);
    for l in sys.jumps() {
        let ld = l.adjoint();
        let ldl = &ld * l;
        out += (l * rho * &ld).scale(2.0) - rho * &ldl - &ldl * rho;
    }
    out
}

/// The `d^2 x d^2` matrix of a Lindblad generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    mat: CMatrix,
    dim: usize,
}

impl Superoperator {
    /// Wraps an arbitrary `d^2 x d^2` matrix.
    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        let n = mat.nrows();
        let dim = (n as f64).sqrt().round() as usize;
        if mat.ncols() != n || dim * dim != n {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: mat.ncols(),
            });
        }
        Ok(Superoperator { mat, dim })
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    /// Hilbert-space dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.mat * v
    }

    /// `max |<<I| L|`; zero for trace-preserving generators.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|col| (0..d).map(|i| self.mat[(i * d + i, col)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }
}

/// `L = -i(H ⊗ I - I ⊗ H^T) + sum_mu [2 L ⊗ conj(L) - L^†L ⊗ I - I ⊗ (L^†L)^T]`.
pub fn build_liouvillian(sys: &OpenSystem) -> Superoperator {
    let d = sys.dim();
    let id = CMatrix::identity(d, d);
    let h = sys.hamiltonian();
    let mut mat = (linalg::kron(h, &id) - linalg::kron(&id, &h.transpose())) * (-I);
    for l in sys.jumps() {
        let ldl = l.adjoint() * l;
        mat +=
            linalg::kron(l, &l.conjugate()).scale(2.0) - linalg::kron(&ldl, &id) - linalg::kron(&id, &ldl.transpose());
    }
    Superoperator { mat, dim: d }
}

/// Biorthogonal eigensystem `L = sum_i lambda_i |tau_i>><<tau_bar_i|`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<C64>,
    right: CMatrix,
    left: CMatrix,
    dim: usize,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    /// Right eigenvectors as columns.
    pub fn right(&self) -> &CMatrix {
        &self.right
    }

    /// Left eigenvectors as rows, normalized so that `left * right = I`.
    pub fn left(&self) -> &CMatrix {
        &self.left
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Overlap coefficients `p_0i = <<tau_bar_i|rho_0>>`.
    pub fn overlaps(&self, rho0: &CMatrix) -> Result<CVector> {
        if rho0.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho0.nrows(),
            });
        }
        Ok(&self.left * vectorize(rho0)?)
    }

    /// `sum_i lambda_i |tau_i>><<tau_bar_i|`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.right.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.eigenvalues[k];
        }
        scaled * &self.left
    }

    /// Indices of eigenvalues with `|lambda| < STATIONARY_TOL`.
    pub fn stationary_indices(&self) -> Vec<usize> {
        (0..self.eigenvalues.len())
            .filter(|&k| self.eigenvalues[k].norm() < STATIONARY_TOL)
            .collect()
    }
}

/// Computes the biorthogonal eigensystem. Left eigenvectors are the rows of
/// the inverse of the right-eigenvector matrix; near an exceptional point that
/// inverse blows up and [`Error::DefectiveSpectrum`] is returned.
pub fn spectral_decompose(l: &Superoperator) -> Result<SpectralDecomposition> {
    let (eigenvalues, right) = linalg::eig_general(l.mat())?;
    let n = eigenvalues.len();
    let left = right
        .clone()
        .try_inverse()
        .ok_or(Error::DefectiveSpectrum { index: 0, overlap: 0.0 })?;
    for k in 0..n {
        let overlap = 1.0 / (left.row(k).norm() * right.column(k).norm());
        if !(overlap >= MIN_OVERLAP) {
            return Err(Error::DefectiveSpectrum { index: k, overlap });
        }
    }
    let dec = SpectralDecomposition {
        eigenvalues,
        right,
        left,
        dim: l.dim(),
    };
    let scale = linalg::max_abs(l.mat()).max(f64::MIN_POSITIVE);
    let residual = linalg::max_abs(&(dec.reconstruct() - l.mat()));
    if !(residual <= RECONSTRUCTION_TOL * scale) {
        let worst = (0..n)
            .min_by(|&a, &b| {
                let oa = 1.0 / (dec.left.row(a).norm() * dec.right.column(a).norm());
                let ob = 1.0 / (dec.left.row(b).norm() * dec.right.column(b).norm());
                oa.total_cmp(&ob)
            })
            .unwrap_or(0);
        let overlap = 1.0 / (dec.left.row(worst).norm() * dec.right.column(worst).norm());
        return Err(Error::DefectiveSpectrum { index: worst, overlap });
    }
    Ok(dec)
}

/// Checks that `rho` is Hermitian, has unit trace and is positive
/// semidefinite, all to [`DENSITY_TOL`].
pub fn validate_density_matrix(rho: &CMatrix) -> Result<()> {
    if !rho.is_square() || rho.nrows() == 0 {
        return Err(Error::InvalidDensityMatrix("matrix must be square and nonempty".into()));
    }
    if !linalg::is_hermitian(rho, DENSITY_TOL) {
        return Err(Error::InvalidDensityMatrix("matrix is not Hermitian".into()));
    }
    let tr = linalg::trace(rho);
    if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!("trace is {tr}, expected 1")));
    }
    let min = linalg::hermitian_min_eigenvalue(rho);
    if min < -DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!(
            "matrix is not positive semidefinite (smallest eigenvalue {min:e})"
        )));
    }
    Ok(())
}

/// Sampled density matrices and observable expectation values.
#[derive(Debug, Clone)]
pub struct DensityTrajectory {
    grid: TimeGrid,
    states: Vec<CMatrix>,
    expectations: Vec<Vec<C64>>,
}

impl DensityTrajectory {
    fn from_states(grid: TimeGrid, states: Vec<CMatrix>, observables: &[CMatrix]) -> Self {
        let expectations = observables
            .iter()
            .map(|o| states.iter().map(|rho| linalg::trace(&(o * rho))).collect())
            .collect();
        DensityTrajectory {
            grid,
            states,
            expectations,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[CMatrix] {
        &self.states
    }

    /// `Tr(O_k rho(t))` for the `k`-th requested observable.
    pub fn expectation(&self, k: usize) -> &[C64] {
        &self.expectations[k]
    }

    /// Real part of [`Self::expectation`].
    pub fn real_series(&self, k: usize) -> Vec<f64> {
        self.expectations[k].iter().map(|z| z.re).collect()
    }

    pub fn num_observables(&self) -> usize {
        self.expectations.len()
    }

    /// Largest `|Tr rho - 1|` along the trajectory.
    pub fn max_trace_error(&self) -> f64 {
        self.states
            .iter()
            .map(|r| (linalg::trace(r) - C64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|rho - rho^†|` entry along the trajectory.
    pub fn max_hermiticity_error(&self) -> f64 {
        self.states
            .iter()
            .map(|r| linalg::max_abs(&(r - r.adjoint())))
            .fold(0.0, f64::max)
    }
}

fn check_observables(d: usize, observables: &[CMatrix]) -> Result<()> {
    for o in observables {
        if o.nrows() != d || o.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: o.nrows().max(o.ncols()),
            });
        }
    }
    Ok(())
}

/// `|rho_t>> = sum_i p_0i e^{lambda_i (t - t_0)} |tau_i>>`, with `rho0` the
/// state at the first grid time.
pub fn evolve_spectral(
    dec: &SpectralDecomposition,
    rho0: &CMatrix,
    grid: &TimeGrid,
    observables: &[CMatrix],
) -> Result<DensityTrajectory> {
    validate_density_matrix(rho0)?;
    check_observables(dec.dim(), observables)?;
    let p = dec.overlaps(rho0)?;
    let mut states = Vec::with_capacity(grid.len());
    let mut weights = p.clone();
    for t in grid.times() {
        let dt = t - grid.start();
        for (k, w) in weights.iter_mut().enumerate() {
            *w = p[k] * (dec.eigenvalues[k] * dt).exp();
        }
        let v = &dec.right * &weights;
        let rho = devectorize(&v)?;
        states.push((&rho + rho.adjoint()).scale(0.5));
    }
    Ok(DensityTrajectory::from_states(*grid, states, observables))
}

/// Exact propagation by repeated application of `exp(L h)`.
pub fn propagate_expm(
    l: &Superoperator,
    rho0: &CMatrix,
    grid: &TimeGrid,
    observables: &[CMatrix],
) -> Result<DensityTrajectory> {
    validate_density_matrix(rho0)?;
    check_observables(l.dim(), observables)?;
    let step = (l.mat() * C64::new(grid.step(), 0.0)).exp();
    let mut v = vectorize(rho0)?;
    let mut states = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        if k > 0 {
            v = &step * v;
        }
        states.push(devectorize(&v)?);
    }
    Ok(DensityTrajectory::from_states(*grid, states, observables))
}

/// Fixed-step fourth-order Runge-Kutta on the density matrix itself; suited to
/// dimensions where the `d^2 x d^2` generator is too large to diagonalize
/// comfortably.
pub fn propagate_rk4(
    sys: &OpenSystem,
    rho0: &CMatrix,
    grid: &TimeGrid,
    max_step: f64,
    observables: &[CMatrix],
) -> Result<DensityTrajectory> {
    validate_density_matrix(rho0)?;
    check_observables(sys.dim(), observables)?;
    if !(max_step.is_finite() && max_step > 0.0) {
        return Err(Error::param("max_step", format!("must be positive, got {max_step}")));
    }
    let substeps = (grid.step() / max_step).ceil().max(1.0) as usize;
    let h = grid.step() / substeps as f64;
    // rho' = -i (K rho - rho K^†) + 2 sum L rho L^†, with K = H - i sum L^† L.
    let mut k_eff = sys.hamiltonian().clone();
    for l in sys.jumps() {
        k_eff -= (l.adjoint() * l) * I;
    }
    let k_adj = k_eff.adjoint();
    let jumps: Vec<(CMatrix, CMatrix)> = sys.jumps().iter().map(|l| (l.clone(), l.adjoint())).collect();
    let rhs = |rho: &CMatrix| {
        let mut out = (&k_eff * rho - rho * &k_adj) * (-I);
        for (l, ld) in &jumps {
            out += (l * rho * ld).scale(2.0);
        }
        out
    };
    let mut rho = rho0.clone();
    let mut states = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        if k > 0 {
            for _ in 0..substeps {
                let k1 = rhs(&rho);
                let k2 = rhs(&(&rho + &k1 * C64::new(h / 2.0, 0.0)));
                let k3 = rhs(&(&rho + &k2 * C64::new(h / 2.0, 0.0)));
                let k4 = rhs(&(&rho + &k3 * C64::new(h, 0.0)));
                rho += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4) * C64::new(h / 6.0, 0.0);
            }
        }
        states.push(rho.clone());
    }
    Ok(DensityTrajectory::from_states(*grid, states, observables))
}

/// Spectral evolution, falling back to matrix-exponential stepping when the
/// spectrum is defective.
pub fn evolve(sys: &OpenSystem, rho0: &CMatrix, grid: &TimeGrid, observables: &[CMatrix]) -> Result<DensityTrajectory> {
    let l = build_liouvillian(sys);
    match spectral_decompose(&l) {
        Ok(dec) => evolve_spectral(&dec, rho0, grid, observables),
        Err(Error::DefectiveSpectrum { index, overlap }) => {
            log::warn!(
                "defective Liouvillian spectrum (index {index}, overlap {overlap:e}); using matrix-exponential propagation"
            );
            propagate_expm(&l, rho0, grid, observables)
        }
        Err(e) => Err(e),
    }
}

/// Slowest decaying Liouvillian mode and its separation from the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub slow_index: usize,
    pub slow_eigenvalue: C64,
    pub slow_rate: f64,
    /// Smallest decay rate among modes other than the slowest one and its
    /// complex conjugate; `None` if there is no such mode.
    pub next_rate: Option<f64>,
    pub gap_ratio: Option<f64>,
    /// Set when another mode decays within 5% of the slowest rate at a
    /// different frequency; synchronization is then not implied by the gap.
    pub degenerate_frequencies: bool,
}

/// Relative rate window used for the frequency-degeneracy flag.
pub const DEGENERATE_RATE_WINDOW: f64 = 0.05;

pub fn timescale_gap(dec: &SpectralDecomposition, tol_freq: f64) -> Result<GapReport> {
    timescale_gap_from_eigenvalues(dec.eigenvalues(), tol_freq)
}

/// [`GapReport`] from a bare list of eigenvalues. Modes with
/// `|Re lambda| < STATIONARY_TOL` are excluded from both rates.
pub fn timescale_gap_from_eigenvalues(eigenvalues: &[C64], tol_freq: f64) -> Result<GapReport> {
    let decaying: Vec<usize> = (0..eigenvalues.len())
        .filter(|&k| eigenvalues[k].re.abs() >= STATIONARY_TOL)
        .collect();
    let slow_index = *decaying
        .iter()
        .min_by(|&&a, &&b| {
            let (za, zb) = (eigenvalues[a], eigenvalues[b]);
            za.re
                .abs()
                .total_cmp(&zb.re.abs())
                .then(za.im.abs().total_cmp(&zb.im.abs()))
                .then(zb.im.total_cmp(&za.im))
        })
        .ok_or(Error::NoDecayingModes)?;
    let slow = eigenvalues[slow_index];
    let slow_rate = slow.re.abs();
    let same = STATIONARY_TOL * slow.norm().max(1.0);
    let others: Vec<usize> = decaying
        .iter()
        .copied()
        .filter(|&k| {
            let z = eigenvalues[k];
            (z - slow).norm() > same && (z - slow.conj()).norm() > same
        })
        .collect();
    let next_rate = others.iter().map(|&k| eigenvalues[k].re.abs()).min_by(f64::total_cmp);
    let degenerate_frequencies = others.iter().any(|&k| {
        let z = eigenvalues[k];
        (z.re.abs() - slow_rate).abs() <= DEGENERATE_RATE_WINDOW * slow_rate
            && (z.im.abs() - slow.im.abs()).abs() > tol_freq
    });
    Ok(GapReport {
        slow_index,
        slow_eigenvalue: slow,
        slow_rate,
        next_rate,
        gap_ratio: next_rate.map(|r| r / slow_rate),
        degenerate_frequencies,
    })
}

/// Truncated Fock-space operators for a single bosonic mode.
pub mod fock {
    use super::*;

    /// Smallest cutoff used by [`cutoff_for_squeezed_vacuum`].
    pub const MIN_CUTOFF: usize = 30;
    /// Maximum population allowed beyond the cutoff.
    pub const TAIL_TOL: f64 = 1e-8;

    /// Annihilation operator on photon numbers `0..=cutoff`.
    pub fn annihilation(cutoff: usize) -> CMatrix {
        let d = cutoff + 1;
        CMatrix::from_fn(d, d, |i, j| {
            if j == i + 1 {
                C64::new((j as f64).sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Amplitudes of `S(r)|0>` on photon numbers `0..=cutoff`, for the
    /// squeezing convention that reduces the position variance by `e^{-2r}`.
    pub fn squeezed_vacuum(r: f64, cutoff: usize) -> CVector {
        let t = -r.tanh();
        let norm = 1.0 / r.cosh().sqrt();
        let mut amp = CVector::zeros(cutoff + 1);
        // c_{2n} = t^n sqrt((2n)!) / (2^n n!) / sqrt(cosh r), built recursively.
        let mut c = norm;
        let mut n = 0;
        while 2 * n <= cutoff {
            amp[2 * n] = C64::new(c, 0.0);
            let k = (n + 1) as f64;
            c *= t * ((2.0 * k - 1.0) * 2.0 * k).sqrt() / (2.0 * k);
            n += 1;
        }
        amp
    }

    /// Population of the exact squeezed vacuum beyond `cutoff`.
    pub fn squeezed_tail(r: f64, cutoff: usize) -> f64 {
        let kept: f64 = squeezed_vacuum(r, cutoff).iter().map(|z| z.norm_sqr()).sum();
        (1.0 - kept).max(0.0)
    }

    /// Smallest cutoff (at least [`MIN_CUTOFF`]) whose truncated tail holds
    /// less than [`TAIL_TOL`] of the squeezed-vacuum population.
    pub fn cutoff_for_squeezed_vacuum(r: f64) -> usize {
        let mut cutoff = MIN_CUTOFF;
        while squeezed_tail(r, cutoff) >= TAIL_TOL && cutoff < 4096 {
            cutoff += 2;
        }
        cutoff
    }

    /// Density matrix of the squeezed vacuum, renormalized after truncation.
    pub fn squeezed_vacuum_density(r: f64, cutoff: usize) -> CMatrix {
        let psi = squeezed_vacuum(r, cutoff);
        let rho = &psi * psi.adjoint();
        let tr = linalg::trace(&rho);
        rho / tr
    }

    /// Damped oscillator `H = Omega (a^† a + 1/2)` in contact with a thermal
    /// bath: jumps `sqrt(Gamma (n + 1) / 2) a` and `sqrt(Gamma n / 2) a^†`,
    /// giving amplitude decay at `Gamma / 2` and stationary occupation `n`.
    pub fn thermal_oscillator(omega: f64, decay: f64, temperature: f64, cutoff: usize) -> Result<OpenSystem> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::param("omega", "must be positive"));
        }
        if !(decay.is_finite() && decay >= 0.0) {
            return Err(Error::param("decay", "must be nonnegative"));
        }
        let a = annihilation(cutoff);
        let ad = a.adjoint();
        let d = cutoff + 1;
        let h = (&ad * &a + CMatrix::identity(d, d).scale(0.5)).scale(omega);
        let n = crate::gaussian::thermal_occupation(omega, temperature);
        let mut jumps = vec![a.scale((decay * (n + 1.0) / 2.0).sqrt())];
        if n > 0.0 {
            jumps.push(ad.scale((decay * n / 2.0).sqrt()));
        }
        OpenSystem::new(h, jumps)
    }

    /// Position operator `(a + a^†) / sqrt(2 Omega)`.
    pub fn position(omega: f64, cutoff: usize) -> CMatrix {
        let a = annihilation(cutoff);
        (&a + a.adjoint()).scale(1.0 / (2.0 * omega).sqrt())
    }

    /// Momentum operator `-i sqrt(Omega / 2) (a - a^†)`.
    pub fn momentum(omega: f64, cutoff: usize) -> CMatrix {
        let a = annihilation(cutoff);
        (&a - a.adjoint()) * C64::new(0.0, -(omega / 2.0).sqrt())
    }
}

/// Real diagonal matrix as a complex one.
pub fn real_diag(entries: &[f64]) -> CMatrix {
    linalg::to_complex(&DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries)))
}
