//! Qubit-pair models.
//!
//! Single-qubit basis is `{|e>, |g>}` (index 0 is the excited state), so
//! `sigma_z = diag(1, -1)` and `sigma_- |e> = |g>`. Two-qubit operators use the
//! ordering `ee, eg, ge, gg`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::liouvillian::{OpenSystem, Superoperator};

/// Default exponential cutoff of the Ohmic spectral density.
pub const DEFAULT_OHMIC_CUTOFF: f64 = 10.0;

pub mod qubit {
    use super::*;

    fn real(entries: [f64; 4]) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &entries.map(|x| C64::new(x, 0.0)))
    }

    pub fn identity() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    pub fn sigma_z() -> CMatrix {
        real([1.0, 0.0, 0.0, -1.0])
    }

    pub fn sigma_x() -> CMatrix {
        real([0.0, 1.0, 1.0, 0.0])
    }

    pub fn sigma_y() -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        )
    }

    /// `|e><g|`.
    pub fn sigma_plus() -> CMatrix {
        real([0.0, 1.0, 0.0, 0.0])
    }

    /// `|g><e|`.
    pub fn sigma_minus() -> CMatrix {
        real([0.0, 0.0, 1.0, 0.0])
    }

    /// Embeds a single-qubit operator on `site` (0 or 1) of the pair.
    pub fn on_site(op: &CMatrix, site: usize) -> CMatrix {
        match site {
            0 => linalg::kron(op, &identity()),
            _ => linalg::kron(&identity(), op),
        }
    }

    pub fn ket_e() -> CVector {
        CVector::from_column_slice(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
    }

    pub fn ket_g() -> CVector {
        CVector::from_column_slice(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
    }

    /// `(|e> + |g>) / sqrt 2`, the `+1` eigenstate of `sigma_x`.
    pub fn ket_plus() -> CVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CVector::from_column_slice(&[C64::new(s, 0.0), C64::new(s, 0.0)])
    }

    /// Pure product state `|a> ⊗ |b>` as a density matrix.
    pub fn product_density(a: &CVector, b: &CVector) -> CMatrix {
        let psi = a.kronecker(b);
        let rho = &psi * psi.adjoint();
        let tr = linalg::trace(&rho);
        rho / tr
    }
}

/// Two qubits with an `sigma_x sigma_x` coupling,
/// `H = omega1/2 sigma1_z + omega2/2 sigma2_z + lambda sigma1_x sigma2_x`,
/// diagonalized by a Jordan-Wigner transformation.
#[derive(Debug, Clone)]
pub struct SpinPairModel {
    pub omega1: f64,
    pub omega2: f64,
    pub lambda: f64,
    pub theta_plus: f64,
    pub theta_minus: f64,
    /// Mode energies with `e1 >= e2`.
    pub e1: f64,
    pub e2: f64,
    /// Fermionic annihilation operators of the two modes.
    pub eta: [CMatrix; 2],
    pub hamiltonian: CMatrix,
}

/// `H = omega1/2 sigma1_z + omega2/2 sigma2_z + lambda sigma1_x sigma2_x`.
pub fn xx_pair_hamiltonian(omega1: f64, omega2: f64, lambda: f64) -> CMatrix {
    use qubit::*;
    on_site(&sigma_z(), 0).scale(omega1 / 2.0)
        + on_site(&sigma_z(), 1).scale(omega2 / 2.0)
        + linalg::kron(&sigma_x(), &sigma_x()).scale(lambda)
}

/// Jordan-Wigner normal modes of the coupled pair.
///
/// With `c1 = sigma1_-` and `c2 = sigma1_z sigma2_-`, the modes are
/// `eta_k^† = sum_j (U_jk c_j^† + V_jk c_j)` with mixing angles
/// `theta_± = atan2(2 lambda, omega1 ± omega2) / 2`, which coincide with
/// `arcsin(2 lambda / sqrt(4 lambda^2 + (omega1 ± omega2)^2)) / 2` whenever
/// the argument of the cosine is nonnegative. Energies are
/// `E_{1,2} = (A ± B) / 2` with `A = sqrt((omega1 + omega2)^2 + 4 lambda^2)`,
/// `B = sqrt((omega1 - omega2)^2 + 4 lambda^2)`.
pub fn jw_modes(omega1: f64, omega2: f64, lambda: f64) -> Result<SpinPairModel> {
    for (name, w) in [("omega1", omega1), ("omega2", omega2)] {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::param(name, format!("must be positive, got {w}")));
        }
    }
    if !lambda.is_finite() {
        return Err(Error::param("lambda", "must be finite"));
    }
    use qubit::*;
    let theta_plus = 0.5 * (2.0 * lambda).atan2(omega1 + omega2);
    let theta_minus = 0.5 * (2.0 * lambda).atan2(omega1 - omega2);
    let (sp, cp) = theta_plus.sin_cos();
    let (sm, cm) = theta_minus.sin_cos();
    let (cc, cs, sc, ss) = (cp * cm, cp * sm, sp * cm, sp * sm);
    let u = [[cc, cs], [-cs, cc]];
    let v = [[-ss, sc], [-sc, -ss]];

    let c = [
        on_site(&sigma_minus(), 0),
        on_site(&sigma_z(), 0) * on_site(&sigma_minus(), 1),
    ];
    let cd = [c[0].adjoint(), c[1].adjoint()];
    let eta = std::array::from_fn(|k| {
        let mut create = CMatrix::zeros(4, 4);
        for j in 0..2 {
            create += cd[j].scale(u[j][k]) + c[j].scale(v[j][k]);
        }
        create.adjoint()
    });

    let a = ((omega1 + omega2).powi(2) + 4.0 * lambda * lambda).sqrt();
    let b = ((omega1 - omega2).powi(2) + 4.0 * lambda * lambda).sqrt();
    Ok(SpinPairModel {
        omega1,
        omega2,
        lambda,
        theta_plus,
        theta_minus,
        e1: (a + b) / 2.0,
        e2: (a - b) / 2.0,
        eta,
        hamiltonian: xx_pair_hamiltonian(omega1, omega2, lambda),
    })
}

impl SpinPairModel {
    /// `theta_+ + theta_-`, the angle weighting the modes in `sigma1_x`.
    pub fn mixing_angle(&self) -> f64 {
        self.theta_plus + self.theta_minus
    }

    pub fn energies(&self) -> [f64; 2] {
        [self.e1, self.e2]
    }

    /// Largest deviation from `{eta_i, eta_j^†} = delta_ij` and
    /// `{eta_i, eta_j} = 0`.
    pub fn fermionic_algebra_error(&self) -> f64 {
        let id = CMatrix::identity(4, 4);
        let mut err: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut ac = linalg::anticommutator(&self.eta[i], &self.eta[j].adjoint());
                if i == j {
                    ac -= &id;
                }
                err = err.max(linalg::max_abs(&ac));
                err = err.max(linalg::max_abs(&linalg::anticommutator(&self.eta[i], &self.eta[j])));
            }
        }
        err
    }

    /// Largest deviation from `[H, eta_k^†] = E_k eta_k^†`.
    pub fn mode_condition_error(&self) -> f64 {
        (0..2)
            .map(|k| {
                let create = self.eta[k].adjoint();
                let lhs = linalg::commutator(&self.hamiltonian, &create);
                linalg::max_abs(&(lhs - create.scale(self.energies()[k])))
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation of `sigma1_x` from
    /// `cos(theta) (eta1 + eta1^†) + sin(theta) (eta2 + eta2^†)`.
    pub fn quadrature_error(&self) -> f64 {
        let (s, c) = self.mixing_angle().sin_cos();
        let q = (&self.eta[0] + self.eta[0].adjoint()).scale(c) + (&self.eta[1] + self.eta[1].adjoint()).scale(s);
        linalg::max_abs(&(q - qubit::on_site(&qubit::sigma_x(), 0)))
    }
}

/// Zero-temperature Ohmic environment `J(omega) = gamma0 omega e^{-omega/omega_c}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhmicBath {
    gamma0: f64,
    cutoff: f64,
}

impl OhmicBath {
    pub fn new(gamma0: f64, cutoff: f64) -> Result<Self> {
        if !(gamma0.is_finite() && gamma0 > 0.0) {
            return Err(Error::param("gamma0", format!("must be positive, got {gamma0}")));
        }
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::param("cutoff", format!("must be positive, got {cutoff}")));
        }
        Ok(OhmicBath { gamma0, cutoff })
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }
}

pub fn ohmic_spectral_density(omega: f64, bath: &OhmicBath) -> Result<f64> {
    if omega < 0.0 || omega.is_nan() {
        return Err(Error::NegativeFrequency(omega));
    }
    Ok(bath.gamma0 * omega * (-omega / bath.cutoff).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Secular {
    /// Independent jumps on each fermionic mode.
    #[default]
    Full,
    /// Keeps the cross terms between modes through a single collective jump.
    Partial,
}

/// Dissipation rates of the local-bath master equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalBathRates {
    /// `gamma~_1 = cos^2(theta) J(E1)`, `gamma~_2 = sin^2(theta) J(E2)`.
    pub gamma_tilde: [f64; 2],
    /// Cross rate `gamma~_12`; zero in the full secular approximation.
    pub gamma_cross: f64,
}

impl LocalBathRates {
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                self.gamma_tilde[0],
                self.gamma_cross,
                self.gamma_cross,
                self.gamma_tilde[1],
            ],
        )
    }
}

/// Collective amplitudes `(cos(theta) sqrt J(E1), sin(theta) sqrt J(E2))`
/// with which `sigma1_x` couples each mode to the bath.
fn mode_amplitudes(model: &SpinPairModel, bath: &OhmicBath) -> Result<[f64; 2]> {
    let (s, c) = model.mixing_angle().sin_cos();
    Ok([
        c * ohmic_spectral_density(model.e1, bath)?.sqrt(),
        s * ohmic_spectral_density(model.e2, bath)?.sqrt(),
    ])
}

pub fn local_bath_rates(model: &SpinPairModel, bath: &OhmicBath, secular: Secular) -> Result<LocalBathRates> {
    let g = mode_amplitudes(model, bath)?;
    Ok(LocalBathRates {
        gamma_tilde: [g[0] * g[0], g[1] * g[1]],
        gamma_cross: match secular {
            Secular::Full => 0.0,
            Secular::Partial => g[0] * g[1],
        },
    })
}

/// Master equation of the pair with a zero-temperature bath on qubit 1.
///
/// Full secular: jumps `sqrt(gamma~_k) eta_k`. Partial secular: the single
/// collective jump `sum_k g_k eta_k`, whose rate matrix `g g^T` has
/// `|gamma~_12| = sqrt(gamma~_1 gamma~_2)` and is positive semidefinite.
pub fn build_local_bath_me(model: &SpinPairModel, bath: &OhmicBath, secular: Secular) -> Result<OpenSystem> {
    let jumps = match secular {
        Secular::Full => {
            let rates = local_bath_rates(model, bath, secular)?;
            vec![
                model.eta[0].scale(rates.gamma_tilde[0].sqrt()),
                model.eta[1].scale(rates.gamma_tilde[1].sqrt()),
            ]
        }
        Secular::Partial => {
            let g = mode_amplitudes(model, bath)?;
            vec![model.eta[0].scale(g[0]) + model.eta[1].scale(g[1])]
        }
    };
    OpenSystem::new(model.hamiltonian.clone(), jumps)
}

/// Local master equation: the same Hamiltonian with independent jumps
/// `sqrt(gamma_i) sigma_i^-` on each qubit.
pub fn local_master_equation(omega1: f64, omega2: f64, lambda: f64, rates: [f64; 2]) -> Result<OpenSystem> {
    if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::param("rates", "local rates must be nonnegative"));
    }
    let jumps = (0..2)
        .map(|i| qubit::on_site(&qubit::sigma_minus(), i).scale(rates[i].sqrt()))
        .collect();
    OpenSystem::new(xx_pair_hamiltonian(omega1, omega2, lambda), jumps)
}

/// Non-interacting qubit pair in a common dissipative bath (rate `gamma`) and
/// a common dephasing bath (rate `gamma_z`), with a bath-induced exchange
/// coupling `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingPairModel {
    pub omega1: f64,
    pub omega2: f64,
    pub gamma: f64,
    pub gamma_z: f64,
    pub s: f64,
}

pub fn dephasing_block(omega1: f64, omega2: f64, gamma: f64, gamma_z: f64, s: f64) -> Result<DephasingPairModel> {
    for (name, w) in [("omega1", omega1), ("omega2", omega2)] {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::param(name, format!("must be positive, got {w}")));
        }
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::param("gamma", format!("must be nonnegative, got {gamma}")));
    }
    if !(gamma_z.is_finite() && gamma_z >= 0.0) {
        return Err(Error::param("gamma_z", format!("must be nonnegative, got {gamma_z}")));
    }
    if !s.is_finite() {
        return Err(Error::param("s", "must be finite"));
    }
    Ok(DephasingPairModel {
        omega1,
        omega2,
        gamma,
        gamma_z,
        s,
    })
}

/// Vectorized indices of the coherences `rho_{ee,eg}, rho_{ee,ge},
/// rho_{eg,gg}, rho_{ge,gg}`, the basis of the coherence block.
pub const COHERENCE_SECTOR: [usize; 4] = [1, 2, 7, 11];

const EXCITATIONS: [i32; 4] = [2, 1, 1, 0];

/// Vectorized indices `i*4 + j` of two-qubit coherences with
/// `n(i) - n(j) = diff`, where `n` counts excitations; ascending.
pub fn excitation_sector(diff: i32) -> Vec<usize> {
    (0..16)
        .filter(|k| EXCITATIONS[k / 4] - EXCITATIONS[k % 4] == diff)
        .collect()
}

/// Restriction of a two-qubit superoperator to the given vectorized indices.
pub fn restrict(l: &Superoperator, indices: &[usize]) -> CMatrix {
    CMatrix::from_fn(indices.len(), indices.len(), |a, b| l.mat()[(indices[a], indices[b])])
}

impl DephasingPairModel {
    /// The `4 x 4` coherence block, exactly as displayed in the model
    /// definition (including the `-4 gamma_z` shift).
    pub fn block(&self) -> CMatrix {
        let (g, s, w1, w2) = (self.gamma, self.s, self.omega1, self.omega2);
        let z = C64::new(0.0, 0.0);
        let c = C64::new;
        let mut lc = CMatrix::from_row_slice(
            4,
            4,
            &[
                c(-3.0 * g, -2.0 * w2),
                c(-g, s),
                z,
                z,
                c(-g, s),
                c(-3.0 * g, -2.0 * w1),
                z,
                z,
                c(2.0 * g, 0.0),
                c(2.0 * g, 0.0),
                c(-g, -2.0 * w1),
                c(-g, -s),
                c(2.0 * g, 0.0),
                c(2.0 * g, 0.0),
                c(-g, -s),
                c(-g, -2.0 * w2),
            ],
        );
        for k in 0..4 {
            lc[(k, k)] -= C64::new(4.0 * self.gamma_z, 0.0);
        }
        lc
    }

    /// Entrywise conjugate of [`Self::block`].
    pub fn conjugate_block(&self) -> CMatrix {
        self.block().conjugate()
    }

    /// Hamiltonian whose commutator generates the block's frequencies:
    /// `omega1 sigma1_z + omega2 sigma2_z + s (sigma1_+ sigma2_- + h.c.)`.
    pub fn hamiltonian(&self) -> CMatrix {
        use qubit::*;
        let hop = on_site(&sigma_plus(), 0) * on_site(&sigma_minus(), 1);
        on_site(&sigma_z(), 0).scale(self.omega1)
            + on_site(&sigma_z(), 1).scale(self.omega2)
            + (&hop + hop.adjoint()).scale(self.s)
    }

    /// Full two-qubit master equation: jumps `sqrt(gamma)(sigma1_- + sigma2_-)`
    /// and `sqrt(gamma_z)(sigma1_z + sigma2_z)`.
    pub fn open_system(&self) -> Result<OpenSystem> {
        use qubit::*;
        let lower = on_site(&sigma_minus(), 0) + on_site(&sigma_minus(), 1);
        let dephase = on_site(&sigma_z(), 0) + on_site(&sigma_z(), 1);
        let mut jumps = vec![lower.scale(self.gamma.sqrt())];
        if self.gamma_z > 0.0 {
            jumps.push(dephase.scale(self.gamma_z.sqrt()));
        }
        OpenSystem::new(self.hamiltonian(), jumps)
    }

    /// Eigenvalues of the coherence block.
    pub fn block_eigenvalues(&self) -> Result<Vec<C64>> {
        Ok(linalg::eig_general(&self.block())?.0)
    }

    /// Same model with a different dephasing rate.
    pub fn with_gamma_z(&self, gamma_z: f64) -> Result<Self> {
        dephasing_block(self.omega1, self.omega2, self.gamma, gamma_z, self.s)
    }

    /// `Gamma_ij = 2 gamma` for all `i, j`: the emission rate matrix of the
    /// common dissipative bath.
    pub fn emission_rates(&self) -> DMatrix<f64> {
        DMatrix::from_element(2, 2, 2.0 * self.gamma)
    }
}

/// Tolerance for [`check_rate_matrix`].
pub const RATE_PSD_TOL: f64 = 1e-12;

/// Requires a symmetric `2 x 2` rate matrix and checks it is positive
/// semidefinite.
pub fn check_rate_matrix(rates: &DMatrix<f64>) -> Result<()> {
    if rates.nrows() != 2 || rates.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rates.nrows().max(rates.ncols()),
        });
    }
    if (rates[(0, 1)] - rates[(1, 0)]).abs() > RATE_PSD_TOL * linalg::max_abs_real(rates).max(1.0) {
        return Err(Error::param("rates", "rate matrix must be symmetric"));
    }
    let min = linalg::symmetric_min_eigenvalue(rates);
    if min < -RATE_PSD_TOL * linalg::max_abs_real(rates).max(1.0) {
        return Err(Error::NonPsdRateMatrix(min));
    }
    Ok(())
}

/// `sum_ij Gamma_ij sigma_i^+ sigma_j^-`.
pub fn intensity_operator(rates: &DMatrix<f64>) -> CMatrix {
    use qubit::*;
    let mut op = CMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            op += (on_site(&sigma_plus(), i) * on_site(&sigma_minus(), j)).scale(rates[(i, j)]);
        }
    }
    op
}

/// `I(t) = sum_ij Gamma_ij <sigma_i^+ sigma_j^->(t)` over two-qubit states.
///
/// A rate matrix that is not positive semidefinite is reported through the
/// log and the series is still returned.
pub fn radiated_intensity(states: &[CMatrix], rates: &DMatrix<f64>) -> Result<Vec<f64>> {
    match check_rate_matrix(rates) {
        Err(Error::NonPsdRateMatrix(min)) => {
            log::warn!("emission rate matrix is not positive semidefinite (smallest eigenvalue {min:e})");
        }
        Err(e) => return Err(e),
        Ok(()) => {}
    }
    let op = intensity_operator(rates);
    states
        .iter()
        .map(|rho| {
            if rho.nrows() != 4 || rho.ncols() != 4 {
                return Err(Error::DimensionMismatch {
                    expected: 4,
                    found: rho.nrows(),
                });
            }
            Ok(linalg::trace(&(&op * rho)).re)
        })
        .collect()
}
