//! Lewis–Riesenfeld invariant for one circular sector:
//! I(t) = α₁N̂ + β₁â† + γ₁â + δ₁, with coefficients solving the auxiliary
//! equations α̇₁ = δ̇₁ = 0, β̇₁ = −(i/ħ)W β₁, γ̇₁ = +(i/ħ)W γ₁, and the
//! displacement transformation that freezes the invariant's time dependence.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{check_time, w_coefficient, w_integral, Sector, TDParams};
use crate::error::{Error, Result};
use crate::fockspace::{
    circular_operators, eigenstate_circular, mode_operators, FockBasis, OperatorMatrix,
    QuantumState,
};
use crate::ncspace::CouplingConvention;

fn cre(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

const IM: Complex64 = Complex64::new(0.0, 1.0);

/// Integration constants of the invariant.
///
/// A Hermitian invariant requires γ₀₁ = conj(β₀₁); [`Self::hermitian`]
/// enforces that, while [`Self::relaxed`] admits an arbitrary γ₀₁ for
/// reproducing the frozen-form expression with real constants literally.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantConstants {
    alpha01: f64,
    beta01: Complex64,
    gamma01: Complex64,
    delta01: f64,
}

impl InvariantConstants {
    pub fn hermitian(alpha01: f64, beta01: Complex64, delta01: f64) -> Result<Self> {
        Self::relaxed(alpha01, beta01, beta01.conj(), delta01)
    }

    pub fn relaxed(
        alpha01: f64,
        beta01: Complex64,
        gamma01: Complex64,
        delta01: f64,
    ) -> Result<Self> {
        if !alpha01.is_finite() || alpha01 == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha01 must be finite and nonzero, got {alpha01}"
            )));
        }
        if !(beta01.re.is_finite() && beta01.im.is_finite()) {
            return Err(Error::InvalidParameter("beta01 must be finite".into()));
        }
        if !(gamma01.re.is_finite() && gamma01.im.is_finite()) {
            return Err(Error::InvalidParameter("gamma01 must be finite".into()));
        }
        if !delta01.is_finite() {
            return Err(Error::InvalidParameter("delta01 must be finite".into()));
        }
        Ok(Self {
            alpha01,
            beta01,
            gamma01,
            delta01,
        })
    }

    pub fn alpha01(&self) -> f64 {
        self.alpha01
    }

    pub fn beta01(&self) -> Complex64 {
        self.beta01
    }

    pub fn gamma01(&self) -> Complex64 {
        self.gamma01
    }

    pub fn delta01(&self) -> f64 {
        self.delta01
    }

    pub fn is_hermitian(&self) -> bool {
        self.gamma01 == self.beta01.conj()
    }

    /// |ρ(0)|² = |β₀₁/α₀₁|².
    pub fn rho0_sqr(&self) -> f64 {
        (self.beta01 / cre(self.alpha01)).norm_sqr()
    }
}

/// Invariant coefficients at a given time.
#[derive(Clone, Copy, Debug)]
pub struct InvariantCoefficients {
    pub alpha1: f64,
    pub beta1: Complex64,
    pub gamma1: Complex64,
    pub delta1: f64,
}

/// α₁ = α₀₁, δ₁ = δ₀₁, β₁ = β₀₁e^{−iΦ}, γ₁ = γ₀₁e^{+iΦ} with
/// Φ(t) = (1/ħ)∫₀ᵗ W dt′.
pub fn invariant_coefficients(
    consts: &InvariantConstants,
    params: &TDParams,
    sector: Sector,
    t: f64,
    convention: CouplingConvention,
    quad_tol: f64,
) -> Result<InvariantCoefficients> {
    let phase = w_integral(params, sector, t, convention, quad_tol)? / params.nc().hbar();
    let rot = (-IM * cre(phase)).exp();
    Ok(InvariantCoefficients {
        alpha1: consts.alpha01,
        beta1: consts.beta01 * rot,
        gamma1: consts.gamma01 * rot.conj(),
        delta1: consts.delta01,
    })
}

/// ρ(t) = β₁(t)/α₀₁.
pub fn rho(
    consts: &InvariantConstants,
    params: &TDParams,
    sector: Sector,
    t: f64,
    convention: CouplingConvention,
    quad_tol: f64,
) -> Result<Complex64> {
    let coeff = invariant_coefficients(consts, params, sector, t, convention, quad_tol)?;
    Ok(coeff.beta1 / cre(consts.alpha01))
}

fn sector_number_and_lowering(
    basis: FockBasis,
    sector: Sector,
) -> (OperatorMatrix, OperatorMatrix) {
    let ops = mode_operators(basis);
    let (a_g, a_d) = circular_operators(&ops.a_x, &ops.a_y).expect("same basis");
    let a = match sector {
        Sector::G => a_g,
        Sector::D => a_d,
    };
    let n = a.adjoint().matmul(&a).expect("same basis").relabeled("N");
    (n, a)
}

/// I(t) = α₁N̂ + β₁â† + γ₁â + δ₁ as a matrix.
pub fn invariant_matrix(
    consts: &InvariantConstants,
    params: &TDParams,
    sector: Sector,
    t: f64,
    basis: FockBasis,
    convention: CouplingConvention,
    quad_tol: f64,
) -> Result<OperatorMatrix> {
    let coeff = invariant_coefficients(consts, params, sector, t, convention, quad_tol)?;
    Ok(assemble_invariant(&coeff, basis, sector))
}

fn assemble_invariant(
    coeff: &InvariantCoefficients,
    basis: FockBasis,
    sector: Sector,
) -> OperatorMatrix {
    let (n, a) = sector_number_and_lowering(basis, sector);
    let a_dag = a.adjoint();
    let id = n.identity_like();
    n.scale(cre(coeff.alpha1))
        .add(&a_dag.scale(coeff.beta1))
        .and_then(|m| m.add(&a.scale(coeff.gamma1)))
        .and_then(|m| m.add(&id.scale(cre(coeff.delta1))))
        .expect("same basis")
        .relabeled("I1")
}

/// Frobenius norms, restricted to the interior subspace, of
/// ∂I/∂t + (1/iħ)[I, H] with H = W(t)N̂: once with the analytic derivative of
/// the coefficient solution and once with a central finite difference.
///
/// Returns (analytic, finite_difference).
#[allow(clippy::too_many_arguments)]
pub fn lvn_residual(
    consts: &InvariantConstants,
    params: &TDParams,
    sector: Sector,
    t: f64,
    basis: FockBasis,
    dt_fd: f64,
    convention: CouplingConvention,
    quad_tol: f64,
) -> Result<(f64, f64)> {
    check_time(params, t)?;
    if !(dt_fd > 0.0) || t - dt_fd < 0.0 || t + dt_fd > params.horizon() {
        return Err(Error::InvalidParameter(format!(
            "central differencing needs [t-dt, t+dt] inside [0, {}]; got t={t}, dt={dt_fd}",
            params.horizon()
        )));
    }
    let hbar = params.nc().hbar();
    let w = w_coefficient(params, sector, t, convention)?;
    let coeff = invariant_coefficients(consts, params, sector, t, convention, quad_tol)?;
    let (n, a) = sector_number_and_lowering(basis, sector);
    let a_dag = a.adjoint();
    let inv = assemble_invariant(&coeff, basis, sector);
    let h = n.scale(cre(w));

    // (1/iħ)[I, H] = −(i/ħ)[I, H]
    let comm = crate::fockspace::commutator(&inv, &h)?.scale(-IM * cre(1.0 / hbar));

    // analytic: β̇ = −(i/ħ)Wβ, γ̇ = +(i/ħ)Wγ
    let beta_dot = -IM * cre(w / hbar) * coeff.beta1;
    let gamma_dot = IM * cre(w / hbar) * coeff.gamma1;
    let didt_analytic = a_dag
        .scale(beta_dot)
        .add(&a.scale(gamma_dot))
        .expect("same basis");
    let analytic = didt_analytic
        .add(&comm)?
        .interior_frobenius(basis.interior_total());

    // central finite difference of the full matrix
    let inv_plus = invariant_matrix(consts, params, sector, t + dt_fd, basis, convention, quad_tol)?;
    let inv_minus =
        invariant_matrix(consts, params, sector, t - dt_fd, basis, convention, quad_tol)?;
    let didt_fd = inv_plus
        .sub(&inv_minus)?
        .scale(cre(1.0 / (2.0 * dt_fd)));
    let fd = didt_fd
        .add(&comm)?
        .interior_frobenius(basis.interior_total());

    Ok((analytic, fd))
}

/// U = exp(−G) with G = ρâ† − ρ*â, evaluated as the exact exponential of the
/// skew-Hermitian generator via the Hermitian eigendecomposition of iG.
pub fn displacement_unitary(
    rho_value: Complex64,
    basis: FockBasis,
    sector: Sector,
) -> Result<OperatorMatrix> {
    let guard = basis.n_max() as f64 / 4.0;
    if rho_value.norm_sqr() > guard {
        return Err(Error::TruncationOverflow(format!(
            "|rho|^2 = {:.3} exceeds the truncation guard n_max/4 = {guard}",
            rho_value.norm_sqr()
        )));
    }
    let (_, a) = sector_number_and_lowering(basis, sector);
    let a_dag = a.adjoint();
    // A = iG is Hermitian; U = exp(−G) = exp(iA)
    let gen = a_dag
        .scale(IM * rho_value)
        .sub(&a.scale(IM * rho_value.conj()))?;
    let se = gen
        .entries()
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenFailure("displacement generator".into()))?;
    let dim = gen.dim();
    let mut phases = DMatrix::<Complex64>::zeros(dim, dim);
    for (k, lam) in se.eigenvalues.iter().enumerate() {
        phases[(k, k)] = (IM * cre(*lam)).exp();
    }
    let u = &se.eigenvectors * phases * se.eigenvectors.adjoint();
    OperatorMatrix::two_mode(basis, format!("U_{sector:?}"), u)
}

/// U₁(t)U₂(t)|n_g, n_d⟩, normalized. Carries no phase convention; the global
/// phase is reported separately through the ledger.
#[allow(clippy::too_many_arguments)]
pub fn reference_state(
    consts_g: &InvariantConstants,
    consts_d: &InvariantConstants,
    params: &TDParams,
    n_g: usize,
    n_d: usize,
    t: f64,
    basis: FockBasis,
    convention: CouplingConvention,
    quad_tol: f64,
) -> Result<QuantumState> {
    ReferenceEngine::new(
        consts_g, consts_d, params, n_g, n_d, basis, convention, quad_tol,
    )?
    .state_at(t)
}

/// Evaluates U₁(t)U₂(t)|n_g, n_d⟩ at many times without repeating the matrix
/// exponentials. Since |ρ(t)| is conserved, U(ρ(t)) equals the t = 0 unitary
/// conjugated by the diagonal total-quanta phase rotation
/// S(Φ) = diag(e^{−iΦ·(n_x+n_y)}), which rotates â† by e^{−iΦ} exactly.
pub struct ReferenceEngine {
    params: TDParams,
    convention: CouplingConvention,
    quad_tol: f64,
    basis: FockBasis,
    u_g0: crate::fockspace::CMat,
    u_d0: crate::fockspace::CMat,
    bare: QuantumState,
    grades: Vec<f64>,
}

impl ReferenceEngine {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        consts_g: &InvariantConstants,
        consts_d: &InvariantConstants,
        params: &TDParams,
        n_g: usize,
        n_d: usize,
        basis: FockBasis,
        convention: CouplingConvention,
        quad_tol: f64,
    ) -> Result<Self> {
        let rho_g0 = consts_g.beta01() / cre(consts_g.alpha01());
        let rho_d0 = consts_d.beta01() / cre(consts_d.alpha01());
        let u_g0 = displacement_unitary(rho_g0, basis, Sector::G)?.into_entries();
        let u_d0 = displacement_unitary(rho_d0, basis, Sector::D)?.into_entries();
        let bare = eigenstate_circular(n_g, n_d, basis)?;
        let grades = (0..basis.dim())
            .map(|i| basis.total_quanta(i) as f64)
            .collect();
        Ok(Self {
            params: params.clone(),
            convention,
            quad_tol,
            basis,
            u_g0,
            u_d0,
            bare,
            grades,
        })
    }

    fn rotate(&self, v: &mut crate::fockspace::CVec, phi: f64, sign: f64) {
        for (amp, grade) in v.iter_mut().zip(&self.grades) {
            *amp *= (IM * cre(sign * phi * grade)).exp();
        }
    }

    /// Apply S(Φ) U₀ S(Φ)† to `v` in place.
    fn apply_rotated(&self, u0: &crate::fockspace::CMat, phi: f64, v: crate::fockspace::CVec) -> crate::fockspace::CVec {
        let mut v = v;
        self.rotate(&mut v, phi, 1.0);
        let mut w = u0 * v;
        self.rotate(&mut w, phi, -1.0);
        w
    }

    pub fn state_at(&self, t: f64) -> Result<QuantumState> {
        let hbar = self.params.nc().hbar();
        let phi_g =
            w_integral(&self.params, Sector::G, t, self.convention, self.quad_tol)? / hbar;
        let phi_d =
            w_integral(&self.params, Sector::D, t, self.convention, self.quad_tol)? / hbar;
        let v = self.apply_rotated(&self.u_d0, phi_d, self.bare.amplitudes().clone());
        let v = self.apply_rotated(&self.u_g0, phi_g, v);
        QuantumState::new(self.basis, v)
    }
}
