//! Time-dependent system: parameter profiles, the W₁/W₂ coefficients, the
//! Lewis–Riesenfeld invariant with its displacement transformation, and the
//! dynamical/geometric/global phases.
//!
//! The time-dependent Hamiltonian is H(t) = W₁(t)N̂_g + W₂(t)N̂_d + ħΩ(t) with
//! fixed number operators; everything in this module is a function of the
//! scalar coefficients W₁, W₂ and the invariant constants.

pub mod invariant;
pub mod phases;
pub mod profile;

pub use invariant::{
    displacement_unitary, invariant_coefficients, invariant_matrix, lvn_residual, reference_state,
    rho, InvariantCoefficients, InvariantConstants, ReferenceEngine,
};
pub use phases::{
    assemble_solution_phase, dynamical_phase, geometric_phase, zero_point_phase, DynamicalPhase,
    PhaseLedger, SectorPhases,
};
pub use profile::{ProfileKind, TimeProfile};

use crate::error::{Error, Result};
use crate::ncspace::{
    angular_coupling, effective_frequency, CouplingConvention, NCParams, OscParams,
};
use crate::quad::adaptive_simpson;

/// Default absolute tolerance for all phase/coefficient integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// The two circular sectors of the Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sector {
    /// Left-circular: coefficient W₁ = ħΩ − c·κ, operators (N_g, a_g).
    G,
    /// Right-circular: coefficient W₂ = ħΩ + c·κ, operators (N_d, a_d).
    D,
}

/// Time-dependent system parameters: m(t), ω(t) profiles over a shared
/// horizon plus the noncommutativity constants.
#[derive(Clone, Debug)]
pub struct TDParams {
    m_profile: TimeProfile,
    omega_profile: TimeProfile,
    nc: NCParams,
}

impl TDParams {
    pub fn new(m_profile: TimeProfile, omega_profile: TimeProfile, nc: NCParams) -> Result<Self> {
        if m_profile.t_end() != omega_profile.t_end() {
            return Err(Error::InvalidParameter(format!(
                "profiles disagree on the horizon: {} vs {}",
                m_profile.t_end(),
                omega_profile.t_end()
            )));
        }
        Ok(Self {
            m_profile,
            omega_profile,
            nc,
        })
    }

    /// Constant m, ω over [0, T].
    pub fn stationary(osc: &OscParams, nc: NCParams, horizon: f64) -> Result<Self> {
        Ok(Self {
            m_profile: TimeProfile::constant(osc.mass(), horizon)?,
            omega_profile: TimeProfile::constant(osc.omega(), horizon)?,
            nc,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.m_profile.t_end()
    }

    pub fn nc(&self) -> &NCParams {
        &self.nc
    }

    pub fn m_profile(&self) -> &TimeProfile {
        &self.m_profile
    }

    pub fn omega_profile(&self) -> &TimeProfile {
        &self.omega_profile
    }

    pub fn is_stationary(&self) -> bool {
        self.m_profile.is_constant() && self.omega_profile.is_constant()
    }

    /// Instantaneous oscillator parameters (m(t), ω(t)).
    pub fn osc_at(&self, t: f64) -> Result<OscParams> {
        OscParams::new(self.m_profile.value(t)?, self.omega_profile.value(t)?)
    }
}

/// Ω(t): the effective frequency evaluated with m(t), ω(t).
pub fn omega_eff_t(params: &TDParams, t: f64) -> Result<f64> {
    Ok(effective_frequency(&params.osc_at(t)?, params.nc()))
}

/// κ(t) = (θ̄/m(t) + m(t)ω²(t)θ)/2.
pub fn kappa_t(params: &TDParams, t: f64) -> Result<f64> {
    Ok(angular_coupling(&params.osc_at(t)?, params.nc()))
}

/// (W₁, W₂)(t) = ħΩ(t) ∓ c·κ(t).
pub fn coefficients_w(
    params: &TDParams,
    t: f64,
    convention: CouplingConvention,
) -> Result<(f64, f64)> {
    let hbar = params.nc().hbar();
    let base = hbar * omega_eff_t(params, t)?;
    let coupling = convention.factor(hbar) * kappa_t(params, t)?;
    Ok((base - coupling, base + coupling))
}

/// The sector coefficient W(t).
pub fn w_coefficient(
    params: &TDParams,
    sector: Sector,
    t: f64,
    convention: CouplingConvention,
) -> Result<f64> {
    let (w1, w2) = coefficients_w(params, t, convention)?;
    Ok(match sector {
        Sector::G => w1,
        Sector::D => w2,
    })
}

/// ∫₀ᵗ W(t′) dt′ by the shared adaptive quadrature.
pub fn w_integral(
    params: &TDParams,
    sector: Sector,
    t: f64,
    convention: CouplingConvention,
    quad_tol: f64,
) -> Result<f64> {
    check_time(params, t)?;
    // the integrand propagates profile-domain errors as NaN, which the
    // quadrature rejects
    adaptive_simpson(
        |s| w_coefficient(params, sector, s, convention).unwrap_or(f64::NAN),
        0.0,
        t,
        quad_tol,
    )
}

/// ∫₀ᵗ Ω(t′) dt′.
pub fn omega_eff_integral(params: &TDParams, t: f64, quad_tol: f64) -> Result<f64> {
    check_time(params, t)?;
    adaptive_simpson(
        |s| omega_eff_t(params, s).unwrap_or(f64::NAN),
        0.0,
        t,
        quad_tol,
    )
}

pub(crate) fn check_time(params: &TDParams, t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 || t > params.horizon() * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "t={t} outside [0, {}]",
            params.horizon()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncspace::effective_frequency;
    use proptest::prelude::*;

    fn nc(t: f64, tb: f64) -> NCParams {
        NCParams::new(t, tb).unwrap()
    }

    fn sinusoidal(base: f64, amp: f64, freq: f64, horizon: f64) -> TimeProfile {
        TimeProfile::new(
            ProfileKind::Sinusoidal {
                base,
                amplitude: amp,
                angular_freq: freq,
                phase: 0.0,
            },
            horizon,
        )
        .unwrap()
    }

    const HBAR_C: CouplingConvention = CouplingConvention::HbarScaled;

    #[test]
    fn horizon_mismatch_rejected() {
        let a = TimeProfile::constant(1.0, 1.0).unwrap();
        let b = TimeProfile::constant(1.0, 2.0).unwrap();
        assert!(TDParams::new(a, b, nc(0.0, 0.0)).is_err());
    }

    #[test]
    fn omega_eff_reduces_to_stationary() {
        let osc = OscParams::new(1.0, 1.0).unwrap();
        let p = TDParams::stationary(&osc, nc(0.1, 0.1), 1.0).unwrap();
        let want = effective_frequency(&osc, p.nc());
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(omega_eff_t(&p, t).unwrap(), want);
        }
        assert!(omega_eff_t(&p, 1.5).is_err());
    }

    #[test]
    fn omega_eff_commutative_is_omega_profile() {
        let m = TimeProfile::constant(1.0, 1.0).unwrap();
        let w = TimeProfile::new(ProfileKind::Linear { base: 1.0, rate: 1.0 }, 1.0).unwrap();
        let p = TDParams::new(m, w, nc(0.0, 0.0)).unwrap();
        for t in [0.0, 0.4, 1.0] {
            assert_eq!(omega_eff_t(&p, t).unwrap(), 1.0 + t);
        }
    }

    #[test]
    fn omega_eff_linear_profile_at_zero() {
        let m = TimeProfile::constant(1.0, 1.0).unwrap();
        let w = TimeProfile::new(ProfileKind::Linear { base: 1.0, rate: 1.0 }, 1.0).unwrap();
        let p = TDParams::new(m, w, nc(0.1, 0.1)).unwrap();
        assert!((omega_eff_t(&p, 0.0).unwrap() - 1.0025).abs() < 1e-12);
    }

    #[test]
    fn w_coefficients_example() {
        let osc = OscParams::new(1.0, 1.0).unwrap();
        let p = TDParams::stationary(&osc, nc(0.1, 0.1), 1.0).unwrap();
        let (w1, w2) = coefficients_w(&p, 0.5, HBAR_C).unwrap();
        assert!((w1 - 0.9025).abs() < 1e-12);
        assert!((w2 - 1.1025).abs() < 1e-12);
    }

    #[test]
    fn w_commutative_collapses_to_omega() {
        let m = TimeProfile::constant(2.0, 1.0).unwrap();
        let w = sinusoidal(1.0, 0.3, 5.0, 1.0);
        let p = TDParams::new(m, w, nc(0.0, 0.0)).unwrap();
        for t in [0.0, 0.2, 0.9] {
            let (w1, w2) = coefficients_w(&p, t, HBAR_C).unwrap();
            let want = p.omega_profile().value(t).unwrap();
            assert!((w1 - want).abs() < 1e-14);
            assert!((w2 - want).abs() < 1e-14);
        }
    }

    #[test]
    fn sector_exchange_symmetry() {
        // flipping the sign of the coupling swaps W1 and W2
        let osc = OscParams::new(1.0, 1.0).unwrap();
        let p = TDParams::stationary(&osc, nc(0.1, 0.2), 1.0).unwrap();
        let (w1, w2) = coefficients_w(&p, 0.3, HBAR_C).unwrap();
        let hbar = p.nc().hbar();
        let base = hbar * omega_eff_t(&p, 0.3).unwrap();
        let coupling = kappa_t(&p, 0.3).unwrap() * HBAR_C.factor(hbar);
        assert!((w1 - (base - coupling)).abs() < 1e-14);
        assert!((w2 - (base + coupling)).abs() < 1e-14);
        assert!(((base - (-coupling)) - w2).abs() < 1e-14);
    }

    #[test]
    fn w_integral_constant_case() {
        let osc = OscParams::new(1.0, 1.0).unwrap();
        let p = TDParams::stationary(&osc, nc(0.1, 0.1), 2.0).unwrap();
        let v = w_integral(&p, Sector::G, 2.0, HBAR_C, 1e-12).unwrap();
        assert!((v - 2.0 * 0.9025).abs() < 1e-11);
        assert!((w_integral(&p, Sector::G, 0.0, HBAR_C, 1e-12).unwrap()).abs() == 0.0);
    }

    proptest! {
        /// W₁ + W₂ = 2ħΩ(t) for all t and parameters.
        #[test]
        fn w_sum_identity(
            t in 0.0f64..1.0,
            theta in 0.0f64..0.3,
            theta_bar in 0.0f64..0.3,
            amp in 0.0f64..0.4,
        ) {
            let m = TimeProfile::constant(1.0, 1.0).unwrap();
            let w = sinusoidal(1.0, amp, 6.0, 1.0);
            let p = TDParams::new(m, w, nc(theta, theta_bar)).unwrap();
            let (w1, w2) = coefficients_w(&p, t, HBAR_C).unwrap();
            let two_omega = 2.0 * p.nc().hbar() * omega_eff_t(&p, t).unwrap();
            prop_assert!((w1 + w2 - two_omega).abs() < 1e-13);
        }
    }
}
