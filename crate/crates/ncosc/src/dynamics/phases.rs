//! Dynamical, geometric, and global phases of the invariant-based solution.
//!
//! Two splits of the global phase are tracked side by side. The *bare* split
//! evaluates the dynamical phase with the bare occupation,
//! ξ_D = −(n/ħ)∫W dt′; the *displaced* split conjugates the number operator
//! by the displacement unitary, whose expectation gains |ρ₀|², giving
//! ξ_D′ = −((n + |ρ₀|²)/ħ)∫W dt′. The geometric phase
//! ξ_G = (|β₀|²/(ħα₀²))∫W dt′ is common to both, so the displaced total
//! collapses to −(n/ħ)∫W dt′ and the two assembled totals differ by exactly
//! ξ₁G + ξ₂G. The Schrödinger oracle adjudicates which total the dynamics
//! realizes.

use serde::Serialize;

use super::{omega_eff_integral, w_integral, InvariantConstants, Sector, TDParams};
use crate::error::Result;
use crate::ncspace::CouplingConvention;

/// The two candidate dynamical phases for one sector.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DynamicalPhase {
    /// −(n/ħ)∫W dt′, from the bare occupation n.
    pub bare: f64,
    /// −((n + |ρ₀|²)/ħ)∫W dt′, from the displaced occupation.
    pub displaced: f64,
}

/// Dynamical phase of one sector at time `t` for quantum number `n`.
pub fn dynamical_phase(
    consts: &InvariantConstants,
    params: &TDParams,
    sector: Sector,
    n: usize,
    t: f64,
    convention: CouplingConvention,
    quad_tol: f64,
) -> Result<DynamicalPhase> {
    let w_int = w_integral(params, sector, t, convention, quad_tol)?;
    let hbar = params.nc().hbar();
    let bare = -(n as f64) * w_int / hbar;
    let displaced = bare - consts.rho0_sqr() * w_int / hbar;
    Ok(DynamicalPhase { bare, displaced })
}

/// Geometric (Berry) phase of one sector: (|β₀|²/(ħα₀²))∫W dt′.
pub fn geometric_phase(
    consts: &InvariantConstants,
    params: &TDParams,
    sector: Sector,
    t: f64,
    convention: CouplingConvention,
    quad_tol: f64,
) -> Result<f64> {
    let w_int = w_integral(params, sector, t, convention, quad_tol)?;
    Ok(consts.rho0_sqr() * w_int / params.nc().hbar())
}

/// Zero-point phase −∫₀ᵗ Ω dt′ contributed by the ħΩ(t) term.
pub fn zero_point_phase(params: &TDParams, t: f64, quad_tol: f64) -> Result<f64> {
    Ok(-omega_eff_integral(params, t, quad_tol)?)
}

/// Phase bookkeeping of one sector.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SectorPhases {
    pub n: usize,
    pub w_integral: f64,
    pub dynamical_bare: f64,
    pub dynamical_displaced: f64,
    pub geometric: f64,
}

impl SectorPhases {
    /// ξ_D + ξ_G under the bare split.
    pub fn total_bare(&self) -> f64 {
        self.dynamical_bare + self.geometric
    }

    /// ξ_D′ + ξ_G with the displaced-occupation correction.
    pub fn total_displaced(&self) -> f64 {
        self.dynamical_displaced + self.geometric
    }
}

/// Per-time record of all phase components, analytic and (optionally) numeric.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhaseLedger {
    pub t: f64,
    pub zero_point: f64,
    pub g: SectorPhases,
    pub d: SectorPhases,
    pub total_bare: f64,
    pub total_displaced: f64,
    /// Filled in by the Schrödinger oracle; `None` until then.
    pub total_numeric: Option<f64>,
}

impl PhaseLedger {
    /// total_bare − total_displaced = ξ₁G + ξ₂G (algebraic identity).
    pub fn convention_delta(&self) -> f64 {
        self.total_bare - self.total_displaced
    }

    pub fn with_numeric(mut self, phi: f64) -> Self {
        self.total_numeric = Some(phi);
        self
    }

    pub fn numeric_minus_displaced(&self) -> Option<f64> {
        self.total_numeric.map(|phi| phi - self.total_displaced)
    }

    pub fn numeric_minus_bare(&self) -> Option<f64> {
        self.total_numeric.map(|phi| phi - self.total_bare)
    }
}

fn sector_phases(
    consts: &InvariantConstants,
    params: &TDParams,
    sector: Sector,
    n: usize,
    t: f64,
    convention: CouplingConvention,
    quad_tol: f64,
) -> Result<SectorPhases> {
    let w_int = w_integral(params, sector, t, convention, quad_tol)?;
    let hbar = params.nc().hbar();
    let dynamical_bare = -(n as f64) * w_int / hbar;
    let geometric = consts.rho0_sqr() * w_int / hbar;
    Ok(SectorPhases {
        n,
        w_integral: w_int,
        dynamical_bare,
        dynamical_displaced: dynamical_bare - geometric,
        geometric,
    })
}

/// Assemble the full solution phase at time `t` for the state labelled
/// (n_g, n_d): zero-point part plus both sector contributions, under both
/// conventions. The numeric total stays unset until an oracle fills it.
#[allow(clippy::too_many_arguments)]
pub fn assemble_solution_phase(
    consts_g: &InvariantConstants,
    consts_d: &InvariantConstants,
    params: &TDParams,
    n_g: usize,
    n_d: usize,
    t: f64,
    convention: CouplingConvention,
    quad_tol: f64,
) -> Result<PhaseLedger> {
    let zero_point = zero_point_phase(params, t, quad_tol)?;
    let g = sector_phases(consts_g, params, Sector::G, n_g, t, convention, quad_tol)?;
    let d = sector_phases(consts_d, params, Sector::D, n_d, t, convention, quad_tol)?;
    Ok(PhaseLedger {
        t,
        zero_point,
        g,
        d,
        total_bare: zero_point + g.total_bare() + d.total_bare(),
        total_displaced: zero_point + g.total_displaced() + d.total_displaced(),
        total_numeric: None,
    })
}
