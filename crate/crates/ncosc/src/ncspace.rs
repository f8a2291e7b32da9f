//! Noncommutative parameters and the effective-parameter reduction.
//!
//! A 2D oscillator with noncommuting coordinates ([x̂, ŷ] ∝ θ) and momenta
//! ([p̂_x, p̂_y] ∝ θ̄) maps onto an ordinary oscillator with a smaller mass M,
//! a larger frequency Ω, and an angular-momentum coupling κ·L_z. This module
//! holds the scalar side of that reduction; the matrix side lives in
//! [`crate::fockspace`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Noncommutativity constants θ (length²), θ̄ (momentum²) and ħ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NCParams {
    theta: f64,
    theta_bar: f64,
    hbar: f64,
}

impl NCParams {
    /// θ, θ̄ ≥ 0 with ħ = 1.
    pub fn new(theta: f64, theta_bar: f64) -> Result<Self> {
        Self::with_hbar(theta, theta_bar, 1.0)
    }

    pub fn with_hbar(theta: f64, theta_bar: f64, hbar: f64) -> Result<Self> {
        if !theta.is_finite() || theta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "theta must be finite and >= 0, got {theta}"
            )));
        }
        if !theta_bar.is_finite() || theta_bar < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "theta_bar must be finite and >= 0, got {theta_bar}"
            )));
        }
        if !hbar.is_finite() || hbar <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "hbar must be finite and > 0, got {hbar}"
            )));
        }
        Ok(Self {
            theta,
            theta_bar,
            hbar,
        })
    }

    /// θ = θ̄ = 0: ordinary quantum mechanics.
    pub fn commutative() -> Self {
        Self {
            theta: 0.0,
            theta_bar: 0.0,
            hbar: 1.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn theta_bar(&self) -> f64 {
        self.theta_bar
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

/// Bare oscillator parameters m > 0, ω > 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscParams {
    mass: f64,
    omega: f64,
}

impl OscParams {
    pub fn new(mass: f64, omega: f64) -> Result<Self> {
        if !mass.is_finite() || mass <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mass must be finite and > 0, got {mass}"
            )));
        }
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega must be finite and > 0, got {omega}"
            )));
        }
        Ok(Self { mass, omega })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// Effective parameters of the reduced commutative oscillator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveParams {
    pub mass_eff: f64,
    pub omega_eff: f64,
    pub kappa: f64,
}

/// Which constant multiplies κ·(N_g − N_d) in the ladder Hamiltonian and the
/// closed-form spectrum.
///
/// The angular coupling enters the Hamiltonian as −κ·L_z, and L_z has
/// eigenvalues ħ·(n_g − n_d), so the dimensionally consistent coefficient of
/// (N_g − N_d) carries a factor ħ. The printed closed form uses a bare κ,
/// which coincides with the ħ-scaled one only at ħ = 1. Both are kept and a
/// numerical arbiter (`crate::oracle::spectrum_crosscheck`) reports which one
/// matches the Bopp-shifted Hamiltonian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingConvention {
    /// c = 1.
    Bare,
    /// c = ħ (default).
    #[default]
    HbarScaled,
}

impl CouplingConvention {
    pub fn factor(self, hbar: f64) -> f64 {
        match self {
            CouplingConvention::Bare => 1.0,
            CouplingConvention::HbarScaled => hbar,
        }
    }
}


/// M = m / (1 + m²ω²θ²/4).
pub fn effective_mass(osc: &OscParams, nc: &NCParams) -> f64 {
    let m = osc.mass();
    let s = m * osc.omega() * nc.theta() / 2.0;
    m / (1.0 + s * s)
}

/// Ω = ω √((1 + m²ω²θ²/4)(1 + θ̄²/(4m²ω²))).
pub fn effective_frequency(osc: &OscParams, nc: &NCParams) -> f64 {
    let mw = osc.mass() * osc.omega();
    let a = mw * nc.theta() / 2.0;
    let b = nc.theta_bar() / (2.0 * mw);
    osc.omega() * ((1.0 + a * a) * (1.0 + b * b)).sqrt()
}

/// κ = (θ̄/m + mω²θ)/2, the coefficient of the −L_z correction term.
pub fn angular_coupling(osc: &OscParams, nc: &NCParams) -> f64 {
    0.5 * (nc.theta_bar() / osc.mass() + osc.mass() * osc.omega() * osc.omega() * nc.theta())
}

pub fn effective_params(osc: &OscParams, nc: &NCParams) -> EffectiveParams {
    EffectiveParams {
        mass_eff: effective_mass(osc, nc),
        omega_eff: effective_frequency(osc, nc),
        kappa: angular_coupling(osc, nc),
    }
}

/// Deformation strengths entering the Ω radicand. The reduction is exact for
/// any magnitude, but the underlying model treats θ, θ̄ as small; the CLI
/// warns when either factor deviates strongly from 1.
pub fn deformation_factors(osc: &OscParams, nc: &NCParams) -> (f64, f64) {
    let mw = osc.mass() * osc.omega();
    let a = mw * nc.theta() / 2.0;
    let b = nc.theta_bar() / (2.0 * mw);
    (a * a, b * b)
}

/// Human-readable warnings when the noncommutative corrections stop being small.
pub fn smallness_warnings(osc: &OscParams, nc: &NCParams) -> Vec<String> {
    let (fa, fb) = deformation_factors(osc, nc);
    let mut out = Vec::new();
    if fa > 0.5 {
        out.push(format!(
            "m^2 omega^2 theta^2 / 4 = {fa:.3} > 0.5: theta is not small for these parameters"
        ));
    }
    if fb > 0.5 {
        out.push(format!(
            "theta_bar^2 / (4 m^2 omega^2) = {fb:.3} > 0.5: theta_bar is not small for these parameters"
        ));
    }
    out
}
