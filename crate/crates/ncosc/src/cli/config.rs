//! Strict run-configuration parsing: TOML with unknown keys rejected, every
//! value validated against its owning type before any computation starts.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::dynamics::{InvariantConstants, ProfileKind, TDParams, TimeProfile};
use crate::error::{Error, Result};
use crate::fockspace::FockBasis;
use crate::ncspace::{NCParams, OscParams};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub system: SystemSection,
    pub profiles: Option<ProfilesSection>,
    pub invariant: Option<InvariantSections>,
    pub state: Option<StateSection>,
    #[serde(default)]
    pub numerics: NumericsSection,
    pub sweep: Option<SweepSection>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub m: f64,
    pub omega: f64,
    pub theta: f64,
    pub theta_bar: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    pub n_max: usize,
}

fn default_hbar() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilesSection {
    pub horizon: f64,
    pub m_kind: String,
    pub m_base: Option<f64>,
    pub m_rate: Option<f64>,
    pub m_amplitude: Option<f64>,
    pub m_angular_freq: Option<f64>,
    pub m_phase: Option<f64>,
    pub m_times: Option<Vec<f64>>,
    pub m_values: Option<Vec<f64>>,
    pub omega_kind: String,
    pub omega_base: Option<f64>,
    pub omega_rate: Option<f64>,
    pub omega_amplitude: Option<f64>,
    pub omega_angular_freq: Option<f64>,
    pub omega_phase: Option<f64>,
    pub omega_times: Option<Vec<f64>>,
    pub omega_values: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantSections {
    pub g: InvariantSection,
    pub d: InvariantSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantSection {
    pub alpha01: f64,
    pub beta01_re: f64,
    pub beta01_im: f64,
    pub delta01: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub n_g: usize,
    pub n_d: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub tol_ode: f64,
    pub tol_quad: f64,
    pub grid_points: usize,
    pub hamiltonian: HamiltonianChoice,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            tol_ode: 1e-10,
            tol_quad: 1e-10,
            grid_points: 201,
            hamiltonian: HamiltonianChoice::Auto,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianChoice {
    /// Direct Bopp-shifted matrix for constant profiles, circular
    /// number-operator form otherwise.
    Auto,
    Ladder,
    Direct,
    GSector,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axes: Vec<AxisSpec>,
    #[serde(default = "default_levels_max_total")]
    pub levels_max_total: usize,
}

fn default_levels_max_total() -> usize {
    2
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub key: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: Option<usize>,
    pub values: Option<Vec<f64>>,
}

/// Validated configuration: every accessor returns domain types whose
/// invariants already hold.
#[derive(Clone, Debug)]
pub struct RunConfig {
    raw: RawConfig,
}

impl RunConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("{e}")))?;
        let cfg = Self { raw };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Build from an already-deserialized raw config (sweeps mutate copies).
    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let cfg = Self { raw };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    fn validate(&self) -> Result<()> {
        self.osc_params()?;
        self.nc_params()?;
        self.basis()?;
        if self.raw.profiles.is_some() {
            self.td_params()?;
        }
        self.invariant_g()?;
        self.invariant_d()?;
        let num = self.numerics();
        if !(num.tol_ode > 0.0 && num.tol_quad > 0.0) {
            return Err(Error::Config(
                "numerics.tol_ode and numerics.tol_quad must be > 0".into(),
            ));
        }
        if num.grid_points < 2 {
            return Err(Error::Config("numerics.grid_points must be >= 2".into()));
        }
        if let Some(sweep) = &self.raw.sweep {
            if sweep.axes.is_empty() {
                return Err(Error::Config("sweep.axes must not be empty".into()));
            }
            for axis in &sweep.axes {
                axis_values(axis)?;
            }
        }
        Ok(())
    }

    pub fn raw(&self) -> &RawConfig {
        &self.raw
    }

    pub fn osc_params(&self) -> Result<OscParams> {
        OscParams::new(self.raw.system.m, self.raw.system.omega)
            .map_err(|e| Error::Config(format!("[system] {e}")))
    }

    pub fn nc_params(&self) -> Result<NCParams> {
        NCParams::with_hbar(
            self.raw.system.theta,
            self.raw.system.theta_bar,
            self.raw.system.hbar,
        )
        .map_err(|e| Error::Config(format!("[system] {e}")))
    }

    pub fn basis(&self) -> Result<FockBasis> {
        FockBasis::new(self.raw.system.n_max)
            .map_err(|e| Error::Config(format!("[system] n_max: {e}")))
    }

    pub fn profiles(&self) -> Result<&ProfilesSection> {
        self.raw
            .profiles
            .as_ref()
            .ok_or_else(|| Error::Config("missing required section [profiles]".into()))
    }

    pub fn td_params(&self) -> Result<TDParams> {
        let section = self.profiles()?;
        let m = build_profile("m", section.horizon, &ProfileFields::m(section))?;
        let omega = build_profile("omega", section.horizon, &ProfileFields::omega(section))?;
        TDParams::new(m, omega, self.nc_params()?)
            .map_err(|e| Error::Config(format!("[profiles] {e}")))
    }

    pub fn invariant_g(&self) -> Result<InvariantConstants> {
        match &self.raw.invariant {
            Some(sections) => invariant_constants("invariant.g", &sections.g),
            None => Ok(default_invariant()),
        }
    }

    pub fn invariant_d(&self) -> Result<InvariantConstants> {
        match &self.raw.invariant {
            Some(sections) => invariant_constants("invariant.d", &sections.d),
            None => Ok(default_invariant()),
        }
    }

    pub fn state(&self) -> (usize, usize) {
        match &self.raw.state {
            Some(s) => (s.n_g, s.n_d),
            None => (0, 0),
        }
    }

    pub fn numerics(&self) -> &NumericsSection {
        &self.raw.numerics
    }

    pub fn sweep(&self) -> Result<&SweepSection> {
        self.raw
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Config("missing required section [sweep]".into()))
    }
}

fn default_invariant() -> InvariantConstants {
    InvariantConstants::hermitian(1.0, Complex64::new(0.0, 0.0), 0.0)
        .expect("default constants are valid")
}

fn invariant_constants(section: &str, s: &InvariantSection) -> Result<InvariantConstants> {
    InvariantConstants::hermitian(s.alpha01, Complex64::new(s.beta01_re, s.beta01_im), s.delta01)
        .map_err(|e| Error::Config(format!("[{section}] {e}")))
}

/// One parameter family's profile keys, unified across the m_*/omega_* prefixes.
struct ProfileFields<'a> {
    kind: &'a str,
    base: Option<f64>,
    rate: Option<f64>,
    amplitude: Option<f64>,
    angular_freq: Option<f64>,
    phase: Option<f64>,
    times: Option<&'a Vec<f64>>,
    values: Option<&'a Vec<f64>>,
}

impl<'a> ProfileFields<'a> {
    fn m(s: &'a ProfilesSection) -> Self {
        Self {
            kind: &s.m_kind,
            base: s.m_base,
            rate: s.m_rate,
            amplitude: s.m_amplitude,
            angular_freq: s.m_angular_freq,
            phase: s.m_phase,
            times: s.m_times.as_ref(),
            values: s.m_values.as_ref(),
        }
    }

    fn omega(s: &'a ProfilesSection) -> Self {
        Self {
            kind: &s.omega_kind,
            base: s.omega_base,
            rate: s.omega_rate,
            amplitude: s.omega_amplitude,
            angular_freq: s.omega_angular_freq,
            phase: s.omega_phase,
            times: s.omega_times.as_ref(),
            values: s.omega_values.as_ref(),
        }
    }
}

fn require_key(prefix: &str, key: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("[profiles] missing {prefix}_{key} for this kind")))
}

fn forbid_keys(prefix: &str, fields: &ProfileFields, allowed: &[&str]) -> Result<()> {
    let present: [(&str, bool); 7] = [
        ("base", fields.base.is_some()),
        ("rate", fields.rate.is_some()),
        ("amplitude", fields.amplitude.is_some()),
        ("angular_freq", fields.angular_freq.is_some()),
        ("phase", fields.phase.is_some()),
        ("times", fields.times.is_some()),
        ("values", fields.values.is_some()),
    ];
    for (name, is_present) in present {
        if is_present && !allowed.contains(&name) {
            return Err(Error::Config(format!(
                "[profiles] {prefix}_{name} does not apply to kind '{}'",
                fields.kind
            )));
        }
    }
    Ok(())
}

fn build_profile(prefix: &str, horizon: f64, fields: &ProfileFields) -> Result<TimeProfile> {
    let kind = match fields.kind {
        "constant" => {
            forbid_keys(prefix, fields, &["base"])?;
            ProfileKind::Constant {
                value: require_key(prefix, "base", fields.base)?,
            }
        }
        "linear" => {
            forbid_keys(prefix, fields, &["base", "rate"])?;
            ProfileKind::Linear {
                base: require_key(prefix, "base", fields.base)?,
                rate: require_key(prefix, "rate", fields.rate)?,
            }
        }
        "exponential" => {
            forbid_keys(prefix, fields, &["base", "rate"])?;
            ProfileKind::Exponential {
                base: require_key(prefix, "base", fields.base)?,
                rate: require_key(prefix, "rate", fields.rate)?,
            }
        }
        "sinusoidal" => {
            forbid_keys(prefix, fields, &["base", "amplitude", "angular_freq", "phase"])?;
            ProfileKind::Sinusoidal {
                base: require_key(prefix, "base", fields.base)?,
                amplitude: require_key(prefix, "amplitude", fields.amplitude)?,
                angular_freq: require_key(prefix, "angular_freq", fields.angular_freq)?,
                phase: fields.phase.unwrap_or(0.0),
            }
        }
        "tabulated" => {
            forbid_keys(prefix, fields, &["times", "values"])?;
            ProfileKind::Tabulated {
                times: fields
                    .times
                    .ok_or_else(|| {
                        Error::Config(format!("[profiles] missing {prefix}_times"))
                    })?
                    .clone(),
                values: fields
                    .values
                    .ok_or_else(|| {
                        Error::Config(format!("[profiles] missing {prefix}_values"))
                    })?
                    .clone(),
            }
        }
        other => {
            return Err(Error::Config(format!(
                "[profiles] unknown {prefix}_kind '{other}' \
                 (expected constant|linear|exponential|sinusoidal|tabulated)"
            )))
        }
    };
    TimeProfile::new(kind, horizon).map_err(|e| Error::Config(format!("[profiles] {prefix}: {e}")))
}

/// Expand one axis spec into its grid values.
pub fn axis_values(axis: &AxisSpec) -> Result<Vec<f64>> {
    const KEYS: &[&str] = &[
        "theta",
        "theta_bar",
        "m",
        "omega",
        "m_base",
        "m_rate",
        "m_amplitude",
        "m_angular_freq",
        "omega_base",
        "omega_rate",
        "omega_amplitude",
        "omega_angular_freq",
    ];
    if !KEYS.contains(&axis.key.as_str()) {
        return Err(Error::Config(format!(
            "[sweep] unknown axis key '{}' (expected one of {KEYS:?})",
            axis.key
        )));
    }
    match (&axis.values, axis.min, axis.max, axis.count) {
        (Some(values), None, None, None) => {
            if values.is_empty() {
                return Err(Error::Config(format!(
                    "[sweep] axis '{}' has an empty values list",
                    axis.key
                )));
            }
            Ok(values.clone())
        }
        (None, Some(min), Some(max), Some(count)) => {
            if count < 1 {
                return Err(Error::Config(format!(
                    "[sweep] axis '{}' needs count >= 1",
                    axis.key
                )));
            }
            if count == 1 {
                return Ok(vec![min]);
            }
            if !(max >= min) {
                return Err(Error::Config(format!(
                    "[sweep] axis '{}' needs max >= min",
                    axis.key
                )));
            }
            Ok((0..count)
                .map(|k| min + (max - min) * k as f64 / (count - 1) as f64)
                .collect())
        }
        _ => Err(Error::Config(format!(
            "[sweep] axis '{}' must set either values or all of min/max/count",
            axis.key
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[system]
m = 1.0
omega = 1.0
theta = 0.1
theta_bar = 0.1
hbar = 1.0
n_max = 14
"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = RunConfig::parse_str(MINIMAL).unwrap();
        assert_eq!(cfg.basis().unwrap().n_max(), 14);
        assert_eq!(cfg.state(), (0, 0));
        assert_eq!(cfg.numerics().grid_points, 201);
        assert!(cfg.invariant_g().unwrap().beta01().norm() == 0.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{MINIMAL}\n[numerics]\ntol_ode = 1e-9\nbogus = 3\n");
        let err = RunConfig::parse_str(&text).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn negative_theta_rejected_at_parse_time() {
        let text = MINIMAL.replace("theta = 0.1", "theta = -0.1");
        let err = RunConfig::parse_str(&text).unwrap_err();
        assert!(err.to_string().contains("theta"), "{err}");
        assert_eq!(err.exit_class().code(), 1);
    }

    #[test]
    fn missing_required_key_rejected() {
        let text = MINIMAL.replace("omega = 1.0\n", "");
        assert!(RunConfig::parse_str(&text).is_err());
    }

    #[test]
    fn profile_kind_key_discipline() {
        let good = format!(
            "{MINIMAL}\n[profiles]\nhorizon = 1.0\nm_kind = \"constant\"\nm_base = 1.0\n\
             omega_kind = \"sinusoidal\"\nomega_base = 1.0\nomega_amplitude = 0.3\n\
             omega_angular_freq = 6.0\n"
        );
        let cfg = RunConfig::parse_str(&good).unwrap();
        let td = cfg.td_params().unwrap();
        assert_eq!(td.horizon(), 1.0);

        // a rate on a constant profile is a config error
        let bad = format!(
            "{MINIMAL}\n[profiles]\nhorizon = 1.0\nm_kind = \"constant\"\nm_base = 1.0\n\
             m_rate = 0.5\nomega_kind = \"constant\"\nomega_base = 1.0\n"
        );
        let err = RunConfig::parse_str(&bad).unwrap_err();
        assert!(err.to_string().contains("m_rate"), "{err}");

        // missing amplitude for sinusoidal
        let bad = format!(
            "{MINIMAL}\n[profiles]\nhorizon = 1.0\nm_kind = \"constant\"\nm_base = 1.0\n\
             omega_kind = \"sinusoidal\"\nomega_base = 1.0\nomega_angular_freq = 6.0\n"
        );
        assert!(RunConfig::parse_str(&bad).is_err());
    }

    #[test]
    fn axis_specs() {
        let axis = AxisSpec {
            key: "theta".into(),
            min: Some(0.0),
            max: Some(0.2),
            count: Some(5),
            values: None,
        };
        assert_eq!(axis_values(&axis).unwrap(), vec![0.0, 0.05, 0.1, 0.15000000000000002, 0.2]);
        let axis = AxisSpec {
            key: "nope".into(),
            min: None,
            max: None,
            count: None,
            values: Some(vec![1.0]),
        };
        assert!(axis_values(&axis).is_err());
    }

    #[test]
    fn invariant_sections_accepted() {
        let text = format!(
            "{MINIMAL}\n[invariant.g]\nalpha01 = 1.0\nbeta01_re = 0.5\nbeta01_im = -0.25\n\
             delta01 = 0.0\n[invariant.d]\nalpha01 = 2.0\nbeta01_re = 0.0\nbeta01_im = 0.0\n\
             delta01 = 0.1\n"
        );
        let cfg = RunConfig::parse_str(&text).unwrap();
        let g = cfg.invariant_g().unwrap();
        assert_eq!(g.beta01(), Complex64::new(0.5, -0.25));
        assert!(g.is_hermitian());
        assert_eq!(cfg.invariant_d().unwrap().alpha01(), 2.0);
    }
}
