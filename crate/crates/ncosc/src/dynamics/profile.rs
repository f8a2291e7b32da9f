//! Positive, piecewise-smooth parameter profiles m(t), ω(t) on [0, T].
//!
//! Positivity is enforced at construction: an analytic bound per kind plus a
//! 1024-point sampling sweep. Tabulated profiles use monotone cubic (PCHIP)
//! interpolation, which never overshoots the node values, so node positivity
//! carries over to the whole interval.

use crate::error::{Error, Result};

/// Sampling resolution of the construction-time positivity sweep.
const POSITIVITY_SAMPLES: usize = 1024;

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileKind {
    Constant {
        value: f64,
    },
    Linear {
        base: f64,
        rate: f64,
    },
    Exponential {
        base: f64,
        rate: f64,
    },
    Sinusoidal {
        base: f64,
        amplitude: f64,
        angular_freq: f64,
        phase: f64,
    },
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

/// A strictly positive scalar function of time on the closed domain [0, T].
#[derive(Clone, Debug)]
pub struct TimeProfile {
    kind: ProfileKind,
    t_end: f64,
    /// PCHIP node derivatives (tabulated profiles only).
    derivs: Vec<f64>,
}

impl TimeProfile {
    pub fn new(kind: ProfileKind, t_end: f64) -> Result<Self> {
        if !t_end.is_finite() || t_end <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "profile horizon must be finite and > 0, got {t_end}"
            )));
        }
        let derivs = match &kind {
            ProfileKind::Constant { value } => {
                require_positive("constant value", *value)?;
                Vec::new()
            }
            ProfileKind::Linear { base, rate } => {
                require_positive("linear base", *base)?;
                require_finite("linear rate", *rate)?;
                let end = base + rate * t_end;
                if end <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "linear profile reaches {end} at t={t_end}; must stay positive"
                    )));
                }
                Vec::new()
            }
            ProfileKind::Exponential { base, rate } => {
                require_positive("exponential base", *base)?;
                require_finite("exponential rate", *rate)?;
                Vec::new()
            }
            ProfileKind::Sinusoidal {
                base,
                amplitude,
                angular_freq,
                phase,
            } => {
                require_positive("sinusoidal base", *base)?;
                require_finite("sinusoidal amplitude", *amplitude)?;
                require_finite("sinusoidal angular_freq", *angular_freq)?;
                require_finite("sinusoidal phase", *phase)?;
                if base - amplitude.abs() <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "sinusoidal profile must satisfy base > |amplitude| ({base} vs {amplitude})"
                    )));
                }
                Vec::new()
            }
            ProfileKind::Tabulated { times, values } => pchip_derivatives(times, values, t_end)?,
        };
        let profile = Self {
            kind,
            t_end,
            derivs,
        };
        // sampling sweep on top of the analytic bounds
        for k in 0..=POSITIVITY_SAMPLES {
            let t = t_end * k as f64 / POSITIVITY_SAMPLES as f64;
            let v = profile.value_unchecked(t);
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "profile is non-positive ({v}) at t={t}"
                )));
            }
        }
        Ok(profile)
    }

    pub fn constant(value: f64, t_end: f64) -> Result<Self> {
        Self::new(ProfileKind::Constant { value }, t_end)
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    /// Upper end of the closed domain [0, T].
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, ProfileKind::Constant { .. })
    }

    /// Value at `t`, rejecting points outside [0, T] (up to rounding slack).
    pub fn value(&self, t: f64) -> Result<f64> {
        let slack = 1e-12 * self.t_end.max(1.0);
        if !t.is_finite() || t < -slack || t > self.t_end + slack {
            return Err(Error::InvalidParameter(format!(
                "t={t} outside the profile domain [0, {}]",
                self.t_end
            )));
        }
        Ok(self.value_unchecked(t.clamp(0.0, self.t_end)))
    }

    fn value_unchecked(&self, t: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant { value } => *value,
            ProfileKind::Linear { base, rate } => base + rate * t,
            ProfileKind::Exponential { base, rate } => base * (rate * t).exp(),
            ProfileKind::Sinusoidal {
                base,
                amplitude,
                angular_freq,
                phase,
            } => base + amplitude * (angular_freq * t + phase).sin(),
            ProfileKind::Tabulated { times, values } => {
                pchip_eval(times, values, &self.derivs, t)
            }
        }
    }
}

fn require_positive(what: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "{what} must be finite and > 0, got {v}"
        )));
    }
    Ok(())
}

fn require_finite(what: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{what} must be finite, got {v}"
        )));
    }
    Ok(())
}

/// Fritsch–Butland derivative choice with standard PCHIP endpoint rules.
/// Each interval's cubic is then monotone between its node values.
fn pchip_derivatives(times: &[f64], values: &[f64], t_end: f64) -> Result<Vec<f64>> {
    if times.len() != values.len() {
        return Err(Error::InvalidParameter(format!(
            "tabulated profile has {} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if times.len() < 2 {
        return Err(Error::InvalidParameter(
            "tabulated profile needs at least 2 nodes".into(),
        ));
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "tabulated profile times must be strictly increasing".into(),
            ));
        }
    }
    if times[0] > 0.0 || *times.last().unwrap() < t_end {
        return Err(Error::InvalidParameter(format!(
            "tabulated profile nodes [{}, {}] must cover [0, {t_end}]",
            times[0],
            times.last().unwrap()
        )));
    }
    for &v in values {
        require_positive("tabulated node value", v)?;
    }

    let n = times.len();
    let h: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = values
        .windows(2)
        .zip(&h)
        .map(|(w, hi)| (w[1] - w[0]) / hi)
        .collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return Ok(d);
    }
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = endpoint_derivative(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = endpoint_derivative(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    Ok(d)
}

fn endpoint_derivative(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

fn pchip_eval(times: &[f64], values: &[f64], derivs: &[f64], t: f64) -> f64 {
    let n = times.len();
    // locate the interval with a binary search on the left edge
    let i = match times.binary_search_by(|x| x.total_cmp(&t)) {
        Ok(k) => k.min(n - 2),
        Err(k) => k.saturating_sub(1).min(n - 2),
    };
    let h = times[i + 1] - times[i];
    let s = (t - times[i]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * values[i] + h10 * h * derivs[i] + h01 * values[i + 1] + h11 * h * derivs[i + 1]
}
