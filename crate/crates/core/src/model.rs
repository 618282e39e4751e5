//! Signal and channel model: raised-cosine pulse, power-law path loss and the
//! per-sensor information kernel `g(d)`.
//!
//! The antenna/transmit constant is folded into the received energy at unit
//! distance, so [`Pulse::es`] is the energy of the unit-distance waveform and
//! [`ChannelParams::rho`] is `E_s / 2N₀`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 3e8;

/// Which terms of `g(d) = d^{-γ-2}(γ² + 4 W_e d² / c²)` are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMode {
    /// Both the received-strength and the time-of-arrival term.
    #[default]
    Full,
    /// Received-strength term `γ² d^{-γ-2}` only.
    RssOnly,
    /// Time-of-arrival term `4 W_e d^{-γ} / c²` only.
    ToaOnly,
}

/// Everything that defines the information kernel and the noise level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Path-loss exponent; must exceed 2.
    pub gamma: f64,
    /// Propagation speed in m/s.
    pub c: f64,
    /// Effective bandwidth in s⁻².
    pub we: f64,
    /// Linear SNR at unit distance, `E_s / 2N₀`.
    pub rho: f64,
}

impl ChannelParams {
    pub fn new(gamma: f64, c: f64, we: f64, rho: f64) -> Result<Self> {
        let ch = Self { gamma, c, we, rho };
        ch.validate()?;
        Ok(ch)
    }

    /// Channel driven by `pulse`: `W_e` from the pulse duration and
    /// `ρ = E_s / 2N₀` from its energy and noise level.
    pub fn from_pulse(gamma: f64, c: f64, pulse: &Pulse) -> Result<Self> {
        Self::new(gamma, c, effective_bandwidth(pulse), pulse.rho())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 2.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "path-loss exponent gamma must be > 2 (the shot-noise sum and \
                 Γ(1-2/γ) diverge otherwise), got {}",
                self.gamma
            )));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c must be > 0, got {}", self.c)));
        }
        if !(self.we >= 0.0 && self.we.is_finite()) {
            return Err(Error::InvalidParameter(format!("we must be >= 0, got {}", self.we)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must be > 0, got {}", self.rho)));
        }
        Ok(())
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.gamma, self.c, self.we, rho)
    }

    pub fn with_we(&self, we: f64) -> Result<Self> {
        Self::new(self.gamma, self.c, we, self.rho)
    }

    /// Coefficient of the received-strength term, `γ²`.
    pub fn rss_coef(&self) -> f64 {
        self.gamma * self.gamma
    }

    /// Coefficient of the time-of-arrival term, `4 W_e / c²`.
    pub fn toa_coef(&self) -> f64 {
        4.0 * self.we / (self.c * self.c)
    }
}

/// Raised-cosine pulse `s(t) = √(2E_s/3T)·(1 − cos 2πt/T)` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    /// Duration `T` in seconds.
    pub t_dur: f64,
    /// Received energy at 1 m, joules.
    pub es: f64,
    /// Noise level `N₀`; the white-noise two-sided density is `N₀/2`.
    pub n0: f64,
}

impl Pulse {
    pub fn new(t_dur: f64, es: f64, n0: f64) -> Result<Self> {
        for (name, v) in [("t_dur", t_dur), ("es", es), ("n0", n0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self { t_dur, es, n0 })
    }

    /// Unit-energy pulse whose noise level realises the linear SNR `rho`.
    pub fn for_snr(t_dur: f64, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must be > 0, got {rho}")));
        }
        Self::new(t_dur, 1.0, 1.0 / (2.0 * rho))
    }

    pub fn rho(&self) -> f64 {
        self.es / (2.0 * self.n0)
    }

    pub(crate) fn amplitude_sq(&self) -> f64 {
        2.0 * self.es / (3.0 * self.t_dur)
    }

    pub(crate) fn omega(&self) -> f64 {
        2.0 * PI / self.t_dur
    }

    /// `s(t)`.
    pub fn waveform(&self, t: f64) -> f64 {
        if !(0.0..=self.t_dur).contains(&t) {
            return 0.0;
        }
        self.amplitude_sq().sqrt() * (1.0 - (self.omega() * t).cos())
    }

    /// `ds/dt`.
    pub fn derivative(&self, t: f64) -> f64 {
        if !(0.0..=self.t_dur).contains(&t) {
            return 0.0;
        }
        self.amplitude_sq().sqrt() * self.omega() * (self.omega() * t).sin()
    }
}

/// `W_e = ∫ s'² / ∫ s² = 4π² / (3T²)` for the raised-cosine pulse.
pub fn effective_bandwidth(p: &Pulse) -> f64 {
    4.0 * PI * PI / (3.0 * p.t_dur * p.t_dur)
}

/// `g(d) = d^{-γ-2}(γ² + 4 W_e d² / c²)`.
pub fn g_kernel(d: f64, ch: &ChannelParams) -> Result<f64> {
    g_kernel_mode(d, ch, KernelMode::Full)
}

pub fn g_kernel_mode(d: f64, ch: &ChannelParams, mode: KernelMode) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("distance must be finite and > 0, got {d}")));
    }
    Ok(g_unchecked(d, ch, mode))
}

/// `g` without argument checks, for inner loops that already guarantee `d > 0`.
#[inline]
pub(crate) fn g_unchecked(d: f64, ch: &ChannelParams, mode: KernelMode) -> f64 {
    let inv_d2 = 1.0 / (d * d);
    let base = d.powf(-ch.gamma);
    match mode {
        KernelMode::Full => base * (ch.rss_coef() * inv_d2 + ch.toa_coef()),
        KernelMode::RssOnly => base * ch.rss_coef() * inv_d2,
        KernelMode::ToaOnly => base * ch.toa_coef(),
    }
}

/// Autocorrelation `C(δ) = ∫ s(t) s(t − δ) dt` of the raised-cosine pulse,
/// with `C(0) = E_s`.
pub fn pulse_autocorr(delta: f64, p: &Pulse) -> f64 {
    let d = delta.abs();
    if d >= p.t_dur {
        return 0.0;
    }
    let w = p.omega();
    let (s, c) = (w * d).sin_cos();
    p.amplitude_sq() * ((p.t_dur - d) * (1.0 + 0.5 * c) + 1.5 / w * s)
}

/// Linear SNR from decibels.
pub fn snr_from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
