//! One-parameter sweeps over a scenario.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{effective_bandwidth, snr_from_db, ChannelParams, Pulse};

/// Physical setting of a single evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub ch: ChannelParams,
    pub pulse: Pulse,
    /// Sensor density, m⁻².
    pub lambda: f64,
}

impl Scenario {
    /// Unit-energy pulse of duration `t_dur` at the given SNR.
    pub fn new(gamma: f64, snr_db: f64, t_dur: f64, c: f64, lambda: f64) -> Result<Self> {
        let pulse = Pulse::for_snr(t_dur, snr_from_db(snr_db))?;
        let s = Self {
            ch: ChannelParams::from_pulse(gamma, c, &pulse)?,
            pulse,
            lambda,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.ch.validate()?;
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {}", self.lambda)));
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if !close(self.ch.rho, self.pulse.rho()) || !close(self.ch.we, effective_bandwidth(&self.pulse)) {
            return Err(Error::InvalidParameter(
                "channel SNR and bandwidth must match the pulse".into(),
            ));
        }
        Ok(())
    }
}

/// Duration of the raised-cosine pulse with effective bandwidth `we`.
pub fn duration_for_bandwidth(we: f64) -> Result<f64> {
    if !(we > 0.0 && we.is_finite()) {
        return Err(Error::InvalidParameter(format!("we must be > 0, got {we}")));
    }
    Ok(2.0 * std::f64::consts::PI / (3.0 * we).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    SnrDb,
    Gamma,
    Lambda,
    TDur,
    We,
}

impl SweepParam {
    pub const ALL: [SweepParam; 5] = [Self::SnrDb, Self::Gamma, Self::Lambda, Self::TDur, Self::We];

    pub fn name(self) -> &'static str {
        match self {
            Self::SnrDb => "snr_db",
            Self::Gamma => "gamma",
            Self::Lambda => "lambda",
            Self::TDur => "t_dur",
            Self::We => "we",
        }
    }

    /// `base` with this parameter set to `v`; the pulse energy is kept.
    pub fn apply(self, base: &Scenario, v: f64) -> Result<Scenario> {
        let mut s = *base;
        match self {
            Self::SnrDb => {
                let rho = snr_from_db(v);
                s.pulse = Pulse::new(s.pulse.t_dur, s.pulse.es, s.pulse.es / (2.0 * rho))?;
                s.ch = s.ch.with_rho(s.pulse.rho())?;
            }
            Self::Gamma => {
                s.ch = ChannelParams::new(v, s.ch.c, s.ch.we, s.ch.rho)?;
            }
            Self::Lambda => s.lambda = v,
            Self::TDur | Self::We => {
                let t = if self == Self::TDur { v } else { duration_for_bandwidth(v)? };
                s.pulse = Pulse::new(t, s.pulse.es, s.pulse.n0)?;
                s.ch = s.ch.with_we(effective_bandwidth(&s.pulse))?;
            }
        }
        s.validate()?;
        Ok(s)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown sweep parameter `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepScale {
    #[default]
    Linear,
    Log,
}

impl FromStr for SweepScale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "log" => Ok(Self::Log),
            _ => Err(Error::Parse(format!("sweep scale must be linear or log, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: SweepScale,
}

impl Sweep {
    pub fn validate(&self) -> Result<()> {
        if self.points < 1 {
            return Err(Error::InvalidParameter("sweep needs at least one point".into()));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::InvalidParameter("sweep bounds must be finite".into()));
        }
        if self.scale == SweepScale::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(Error::InvalidParameter("log sweep bounds must be > 0".into()));
        }
        Ok(())
    }

    /// Sweep values; the end points are reproduced exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.start];
        }
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == n - 1 {
                    return self.stop;
                }
                let f = i as f64 / (n - 1) as f64;
                match self.scale {
                    SweepScale::Linear => self.start + f * (self.stop - self.start),
                    SweepScale::Log => (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}
