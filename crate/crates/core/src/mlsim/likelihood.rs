//! Correlator statistics and the log-likelihood built from them.

use serde::{Deserialize, Serialize};

use super::noise::{dense_noise, DelayNoise};
use crate::error::{Error, Result};
use crate::geometry::{SensorField, SourceLocation};
use crate::model::{pulse_autocorr, ChannelParams, Pulse};
use crate::rng::derive_seed;

/// How the correlator noise is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseSynthesis {
    /// Lazily sampled independent-increment representation; supports
    /// incremental candidate sets.
    #[default]
    Markov,
    /// Cholesky factor of the dense candidate covariance; one batch only.
    Dense,
    /// Noise-free correlators.
    Off,
}

impl std::str::FromStr for NoiseSynthesis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markov" => Ok(Self::Markov),
            "dense" => Ok(Self::Dense),
            "off" => Ok(Self::Off),
            _ => Err(Error::Parse(format!("noise must be markov, dense or off, got `{s}`"))),
        }
    }
}

enum NoiseState {
    Markov(Vec<DelayNoise>),
    Dense(u64),
    Off,
}

/// Correlators of one trial, in coordinates relative to the true source.
pub(crate) struct TrialModel {
    sensors: Vec<(f64, f64)>,
    delay: Vec<f64>,
    amp: Vec<f64>,
    half_gamma: f64,
    c: f64,
    pulse: Pulse,
    noise: NoiseState,
}

impl TrialModel {
    pub(crate) fn new(
        field: &SensorField,
        src: &SourceLocation,
        pulse: &Pulse,
        ch: &ChannelParams,
        seed: u64,
        synth: NoiseSynthesis,
    ) -> Result<Self> {
        ch.validate()?;
        if field.is_empty() {
            return Err(Error::InsufficientData("field has no sensors".into()));
        }
        let half_gamma = 0.5 * ch.gamma;
        let mut sensors = Vec::with_capacity(field.len());
        let mut delay = Vec::with_capacity(field.len());
        let mut amp = Vec::with_capacity(field.len());
        for (index, &(a, b)) in field.points.iter().enumerate() {
            let rel = (a - src.x, b - src.y);
            let d = rel.0.hypot(rel.1);
            if d == 0.0 {
                return Err(Error::DegenerateGeometry { index });
            }
            sensors.push(rel);
            delay.push(d / ch.c);
            amp.push(d.powf(-half_gamma));
        }
        let noise = match synth {
            NoiseSynthesis::Markov => NoiseState::Markov(
                (0..field.len() as u64)
                    .map(|m| DelayNoise::new(pulse, derive_seed(seed, m)))
                    .collect(),
            ),
            NoiseSynthesis::Dense => NoiseState::Dense(seed),
            NoiseSynthesis::Off => NoiseState::Off,
        };
        Ok(Self {
            sensors,
            delay,
            amp,
            half_gamma,
            c: ch.c,
            pulse: *pulse,
            noise,
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.sensors.len()
    }

    /// Distances and correlator values of sensor `m` at relative candidates.
    fn sensor(&mut self, m: usize, cands: &[(f64, f64)]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (sx, sy) = self.sensors[m];
        let dist: Vec<f64> = cands.iter().map(|&(x, y)| (sx - x).hypot(sy - y)).collect();
        let taus: Vec<f64> = dist.iter().map(|d| d / self.c).collect();
        let noise = match &mut self.noise {
            NoiseState::Markov(n) => n[m].values(&taus),
            NoiseState::Dense(seed) => dense_noise(&taus, &self.pulse, derive_seed(*seed, m as u64))?,
            NoiseState::Off => vec![0.0; taus.len()],
        };
        let y = taus
            .iter()
            .zip(noise)
            .map(|(&t, n)| self.amp[m] * pulse_autocorr(t - self.delay[m], &self.pulse) + n)
            .collect();
        Ok((dist, y))
    }

    /// Log-likelihood at each relative candidate. Candidates on top of a
    /// sensor get `−∞`.
    pub(crate) fn log_likelihoods(&mut self, cands: &[(f64, f64)]) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; cands.len()];
        for m in 0..self.len() {
            let (dist, y) = self.sensor(m, cands)?;
            for k in 0..cands.len() {
                acc[k] += self.term(dist[k], y[k]);
            }
        }
        Ok(acc.into_iter().map(|s| s / self.pulse.n0).collect())
    }

    fn term(&self, d: f64, y: f64) -> f64 {
        if d == 0.0 {
            return f64::NEG_INFINITY;
        }
        let w = d.powf(-self.half_gamma);
        2.0 * w * y - w * w * self.pulse.es
    }

    /// Keeps only the noise state needed for candidates within `radius` of
    /// the relative point `center`.
    pub(crate) fn restrict_noise(&mut self, center: (f64, f64), radius: f64) {
        if let NoiseState::Markov(n) = &mut self.noise {
            let t_dur = self.pulse.t_dur;
            for (m, noise) in n.iter_mut().enumerate() {
                let (sx, sy) = self.sensors[m];
                let d = (sx - center.0).hypot(sy - center.1);
                let lo = (d - radius).max(0.0) / self.c;
                let hi = (d + radius) / self.c;
                noise.retain_windows(&[(lo, hi), (lo + t_dur, hi + t_dur)]);
            }
        }
    }
}

/// Correlator values `y_m(θ')` for every sensor and candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorBank {
    pub candidates: Vec<SourceLocation>,
    pub sensors: usize,
    /// Sensor-major: entry `m·K + k`.
    pub values: Vec<f64>,
}

impl CorrelatorBank {
    pub fn get(&self, sensor: usize, candidate: usize) -> f64 {
        self.values[sensor * self.candidates.len() + candidate]
    }

    /// Index of a candidate that is bit-identical to `theta`.
    pub fn index_of(&self, theta: &SourceLocation) -> Result<usize> {
        self.candidates
            .iter()
            .position(|c| c.x.to_bits() == theta.x.to_bits() && c.y.to_bits() == theta.y.to_bits())
            .ok_or(Error::CandidateNotFound { x: theta.x, y: theta.y })
    }
}

/// Correlates each sensor's received process against the pulse delayed to
/// every candidate.
///
/// The signal part is `D_m^{−γ/2}·C(τ'_m − τ_m)`; the noise is a zero-mean
/// Gaussian vector over candidates with covariance `(N₀/2)·C(τ'_i − τ'_j)`.
/// Sensor `m` draws its noise from the stream `derive_seed(seed, m)`.
pub fn sufficient_stats(
    field: &SensorField,
    src: &SourceLocation,
    candidates: &[SourceLocation],
    pulse: &Pulse,
    ch: &ChannelParams,
    seed: u64,
    synth: NoiseSynthesis,
) -> Result<CorrelatorBank> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("candidate set is empty".into()));
    }
    let mut model = TrialModel::new(field, src, pulse, ch, seed, synth)?;
    let rel: Vec<(f64, f64)> = candidates.iter().map(|c| (c.x - src.x, c.y - src.y)).collect();
    let mut values = Vec::with_capacity(field.len() * rel.len());
    for m in 0..model.len() {
        values.extend(model.sensor(m, &rel)?.1);
    }
    Ok(CorrelatorBank {
        candidates: candidates.to_vec(),
        sensors: field.len(),
        values,
    })
}

/// `(1/N₀)·Σ_m [2·D'_m^{−γ/2}·y_m(θ) − D'_m^{−γ}·E_s]` for a candidate `θ`
/// held in `stats`.
pub fn log_likelihood(
    theta: &SourceLocation,
    stats: &CorrelatorBank,
    field: &SensorField,
    pulse: &Pulse,
    ch: &ChannelParams,
) -> Result<f64> {
    let k = stats.index_of(theta)?;
    if stats.sensors != field.len() {
        return Err(Error::InvalidParameter(format!(
            "statistics cover {} sensors, field has {}",
            stats.sensors,
            field.len()
        )));
    }
    let half_gamma = 0.5 * ch.gamma;
    let mut sum = 0.0;
    for (m, &(a, b)) in field.points.iter().enumerate() {
        let d = (a - theta.x).hypot(b - theta.y);
        if d == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let w = d.powf(-half_gamma);
        sum += 2.0 * w * stats.get(m, k) - w * w * pulse.es;
    }
    Ok(sum / pulse.n0)
}
