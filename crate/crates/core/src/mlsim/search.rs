//! Grid search with local refinement for the maximum-likelihood estimate.

use serde::{Deserialize, Serialize};

use super::likelihood::{NoiseSynthesis, TrialModel};
use crate::error::{Error, Result};
use crate::geometry::{SensorField, SourceLocation};
use crate::model::{ChannelParams, Pulse};

/// Square search grid centred on the true source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Half the side of the coarse grid, metres.
    pub half_width: f64,
    /// Coarse spacing, metres.
    pub step: f64,
    /// Number of step halvings after the coarse pass.
    pub refine: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_width: 30.0,
            step: 2.0,
            refine: 6,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite() && self.half_width > self.step && self.half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid needs half_width > step > 0, got half_width={} step={}",
                self.half_width, self.step
            )));
        }
        if self.refine > 52 {
            return Err(Error::InvalidParameter("grid refinement is limited to 52 halvings".into()));
        }
        Ok(())
    }

    /// Coarse nodes per axis on each side of the centre.
    pub fn nodes_per_side(&self) -> i64 {
        (self.half_width / self.step + 1e-9).floor() as i64
    }

    /// Coarse offsets in row-major order (y outer, x inner).
    pub fn coarse_offsets(&self) -> Vec<(f64, f64)> {
        let k = self.nodes_per_side();
        let mut v = Vec::with_capacity(((2 * k + 1) * (2 * k + 1)) as usize);
        for iy in -k..=k {
            for ix in -k..=k {
                v.push((ix as f64 * self.step, iy as f64 * self.step));
            }
        }
        v
    }
}

/// Result of one search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlOutcome {
    pub estimate: SourceLocation,
    pub log_likelihood: f64,
    /// Candidate evaluations, counting repeats.
    pub evaluations: usize,
}

/// Largest refinement displacement from the coarse winner, in coarse steps
/// per axis.
const REACH_STEPS: f64 = 2.0;

/// Moves allowed at one refinement level before the step is halved.
const MAX_MOVES: usize = 16;

/// First index of the largest value; NaN never wins.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] || (values[best].is_nan() && !v.is_nan()) {
            best = i;
        }
    }
    best
}

/// Maximum-likelihood estimate of the source.
///
/// The coarse grid is evaluated in full; ties go to the lowest row-major
/// index. Each refinement level halves the step and then repeatedly
/// evaluates the 3×3 neighbourhood of the current point, moving to its
/// maximum until the centre is strictly best. Refinement stays within two
/// coarse steps of the coarse winner. All geometry is relative to `src`, so
/// translating the source and every sensor translates the estimate.
pub fn ml_search(
    field: &SensorField,
    src: &SourceLocation,
    pulse: &Pulse,
    ch: &ChannelParams,
    grid: &GridSpec,
    seed: u64,
    synth: NoiseSynthesis,
) -> Result<MlOutcome> {
    grid.validate()?;
    if synth == NoiseSynthesis::Dense {
        return Err(Error::InvalidParameter(
            "dense noise synthesis draws one batch only and cannot drive the refinement".into(),
        ));
    }
    let mut model = TrialModel::new(field, src, pulse, ch, seed, synth)?;
    let coarse = grid.coarse_offsets();
    let ll = model.log_likelihoods(&coarse)?;
    let mut evaluations = coarse.len();
    let k = argmax(&ll);
    let origin = coarse[k];
    let mut center = origin;
    let mut best = ll[k];
    let reach = REACH_STEPS * grid.step;
    // Ring points stay within `reach` of the coarse winner per axis, hence
    // within √2·reach in distance.
    model.restrict_noise(origin, 1.5 * reach);
    let mut step = grid.step;
    for _ in 0..grid.refine {
        step *= 0.5;
        for _ in 0..MAX_MOVES {
            let mut ring = Vec::with_capacity(9);
            for dy in [-step, 0.0, step] {
                for dx in [-step, 0.0, step] {
                    ring.push((center.0 + dx, center.1 + dy));
                }
            }
            let inside: Vec<bool> = ring
                .iter()
                .map(|p| (p.0 - origin.0).abs() <= reach && (p.1 - origin.1).abs() <= reach)
                .collect();
            let probe: Vec<(f64, f64)> = ring.iter().zip(&inside).filter(|(_, &i)| i).map(|(p, _)| *p).collect();
            let vals = model.log_likelihoods(&probe)?;
            evaluations += probe.len();
            let mut it = vals.into_iter();
            let ll: Vec<f64> = inside
                .iter()
                .map(|&i| if i { it.next().expect("one value per probe") } else { f64::NEG_INFINITY })
                .collect();
            best = ll[4];
            let k = argmax(&ll);
            if !(ll[k] > ll[4]) {
                break;
            }
            center = ring[k];
            best = ll[k];
        }
    }
    Ok(MlOutcome {
        estimate: SourceLocation {
            x: src.x + center.0,
            y: src.y + center.1,
        },
        log_likelihood: best,
        evaluations,
    })
}

/// [`ml_search`] returning only the estimate.
pub fn ml_estimate(
    field: &SensorField,
    src: &SourceLocation,
    pulse: &Pulse,
    ch: &ChannelParams,
    grid: &GridSpec,
    seed: u64,
    synth: NoiseSynthesis,
) -> Result<SourceLocation> {
    ml_search(field, src, pulse, ch, grid, seed, synth).map(|o| o.estimate)
}
