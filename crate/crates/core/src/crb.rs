//! Per-realisation Fisher information and Cramér-Rao bound, and the
//! Monte-Carlo average of the bound over Poisson sensor fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polar_of, radius_for_count, sample_ppp, Polar, SourceLocation};
use crate::model::{g_unchecked, ChannelParams, KernelMode};
use crate::numerics::{CompensatedSum, DoubleWord};
use crate::rng;

/// Scale-free singularity threshold: `det ≤ SINGULAR_RATIO · trace²`.
pub const SINGULAR_RATIO: f64 = 1e-14;

/// Exclusion share above which an average is flagged.
pub const EXCLUSION_WARNING_SHARE: f64 = 0.01;

/// Share of the mean contributed by the largest trial above which the
/// average is flagged as heavy-tailed.
pub const HEAVY_TAIL_SHARE: f64 = 0.1;

/// Symmetric 2×2 Fisher information (entries in m⁻²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherInfo {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl FisherInfo {
    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    /// `trace(I⁻¹) = trace(I) / det(I)`.
    pub fn trace_of_inverse(&self) -> Result<f64> {
        let det = self.det();
        let threshold = SINGULAR_RATIO * self.trace().powi(2);
        if !(det > threshold) {
            return Err(Error::SingularGeometry { det, threshold });
        }
        Ok(self.trace() / det)
    }
}

/// `I = ρ Σ g(Dᵢ) [cos²φᵢ, sinφᵢcosφᵢ; sinφᵢcosφᵢ, sin²φᵢ]`.
pub fn fim(polars: &[Polar], ch: &ChannelParams) -> Result<FisherInfo> {
    if polars.is_empty() {
        return Err(Error::InsufficientData("Fisher information needs at least one sensor".into()));
    }
    let mut xx = CompensatedSum::default();
    let mut xy = CompensatedSum::default();
    let mut yy = CompensatedSum::default();
    for p in polars {
        let g = g_unchecked(p.d, ch, KernelMode::Full);
        let (s, c) = p.phi.sin_cos();
        xx.add(g * c * c);
        xy.add(g * s * c);
        yy.add(g * s * s);
    }
    Ok(FisherInfo {
        xx: ch.rho * xx.value(),
        xy: ch.rho * xy.value(),
        yy: ch.rho * yy.value(),
    })
}

/// Bound on `E‖θ̂ − θ‖²` for a fixed sensor configuration:
///
/// `(1/ρ) Σ g(D_m) / Σ_{m<j} g(D_m) g(D_j) sin²(φ_m − φ_j)`.
pub fn crb_realization(polars: &[Polar], ch: &ChannelParams) -> Result<f64> {
    if polars.len() < 2 {
        return Err(Error::SingularGeometry {
            det: 0.0,
            threshold: 0.0,
        });
    }
    let mut terms: Vec<(f64, f64, f64)> = polars
        .iter()
        .map(|p| {
            let (s, c) = p.phi.sin_cos();
            (g_unchecked(p.d, ch, KernelMode::Full), s, c)
        })
        .collect();
    terms.sort_by(|a, b| b.0.total_cmp(&a.0));

    let numer: CompensatedSum = terms.iter().map(|t| t.0).collect();
    let mut denom = CompensatedSum::default();
    for (m, &(gm, sm, cm)) in terms.iter().enumerate() {
        let mut row = CompensatedSum::default();
        for &(gj, sj, cj) in &terms[m + 1..] {
            let sin_diff = sm * cj - cm * sj;
            row.add(gj * sin_diff * sin_diff);
        }
        denom.add(gm * row.value());
    }
    let numer = numer.value();
    let denom = denom.value();
    let threshold = SINGULAR_RATIO * numer * numer;
    if !(denom > threshold) {
        return Err(Error::SingularGeometry {
            det: denom * ch.rho * ch.rho,
            threshold: threshold * ch.rho * ch.rho,
        });
    }
    Ok(numer / (ch.rho * denom))
}

/// Same bound through the explicit inverse of the Fisher information.
///
/// The entries are accumulated from `u = √g cos φ`, `v = √g sin φ` with exact
/// products in double-word arithmetic, so each rank-1 term cancels exactly in
/// the determinant. A plain `xx·yy − xy²` loses about `ε·κ` relative accuracy
/// when one sensor dominates the information.
pub fn crb_trace_inverse(polars: &[Polar], ch: &ChannelParams) -> Result<f64> {
    if polars.is_empty() {
        return Err(Error::InsufficientData("Fisher information needs at least one sensor".into()));
    }
    let (mut xx, mut xy, mut yy) = (DoubleWord::default(), DoubleWord::default(), DoubleWord::default());
    for p in polars {
        let r = g_unchecked(p.d, ch, KernelMode::Full).sqrt();
        let (s, c) = p.phi.sin_cos();
        let (u, v) = (r * c, r * s);
        xx = xx + DoubleWord::product(u, u);
        xy = xy + DoubleWord::product(u, v);
        yy = yy + DoubleWord::product(v, v);
    }
    let trace = (xx + yy).value();
    let det = (xx * yy - xy * xy).value();
    let threshold = SINGULAR_RATIO * trace * trace;
    if !(det > threshold) {
        return Err(Error::SingularGeometry {
            det: det * ch.rho * ch.rho,
            threshold: threshold * ch.rho * ch.rho,
        });
    }
    Ok(trace / (ch.rho * det))
}

/// Monte-Carlo estimate of the bound averaged over Poisson fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvgCrbEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub median: f64,
    /// Trials that contributed to the statistics.
    pub trials: usize,
    pub sensors_per_trial: usize,
    /// Trials dropped for singular or degenerate geometry.
    pub excluded: usize,
    /// More than 1% of the requested trials were excluded.
    pub exclusion_warning: bool,
    /// Share of the sum contributed by the single largest trial.
    pub top_share: f64,
    pub heavy_tail: bool,
}

/// Sample summary used by the Monte-Carlo estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std_err: f64,
    pub median: f64,
    pub top_share: f64,
}

/// Mean, standard error, median and top share of `values`, reduced in order.
pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let sum: CompensatedSum = values.iter().copied().collect();
    let mean = sum.value() / n;
    let var: CompensatedSum = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let std_err = if values.len() > 1 {
        (var.value() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    let median = if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    };
    let top_share = if sum.value() > 0.0 {
        sorted[k - 1] / sum.value()
    } else {
        0.0
    };
    Some(Summary {
        mean,
        std_err,
        median,
        top_share,
    })
}

pub(crate) fn is_excludable(e: &Error) -> bool {
    matches!(
        e,
        Error::SingularGeometry { .. } | Error::DegenerateGeometry { .. } | Error::InsufficientData(_)
    )
}

/// Seed of trial `t` under `master_seed`.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    rng::derive_seed(master_seed, trial)
}

/// Bound for the field of a single trial, sampled around the origin on the
/// disc that holds `sensors_per_trial` sensors on average.
pub fn trial_crb(lambda: f64, ch: &ChannelParams, sensors_per_trial: usize, seed: u64) -> Result<f64> {
    let radius = radius_for_count(lambda, sensors_per_trial as f64);
    let src = SourceLocation::default();
    let field = sample_ppp(lambda, radius, src, seed)?;
    let polars = polar_of(&field, &src)?;
    crb_realization(&polars, ch)
}

/// Averages [`crb_realization`] over `trials` independent fields.
///
/// Trial `t` uses the seed [`trial_seed`]`(master_seed, t)` and statistics are
/// reduced in trial order, so the result does not depend on how the rayon pool
/// schedules trials.
pub fn avg_crb(
    lambda: f64,
    ch: &ChannelParams,
    trials: usize,
    sensors_per_trial: usize,
    master_seed: u64,
) -> Result<AvgCrbEstimate> {
    ch.validate()?;
    if trials < 1 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if sensors_per_trial < 2 {
        return Err(Error::InvalidParameter("sensors_per_trial must be >= 2".into()));
    }
    let outcomes: Vec<Result<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| trial_crb(lambda, ch, sensors_per_trial, trial_seed(master_seed, t)))
        .collect();
    let mut values = Vec::with_capacity(trials);
    let mut excluded = 0;
    for o in outcomes {
        match o {
            Ok(v) => values.push(v),
            Err(e) if is_excludable(&e) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    let s = summarize(&values)
        .ok_or_else(|| Error::InsufficientData(format!("all {trials} trials were singular")))?;
    Ok(AvgCrbEstimate {
        mean: s.mean,
        std_err: s.std_err,
        median: s.median,
        trials: values.len(),
        sensors_per_trial,
        excluded,
        exclusion_warning: excluded as f64 > EXCLUSION_WARNING_SHARE * trials as f64,
        top_share: s.top_share,
        heavy_tail: s.top_share > HEAVY_TAIL_SHARE,
    })
}
