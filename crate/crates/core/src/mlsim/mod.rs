//! Monte-Carlo maximum-likelihood localisation over Poisson fields.

mod likelihood;
mod noise;
mod search;

pub use likelihood::{log_likelihood, sufficient_stats, CorrelatorBank, NoiseSynthesis};
pub use noise::{dense_noise, DelayNoise};
pub use search::{ml_estimate, ml_search, GridSpec, MlOutcome};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::crb_lb;
use crate::crb::{crb_realization, is_excludable, summarize, trial_seed};
use crate::error::{Error, Result};
use crate::geometry::{polar_of, radius_for_count, sample_ppp, SourceLocation};
use crate::model::{ChannelParams, KernelMode, Pulse};
use crate::numerics::QuadratureSpec;
use crate::rng::derive_seed;
use crate::sweep::{Scenario, Sweep, SweepParam};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlSimConfig {
    pub ch: ChannelParams,
    pub pulse: Pulse,
    /// Sensor density, m⁻².
    pub lambda: f64,
    /// Expected sensors on the sampling disc around the source.
    pub sensors_per_trial: usize,
    pub trials: usize,
    pub grid: GridSpec,
    pub master_seed: u64,
    pub noise: NoiseSynthesis,
}

impl MlSimConfig {
    pub fn new(scenario: Scenario, sensors_per_trial: usize, trials: usize, master_seed: u64) -> Result<Self> {
        let cfg = Self {
            ch: scenario.ch,
            pulse: scenario.pulse,
            lambda: scenario.lambda,
            sensors_per_trial,
            trials,
            grid: GridSpec::default(),
            master_seed,
            noise: NoiseSynthesis::Markov,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            ch: self.ch,
            pulse: self.pulse,
            lambda: self.lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario().validate()?;
        self.grid.validate()?;
        if self.trials < 1 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.sensors_per_trial < 2 {
            return Err(Error::InvalidParameter("sensors_per_trial must be >= 2".into()));
        }
        if self.noise == NoiseSynthesis::Dense {
            return Err(Error::InvalidParameter(
                "the simulation needs markov or off noise synthesis".into(),
            ));
        }
        Ok(())
    }

    fn with_scenario(&self, s: Scenario) -> Self {
        Self {
            ch: s.ch,
            pulse: s.pulse,
            lambda: s.lambda,
            ..*self
        }
    }
}

/// Outcome of a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub squared_error: f64,
    /// Bound of the same field.
    pub crb: f64,
}

/// Runs trial `t`: the field comes from `trial_seed(master, t)` (the same
/// field the averaged bound uses) and sensor `m`'s noise from
/// `derive_seed(derive_seed(trial_seed, 1), m)`. `None` marks a trial whose
/// geometry is singular or degenerate.
pub fn run_trial(cfg: &MlSimConfig, t: u64) -> Result<Option<TrialOutcome>> {
    let seed = trial_seed(cfg.master_seed, t);
    let src = SourceLocation::default();
    let radius = radius_for_count(cfg.lambda, cfg.sensors_per_trial as f64);
    let field = sample_ppp(cfg.lambda, radius, src, seed)?;
    let crb = match polar_of(&field, &src).and_then(|p| crb_realization(&p, &cfg.ch)) {
        Ok(v) => v,
        Err(e) if is_excludable(&e) => return Ok(None),
        Err(e) => return Err(e),
    };
    let est = ml_estimate(&field, &src, &cfg.pulse, &cfg.ch, &cfg.grid, derive_seed(seed, 1), cfg.noise)?;
    Ok(Some(TrialOutcome {
        squared_error: est.dist_sq(&src),
        crb,
    }))
}

/// Statistics of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsePoint {
    pub mse: f64,
    pub mse_std_err: f64,
    /// Averaged bound over the same fields.
    pub avg_crb: f64,
    pub avg_crb_std_err: f64,
    pub avg_crb_median: f64,
    pub crb_lb: Option<f64>,
    pub trials: usize,
    pub excluded: usize,
}

/// Mean squared error of the estimator over `cfg.trials` fields, with the
/// averaged and density-level bounds for the same parameters. Trials run in
/// parallel and are reduced in trial order.
pub fn mse_point(cfg: &MlSimConfig) -> Result<MsePoint> {
    cfg.validate()?;
    let outcomes: Vec<Result<Option<TrialOutcome>>> =
        (0..cfg.trials as u64).into_par_iter().map(|t| run_trial(cfg, t)).collect();
    let mut errors = Vec::with_capacity(cfg.trials);
    let mut crbs = Vec::with_capacity(cfg.trials);
    let mut excluded = 0;
    for o in outcomes {
        match o? {
            Some(t) => {
                errors.push(t.squared_error);
                crbs.push(t.crb);
            }
            None => excluded += 1,
        }
    }
    let e = summarize(&errors)
        .ok_or_else(|| Error::InsufficientData(format!("all {} trials were excluded", cfg.trials)))?;
    let c = summarize(&crbs).expect("same length as errors");
    let lb = crb_lb(cfg.lambda, &cfg.ch, KernelMode::Full, &QuadratureSpec::default())
        .ok()
        .map(|b| b.value);
    Ok(MsePoint {
        mse: e.mean,
        mse_std_err: e.std_err,
        avg_crb: c.mean,
        avg_crb_std_err: c.std_err,
        avg_crb_median: c.median,
        crb_lb: lb,
        trials: errors.len(),
        excluded,
    })
}

/// MSE against a swept parameter. Every point reuses `master_seed`, so the
/// fields and noise streams are common across the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseCurve {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub mse: Vec<f64>,
    pub std_err: Vec<f64>,
    pub avg_crb: Vec<f64>,
    pub avg_crb_std_err: Vec<f64>,
    pub avg_crb_median: Vec<f64>,
    pub crb_lb: Vec<Option<f64>>,
    pub excluded: Vec<usize>,
}

impl MseCurve {
    /// `mse / avg_crb` per point.
    pub fn ratio(&self) -> Vec<f64> {
        self.mse.iter().zip(&self.avg_crb).map(|(m, c)| m / c).collect()
    }
}

pub fn run_mse(cfg: &MlSimConfig, sweep: &Sweep) -> Result<MseCurve> {
    sweep.validate()?;
    let values = sweep.values();
    let mut curve = MseCurve {
        param: sweep.param,
        values: values.clone(),
        mse: Vec::new(),
        std_err: Vec::new(),
        avg_crb: Vec::new(),
        avg_crb_std_err: Vec::new(),
        avg_crb_median: Vec::new(),
        crb_lb: Vec::new(),
        excluded: Vec::new(),
    };
    for v in values {
        let point_cfg = cfg.with_scenario(sweep.param.apply(&cfg.scenario(), v)?);
        let p = mse_point(&point_cfg)?;
        curve.mse.push(p.mse);
        curve.std_err.push(p.mse_std_err);
        curve.avg_crb.push(p.avg_crb);
        curve.avg_crb_std_err.push(p.avg_crb_std_err);
        curve.avg_crb_median.push(p.avg_crb_median);
        curve.crb_lb.push(p.crb_lb);
        curve.excluded.push(p.excluded);
    }
    Ok(curve)
}
