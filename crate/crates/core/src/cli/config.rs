//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlsim::{GridSpec, MlSimConfig, NoiseSynthesis};
use crate::model::SPEED_OF_LIGHT;
use crate::numerics::QuadratureSpec;
use crate::sweep::{duration_for_bandwidth, Scenario, Sweep, SweepParam, SweepScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Bounds,
    AvgCrb,
    MlSim,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Bounds => "bounds",
            Self::AvgCrb => "avg-crb",
            Self::MlSim => "ml-sim",
            Self::Verify => "verify",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [Self::Bounds, Self::AvgCrb, Self::MlSim, Self::Verify]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("mode must be bounds, avg-crb, ml-sim or verify, got `{s}`")))
    }
}

/// Pulse bandwidth, given either as a duration or directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    TDur(f64),
    We(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Option<Mode>,
    pub gamma: f64,
    pub snr_db: f64,
    pub bandwidth: Bandwidth,
    pub c: f64,
    pub lambda: f64,
    pub trials: usize,
    pub sensors_per_trial: usize,
    pub sweep: Sweep,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub grid: GridSpec,
    pub noise: NoiseSynthesis,
    pub quad_rel_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: None,
            gamma: 4.0,
            snr_db: 50.0,
            bandwidth: Bandwidth::TDur(1e-6),
            c: SPEED_OF_LIGHT,
            lambda: 0.01,
            trials: 200,
            sensors_per_trial: 1000,
            sweep: Sweep {
                param: SweepParam::SnrDb,
                start: 50.0,
                stop: 50.0,
                points: 1,
                scale: SweepScale::Linear,
            },
            master_seed: 0,
            output: None,
            grid: GridSpec::default(),
            noise: NoiseSynthesis::Markov,
            quad_rel_tol: QuadratureSpec::default().rel_tol,
        }
    }
}

impl ExperimentConfig {
    pub fn t_dur(&self) -> Result<f64> {
        match self.bandwidth {
            Bandwidth::TDur(t) => Ok(t),
            Bandwidth::We(w) => duration_for_bandwidth(w),
        }
    }

    /// Base scenario before the sweep is applied.
    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::new(self.gamma, self.snr_db, self.t_dur()?, self.c, self.lambda)
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec> {
        let d = QuadratureSpec::default();
        QuadratureSpec::new(self.quad_rel_tol, d.abs_tol, d.max_subdivisions)
    }

    pub fn ml_config(&self, scenario: Scenario) -> Result<MlSimConfig> {
        let mut cfg = MlSimConfig::new(scenario, self.sensors_per_trial, self.trials, self.master_seed)?;
        cfg.grid = self.grid;
        cfg.noise = self.noise;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One problem found while parsing, tied to a line when possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem in a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const KEYS: &[&str] = &[
    "mode",
    "gamma",
    "snr_db",
    "t_dur",
    "we",
    "c",
    "lambda",
    "trials",
    "sensors_per_trial",
    "sweep_param",
    "sweep_start",
    "sweep_stop",
    "sweep_points",
    "sweep_scale",
    "master_seed",
    "output",
    "grid_half_width",
    "grid_step",
    "grid_refine",
    "noise",
    "quad_rel_tol",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
    issues: Vec<ConfigIssue>,
}

impl Entries {
    fn issue(&mut self, line: usize, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            line: Some(line),
            message: message.into(),
        });
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.map.get(key).map(|(l, _)| *l)
    }

    /// Parses `key` if present; records a line-tagged issue on failure.
    fn get<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let (line, raw) = self.map.get(key)?.clone();
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.issue(line, format!("`{key}` must be {what}, got `{raw}`"));
                None
            }
        }
    }

    fn check(&mut self, key: &str, ok: bool, message: impl Into<String>) {
        if !ok {
            match self.line(key) {
                Some(l) => self.issue(l, message),
                None => self.issues.push(ConfigIssue {
                    line: None,
                    message: message.into(),
                }),
            }
        }
    }
}

fn parse_enum<T: FromStr<Err = Error>>(e: &mut Entries, key: &str) -> Option<T> {
    let (line, raw) = e.map.get(key)?.clone();
    match raw.parse::<T>() {
        Ok(v) => Some(v),
        Err(err) => {
            let msg = match err {
                Error::Parse(m) => m,
                other => other.to_string(),
            };
            e.issue(line, format!("`{key}`: {msg}"));
            None
        }
    }
}

/// Parses and validates a configuration, reporting every problem at once.
///
/// The format is one `key = value` per line; `#` starts a comment. Keys not
/// given take the defaults of [`ExperimentConfig::default`].
pub fn parse_config(text: &str) -> std::result::Result<ExperimentConfig, ConfigErrors> {
    let mut e = Entries {
        map: BTreeMap::new(),
        issues: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            e.issue(line, format!("expected `key = value`, got `{content}`"));
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if k == "rho" {
            e.issue(line, "`rho` is not accepted; give the SNR as `snr_db`");
            continue;
        }
        if !KEYS.contains(&k) {
            e.issue(line, format!("unknown key `{k}`"));
            continue;
        }
        if v.is_empty() {
            e.issue(line, format!("`{k}` has no value"));
            continue;
        }
        if let Some((first, _)) = e.map.get(k) {
            let first = *first;
            e.issue(line, format!("duplicate key `{k}` on lines {first} and {line}"));
            continue;
        }
        e.map.insert(k.to_string(), (line, v.to_string()));
    }

    let mut cfg = ExperimentConfig::default();
    let real = "a real number";
    let count = "a non-negative integer";
    if let Some(m) = parse_enum::<Mode>(&mut e, "mode") {
        cfg.mode = Some(m);
    }
    if let Some(v) = e.get::<f64>("gamma", real) {
        cfg.gamma = v;
        e.check(
            "gamma",
            v > 2.0 && v.is_finite(),
            format!("gamma must exceed 2 (path loss γ > 2 keeps the shot-noise sum and Γ(1−2/γ) finite), got {v}"),
        );
    }
    if let Some(v) = e.get::<f64>("snr_db", real) {
        cfg.snr_db = v;
        e.check("snr_db", v.is_finite(), "snr_db must be finite");
    }
    match (e.line("t_dur"), e.line("we")) {
        (Some(a), Some(b)) => e.issue(b.max(a), format!("give either `t_dur` or `we`, not both (lines {} and {})", a.min(b), a.max(b))),
        (Some(_), None) => {
            if let Some(v) = e.get::<f64>("t_dur", real) {
                cfg.bandwidth = Bandwidth::TDur(v);
                e.check("t_dur", v > 0.0 && v.is_finite(), format!("t_dur must be > 0 seconds, got {v}"));
            }
        }
        (None, Some(_)) => {
            if let Some(v) = e.get::<f64>("we", real) {
                cfg.bandwidth = Bandwidth::We(v);
                e.check("we", v > 0.0 && v.is_finite(), format!("we must be > 0, got {v}"));
            }
        }
        (None, None) => {}
    }
    if let Some(v) = e.get::<f64>("c", real) {
        cfg.c = v;
        e.check("c", v > 0.0 && v.is_finite(), format!("c must be > 0, got {v}"));
    }
    if let Some(v) = e.get::<f64>("lambda", real) {
        cfg.lambda = v;
        e.check("lambda", v > 0.0 && v.is_finite(), format!("lambda must be > 0, got {v}"));
    }
    if let Some(v) = e.get::<usize>("trials", count) {
        cfg.trials = v;
        e.check("trials", v >= 1, "trials must be >= 1");
    }
    if let Some(v) = e.get::<usize>("sensors_per_trial", count) {
        cfg.sensors_per_trial = v;
        e.check("sensors_per_trial", v >= 2, "sensors_per_trial must be >= 2");
    }
    if let Some(v) = e.get::<u64>("master_seed", "an unsigned 64-bit integer") {
        cfg.master_seed = v;
    }
    if let Some((_, raw)) = e.map.get("output").cloned() {
        cfg.output = Some(PathBuf::from(raw));
    }
    if let Some(v) = e.get::<f64>("grid_half_width", real) {
        cfg.grid.half_width = v;
    }
    if let Some(v) = e.get::<f64>("grid_step", real) {
        cfg.grid.step = v;
    }
    if let Some(v) = e.get::<u32>("grid_refine", count) {
        cfg.grid.refine = v;
    }
    if let Err(err) = cfg.grid.validate() {
        let key = ["grid_step", "grid_half_width", "grid_refine"]
            .into_iter()
            .find(|k| e.line(k).is_some())
            .unwrap_or("grid_step");
        e.check(key, false, err.to_string());
    }
    if let Some(n) = parse_enum::<NoiseSynthesis>(&mut e, "noise") {
        cfg.noise = n;
        e.check(
            "noise",
            n != NoiseSynthesis::Dense,
            "noise must be markov or off for simulations",
        );
    }
    if let Some(v) = e.get::<f64>("quad_rel_tol", real) {
        cfg.quad_rel_tol = v;
        e.check("quad_rel_tol", v > 0.0 && v < 1.0, format!("quad_rel_tol must lie in (0, 1), got {v}"));
    }

    // Sweep: defaults to the single base point.
    let has_sweep = ["sweep_param", "sweep_start", "sweep_stop", "sweep_points", "sweep_scale"]
        .iter()
        .any(|k| e.line(k).is_some());
    if has_sweep {
        let param = parse_enum::<SweepParam>(&mut e, "sweep_param");
        if e.line("sweep_param").is_none() {
            e.issues.push(ConfigIssue {
                line: None,
                message: "sweep keys given without `sweep_param`".into(),
            });
        }
        let start = e.get::<f64>("sweep_start", real);
        let stop = e.get::<f64>("sweep_stop", real);
        let points = e.get::<usize>("sweep_points", count);
        let scale = parse_enum::<SweepScale>(&mut e, "sweep_scale").unwrap_or_default();
        for key in ["sweep_start", "sweep_stop"] {
            if e.line(key).is_none() {
                e.issues.push(ConfigIssue {
                    line: None,
                    message: format!("`{key}` is required when sweeping"),
                });
            }
        }
        if let (Some(param), Some(start), Some(stop)) = (param, start, stop) {
            cfg.sweep = Sweep {
                param,
                start,
                stop,
                points: points.unwrap_or(1),
                scale,
            };
            if let Err(err) = cfg.sweep.validate() {
                let key = if e.line("sweep_points").is_some() && cfg.sweep.points < 1 {
                    "sweep_points"
                } else {
                    "sweep_start"
                };
                e.check(key, false, err.to_string());
            }
        }
    } else {
        cfg.sweep.start = cfg.snr_db;
        cfg.sweep.stop = cfg.snr_db;
    }

    if e.issues.is_empty() {
        // Every sweep point must describe a valid scenario.
        match cfg.scenario() {
            Err(err) => e.issues.push(ConfigIssue {
                line: None,
                message: err.to_string(),
            }),
            Ok(base) => {
                for v in cfg.sweep.values() {
                    if let Err(err) = cfg.sweep.param.apply(&base, v) {
                        let line = e.line("sweep_start").or(e.line("sweep_param"));
                        e.issues.push(ConfigIssue {
                            line,
                            message: format!("sweep value {v} for `{}`: {err}", cfg.sweep.param),
                        });
                        break;
                    }
                }
            }
        }
    }

    if e.issues.is_empty() {
        Ok(cfg)
    } else {
        e.issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
        Err(ConfigErrors(e.issues))
    }
}
