//! Executes a configuration and writes the CSV and metadata files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Mode};
use crate::bounds::{crb_lb, narrowband_bound, oracle_suite, wideband_bound, OracleCheck};
use crate::crb::avg_crb;
use crate::error::{Error, Result};
use crate::geometry::fmt17;
use crate::mlsim::mse_point;
use crate::model::KernelMode;
use crate::rng::RNG_ALGORITHM;
use crate::sweep::{Scenario, SweepScale};

pub const CSV_HEADER: &str = "sweep_value,crb_lb,crb_lb_w,crb_lb_n,avg_crb_mean,avg_crb_stderr,avg_crb_median,mse,mse_stderr,excluded_trials";
pub const VERIFY_HEADER: &str = "check,value,reference,metric,tolerance,status";

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// One CSV row; `None` cells are written empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Row {
    pub sweep_value: f64,
    pub crb_lb: Option<f64>,
    pub crb_lb_w: Option<f64>,
    pub crb_lb_n: Option<f64>,
    pub avg_crb_mean: Option<f64>,
    pub avg_crb_stderr: Option<f64>,
    pub avg_crb_median: Option<f64>,
    pub mse: Option<f64>,
    pub mse_stderr: Option<f64>,
    pub excluded_trials: Option<usize>,
    /// Messages of the computations that failed at this point.
    #[serde(skip)]
    pub failures: Vec<String>,
}

impl Row {
    pub fn to_csv(&self) -> String {
        let f = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            fmt17(self.sweep_value),
            f(self.crb_lb),
            f(self.crb_lb_w),
            f(self.crb_lb_n),
            f(self.avg_crb_mean),
            f(self.avg_crb_stderr),
            f(self.avg_crb_median),
            f(self.mse),
            f(self.mse_stderr),
            self.excluded_trials.map(|v| v.to_string()).unwrap_or_default()
        )
    }
}

fn record<T>(row: &mut Row, what: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            row.failures.push(format!("{what}: {e}"));
            None
        }
    }
}

/// Computes one sweep point for `mode`.
pub fn compute_row(cfg: &ExperimentConfig, mode: Mode, base: &Scenario, value: f64) -> Row {
    let mut row = Row {
        sweep_value: value,
        ..Row::default()
    };
    let Some(s) = record(&mut row, "scenario", cfg.sweep.param.apply(base, value)) else {
        return row;
    };
    let Some(spec) = record(&mut row, "quadrature", cfg.quadrature()) else {
        return row;
    };
    row.crb_lb = record(&mut row, "crb_lb", crb_lb(s.lambda, &s.ch, KernelMode::Full, &spec).map(|b| b.value));
    row.crb_lb_w = record(&mut row, "crb_lb_w", wideband_bound(s.lambda, &s.ch));
    row.crb_lb_n = record(&mut row, "crb_lb_n", narrowband_bound(s.lambda, &s.ch));
    match mode {
        Mode::Bounds | Mode::Verify => {}
        Mode::AvgCrb => {
            if let Some(a) = record(
                &mut row,
                "avg_crb",
                avg_crb(s.lambda, &s.ch, cfg.trials, cfg.sensors_per_trial, cfg.master_seed),
            ) {
                row.avg_crb_mean = Some(a.mean);
                row.avg_crb_stderr = Some(a.std_err);
                row.avg_crb_median = Some(a.median);
                row.excluded_trials = Some(a.excluded);
            }
        }
        Mode::MlSim => {
            if let Some(p) = record(&mut row, "ml-sim", cfg.ml_config(s).and_then(|c| mse_point(&c))) {
                row.avg_crb_mean = Some(p.avg_crb);
                row.avg_crb_stderr = Some(p.avg_crb_std_err);
                row.avg_crb_median = Some(p.avg_crb_median);
                row.mse = Some(p.mse);
                row.mse_stderr = Some(p.mse_std_err);
                row.excluded_trials = Some(p.excluded);
            }
        }
    }
    row
}

/// Rows for every sweep point. Points run in parallel when the current
/// rayon pool has more than one thread; the output order is the sweep order.
pub fn compute_rows(cfg: &ExperimentConfig, mode: Mode) -> Result<Vec<Row>> {
    let base = cfg.scenario()?;
    let values = cfg.sweep.values();
    Ok(if rayon::current_num_threads() > 1 {
        values.par_iter().map(|&v| compute_row(cfg, mode, &base, v)).collect()
    } else {
        values.iter().map(|&v| compute_row(cfg, mode, &base, v)).collect()
    })
}

pub fn rows_to_csv(rows: &[Row]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

pub fn verify_to_csv(checks: &[OracleCheck]) -> String {
    let mut s = String::from(VERIFY_HEADER);
    s.push('\n');
    for c in checks {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            c.name,
            fmt17(c.value),
            fmt17(c.reference),
            fmt17(c.metric),
            fmt17(c.tolerance),
            status(c)
        );
    }
    s
}

fn status(c: &OracleCheck) -> &'static str {
    match (c.passed, c.informational) {
        (true, _) => "pass",
        (false, true) => "info-fail",
        (false, false) => "FAIL",
    }
}

/// Human-readable pass/fail table.
pub fn verify_table(checks: &[OracleCheck]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<36} {:>24} {:>24} {:>12}  status", "check", "value", "reference", "metric");
    for c in checks {
        let _ = writeln!(
            s,
            "{:<36} {:>24.16e} {:>24.16e} {:>12.3e}  {}",
            c.name,
            c.value,
            c.reference,
            c.metric,
            status(c)
        );
    }
    s
}

/// Least-squares slope of `log10(column)` against the sweep value, or against
/// `log10(value)` for log-scaled sweeps. Informational; never gated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasuredSlope {
    pub column: &'static str,
    pub axis: &'static str,
    pub slope: f64,
    pub points: usize,
}

pub fn measured_slopes(rows: &[Row], scale: SweepScale) -> Vec<MeasuredSlope> {
    type Column = (&'static str, fn(&Row) -> Option<f64>);
    let columns: [Column; 3] = [
        ("crb_lb", |r| r.crb_lb),
        ("avg_crb_mean", |r| r.avg_crb_mean),
        ("mse", |r| r.mse),
    ];
    let (axis, x_of): (&'static str, fn(f64) -> f64) = match scale {
        SweepScale::Log => ("log10(sweep_value)", f64::log10),
        SweepScale::Linear => ("sweep_value", |v| v),
    };
    let mut out = Vec::new();
    for (column, get) in columns {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| get(r).filter(|v| *v > 0.0).map(|v| (x_of(r.sweep_value), v.log10())))
            .collect();
        if pts.len() < 2 {
            continue;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx == 0.0 {
            continue;
        }
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        out.push(MeasuredSlope {
            column,
            axis,
            slope: sxy / sxx,
            points: pts.len(),
        });
    }
    out
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    mode: Mode,
    rng_algorithm: &'static str,
    config: &'a ExperimentConfig,
    workers: usize,
    points: usize,
    failed_points: usize,
    failures: Vec<String>,
    measured_slopes: Vec<MeasuredSlope>,
    wall_time_seconds: f64,
}

/// What a run produced.
#[derive(Debug)]
pub struct RunReport {
    pub exit_code: i32,
    pub csv_path: PathBuf,
    pub metadata_path: PathBuf,
    /// Text meant for standard output.
    pub stdout: String,
    /// Problems meant for standard error.
    pub stderr: String,
}

/// Sidecar path: `<csv>.meta.json`.
pub fn metadata_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Errors that end a run before any numeric work.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

/// Runs `mode` on `cfg` and writes the CSV and its metadata sidecar.
pub fn run(mut cfg: ExperimentConfig, mode: Mode, opts: &RunOptions) -> std::result::Result<RunReport, RunError> {
    if let Some(s) = opts.seed {
        cfg.master_seed = s;
    }
    cfg.mode = Some(mode);
    if let Some(o) = &opts.out {
        cfg.output = Some(o.clone());
    }
    let csv_path = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", mode.name())));
    let workers = opts.workers.unwrap_or(1);
    if workers == 0 {
        return Err(RunError::Config("--workers must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Config(format!("cannot start {workers} workers: {e}")))?;

    let started = Instant::now();
    let mut stdout = String::new();
    let mut failures = Vec::new();
    let mut slopes = Vec::new();
    let (csv, points, failed_points, checks_failed) = match mode {
        Mode::Verify => {
            let s = cfg.scenario().map_err(|e| RunError::Config(e.to_string()))?;
            let spec = cfg.quadrature().map_err(|e| RunError::Config(e.to_string()))?;
            match pool.install(|| oracle_suite(s.lambda, &s.ch, &spec)) {
                Ok(checks) => {
                    stdout.push_str(&verify_table(&checks));
                    let failed = checks.iter().filter(|c| !c.passed && !c.informational).count();
                    (verify_to_csv(&checks), checks.len(), 0, failed)
                }
                Err(e) => {
                    failures.push(e.to_string());
                    (String::from(VERIFY_HEADER) + "\n", 0, 1, 0)
                }
            }
        }
        _ => {
            let rows = pool
                .install(|| compute_rows(&cfg, mode))
                .map_err(|e| RunError::Config(e.to_string()))?;
            let failed = rows.iter().filter(|r| !r.failures.is_empty()).count();
            for r in &rows {
                for f in &r.failures {
                    failures.push(format!("{}={}: {f}", cfg.sweep.param, fmt17(r.sweep_value)));
                }
            }
            slopes = measured_slopes(&rows, cfg.sweep.scale);
            (rows_to_csv(&rows), rows.len(), failed, 0)
        }
    };
    let wall = started.elapsed().as_secs_f64();

    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(&csv_path, csv).map_err(|e| RunError::Io(format!("{}: {e}", csv_path.display())))?;
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        mode,
        rng_algorithm: RNG_ALGORITHM,
        config: &cfg,
        workers,
        points,
        failed_points,
        failures: failures.clone(),
        measured_slopes: slopes,
        wall_time_seconds: wall,
    };
    let metadata_path = metadata_path(&csv_path);
    let json = serde_json::to_string_pretty(&meta).map_err(|e| RunError::Io(e.to_string()))?;
    fs::write(&metadata_path, json + "\n").map_err(|e| RunError::Io(format!("{}: {e}", metadata_path.display())))?;

    let exit_code = if failed_points > 0 || checks_failed > 0 {
        EXIT_NUMERIC
    } else {
        EXIT_OK
    };
    Ok(RunReport {
        exit_code,
        csv_path,
        metadata_path,
        stdout,
        stderr: failures.join("\n"),
    })
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> std::result::Result<ExperimentConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    super::config::parse_config(&text).map_err(|e| RunError::Config(format!("{}\n{e}", path.display())))
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        Self::Config(e.to_string())
    }
}
