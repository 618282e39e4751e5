//! Exact synthesis of the correlator noise over candidate delays.
//!
//! The noise at delay `τ` is `n(τ) = ∫ s(t−τ) dv(t)` with `v` white of
//! intensity `N₀/2`, so its covariance is `(N₀/2)·C(τ−τ')`. For the
//! raised-cosine pulse on `[τ, τ+T]`,
//!
//! ```text
//! n(τ) = A·[ΔW₀ − cos ωτ·ΔW_c − sin ωτ·ΔW_s],   ΔW = W(τ+T) − W(τ),
//! ```
//!
//! where `W = ∫ (1, cos ωt, sin ωt) dv` is a three-dimensional process with
//! independent Gaussian increments. [`DelayNoise`] samples `W` only at the
//! knots `τ` and `τ+T` that are asked for: knots beyond the current range
//! are appended with a fresh increment, knots between two existing ones are
//! drawn from the Gaussian bridge. The result has exactly the target law
//! without discretising time or factoring a dense candidate covariance.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::model::{pulse_autocorr, Pulse};
use crate::numerics::{cholesky_jittered, DenseMatrix, Sym3, PIVOT_FLOOR};
use crate::rng::{self, StreamRng};

/// Eigen-directions of a bridge covariance below this share of the largest
/// one carry no usable information and are dropped.
const BRIDGE_CUTOFF: f64 = 1e-13;

/// `y − sin y`, accurate for small `y`.
fn y_minus_sin(y: f64) -> f64 {
    if y >= 1.0 {
        return y - y.sin();
    }
    let y2 = y * y;
    let mut term = y * y2 / 6.0;
    let mut sum = 0.0f64;
    let mut k = 1.0;
    while term.abs() > 1e-18 * sum.abs() || sum == 0.0 {
        sum += term;
        term *= -y2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
        k += 1.0;
        if term == 0.0 {
            break;
        }
    }
    sum
}

/// `x + sin(2x)/2 − 2 sin²x / x`, the residual variance of `∫cos` given `∫1`
/// over a symmetric window of half-width `x/ω` (times `ω`).
fn cos_residual(x: f64) -> f64 {
    if x >= 1.0 {
        let s = x.sin();
        return x + (2.0 * x).sin() / 2.0 - 2.0 * s * s / x;
    }
    // Σ_{j≥2} (−1)^j (j−1) (2x)^{2j+1} / (2j+2)!
    let y = 2.0 * x;
    let y2 = y * y;
    let mut pow = y.powi(5) / 720.0; // y^5 / 6!
    let mut sum = 0.0f64;
    let mut j = 2.0;
    loop {
        let term = (j - 1.0) * pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        pow *= -y2 / ((2.0 * j + 3.0) * (2.0 * j + 4.0));
        j += 1.0;
    }
    sum
}

/// Law of `W(t₂) − W(t₁)`.
///
/// Around the window midpoint `t_m` the integrals of `(1, cos ωu, sin ωu)`
/// split into an even pair and an odd singleton, which gives a closed-form
/// triangular factor; a rotation by `ωt_m` maps back to absolute phase.
#[derive(Debug, Clone, Copy)]
struct IncrementLaw {
    cos_m: f64,
    sin_m: f64,
    var0: f64,
    cross: f64,
    resid: f64,
    var_s: f64,
}

impl IncrementLaw {
    fn new(t1: f64, t2: f64, omega: f64, half_n0: f64) -> Self {
        let h = 0.5 * (t2 - t1);
        let x = omega * h;
        let (sin_m, cos_m) = (omega * 0.5 * (t1 + t2)).sin_cos();
        Self {
            cos_m,
            sin_m,
            var0: half_n0 * 2.0 * h,
            cross: half_n0 * 2.0 * x.sin() / omega,
            resid: half_n0 * cos_residual(x) / omega,
            var_s: half_n0 * y_minus_sin(2.0 * x) / (2.0 * omega),
        }
    }

    fn rotate(&self, j: [f64; 3]) -> [f64; 3] {
        [
            j[0],
            self.cos_m * j[1] - self.sin_m * j[2],
            self.sin_m * j[1] + self.cos_m * j[2],
        ]
    }

    fn sample(&self, rng: &mut StreamRng) -> [f64; 3] {
        let z: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        if self.var0 <= 0.0 {
            return [0.0; 3];
        }
        let j0 = self.var0.sqrt() * z[0];
        let jc = self.cross / self.var0 * j0 + self.resid.max(0.0).sqrt() * z[1];
        let js = self.var_s.max(0.0).sqrt() * z[2];
        self.rotate([j0, jc, js])
    }

    fn cov(&self) -> Sym3 {
        let cc = if self.var0 > 0.0 {
            self.resid + self.cross * self.cross / self.var0
        } else {
            0.0
        };
        let local = [[self.var0, self.cross, 0.0], [self.cross, cc, 0.0], [0.0, 0.0, self.var_s]];
        let r = [
            [1.0, 0.0, 0.0],
            [0.0, self.cos_m, -self.sin_m],
            [0.0, self.sin_m, self.cos_m],
        ];
        let mut a = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        s += r[i][k] * local[k][l] * r[j][l];
                    }
                }
                a[i][j] = s;
            }
        }
        Sym3 { a }
    }
}

fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Lazily sampled correlator noise of one sensor.
#[derive(Debug, Clone)]
pub struct DelayNoise {
    amp: f64,
    omega: f64,
    t_dur: f64,
    half_n0: f64,
    times: Vec<f64>,
    values: Vec<[f64; 3]>,
    rng: StreamRng,
}

impl DelayNoise {
    pub fn new(pulse: &Pulse, seed: u64) -> Self {
        Self {
            amp: pulse.amplitude_sq().sqrt(),
            omega: pulse.omega(),
            t_dur: pulse.t_dur,
            half_n0: 0.5 * pulse.n0,
            times: Vec::new(),
            values: Vec::new(),
            rng: rng::stream(seed),
        }
    }

    /// Number of knots currently held.
    pub fn knots(&self) -> usize {
        self.times.len()
    }

    fn law(&self, t1: f64, t2: f64) -> IncrementLaw {
        IncrementLaw::new(t1, t2, self.omega, self.half_n0)
    }

    fn insert(&mut self, t: f64) {
        let i = match self.times.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(_) => return,
            Err(i) => i,
        };
        let w = if self.times.is_empty() {
            [0.0; 3]
        } else if i == self.times.len() {
            let last = self.times.len() - 1;
            let inc = self.law(self.times[last], t).sample(&mut self.rng);
            add3(self.values[last], inc)
        } else if i == 0 {
            let inc = self.law(t, self.times[0]).sample(&mut self.rng);
            sub3(self.values[0], inc)
        } else {
            let (tl, tr) = (self.times[i - 1], self.times[i]);
            let left = self.law(tl, t);
            let right = self.law(t, tr);
            let z1 = left.sample(&mut self.rng);
            let z2 = right.sample(&mut self.rng);
            let m1 = left.cov();
            let total = m1.add(&right.cov());
            let resid = sub3(sub3(self.values[i] , self.values[i - 1]), add3(z1, z2));
            let corr = m1.mul_vec(&total.pinv_mul(&resid, BRIDGE_CUTOFF));
            add3(self.values[i - 1], add3(z1, corr))
        };
        self.times.insert(i, t);
        self.values.insert(i, w);
    }

    fn at(&self, t: f64) -> [f64; 3] {
        let i = self
            .times
            .binary_search_by(|p| p.total_cmp(&t))
            .expect("knot inserted before lookup");
        self.values[i]
    }

    /// Noise at each delay in `taus`, consistent with every earlier call.
    pub fn values(&mut self, taus: &[f64]) -> Vec<f64> {
        let mut knots: Vec<f64> = taus.iter().flat_map(|&t| [t, t + self.t_dur]).collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        for t in knots {
            self.insert(t);
        }
        taus.iter()
            .map(|&t| {
                let d = sub3(self.at(t + self.t_dur), self.at(t));
                let (s, c) = (self.omega * t).sin_cos();
                self.amp * (d[0] - c * d[1] - s * d[2])
            })
            .collect()
    }

    /// Drops knots that later queries inside `windows` can no longer need:
    /// everything except the knots inside each window and their immediate
    /// neighbours. Queries confined to the windows give the same values with
    /// or without pruning.
    pub fn retain_windows(&mut self, windows: &[(f64, f64)]) {
        let n = self.times.len();
        let mut keep = vec![false; n];
        for &(lo, hi) in windows {
            let a = self.times.partition_point(|&t| t < lo).saturating_sub(1);
            let b = (self.times.partition_point(|&t| t <= hi) + 1).min(n);
            for k in keep.iter_mut().take(b).skip(a) {
                *k = true;
            }
        }
        let mut i = 0;
        self.times.retain(|_| {
            i += 1;
            keep[i - 1]
        });
        let mut i = 0;
        self.values.retain(|_| {
            i += 1;
            keep[i - 1]
        });
    }
}

/// Noise over `taus` drawn from a Cholesky factor of the dense covariance
/// `(N₀/2)·C(τ_i − τ_j)`. Identical delays share one draw.
pub fn dense_noise(taus: &[f64], pulse: &Pulse, seed: u64) -> Result<Vec<f64>> {
    let mut unique: Vec<f64> = taus.to_vec();
    unique.sort_by(f64::total_cmp);
    unique.dedup();
    let half_n0 = 0.5 * pulse.n0;
    let cov = DenseMatrix::from_fn(unique.len(), |i, j| half_n0 * pulse_autocorr(unique[i] - unique[j], pulse));
    let l = cholesky_jittered(&cov, PIVOT_FLOOR)?;
    let mut rng = rng::stream(seed);
    let z: Vec<f64> = (0..unique.len()).map(|_| rng.sample(StandardNormal)).collect();
    let y = l.lower_mul_vec(&z);
    Ok(taus
        .iter()
        .map(|t| y[unique.binary_search_by(|p| p.total_cmp(t)).expect("delay present")])
        .collect())
}
