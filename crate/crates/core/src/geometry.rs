//! Truncated Poisson sensor fields and source-relative polar coordinates.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ChannelParams;
use crate::rng;

/// Largest expected point count `sample_ppp` accepts.
pub const MAX_EXPECTED_POINTS: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct SourceLocation {
    pub x: f64,
    pub y: f64,
}

impl SourceLocation {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "source coordinates must be finite, got ({x}, {y})"
            )));
        }
        Ok(Self { x, y })
    }

    pub fn dist_sq(&self, other: &SourceLocation) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Distance and bearing of a sensor as seen from the source.
///
/// The bearing follows `cos φ = (x − a)/d`, `sin φ = (y − b)/d`, i.e. it points
/// from the sensor towards the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar {
    pub d: f64,
    pub phi: f64,
}

impl Polar {
    pub fn new(d: f64, phi: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite() && phi.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid polar ({d}, {phi})")));
        }
        Ok(Self {
            d,
            phi: wrap_angle(phi),
        })
    }
}

/// Maps an angle into `(−π, π]`.
pub fn wrap_angle(phi: f64) -> f64 {
    let mut a = phi.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// A finite realisation of a homogeneous Poisson field, truncated to a disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorField {
    pub points: Vec<(f64, f64)>,
    /// Sensors per square metre.
    pub lambda: f64,
    /// Radius of the sampling disc.
    pub radius: f64,
    pub center: SourceLocation,
    pub seed: u64,
}

impl SensorField {
    /// Builds a field from explicit points, checking that each lies in the disc.
    pub fn from_points(
        points: Vec<(f64, f64)>,
        lambda: f64,
        radius: f64,
        center: SourceLocation,
        seed: u64,
    ) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be > 0, got {radius}")));
        }
        let r2 = radius * radius;
        for (i, &(a, b)) in points.iter().enumerate() {
            let p = SourceLocation { x: a, y: b };
            if !(a.is_finite() && b.is_finite()) || p.dist_sq(&center) > r2 * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "point {i} ({a}, {b}) lies outside the sampling disc"
                )));
            }
        }
        Ok(Self {
            points,
            lambda,
            radius,
            center,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Text form: header `lambda radius seed` (followed by `cx cy` when the
    /// disc is not centred at the origin), then one `a b` line per sensor.
    /// Reals carry 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(48 * (self.points.len() + 1));
        let _ = write!(out, "{} {} {}", fmt17(self.lambda), fmt17(self.radius), self.seed);
        if self.center.x != 0.0 || self.center.y != 0.0 {
            let _ = write!(out, " {} {}", fmt17(self.center.x), fmt17(self.center.y));
        }
        out.push('\n');
        for &(a, b) in &self.points {
            let _ = writeln!(out, "{} {}", fmt17(a), fmt17(b));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty sensor field".into()))?;
        let tok: Vec<&str> = header.split_whitespace().collect();
        if tok.len() != 3 && tok.len() != 5 {
            return Err(Error::Parse(format!(
                "line 1: expected `lambda radius seed [cx cy]`, got {} fields",
                tok.len()
            )));
        }
        let real = |s: &str, line: usize| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {line}: bad number `{s}`: {e}")))
        };
        let lambda = real(tok[0], 1)?;
        let radius = real(tok[1], 1)?;
        let seed = tok[2]
            .parse::<u64>()
            .map_err(|e| Error::Parse(format!("line 1: bad seed `{}`: {e}", tok[2])))?;
        let center = if tok.len() == 5 {
            SourceLocation::new(real(tok[3], 1)?, real(tok[4], 1)?)?
        } else {
            SourceLocation::default()
        };
        let mut points = Vec::new();
        for (i, line) in lines {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected `a b`", i + 1)));
            }
            points.push((real(t[0], i + 1)?, real(t[1], i + 1)?));
        }
        Self::from_points(points, lambda, radius, center, seed)
    }
}

/// Formats a real with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Disc radius holding `expected_count` sensors on average at density `lambda`.
pub fn radius_for_count(lambda: f64, expected_count: f64) -> f64 {
    (expected_count / (PI * lambda)).sqrt()
}

/// Samples a Poisson field of density `lambda` on the disc of `radius` around
/// `center`. The count is Poisson(λπR²); points are i.i.d. uniform on the disc.
pub fn sample_ppp(lambda: f64, radius: f64, center: SourceLocation, seed: u64) -> Result<SensorField> {
    let mut rng = rng::stream(seed);
    sample_ppp_with(lambda, radius, center, seed, &mut rng)
}

pub(crate) fn sample_ppp_with<R: Rng + ?Sized>(
    lambda: f64,
    radius: f64,
    center: SourceLocation,
    seed: u64,
    rng: &mut R,
) -> Result<SensorField> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be > 0, got {radius}")));
    }
    let mean = lambda * PI * radius * radius;
    if mean > MAX_EXPECTED_POINTS {
        return Err(Error::ResourceLimit(format!(
            "expected sensor count {mean:e} exceeds {MAX_EXPECTED_POINTS:e}"
        )));
    }
    let count = if mean > 0.0 {
        let poisson = Poisson::new(mean)
            .map_err(|e| Error::InvalidParameter(format!("poisson mean {mean}: {e}")))?;
        poisson.sample(rng) as usize
    } else {
        0
    };
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let r = radius * rng.random::<f64>().sqrt();
        let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
        points.push((center.x + r * c, center.y + r * s));
    }
    Ok(SensorField {
        points,
        lambda,
        radius,
        center,
        seed,
    })
}

/// Distance and bearing of every sensor relative to `src`.
pub fn polar_of(field: &SensorField, src: &SourceLocation) -> Result<Vec<Polar>> {
    polar_of_points(&field.points, src)
}

pub fn polar_of_points(points: &[(f64, f64)], src: &SourceLocation) -> Result<Vec<Polar>> {
    points
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let dx = src.x - a;
            let dy = src.y - b;
            let d = dx.hypot(dy);
            if d == 0.0 {
                return Err(Error::DegenerateGeometry { index: i });
            }
            let mut phi = dy.atan2(dx);
            if phi <= -PI {
                phi = PI;
            }
            Ok(Polar { d, phi })
        })
        .collect()
}

/// Expected mass `E[Σ_{D>R} D^{-γ}] = 2πλ R^{2−γ} / (γ − 2)` that the disc
/// truncation drops from the shot-noise sum.
pub fn truncation_tail(field: &SensorField, ch: &ChannelParams) -> f64 {
    truncation_tail_for(field.lambda, field.radius, ch.gamma)
}

pub fn truncation_tail_for(lambda: f64, radius: f64, gamma: f64) -> f64 {
    2.0 * PI * lambda * radius.powf(2.0 - gamma) / (gamma - 2.0)
}
