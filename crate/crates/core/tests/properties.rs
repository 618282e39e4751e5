//! Property-based invariants across the public API.

use std::f64::consts::PI;

use proptest::prelude::*;

use locbound::bounds::{crb_lb, narrowband_bound, wideband_bound};
use locbound::crb::{crb_realization, crb_trace_inverse};
use locbound::geometry::{fmt17, polar_of_points, sample_ppp, SensorField, SourceLocation};
use locbound::mlsim::{ml_search, GridSpec, NoiseSynthesis};
use locbound::model::{g_kernel, pulse_autocorr, ChannelParams, KernelMode, Pulse, SPEED_OF_LIGHT};
use locbound::numerics::QuadratureSpec;
use locbound::sweep::{Sweep, SweepParam, SweepScale};

fn channel(gamma: f64, we: f64, rho: f64) -> ChannelParams {
    ChannelParams::new(gamma, SPEED_OF_LIGHT, we, rho).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn sensors() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 3..30)
        .prop_filter("no sensor at the source", |v| v.iter().all(|&(x, y)| x.hypot(y) > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_strictly_decreasing(gamma in 2.05..8.0f64, we in 0.0..1e18f64, d in 0.01..1e3f64, k in 1.0001..10.0f64) {
        let ch = channel(gamma, we, 1.0);
        prop_assert!(g_kernel(d * k, &ch).unwrap() < g_kernel(d, &ch).unwrap());
    }

    #[test]
    fn autocorrelation_symmetric_and_peaked(t_dur in 1e-8..1e-5f64, frac in -1.5..1.5f64) {
        let p = Pulse::for_snr(t_dur, 1e4).unwrap();
        let d = frac * t_dur;
        prop_assert_eq!(pulse_autocorr(d, &p), pulse_autocorr(-d, &p));
        if d != 0.0 {
            prop_assert!(pulse_autocorr(d, &p) < pulse_autocorr(0.0, &p));
        }
    }

    #[test]
    fn crb_pairwise_matches_inverse(pts in sensors(), gamma in 2.1..6.0f64, we in 0.0..1e16f64) {
        let ch = channel(gamma, we, 1e5);
        let polars = polar_of_points(&pts, &SourceLocation::default()).unwrap();
        if let (Ok(a), Ok(b)) = (crb_realization(&polars, &ch), crb_trace_inverse(&polars, &ch)) {
            prop_assert!(rel(a, b) < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn crb_scales_inversely_with_snr(pts in sensors(), k in 0.1..100.0f64) {
        let ch = channel(4.0, 1e13, 1e5);
        let polars = polar_of_points(&pts, &SourceLocation::default()).unwrap();
        if let Ok(a) = crb_realization(&polars, &ch) {
            let b = crb_realization(&polars, &ch.with_rho(1e5 * k).unwrap()).unwrap();
            prop_assert!(rel(a / k, b) < 1e-12);
        }
    }

    #[test]
    fn extra_sensor_never_hurts(pts in sensors(), extra in (-50.0..50.0f64, -50.0..50.0f64)) {
        prop_assume!(extra.0.hypot(extra.1) > 1e-3);
        let ch = channel(3.5, 1e14, 1e5);
        let src = SourceLocation::default();
        let base = crb_realization(&polar_of_points(&pts, &src).unwrap(), &ch);
        let mut more = pts.clone();
        more.push(extra);
        let plus = crb_realization(&polar_of_points(&more, &src).unwrap(), &ch);
        if let (Ok(a), Ok(b)) = (base, plus) {
            prop_assert!(b <= a * (1.0 + 1e-12), "{b} > {a}");
        }
    }

    #[test]
    fn crb_invariant_under_rigid_motion(pts in sensors(), angle in -PI..PI, shift in (-1e3..1e3f64, -1e3..1e3f64)) {
        let ch = channel(4.0, 1e13, 1e5);
        let (s, c) = angle.sin_cos();
        let moved: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (c * x - s * y + shift.0, s * x + c * y + shift.1)).collect();
        let a = crb_realization(&polar_of_points(&pts, &SourceLocation::default()).unwrap(), &ch);
        let b = crb_realization(&polar_of_points(&moved, &SourceLocation::new(shift.0, shift.1).unwrap()).unwrap(), &ch);
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!(rel(a, b) < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn closed_forms_follow_power_laws(gamma in 2.1..8.0f64, lambda in 1e-4..1.0f64, k in 1.5..100.0f64) {
        let ch = channel(gamma, 1e13, 1e5);
        let w = wideband_bound(lambda * k, &ch).unwrap() / wideband_bound(lambda, &ch).unwrap();
        let n = narrowband_bound(lambda * k, &ch).unwrap() / narrowband_bound(lambda, &ch).unwrap();
        prop_assert!(rel(w, k.powf(-gamma / 2.0)) < 1e-12);
        prop_assert!(rel(n, k.powf(-gamma / 2.0 - 1.0)) < 1e-12);
    }

    #[test]
    fn sweep_endpoints_exact_and_ordered(start in 1e-3..10.0f64, span in 1.01..100.0f64, points in 2usize..40, log in any::<bool>()) {
        let sw = Sweep {
            param: SweepParam::Lambda,
            start,
            stop: start * span,
            points,
            scale: if log { SweepScale::Log } else { SweepScale::Linear },
        };
        let v = sw.values();
        prop_assert_eq!(v.len(), points);
        prop_assert_eq!(v[0], start);
        prop_assert_eq!(v[points - 1], start * span);
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn reals_roundtrip_through_text(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bound_decreases_with_density_and_snr(gamma in 2.5..6.0f64, lambda in 1e-3..1e-1f64) {
        let spec = QuadratureSpec::default();
        let ch = channel(gamma, 1e13, 1e5);
        let a = crb_lb(lambda, &ch, KernelMode::Full, &spec).unwrap().value;
        let b = crb_lb(lambda * 1.5, &ch, KernelMode::Full, &spec).unwrap().value;
        prop_assert!(b < a);
        let c = crb_lb(lambda, &ch.with_rho(2e5).unwrap(), KernelMode::Full, &spec).unwrap().value;
        prop_assert!(rel(c, a / 2.0) < 1e-7);
    }

    #[test]
    fn field_text_roundtrip(seed in any::<u64>(), cx in -100.0..100.0f64, cy in -100.0..100.0f64) {
        let f = sample_ppp(0.05, 20.0, SourceLocation::new(cx, cy).unwrap(), seed).unwrap();
        prop_assert_eq!(SensorField::from_text(&f.to_text()).unwrap(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    // Dyadic shifts keep every relative coordinate bit-exact, so the search
    // sees the same problem and must return the same displacement.
    #[test]
    fn ml_estimate_translation_equivariant(seed in any::<u64>(), sx in -64i32..64, sy in -64i32..64) {
        let pulse = Pulse::for_snr(1e-6, 1e5).unwrap();
        let ch = ChannelParams::from_pulse(4.0, SPEED_OF_LIGHT, &pulse).unwrap();
        let shift = (sx as f64 * 0.25, sy as f64 * 0.25);
        let origin = SourceLocation::default();
        let field = sample_ppp(0.01, 40.0, origin, seed).unwrap();
        let pts: Vec<(f64, f64)> = field.points.iter().map(|&(x, y)| ((x * 1024.0).round() / 1024.0, (y * 1024.0).round() / 1024.0)).collect();
        prop_assume!(pts.iter().all(|&(x, y)| x != 0.0 || y != 0.0));
        let f0 = SensorField::from_points(pts.clone(), 0.01, 41.0, origin, seed).unwrap();
        let src1 = SourceLocation::new(shift.0, shift.1).unwrap();
        let moved = pts.iter().map(|&(x, y)| (x + shift.0, y + shift.1)).collect();
        let f1 = SensorField::from_points(moved, 0.01, 41.0, src1, seed).unwrap();
        let g = GridSpec { half_width: 8.0, step: 1.0, refine: 3 };
        let a = ml_search(&f0, &origin, &pulse, &ch, &g, seed ^ 1, NoiseSynthesis::Markov).unwrap();
        let b = ml_search(&f1, &src1, &pulse, &ch, &g, seed ^ 1, NoiseSynthesis::Markov).unwrap();
        prop_assert_eq!(b.estimate.x - shift.0, a.estimate.x);
        prop_assert_eq!(b.estimate.y - shift.1, a.estimate.y);
        prop_assert_eq!(a.log_likelihood, b.log_likelihood);
    }
}

/// 0.999 quantile of χ² with 20 degrees of freedom.
const CHI2_20_999: f64 = 45.315;

#[test]
fn poisson_counts_have_poisson_dispersion() {
    let (lambda, radius) = (0.01, 178.41241161527712);
    let mean = lambda * PI * radius * radius;
    let stat: f64 = (0..20u64)
        .map(|s| {
            let n = sample_ppp(lambda, radius, SourceLocation::default(), 1000 + s).unwrap().len() as f64;
            (n - mean).powi(2) / mean
        })
        .sum();
    assert!(stat < CHI2_20_999, "dispersion statistic {stat}");
}

#[test]
fn points_uniform_over_equal_area_rings() {
    let radius = 100.0;
    let f = sample_ppp(0.05, radius, SourceLocation::new(3.0, -7.0).unwrap(), 77).unwrap();
    let cells = 21;
    let mut counts = vec![0.0; cells];
    let mut r2_sum = 0.0;
    for &(x, y) in &f.points {
        let r2 = (x - 3.0).powi(2) + (y + 7.0).powi(2);
        r2_sum += r2;
        let k = ((r2 / (radius * radius)) * cells as f64).floor() as usize;
        counts[k.min(cells - 1)] += 1.0;
    }
    let n = f.len() as f64;
    let expect = n / cells as f64;
    let stat: f64 = counts.iter().map(|c| (c - expect).powi(2) / expect).sum();
    assert!(stat < CHI2_20_999, "ring statistic {stat}");
    // E[r²] = R²/2 with Var[r²] = R⁴/12
    let se = radius * radius / (12.0 * n).sqrt();
    assert!((r2_sum / n - radius * radius / 2.0).abs() < 4.0 * se);
}
