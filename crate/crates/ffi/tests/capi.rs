use std::ffi::{c_char, CStr};
use std::ptr;

use locbound_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe { lb_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn channel(gamma: f64) -> *mut LbChannel {
    let mut ch = ptr::null_mut();
    assert_eq!(unsafe { lb_channel_for_pulse(gamma, 3e8, 1e-6, 50.0, &mut ch) }, LbStatus::Ok);
    ch
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(lb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn channel_roundtrip_and_errors() {
    let ch = channel(4.0);
    let (mut g, mut rho) = (0.0, 0.0);
    assert_eq!(
        unsafe { lb_channel_params(ch, &mut g, ptr::null_mut(), ptr::null_mut(), &mut rho) },
        LbStatus::Ok
    );
    assert_eq!(g, 4.0);
    assert!((rho - 1e5).abs() < 1e-6);
    unsafe { lb_channel_free(ch) };

    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { lb_channel_new(2.0, 3e8, 1.0, 1.0, &mut bad) }, LbStatus::InvalidParameter);
    assert!(bad.is_null());
    assert!(last_error().contains("gamma"), "{}", last_error());
    assert_eq!(unsafe { lb_channel_new(4.0, 3e8, 1.0, 1.0, ptr::null_mut()) }, LbStatus::NullPointer);
    unsafe { lb_channel_free(ptr::null_mut()) };
}

#[test]
fn error_message_truncates_and_clears() {
    let mut bad = ptr::null_mut();
    unsafe { lb_channel_new(f64::NAN, 3e8, 1.0, 1.0, &mut bad) };
    let full = unsafe { lb_last_error_message(ptr::null_mut(), 0) };
    assert!(full > 4);
    let mut buf = [1 as c_char; 4];
    assert_eq!(unsafe { lb_last_error_message(buf.as_mut_ptr(), 4) }, full);
    assert_eq!(buf[3], 0);
    let ch = channel(4.0);
    assert_eq!(unsafe { lb_last_error_message(ptr::null_mut(), 0) }, 0);
    unsafe { lb_channel_free(ch) };
}

#[test]
fn orthogonal_pair_and_collinear_field() {
    let ch = channel(4.0);
    let xs = [1.0, 0.0];
    let ys = [0.0, 1.0];
    let mut f = ptr::null_mut();
    assert_eq!(
        unsafe { lb_field_from_points(xs.as_ptr(), ys.as_ptr(), 2, 0.01, 5.0, 0.0, 0.0, &mut f) },
        LbStatus::Ok
    );
    assert_eq!(unsafe { lb_field_len(f) }, 2);
    let (mut x, mut y) = (f64::NAN, f64::NAN);
    assert_eq!(unsafe { lb_field_point(f, 1, &mut x, &mut y) }, LbStatus::Ok);
    assert_eq!((x, y), (0.0, 1.0));
    assert_eq!(unsafe { lb_field_point(f, 2, &mut x, &mut y) }, LbStatus::InvalidParameter);

    let mut crb = 0.0;
    assert_eq!(unsafe { lb_crb_realization(f, ch, 0.0, 0.0, &mut crb) }, LbStatus::Ok);
    let (mut gamma, mut c, mut we, mut rho) = (0.0, 0.0, 0.0, 0.0);
    unsafe { lb_channel_params(ch, &mut gamma, &mut c, &mut we, &mut rho) };
    let g1 = gamma * gamma + 4.0 * we / (c * c);
    assert!((crb - 2.0 / (rho * g1)).abs() <= 1e-12 * crb);
    assert_eq!(unsafe { lb_crb_realization(f, ch, 1.0, 0.0, &mut crb) }, LbStatus::DegenerateGeometry);
    unsafe { lb_field_free(f) };

    let xs = [1.0, 2.0, -3.0];
    let ys = [0.0; 3];
    let mut f = ptr::null_mut();
    unsafe { lb_field_from_points(xs.as_ptr(), ys.as_ptr(), 3, 0.01, 5.0, 0.0, 0.0, &mut f) };
    assert_eq!(unsafe { lb_crb_realization(f, ch, 0.0, 0.0, &mut crb) }, LbStatus::SingularGeometry);
    unsafe {
        lb_field_free(f);
        lb_channel_free(ch);
    }
}

#[test]
fn bounds_agree_with_core() {
    let ch = channel(4.0);
    let mut b = LbBounds::default();
    assert_eq!(unsafe { lb_bounds(0.01, ch, 0.0, &mut b) }, LbStatus::Ok);
    let (mut v, mut err) = (0.0, 0.0);
    assert_eq!(unsafe { lb_crb_lb(0.01, ch, LbKernel::Full, 0.0, &mut v, &mut err) }, LbStatus::Ok);
    assert_eq!(v, b.crb_lb);
    assert!(err < 1e-6 * v);
    assert!(b.crb_lb <= b.crb_lb_n && b.crb_lb <= b.crb_lb_w);
    assert!((b.crb_lb - 0.19352465368682399).abs() < 1e-7 * b.crb_lb);

    let mut n = 0.0;
    assert_eq!(unsafe { lb_crb_lb(0.01, ch, LbKernel::RssOnly, 1e-10, &mut n, ptr::null_mut()) }, LbStatus::Ok);
    assert!((n - b.crb_lb_n).abs() < 1e-8 * n);
    unsafe { lb_channel_free(ch) };
}

#[test]
fn averaged_bound_is_seeded() {
    let ch = channel(4.0);
    let mut a = LbAvgCrb::default();
    let mut b = LbAvgCrb::default();
    assert_eq!(unsafe { lb_avg_crb(0.01, ch, 20, 200, 5, &mut a) }, LbStatus::Ok);
    assert_eq!(unsafe { lb_avg_crb(0.01, ch, 20, 200, 5, &mut b) }, LbStatus::Ok);
    assert_eq!(a.mean, b.mean);
    assert_eq!(a.trials + a.excluded, 20);
    assert_eq!(unsafe { lb_avg_crb(0.01, ch, 0, 200, 5, &mut a) }, LbStatus::InvalidParameter);
    unsafe { lb_channel_free(ch) };
}

#[test]
fn sampled_field_is_reproducible() {
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(lb_field_sample(0.01, 50.0, 1.0, 2.0, 9, &mut a), LbStatus::Ok);
        assert_eq!(lb_field_sample(0.01, 50.0, 1.0, 2.0, 9, &mut b), LbStatus::Ok);
        let n = lb_field_len(a);
        assert_eq!(n, lb_field_len(b));
        assert!(n > 0);
        let (mut x1, mut y1, mut x2, mut y2) = (0.0, 0.0, 0.0, 0.0);
        lb_field_point(a, n - 1, &mut x1, &mut y1);
        lb_field_point(b, n - 1, &mut x2, &mut y2);
        assert_eq!((x1, y1), (x2, y2));
        assert_eq!(lb_field_sample(-1.0, 50.0, 0.0, 0.0, 9, &mut a), LbStatus::InvalidParameter);
        lb_field_free(a);
        lb_field_free(b);
        assert_eq!(lb_field_len(ptr::null()), 0);
    }
}
