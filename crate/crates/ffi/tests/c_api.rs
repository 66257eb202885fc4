use std::ffi::{CStr, CString};
use std::ptr;

use witten_lab_ffi::*;

fn last_error() -> String {
    let p = wl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn line(n: usize, period: f64) -> *mut WlGrid {
    let mut grid = ptr::null_mut();
    assert_eq!(wl_grid_new(1, &n, &period, &mut grid), WlStatus::Ok);
    grid
}

#[test]
fn flat_laplacian_of_cosine() {
    unsafe {
        let n = 32;
        let grid = line(n, 2.0 * std::f64::consts::PI);
        let mut len = 0;
        assert_eq!(wl_grid_len(grid, &mut len), WlStatus::Ok);
        assert_eq!(len, n);
        let mut snap = ptr::null_mut();
        assert_eq!(wl_snapshot_new(grid, ptr::null(), ptr::null(), &mut snap), WlStatus::Ok);
        let f: Vec<f64> = (0..n).map(|i| (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()).collect();
        let mut out = vec![0.0; n];
        assert_eq!(wl_witten_laplacian(snap, f.as_ptr(), out.as_mut_ptr(), n), WlStatus::Ok);
        for (a, b) in out.iter().zip(&f) {
            assert!((a + b).abs() < 1e-12);
        }
        let mut total = 0.0;
        let ones = vec![1.0; n];
        assert_eq!(wl_integrate(snap, ones.as_ptr(), n, &mut total), WlStatus::Ok);
        assert!((total - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        wl_snapshot_free(snap);
        wl_grid_free(grid);
    }
}

#[test]
fn curvature_floor_and_mu() {
    unsafe {
        let n = 32;
        let grid = line(n, 2.0 * std::f64::consts::PI);
        // φ = 0.3 sin x, m = 3: φ'' − φ'²/2 = −0.3 sin x − 0.045 cos²x.
        let phi: Vec<f64> = (0..n).map(|i| 0.3 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin()).collect();
        let mut snap = ptr::null_mut();
        assert_eq!(wl_snapshot_new(grid, ptr::null(), phi.as_ptr(), &mut snap), WlStatus::Ok);
        let mut floor = vec![0.0; n];
        assert_eq!(wl_curvature_floor(snap, 3.0, floor.as_mut_ptr(), n), WlStatus::Ok);
        for (i, f) in floor.iter().enumerate() {
            let x = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            assert!((f + 0.3 * x.sin() + 0.045 * x.cos().powi(2)).abs() < 1e-10);
        }
        assert_eq!(wl_curvature_floor(snap, 1.0, floor.as_mut_ptr(), n), WlStatus::InvalidArgument);
        wl_snapshot_free(snap);

        let mut flat = ptr::null_mut();
        assert_eq!(wl_snapshot_new(grid, ptr::null(), ptr::null(), &mut flat), WlStatus::Ok);
        let mut mu = f64::NAN;
        let mut u = vec![0.0; n];
        assert_eq!(wl_solve_mu(flat, 1.0, 1.0, 0.0, 2, 3, &mut mu, u.as_mut_ptr(), n), WlStatus::Ok);
        // Constant minimizer on flat T¹(2π) at t = 1.
        let expected = -0.5 * (4.0 * std::f64::consts::PI).ln() + (2.0 * std::f64::consts::PI).ln() - 1.0;
        assert!((mu - expected).abs() < 1e-8, "{mu} vs {expected}");
        assert_eq!(wl_solve_mu(flat, -1.0, 1.0, 0.0, 0, 0, &mut mu, ptr::null_mut(), 0), WlStatus::InvalidArgument);
        assert!(last_error().contains('t'));
        wl_snapshot_free(flat);
        wl_grid_free(grid);
    }
}

#[test]
fn bad_inputs_report_status_and_message() {
    unsafe {
        let mut grid = ptr::null_mut();
        let n = 2usize;
        let p = 1.0;
        assert_ne!(wl_grid_new(1, &n, &p, &mut grid), WlStatus::Ok);
        assert!(!last_error().is_empty());
        assert_eq!(wl_grid_new(1, ptr::null(), &p, &mut grid), WlStatus::NullPointer);
        assert_eq!(wl_witten_laplacian(ptr::null(), ptr::null(), ptr::null_mut(), 0), WlStatus::NullPointer);
        wl_grid_free(ptr::null_mut());
        wl_snapshot_free(ptr::null_mut());
        assert!(!CStr::from_ptr(wl_version()).to_bytes().is_empty());
    }
}

#[test]
fn presets_and_configs_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    let name = CString::new("stationary").unwrap();
    unsafe {
        assert_eq!(wl_run_preset(name.as_ptr(), out.as_ptr()), WlStatus::Ok);
        assert!(dir.path().join("report.json").exists());
        let missing = CString::new("nope").unwrap();
        assert_eq!(wl_run_preset(missing.as_ptr(), out.as_ptr()), WlStatus::InvalidArgument);
        let bad = CString::new("{\"name\": 1}").unwrap();
        assert_eq!(wl_run_config(bad.as_ptr(), out.as_ptr()), WlStatus::Config);
        let json = CString::new(witten_lab::experiments::preset("stationary").unwrap().to_json()).unwrap();
        assert_eq!(wl_run_config(json.as_ptr(), out.as_ptr()), WlStatus::Ok);
    }
}
