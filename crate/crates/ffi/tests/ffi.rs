use std::ffi::{c_char, CString};
use std::ptr;

use headland_smooth_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let n = unsafe { hs_last_error(buf.as_mut_ptr().cast::<c_char>(), buf.len()) };
    buf.truncate(n.min(255));
    String::from_utf8(buf).unwrap()
}

fn set(cfg: *mut HsConfig, key: &str, value: &str) -> HsStatus {
    let k = CString::new(key).unwrap();
    let v = CString::new(value).unwrap();
    unsafe { hs_config_set(cfg, k.as_ptr(), v.as_ptr()) }
}

#[test]
fn config_and_radii() {
    let cfg = hs_config_new();
    let mut r = 0.0;
    assert_eq!(unsafe { hs_min_turning_radius(cfg, &mut r) }, HsStatus::Ok);
    assert!((r - 3.0 / 31f64.to_radians().tan()).abs() < 1e-12);
    let mut env = 0.0;
    assert_eq!(unsafe { hs_envelope_radius(cfg, 0.01, 0.0, &mut env) }, HsStatus::Ok);
    assert!(env > r);

    assert_eq!(set(cfg, "speed", "3"), HsStatus::Input);
    assert!(last_error().contains("unknown config key"));
    assert_eq!(set(cfg, "ds_m", "-1"), HsStatus::Input);
    // A rejected value leaves the configuration unchanged.
    assert_eq!(unsafe { hs_min_turning_radius(cfg, &mut r) }, HsStatus::Ok);
    assert_eq!(set(cfg, "wheelbase_m", "6"), HsStatus::Ok);
    assert_eq!(unsafe { hs_min_turning_radius(cfg, &mut r) }, HsStatus::Ok);
    assert!((r - 6.0 / 31f64.to_radians().tan()).abs() < 1e-12);
    unsafe { hs_config_free(cfg) };
}

#[test]
fn null_pointers_are_reported() {
    let mut r = 0.0;
    assert_eq!(unsafe { hs_min_turning_radius(ptr::null(), &mut r) }, HsStatus::NullPointer);
    assert!(last_error().contains("cfg"));
    let cfg = hs_config_new();
    assert_eq!(unsafe { hs_config_set(cfg, ptr::null(), ptr::null()) }, HsStatus::NullPointer);
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { hs_run_contour(cfg, ptr::null(), 4, &mut run) }, HsStatus::NullPointer);
    assert!(run.is_null());
    assert_eq!(unsafe { hs_run_instances(ptr::null()) }, 0);
    unsafe {
        hs_run_free(ptr::null_mut());
        hs_config_free(ptr::null_mut());
        hs_config_free(cfg);
    }
}

#[test]
fn square_contour_run() {
    let cfg = hs_config_new();
    assert_eq!(set(cfg, "raster_cell_m", "2"), HsStatus::Ok);
    let xy = [0.0, 0.0, 200.0, 0.0, 200.0, 200.0, 0.0, 200.0];
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { hs_run_contour(cfg, xy.as_ptr(), 4, &mut run) }, HsStatus::Ok);
    assert_eq!(unsafe { hs_run_instances(run) }, 4 + 2 * 9);
    assert_eq!(unsafe { hs_run_failures(run) }, 0);

    let mut len = 0;
    let status = unsafe { hs_run_plan(run, ptr::null_mut(), ptr::null_mut(), &mut len) };
    assert_eq!(status, HsStatus::BufferTooSmall);
    assert!(len > 100);
    let mut pts = vec![f64::NAN; 2 * len];
    let mut labels = vec![HsLabel::Headland; len];
    let status = unsafe { hs_run_plan(run, pts.as_mut_ptr(), labels.as_mut_ptr(), &mut len) };
    assert_eq!(status, HsStatus::Ok);
    assert!(pts.iter().all(|v| v.is_finite()));
    assert!(labels.contains(&HsLabel::Transition) && labels.contains(&HsLabel::Lane));

    let dir = tempfile::tempdir().unwrap();
    let d = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { hs_run_emit(run, d.as_ptr()) }, HsStatus::Ok);
    assert!(dir.path().join("plan.geojson").exists());
    unsafe {
        hs_run_free(run);
        hs_config_free(cfg);
    }
}

#[test]
fn bad_inputs_map_to_codes() {
    let cfg = hs_config_new();
    let mut run = ptr::null_mut();
    let bowtie = [0.0, 0.0, 100.0, 100.0, 100.0, 0.0, 0.0, 100.0];
    assert_eq!(unsafe { hs_run_contour(cfg, bowtie.as_ptr(), 4, &mut run) }, HsStatus::Input);
    assert!(run.is_null());
    let missing = CString::new("/nonexistent/field.geojson").unwrap();
    assert_eq!(unsafe { hs_run_field_file(cfg, missing.as_ptr(), &mut run) }, HsStatus::Io);
    assert!(last_error().contains("/nonexistent/field.geojson"));
    unsafe { hs_config_free(cfg) };
}
