use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use irdeco_ffi::*;

fn model(alpha: f64) -> *mut IrdecoModel {
    let mut m = ptr::null_mut();
    let s = unsafe { irdeco_model_new(8, 24, 24, alpha, &mut m) };
    assert_eq!(s, IrdecoStatus::Ok);
    m
}

fn event(theta: f64, phi: f64) -> *mut IrdecoEvent {
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { irdeco_event_new(10.0, theta, phi, 1.0, 0.0, &mut e) }, IrdecoStatus::Ok);
    e
}

#[test]
fn overlap_matches_library() {
    let m = model(1.0 / 137.035999084);
    let (l, r) = (event(1.2, 0.0), event(0.6, 0.9));
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { irdeco_branch_overlap(m, l, r, 1e-6, 1e-1, &mut re, &mut im) }, IrdecoStatus::Ok);

    let lib = irdeco::radiation::RadiationModel::new(
        irdeco::radiation::PhotonQuadrature::new(irdeco::radiation::QuadratureResolution {
            energy_nodes_per_decade: 8,
            polar_nodes: 24,
            azimuth_nodes: 24,
        })
        .unwrap(),
        irdeco::current::physical_charge(),
    );
    let el = irdeco::build_cms_event(10.0, 1.2, 0.0, 1.0, 0.0).unwrap();
    let em = irdeco::build_cms_event(10.0, 0.6, 0.9, 1.0, 0.0).unwrap();
    let w = irdeco::radiation::CutoffWindow::new(1e-6, 1e-1).unwrap();
    let z = lib.branch_overlap(&el, &em, &w).unwrap();
    assert_eq!((re, im), (z.re, z.im));

    let (mut n, mut p) = (0.0, 0.0);
    assert_eq!(unsafe { irdeco_mean_photon_number(m, l, 1e-6, 1e-1, &mut n) }, IrdecoStatus::Ok);
    assert_eq!(unsafe { irdeco_vacuum_persistence(m, l, 1e-6, 1e-1, &mut p) }, IrdecoStatus::Ok);
    assert!((p - (-0.5 * n).exp()).abs() < 1e-14);

    unsafe {
        irdeco_event_free(l);
        irdeco_event_free(r);
        irdeco_model_free(m);
    }
}

#[test]
fn density_handle_lifecycle() {
    let m = model(1.0 / 137.035999084);
    let mut set = ptr::null_mut();
    let s = unsafe { irdeco_branch_set_new(m, 10.0, 1.0, 0.0, 2, 3, 0.5, 1.0, &mut set) };
    assert_eq!(s, IrdecoStatus::Ok);
    assert_eq!(unsafe { irdeco_branch_set_len(set) }, 7);
    let mut rho = ptr::null_mut();
    assert_eq!(unsafe { irdeco_density_new(set, m, 1e-6, 1e-1, &mut rho) }, IrdecoStatus::Ok);
    assert_eq!(unsafe { irdeco_density_dim(rho) }, 7);
    let mut trace = 0.0;
    for i in 0..7 {
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(unsafe { irdeco_density_get(rho, i, i, &mut re, &mut im) }, IrdecoStatus::Ok);
        assert_eq!(im, 0.0);
        trace += re;
    }
    assert!((trace - 1.0).abs() < 1e-12);
    let mut purity = 0.0;
    assert_eq!(unsafe { irdeco_density_purity(rho, &mut purity) }, IrdecoStatus::Ok);
    assert!(purity > 0.0 && purity <= 1.0 + 1e-12);

    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { irdeco_density_get(rho, 7, 0, &mut re, &mut im) }, IrdecoStatus::Domain);
    let msg = unsafe { CStr::from_ptr(irdeco_last_error_message()) }.to_str().unwrap().to_owned();
    assert!(msg.contains("outside"), "{msg}");

    unsafe {
        irdeco_density_free(rho);
        irdeco_branch_set_free(set);
        irdeco_model_free(m);
        irdeco_density_free(ptr::null_mut());
    }
    assert_eq!(unsafe { irdeco_branch_set_len(ptr::null()) }, 0);
}

#[test]
fn error_codes() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { irdeco_model_new(0, 8, 8, 0.01, &mut m) }, IrdecoStatus::Domain);
    assert_eq!(unsafe { irdeco_model_new(8, 8, 8, -1.0, &mut m) }, IrdecoStatus::Domain);
    assert!(m.is_null());
    let mut x = 0.0;
    assert_eq!(
        unsafe { irdeco_mean_photon_number(ptr::null(), ptr::null(), 1e-3, 1e-1, &mut x) },
        IrdecoStatus::NullPointer
    );
    let (mut p, mut s) = (0.0, 0.0);
    assert_eq!(unsafe { irdeco_restoration_mc(10.0, 0.0, 10_000, 1, &mut p, &mut s) }, IrdecoStatus::Domain);
    assert_eq!(unsafe { irdeco_restoration_mc(10.0, 0.2, 10_000, 1, &mut p, &mut s) }, IrdecoStatus::Ok);
    assert!(p > 0.0 && s > 0.0);
    let mut r = 1.0;
    assert_eq!(unsafe { irdeco_helicity_ratio(10.0, 0.0, 0.0, 1.0, &mut r) }, IrdecoStatus::Ok);
    assert_eq!(r, 0.0);
    assert_eq!(unsafe { irdeco_helicity_ratio(10.0, 1.0, 0.1, 1.0, &mut r) }, IrdecoStatus::Ok);
    assert!(r > 1e-7 && r < 1e-5);
}

/// Compiles a C program against the generated header and static library.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libirdeco_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping C link check: no static library or C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <math.h>
#include "irdeco.h"
int main(void) {
    IrdecoModel *m = NULL;
    IrdecoEvent *e = NULL;
    double n = 0.0, p = 0.0;
    if (irdeco_model_new(4, 16, 16, 1.0 / 137.035999084, &m) != IRDECO_STATUS_OK) return 1;
    if (irdeco_event_new(10.0, 1.5707963267948966, 0.0, 1.0, 0.0, &e) != IRDECO_STATUS_OK) return 2;
    if (irdeco_mean_photon_number(m, e, 1e-6, 1e-1, &n) != IRDECO_STATUS_OK) return 3;
    if (irdeco_vacuum_persistence(m, e, 1e-6, 1e-1, &p) != IRDECO_STATUS_OK) return 4;
    if (fabs(p - exp(-0.5 * n)) > 1e-14 || !(n > 0.0)) return 5;
    if (irdeco_event_new(0.5, 0.0, 0.0, 1.0, 0.0, &e) != IRDECO_STATUS_DOMAIN) return 6;
    printf("%s %.6f\n", irdeco_version(), n);
    irdeco_event_free(e);
    irdeco_model_free(m);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(env!("CARGO_PKG_VERSION")), "{text}");
}
