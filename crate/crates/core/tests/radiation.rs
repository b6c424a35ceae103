mod common;

use std::f64::consts::FRAC_PI_2;

use common::*;
use irdeco::current::physical_charge;
use irdeco::radiation::{kmin_scan, log_slope, CutoffWindow};
use irdeco::{build_cms_event, ScatteringEvent};

fn reference() -> ScatteringEvent {
    build_cms_event(10.0, FRAC_PI_2, 0.0, 1.0, 0.0).unwrap()
}

#[test]
fn log_coefficient_matches_feynman_parameter_form() {
    let model = default_model();
    let w = CutoffWindow::new(1e-6, 1e-1).unwrap();
    for &(rs, theta, phi) in &[(10.0, FRAC_PI_2, 0.0), (10.0, 0.3, 1.0), (3.0, 2.5, 4.0), (2.2, 1.0, 0.2)] {
        let ev = build_cms_event(rs, theta, phi, 1.0, 0.0).unwrap();
        let expected = n_bar_log_coefficient(&ev, physical_charge()) * w.log_width();
        let got = model.mean_photon_number(&ev, &w).unwrap();
        assert!(rel(got, expected) < 1e-8, "sqrt_s={rs} theta={theta}: {got} vs {expected}");
    }
}

#[test]
fn v_matches_tenfold_refined_grid() {
    let ev = reference();
    let w = CutoffWindow::new(1e-6, 1e-1).unwrap();
    let model = default_model();
    let fine = irdeco::radiation::RadiationModel::new(model.quadrature().refined(10).unwrap(), physical_charge());
    let v = model.v_functional(&ev, &w).unwrap();
    let oracle = fine.v_functional(&ev, &w).unwrap();
    assert!(rel(v, oracle) < 1e-3, "{v} vs {oracle}");
    assert!(v > 0.0);
}

#[test]
fn doubling_resolution_changes_little() {
    let model = default_model();
    let twice = irdeco::radiation::RadiationModel::new(model.quadrature().refined(2).unwrap(), physical_charge());
    let w = CutoffWindow::new(1e-6, 1e-1).unwrap();
    let (l, m) = (reference(), build_cms_event(10.0, 0.8, 2.0, 1.0, 0.0).unwrap());
    assert!(rel(model.v_functional(&l, &w).unwrap(), twice.v_functional(&l, &w).unwrap()) < 1e-6);
    assert!(rel(model.overlap_distance(&l, &m, &w).unwrap(), twice.overlap_distance(&l, &m, &w).unwrap()) < 1e-5);
    assert!(rel(model.phase_difference(&l, &m, &w).unwrap(), twice.phase_difference(&l, &m, &w).unwrap()) < 1e-5);
}

#[test]
fn decade_increment_is_constant() {
    let model = default_model();
    let ev = reference();
    let n = |k: f64| model.mean_photon_number(&ev, &CutoffWindow::new(k, 1e-1).unwrap()).unwrap();
    let incs: Vec<f64> = [1e-4, 1e-5, 1e-6, 1e-7].iter().map(|&k| n(k / 10.0) - n(k)).collect();
    for d in &incs {
        assert!(rel(*d, incs[0]) < 5e-3);
        assert!(*d > 0.0);
    }
}

#[test]
fn spectrum_is_scale_invariant_and_forward_is_empty() {
    let model = default_model();
    let bins = [(1e-6, 1e-5), (1e-5, 1e-4)];
    let s = model.energy_spectrum(&reference(), &bins).unwrap();
    assert!(rel(s[0].photons, s[1].photons) < 1e-2);
    let forward = ScatteringEvent::forward(10.0, 1.0, 0.0).unwrap();
    assert!(model.energy_spectrum(&forward, &bins).unwrap().iter().all(|b| b.photons == 0.0));
    let w = CutoffWindow::new(1e-6, 1e-1).unwrap();
    assert_eq!(model.vacuum_persistence(&forward, &w).unwrap(), 1.0);
    assert_eq!(model.v_functional(&forward, &w).unwrap(), 0.0);
}

#[test]
fn persistence_is_half_the_independent_number() {
    let model = default_model();
    let w = CutoffWindow::new(1e-7, 1e-1).unwrap();
    for &(rs, theta) in &[(10.0, FRAC_PI_2), (4.0, 0.4), (20.0, 2.8)] {
        let ev = build_cms_event(rs, theta, 0.3, 1.0, 0.0).unwrap();
        let direct = model.number_integral(&ev, &w).unwrap();
        assert!(rel(model.mean_photon_number(&ev, &w).unwrap(), direct) < 1e-6);
        assert!(rel(model.vacuum_persistence(&ev, &w).unwrap(), (-0.5 * direct).exp()) < 1e-6);
    }
    let ev = reference();
    let mut prev = 1.0;
    for k in kmin_scan(1e-3, 1e-8, 1) {
        let p = model.vacuum_persistence(&ev, &CutoffWindow::new(k, 1e-1).unwrap()).unwrap();
        assert!(p < prev && p > 0.0);
        prev = p;
    }
}

#[test]
fn overlap_decays_faster_for_wider_separation() {
    let model = default_model();
    let l = reference();
    let mut prev_slope = 0.0;
    for theta_m in [1.3, 1.0, 0.5] {
        let m = build_cms_event(10.0, theta_m, 0.0, 1.0, 0.0).unwrap();
        let scan: Vec<(f64, f64)> = kmin_scan(1e-3, 1e-8, 1)
            .into_iter()
            .map(|k| (k, model.branch_overlap(&l, &m, &CutoffWindow::new(k, 1e-1).unwrap()).unwrap().norm()))
            .collect();
        for pair in scan.windows(2) {
            assert!(pair[1].1 < pair[0].1);
        }
        let logs: Vec<(f64, f64)> = scan.iter().map(|(k, v)| (*k, -v.ln())).collect();
        let slope = log_slope(&logs).unwrap().slope;
        assert!(slope > prev_slope, "theta_m={theta_m}: {slope} <= {prev_slope}");
        prev_slope = slope;
    }
}

#[test]
fn phase_difference_symmetries() {
    let model = default_model();
    let w = CutoffWindow::new(1e-6, 1e-1).unwrap();
    let l = reference();
    let m = build_cms_event(10.0, 0.7, 1.1, 1.0, 0.0).unwrap();
    assert_eq!(model.phase_difference(&l, &l, &w).unwrap(), 0.0);
    let a = model.phase_difference(&l, &m, &w).unwrap();
    let b = model.phase_difference(&m, &l, &w).unwrap();
    assert!((a + b).abs() <= 1e-12 * a.abs().max(1e-300));
    let d = |k: f64| model.phase_difference(&l, &m, &CutoffWindow::new(k, 1e-1).unwrap()).unwrap();
    let incs: Vec<f64> = [1e-4, 1e-5, 1e-6, 1e-7].iter().map(|&k| d(k / 10.0) - d(k)).collect();
    for x in &incs {
        assert!(rel(*x, incs[0]) < 5e-3);
    }
}

#[test]
fn log_slope_agrees_with_direct_coefficient() {
    let model = default_model();
    let ev = reference();
    let profile = model.profile(&ev).unwrap();
    let scan: Vec<(f64, f64)> = kmin_scan(1e-3, 1e-8, 2)
        .into_iter()
        .map(|k| (k, 2.0 * model.profile_v(&profile, &CutoffWindow::new(k, 1e-1).unwrap())))
        .collect();
    let fit = log_slope(&scan).unwrap();
    assert!(rel(fit.slope, 2.0 * model.log_coefficient(&profile)) < 1e-10);
    assert!(fit.r_squared > 0.999_999);
}

#[test]
fn brf_ratio_is_small_at_reference_kinematics() {
    let model = default_model();
    let r = model.report(&reference(), &CutoffWindow::new(1e-8, 1e-1).unwrap()).unwrap();
    assert!(!r.brf_warning);
    assert!(r.brf_ratio > 0.0 && r.brf_ratio < 0.1);
    assert_eq!(r.spectrum.len(), 7);
    let total: f64 = r.spectrum.iter().map(|b| b.photons).sum();
    assert!(rel(total, r.n_bar) < 1e-10);
}

#[test]
fn extreme_cutoffs_stay_finite() {
    let model = model_with(4, 32, 32);
    let ev = reference();
    let w = CutoffWindow::new(1e-250, 1e-1).unwrap();
    let n = model.mean_photon_number(&ev, &w).unwrap();
    let expected = model.mean_photon_number(&ev, &CutoffWindow::new(1e-8, 1e-1).unwrap()).unwrap() * w.log_width()
        / (1e-1f64 / 1e-8).ln();
    assert!(rel(n, expected) < 1e-10, "{n} vs {expected}");
    assert!(rel(model.number_integral(&ev, &w).unwrap(), n) < 1e-6);
    let p = model.vacuum_persistence(&ev, &w).unwrap();
    assert!(p.is_finite() && p > 0.0 && p < 1e-3);
}
