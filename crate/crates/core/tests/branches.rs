mod common;

use common::*;
use irdeco::branches::{build_branch_set, interference_bound, BranchEnsemble, BranchGrid, BranchSpec};
use irdeco::radiation::{kmin_scan, log_slope, CutoffWindow, RadiationModel};
use irdeco::weak::HelicityConfig;
use num_complex::Complex64;

fn spec(grid: BranchGrid) -> BranchSpec {
    BranchSpec {
        sqrt_s: 10.0,
        m_e: 1.0,
        m_nu: 0.0,
        grid,
        m0_weight: 0.5,
        coupling: 1.0,
        helicities: HelicityConfig::ALL_LEFT,
    }
}

fn small_grid() -> BranchGrid {
    BranchGrid {
        polar_nodes: 3,
        azimuth_nodes: 4,
    }
}

fn ensemble(model: &RadiationModel, grid: BranchGrid) -> BranchEnsemble {
    BranchEnsemble::new(model, build_branch_set(&spec(grid)).unwrap()).unwrap()
}

#[test]
fn negligible_window_gives_pure_projector() {
    let model = model_with(8, 32, 32);
    let ens = ensemble(&model, small_grid());
    let rho = ens.reduced_density(&model, &CutoffWindow::new(1e-1 * (1.0 - 1e-9), 1e-1).unwrap());
    for l in 0..ens.len() {
        for m in 0..ens.len() {
            let pure = ens.branches[l].amplitude * ens.branches[m].amplitude.conj();
            assert!((rho.rho[(l, m)] - pure).norm() < 1e-6);
        }
    }
    assert!((rho.purity() - 1.0).abs() < 1e-6);
}

#[test]
fn density_scan_invariants() {
    let model = model_with(8, 32, 32);
    let ens = ensemble(&model, BranchGrid::default());
    let mut prev_purity = f64::INFINITY;
    let first = ens.reduced_density(&model, &CutoffWindow::new(1e-3, 1e-1).unwrap());
    for k in kmin_scan(1e-3, 1e-8, 2) {
        let rho = ens.reduced_density(&model, &CutoffWindow::new(k, 1e-1).unwrap());
        assert!((rho.trace() - 1.0).abs() < 1e-10);
        assert!(rho.hermiticity_defect() < 1e-12);
        assert!(rho.eigenvalues()[0] > -1e-10);
        for i in 0..ens.len() {
            assert_eq!(rho.rho[(i, i)], first.rho[(i, i)]);
        }
        let p = rho.purity();
        assert!(p < prev_purity && p > 0.0);
        prev_purity = p;
    }
    assert!(prev_purity > ens.decohered_purity());
}

#[test]
fn off_diagonal_exponents_track_distance_slopes() {
    let model = model_with(8, 32, 32);
    let ens = ensemble(&model, small_grid());
    // Branches 1..=4 share the first polar node and step around in azimuth.
    let mut prev = 0.0;
    for m in 2..=3 {
        let scan: Vec<(f64, f64)> = kmin_scan(1e-3, 1e-8, 1)
            .into_iter()
            .map(|k| {
                let rho = ens.reduced_density(&model, &CutoffWindow::new(k, 1e-1).unwrap());
                (k, -rho.rho[(1, m)].norm().ln())
            })
            .collect();
        let exponent = log_slope(&scan).unwrap().slope;
        let expected = 0.5 * ens.moments().distance_log_coefficient(1, m);
        assert!(rel(exponent, expected) < 1e-8, "{exponent} vs {expected}");
        assert!(exponent > prev);
        prev = exponent;
    }
}

#[test]
fn interference_bound_matches_direct_overlaps() {
    let model = model_with(8, 32, 32);
    let branches = build_branch_set(&spec(BranchGrid {
        polar_nodes: 2,
        azimuth_nodes: 3,
    }))
    .unwrap();
    let direct = |k: f64| {
        let w = CutoffWindow::new(k, 1e-1).unwrap();
        let mut best = 0.0_f64;
        for l in 0..branches.len() {
            for m in (l + 1)..branches.len() {
                let ov = model.branch_overlap(&branches[l].event, &branches[m].event, &w).unwrap().norm();
                best = best.max(2.0 * branches[l].amplitude.norm() * branches[m].amplitude.norm() * ov);
            }
        }
        best
    };
    let w6 = CutoffWindow::new(1e-6, 1e-1).unwrap();
    let w8 = CutoffWindow::new(1e-8, 1e-1).unwrap();
    let b6 = interference_bound(&model, &branches, &w6, 1.0).unwrap();
    let b8 = interference_bound(&model, &branches, &w8, 1.0).unwrap();
    assert!(rel(b6, direct(1e-6)) < 1e-10);
    assert!(rel(b8, direct(1e-8)) < 1e-10);
    assert!(b8 < b6 && b8 > 0.0);
    assert!(rel(b8 / b6, direct(1e-8) / direct(1e-6)) < 1e-10);
}

#[test]
fn purity_converges_under_grid_refinement() {
    let model = model_with(8, 32, 32);
    let w = CutoffWindow::new(1e-6, 1e-1).unwrap();
    let grids = [
        BranchGrid::default(),
        BranchGrid::default().refined(),
    ];
    let p: Vec<f64> = grids.iter().map(|g| ensemble(&model, *g).reduced_density(&model, &w).purity()).collect();
    assert!(rel(p[0], p[1]) < 1e-2, "{p:?}");
}

#[test]
fn gram_matrix_of_branch_states_is_psd() {
    let model = model_with(8, 32, 32);
    let ens = ensemble(&model, small_grid());
    let w = CutoffWindow::new(1e-8, 1e-1).unwrap();
    let n = ens.len();
    let mut gram = nalgebra::DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for l in 0..n {
        gram[(l, l)] = Complex64::new(1.0, 0.0);
        for m in (l + 1)..n {
            let z = ens.moments().overlap(&model, l, m, &w);
            assert!(z.norm() <= 1.0);
            gram[(l, m)] = z;
            gram[(m, l)] = z.conj();
        }
    }
    let min = gram.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min > -1e-10, "{min}");
}

#[test]
fn purity_approaches_decohered_limit_at_extreme_cutoffs() {
    let model = model_with(4, 32, 32);
    let ens = ensemble(&model, small_grid());
    let target = ens.decohered_purity();
    let mut prev = f64::INFINITY;
    for k in [1e-8, 1e-50, 1e-150, 1e-300] {
        let p = ens.reduced_density(&model, &CutoffWindow::new(k, 1e-1).unwrap()).purity();
        assert!(p.is_finite() && p < prev && p > target);
        prev = p;
    }
}
