use irdeco::current::physical_charge;
use irdeco::restoration::{
    cap_fraction, rejected_current_check, restoration_extrapolate, restoration_mc, restoration_mc_with, ScatterLaw,
    WeakTable,
};
use irdeco::weak::fermi_coupling;

const SEED: u64 = 20240917;

#[test]
fn estimate_agrees_with_cap_fraction() {
    let r = restoration_mc(10.0, 0.2, 1_000_000, SEED).unwrap();
    let exact = cap_fraction(0.2);
    assert!((exact - (1.0 - 0.2f64.cos()) / 2.0).abs() < 1e-15);
    assert!((r.p_hat - exact).abs() < 3.0 * r.sigma, "{} vs {exact} ± {}", r.p_hat, r.sigma);
}

#[test]
fn restoration_probability_vanishes_quadratically() {
    let runs: Vec<_> = [0.05, 0.1, 0.2, 0.4]
        .iter()
        .map(|&e| restoration_mc(10.0, e, 1_000_000, SEED).unwrap())
        .collect();
    let fit = restoration_extrapolate(&runs).unwrap();
    assert!((fit.exponent - 2.0).abs() < 0.1, "{fit:?}");
    assert!(fit.consistent_with_zero);
    assert_eq!(fit.extrapolated, 0.0);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| restoration_mc(10.0, 0.3, 200_000, SEED).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn rejected_samples_carry_nonzero_current() {
    let check = rejected_current_check(10.0, 1.0, 0.1, 20_000, SEED, physical_charge()).unwrap();
    assert!(check.rejected > 19_000);
    assert!(check.min_rejected_current > 0.0);
}

#[test]
fn weak_law_stays_close_to_isotropic() {
    let law = ScatterLaw::Weak(WeakTable::new(10.0, 1.0, 0.0, fermi_coupling()).unwrap());
    let r = restoration_mc_with(&law, 10.0, 0.2, 1_000_000, SEED).unwrap();
    assert!((r.p_hat - cap_fraction(0.2)).abs() < 5.0 * r.sigma);
}
