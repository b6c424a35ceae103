#![allow(dead_code)]

use std::f64::consts::PI;

use irdeco::current::physical_charge;
use irdeco::radiation::{PhotonQuadrature, QuadratureResolution, RadiationModel};
use irdeco::{mdot, FourVector, ScatteringEvent};

pub fn model_with(energy: usize, polar: usize, azimuth: usize) -> RadiationModel {
    let res = QuadratureResolution {
        energy_nodes_per_decade: energy,
        polar_nodes: polar,
        azimuth_nodes: azimuth,
    };
    RadiationModel::new(PhotonQuadrature::new(res).unwrap(), physical_charge())
}

pub fn default_model() -> RadiationModel {
    RadiationModel::physical().unwrap()
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `∫ dΩ (−J*·J)` at unit photon energy for a charge scattered from `p` to
/// `q`, from the Feynman-parameter form
/// `e² 4π [−2 + 2 p·q ∫₀¹ dx / (x p + (1−x) q)²]`, valid for massive legs
/// of equal mass `m = 1`.
pub fn angular_intensity_oracle(p: &FourVector, q: &FourVector, charge: f64) -> f64 {
    if p == q {
        return 0.0;
    }
    let pq = mdot(p, q);
    let mp = mdot(p, p);
    let integral = simpson(
        |x| {
            let v = *p * x + *q * (1.0 - x);
            1.0 / mdot(&v, &v)
        },
        0.0,
        1.0,
        20_000,
    );
    charge * charge * 4.0 * PI * (-2.0 * mp + 2.0 * pq * integral)
}

/// Coefficient of `ln(k_max/k_min)` in `N̄` for the electron legs of `event`.
pub fn n_bar_log_coefficient(event: &ScatteringEvent, charge: f64) -> f64 {
    angular_intensity_oracle(&event.p_e_in, &event.p_e_out, charge) / (2.0 * PI).powi(3)
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
