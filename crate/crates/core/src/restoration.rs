//! Monte Carlo of initial-state restoration after a scatter, a mirror
//! reflection and a rescatter.
//!
//! The history is tracked through asymptotic electron momenta only. A sample
//! restores the initial state when the final electron direction lies within
//! `ε` of the initial one; only then does the net current vanish.

use std::f64::consts::PI;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::current::{current_at, PhotonMode};
use crate::error::{domain, Result};
use crate::kinematics::{build_cms_event, direction, ScatteringEvent};
use crate::radiation::log_slope;
use crate::weak::{squared_for_electron_helicity, Helicity};

/// Sample count per run must be at least this.
pub const MIN_SAMPLES: u64 = 1000;
/// Fixed number of RNG streams; results do not depend on the thread count.
pub const SHARDS: u64 = 64;
/// Smallest `ε_max / ε_min` accepted by the extrapolation.
pub const MIN_TOLERANCE_SPAN: f64 = 8.0;
const WEAK_TABLE_NODES: usize = 513;

/// Angular law of each scatter relative to the incoming electron direction.
#[derive(Debug, Clone, PartialEq)]
pub enum ScatterLaw {
    /// Massless-limit weak scattering: uniform on the sphere.
    Isotropic,
    /// `Σ|M|²` for a left-handed incoming electron at the given masses,
    /// sampled by inverse CDF in `cos θ`.
    Weak(WeakTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakTable {
    cos: Vec<f64>,
    cdf: Vec<f64>,
}

impl WeakTable {
    pub fn new(sqrt_s: f64, m_e: f64, m_nu: f64, g: f64) -> Result<Self> {
        let n = WEAK_TABLE_NODES;
        let cos: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        let rate = cos
            .iter()
            .map(|c| {
                let ev = build_cms_event(sqrt_s, c.clamp(-1.0, 1.0).acos(), 0.0, m_e, m_nu)?;
                squared_for_electron_helicity(&ev, Helicity::L, g)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cdf = vec![0.0; n];
        for i in 1..n {
            cdf[i] = cdf[i - 1] + 0.5 * (rate[i] + rate[i - 1]) * (cos[i] - cos[i - 1]);
        }
        let total = cdf[n - 1];
        if !(total > 0.0) {
            return domain("weak angular distribution vanishes");
        }
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(Self { cos, cdf })
    }

    /// `cos θ` with `CDF(cos θ) = u`, linear within table cells.
    pub fn sample(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        self.cos[i - 1] + t * (self.cos[i] - self.cos[i - 1])
    }
}

impl ScatterLaw {
    fn cos_theta(&self, u: f64) -> f64 {
        match self {
            ScatterLaw::Isotropic => 2.0 * u - 1.0,
            ScatterLaw::Weak(t) => t.sample(u),
        }
    }

    /// Direction scattered off an incoming unit vector `axis`.
    fn scatter(&self, axis: [f64; 3], u: f64, v: f64) -> [f64; 3] {
        let c = self.cos_theta(u).clamp(-1.0, 1.0);
        let s = (1.0 - c * c).sqrt();
        let (sp, cp) = (2.0 * PI * v).sin_cos();
        let (e1, e2) = orthonormal_frame(axis);
        std::array::from_fn(|i| c * axis[i] + s * (cp * e1[i] + sp * e2[i]))
    }
}

fn orthonormal_frame(a: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = helper[0] * a[0] + helper[1] * a[1] + helper[2] * a[2];
    let mut e1: [f64; 3] = std::array::from_fn(|i| helper[i] - d * a[i]);
    let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|x| *x /= n);
    let e2 = [
        a[1] * e1[2] - a[2] * e1[1],
        a[2] * e1[0] - a[0] * e1[2],
        a[0] * e1[1] - a[1] * e1[0],
    ];
    (e1, e2)
}

/// Angle of a unit vector from `+z`.
fn polar_angle(n: [f64; 3]) -> f64 {
    n[0].hypot(n[1]).atan2(n[2])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RestorationRun {
    pub sqrt_s: f64,
    pub epsilon: f64,
    pub n: u64,
    pub accepted: u64,
    pub p_hat: f64,
    pub sigma: f64,
    pub seed: u64,
}

fn shard_sizes(n: u64) -> impl Iterator<Item = (u64, u64)> {
    (0..SHARDS).map(move |s| (s, n / SHARDS + u64::from(s < n % SHARDS)))
}

/// Final electron directions of `count` histories from one shard.
fn shard_directions(law: &ScatterLaw, seed: u64, shard: u64, count: u64) -> impl Iterator<Item = [f64; 3]> + '_ {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    (0..count).map(move |_| {
        let (u1, v1, u2, v2): (f64, f64, f64, f64) = (rng.random(), rng.random(), rng.random(), rng.random());
        let first = law.scatter([0.0, 0.0, 1.0], u1, v1);
        let reflected = first.map(|x| -x);
        law.scatter(reflected, u2, v2)
    })
}

fn check_inputs(epsilon: f64, n: u64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= PI) {
        return domain(format!("tolerance must lie in (0, π], got {epsilon}"));
    }
    if n < MIN_SAMPLES {
        return domain(format!("need at least {MIN_SAMPLES} samples, got {n}"));
    }
    Ok(())
}

/// Restoration frequency with a chosen scatter law.
pub fn restoration_mc_with(law: &ScatterLaw, sqrt_s: f64, epsilon: f64, n: u64, seed: u64) -> Result<RestorationRun> {
    check_inputs(epsilon, n)?;
    if !(sqrt_s > 0.0) {
        return domain(format!("sqrt_s must be positive, got {sqrt_s}"));
    }
    let accepted: u64 = shard_sizes(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(shard, count)| {
            shard_directions(law, seed, shard, count)
                .filter(|d| polar_angle(*d) <= epsilon)
                .count() as u64
        })
        .sum();
    let p_hat = accepted as f64 / n as f64;
    Ok(RestorationRun {
        sqrt_s,
        epsilon,
        n,
        accepted,
        p_hat,
        sigma: (p_hat * (1.0 - p_hat) / n as f64).sqrt(),
        seed,
    })
}

/// Isotropic restoration frequency.
pub fn restoration_mc(sqrt_s: f64, epsilon: f64, n: u64, seed: u64) -> Result<RestorationRun> {
    restoration_mc_with(&ScatterLaw::Isotropic, sqrt_s, epsilon, n, seed)
}

/// `(1 − cos ε)/2`, the solid-angle fraction of an `ε` cap.
pub fn cap_fraction(epsilon: f64) -> f64 {
    0.5 * (1.0 - epsilon.cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RestorationFit {
    pub exponent: f64,
    pub exponent_error: f64,
    /// `A` in `P = A ε^b`.
    pub prefactor: f64,
    /// `lim_{ε→0} A ε^b`: zero for a significantly positive exponent.
    pub extrapolated: f64,
    pub consistent_with_zero: bool,
}

/// Power-law fit of `P̂(ε)` and its `ε → 0` limit.
pub fn restoration_extrapolate(runs: &[RestorationRun]) -> Result<RestorationFit> {
    if runs.len() < 3 {
        return domain(format!("need at least 3 tolerances, got {}", runs.len()));
    }
    let lo = runs.iter().map(|r| r.epsilon).fold(f64::INFINITY, f64::min);
    let hi = runs.iter().map(|r| r.epsilon).fold(0.0, f64::max);
    if hi / lo < MIN_TOLERANCE_SPAN {
        return domain(format!("tolerances span only a factor {:.3}", hi / lo));
    }
    if let Some(r) = runs.iter().find(|r| r.p_hat <= 0.0) {
        return domain(format!("no accepted samples at ε = {}", r.epsilon));
    }
    // log_slope fits y against ln(1/x); P against 1/ε gives slope b directly.
    let pts: Vec<(f64, f64)> = runs.iter().map(|r| (1.0 / r.epsilon, r.p_hat.ln())).collect();
    let fit = log_slope(&pts)?;
    let xs: Vec<f64> = runs.iter().map(|r| r.epsilon.ln()).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    let sse: f64 = runs
        .iter()
        .zip(&xs)
        .map(|(r, x)| (r.p_hat.ln() - fit.intercept - fit.slope * x).powi(2))
        .sum();
    let exponent_error = (sse / (runs.len() as f64 - 2.0) / sxx).sqrt();
    let prefactor = fit.intercept.exp();
    let consistent_with_zero = fit.slope > 3.0 * exponent_error && fit.slope > 1e-12;
    Ok(RestorationFit {
        exponent: fit.slope,
        exponent_error,
        prefactor,
        extrapolated: if consistent_with_zero { 0.0 } else { prefactor },
        consistent_with_zero,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurrentSpotCheck {
    pub rejected: u64,
    /// Smallest net current norm over rejected samples.
    pub min_rejected_current: f64,
}

/// For rejected samples, evaluates the soft current of the net
/// `initial → final` electron momenta, maximized over six photon directions.
pub fn rejected_current_check(
    sqrt_s: f64,
    m_e: f64,
    epsilon: f64,
    n: u64,
    seed: u64,
    charge: f64,
) -> Result<CurrentSpotCheck> {
    check_inputs(epsilon, n)?;
    let probes: Vec<PhotonMode> = [(0.5, 0.0), (0.5, PI), (1.0, 0.5 * PI), (2.0, 1.5 * PI), (2.5, 0.3), (1.4, 2.0)]
        .iter()
        .map(|&(t, p)| PhotonMode::new(direction(t, p), 1.0))
        .collect();
    let law = ScatterLaw::Isotropic;
    let mut rejected = 0;
    let mut min_current = f64::INFINITY;
    for (shard, count) in shard_sizes(n) {
        for d in shard_directions(&law, seed, shard, count) {
            let theta = polar_angle(d);
            if theta <= epsilon {
                continue;
            }
            let ev: ScatteringEvent = build_cms_event(sqrt_s, theta, d[1].atan2(d[0]), m_e, 0.0)?;
            let j = probes
                .iter()
                .map(|k| current_at(&ev.p_e_in, &ev.p_e_out, &k.momentum(), charge).euclid_norm())
                .fold(0.0, f64::max);
            rejected += 1;
            min_current = min_current.min(j);
        }
    }
    Ok(CurrentSpotCheck {
        rejected,
        min_rejected_current: min_current,
    })
}
