//! Coherent-state functionals of the soft radiation field at finite cutoffs.
//!
//! With `dk̃ = d³k / k0` and the physical polarization sum,
//!
//! ```text
//! V(J)  = 1/(2(2π)³) ∫ dk̃ Σ_λ |J·e^λ|²
//! N̄     = 2 V(J)                       (mean photon number)
//! |⟨f|0⟩| = exp(−V) = exp(−N̄/2)
//! ⟨γ^m|γ^l⟩ = exp(−D_lm / 2 + i Im Σ β*α + i δ_lm),   δ_lm = V(J^l) − V(J^m)
//! ```
//!
//! where `D_lm` is the photon number of the difference current `J^l − J^m`.
//! Since `J(λk) = J(k)/λ`, every integrand is `k0⁻²` times a function of
//! direction; the quadrature double sum is therefore evaluated as a product
//! of an energy sum and an angular sum. [`RadiationModel::number_integral`]
//! does the full double sum with the covariant contraction instead and serves
//! as the independent cross-check.

pub mod quadrature;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::current::{
    metric_intensity, physical_charge, soft_current, transverse_projections, ComplexFourVector, PhotonMode,
};
use crate::error::{contract, domain, Result};
use crate::kinematics::{build_cms_event, ScatteringEvent};
pub use quadrature::{
    compensated_sum, gauss_legendre, AngularNode, CutoffWindow, EnergyNode, PhotonQuadrature, QuadratureResolution,
};

/// `(2π)³`.
pub const PHASE_SPACE_NORM: f64 = 8.0 * PI * PI * PI;

/// Ratio of radiated energy to momentum transfer above which the
/// classical-current approximation is flagged.
pub const BRF_WARNING_RATIO: f64 = 0.1;

/// Incoming legs of two branches must agree to this relative tolerance.
pub const SHARED_LEG_TOL: f64 = 1e-12;

/// Transverse current projections `J·e^λ` at unit photon energy on every
/// angular node of a quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularProfile {
    projections: Vec<[Complex64; 2]>,
    incoming: ScatteringEvent,
}

impl AngularProfile {
    pub fn projections(&self) -> &[[Complex64; 2]] {
        &self.projections
    }

    pub fn event(&self) -> &ScatteringEvent {
        &self.incoming
    }
}

/// Power-law fit `value = intercept + slope · ln(1/k_min)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub max_abs_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumBin {
    pub k_lo: f64,
    pub k_hi: f64,
    pub photons: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiationReport {
    pub v: f64,
    pub n_bar: f64,
    /// `N̄` from the covariant number-density double sum.
    pub n_bar_direct: f64,
    pub vacuum_persistence: f64,
    pub radiated_energy: f64,
    pub momentum_transfer: f64,
    pub brf_ratio: f64,
    pub brf_warning: bool,
    pub spectrum: Vec<SpectrumBin>,
}

/// One entry of the phase-divergence coefficient table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseCoefficient {
    pub theta_l: f64,
    pub phi_l: f64,
    pub theta_m: f64,
    pub phi_m: f64,
    /// Angle between the two outgoing electron momenta.
    pub opening_angle: f64,
    /// `dδ_lm / d ln(1/k_min)`.
    pub coefficient: f64,
}

/// Outcome of testing whether the divergence coefficient is a function of
/// the opening angle alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpeningAngleVerdict {
    pub rows: Vec<PhaseCoefficient>,
    /// Largest coefficient spread among rows sharing an opening angle.
    pub max_spread: f64,
    /// Largest |coefficient| in the table.
    pub scale: f64,
    pub opening_angle_only: bool,
}

/// Quadrature plus coupling; the entry point for every radiation functional.
#[derive(Debug, Clone)]
pub struct RadiationModel {
    quad: PhotonQuadrature,
    charge: f64,
}

impl RadiationModel {
    pub fn new(quad: PhotonQuadrature, charge: f64) -> Self {
        Self { quad, charge }
    }

    /// Default resolution and the physical charge.
    pub fn physical() -> Result<Self> {
        Ok(Self::new(PhotonQuadrature::new(QuadratureResolution::default())?, physical_charge()))
    }

    pub fn quadrature(&self) -> &PhotonQuadrature {
        &self.quad
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn profile(&self, event: &ScatteringEvent) -> Result<AngularProfile> {
        let projections = if event.is_forward() {
            vec![[Complex64::new(0.0, 0.0); 2]; self.quad.angular().len()]
        } else {
            self.quad
                .angular()
                .par_iter()
                .map(|node| soft_current(event, &node.mode, self.charge).map(|j| transverse_projections(&j, &node.mode)))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(AngularProfile {
            projections,
            incoming: *event,
        })
    }

    /// `Σ_i w_i / k_i²`, which equals `ln(k_max/k_min)` up to rounding.
    fn radial_sum(&self, window: &CutoffWindow) -> f64 {
        compensated_sum(self.quad.energy_nodes(window).iter().map(|e| e.log_step))
    }

    fn angular_sum<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        compensated_sum(self.quad.angular().iter().enumerate().map(|(j, n)| n.weight * f(j)))
    }

    fn intensity(p: &[Complex64; 2]) -> f64 {
        p[0].norm_sqr() + p[1].norm_sqr()
    }

    pub fn profile_v(&self, profile: &AngularProfile, window: &CutoffWindow) -> f64 {
        let ang = self.angular_sum(|j| Self::intensity(&profile.projections[j]));
        self.radial_sum(window) * ang / (2.0 * PHASE_SPACE_NORM)
    }

    /// `V(J)` over `window`.
    pub fn v_functional(&self, event: &ScatteringEvent, window: &CutoffWindow) -> Result<f64> {
        Ok(self.profile_v(&self.profile(event)?, window))
    }

    /// Mean photon number `N̄ = 2V`.
    pub fn mean_photon_number(&self, event: &ScatteringEvent, window: &CutoffWindow) -> Result<f64> {
        Ok(2.0 * self.v_functional(event, window)?)
    }

    /// `N̄ = (2π)⁻³ ∫ dk̃ (−J*·J)`, evaluated node by node without using the
    /// energy scaling of the current.
    pub fn number_integral(&self, event: &ScatteringEvent, window: &CutoffWindow) -> Result<f64> {
        if event.is_forward() {
            return Ok(0.0);
        }
        let energies = self.quad.energy_nodes(window);
        let rows = energies
            .par_iter()
            .map(|e| {
                let mut acc = quadrature::Summation::default();
                for node in self.quad.angular() {
                    let mode = node.mode.with_energy(e.k0);
                    let j = soft_current(event, &mode, self.charge)?;
                    // k0² is folded into the current so tiny k0 neither overflows nor underflows.
                    let scaled = ComplexFourVector(j.0.map(|c| c * e.k0));
                    acc.add(node.weight * metric_intensity(&scaled));
                }
                Ok(e.log_step * acc.total())
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(compensated_sum(rows) / PHASE_SPACE_NORM)
    }

    /// Photon number per energy bin `(k_lo, k_hi)`.
    pub fn energy_spectrum(&self, event: &ScatteringEvent, bins: &[(f64, f64)]) -> Result<Vec<SpectrumBin>> {
        let profile = self.profile(event)?;
        bins.iter()
            .map(|&(lo, hi)| {
                let w = CutoffWindow::new(lo, hi)?;
                Ok(SpectrumBin {
                    k_lo: lo,
                    k_hi: hi,
                    photons: 2.0 * self.profile_v(&profile, &w),
                })
            })
            .collect()
    }

    /// `|⟨f|0⟩| = exp(−V)`.
    pub fn vacuum_persistence(&self, event: &ScatteringEvent, window: &CutoffWindow) -> Result<f64> {
        Ok((-self.v_functional(event, window)?).exp())
    }

    /// `∫ k0 dN̄`.
    pub fn radiated_energy(&self, profile: &AngularProfile, window: &CutoffWindow) -> f64 {
        let ang = self.angular_sum(|j| Self::intensity(&profile.projections[j]));
        let radial = compensated_sum(self.quad.energy_nodes(window).iter().map(|e| e.weight / e.k0));
        radial * ang / PHASE_SPACE_NORM
    }

    pub fn report(&self, event: &ScatteringEvent, window: &CutoffWindow) -> Result<RadiationReport> {
        let profile = self.profile(event)?;
        let v = self.profile_v(&profile, window);
        let n_bar_direct = self.number_integral(event, window)?;
        let radiated_energy = self.radiated_energy(&profile, window);
        let momentum_transfer = event.momentum_transfer();
        let brf_ratio = if radiated_energy == 0.0 { 0.0 } else { radiated_energy / momentum_transfer };
        let spectrum = self.energy_spectrum(event, &decade_bins(window))?;
        Ok(RadiationReport {
            v,
            n_bar: 2.0 * v,
            n_bar_direct,
            vacuum_persistence: (-v).exp(),
            radiated_energy,
            momentum_transfer,
            brf_ratio,
            brf_warning: brf_ratio > BRF_WARNING_RATIO,
            spectrum,
        })
    }

    pub fn check_shared(l: &ScatteringEvent, m: &ScatteringEvent) -> Result<()> {
        if !l.shares_incoming(m, SHARED_LEG_TOL) {
            return contract("branches do not share incoming legs");
        }
        Ok(())
    }

    /// Photon number `D_lm` of the difference current `J^l − J^m`.
    pub fn profile_distance(&self, l: &AngularProfile, m: &AngularProfile, window: &CutoffWindow) -> f64 {
        let ang = self.angular_sum(|j| {
            let (a, b) = (&l.projections[j], &m.projections[j]);
            (a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()
        });
        self.radial_sum(window) * ang / PHASE_SPACE_NORM
    }

    /// `⟨γ^m|γ^l⟩` from precomputed profiles.
    pub fn profile_overlap(&self, l: &AngularProfile, m: &AngularProfile, window: &CutoffWindow) -> Result<Complex64> {
        Self::check_shared(&l.incoming, &m.incoming)?;
        let radial = self.radial_sum(window);
        let mut dist = quadrature::Summation::default();
        let mut cross = quadrature::Summation::default();
        let mut int_l = quadrature::Summation::default();
        let mut int_m = quadrature::Summation::default();
        for (j, node) in self.quad.angular().iter().enumerate() {
            let (a, b) = (&l.projections[j], &m.projections[j]);
            dist.add(node.weight * ((a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()));
            cross.add(node.weight * (b[0].conj() * a[0] + b[1].conj() * a[1]).im);
            int_l.add(node.weight * Self::intensity(a));
            int_m.add(node.weight * Self::intensity(b));
        }
        let scale = radial / PHASE_SPACE_NORM;
        Ok(overlap_from_moments(
            scale * dist.total(),
            scale * cross.total(),
            scale * int_l.total(),
            scale * int_m.total(),
        ))
    }

    /// `⟨γ^m|γ^l⟩` for two branches sharing incoming legs.
    pub fn branch_overlap(
        &self,
        event_l: &ScatteringEvent,
        event_m: &ScatteringEvent,
        window: &CutoffWindow,
    ) -> Result<Complex64> {
        Self::check_shared(event_l, event_m)?;
        self.profile_overlap(&self.profile(event_l)?, &self.profile(event_m)?, window)
    }

    /// `D_lm` for two branches.
    pub fn overlap_distance(
        &self,
        event_l: &ScatteringEvent,
        event_m: &ScatteringEvent,
        window: &CutoffWindow,
    ) -> Result<f64> {
        Self::check_shared(event_l, event_m)?;
        Ok(self.profile_distance(&self.profile(event_l)?, &self.profile(event_m)?, window))
    }

    /// `δ_lm = V(J^l) − V(J^m)`.
    pub fn phase_difference(
        &self,
        event_l: &ScatteringEvent,
        event_m: &ScatteringEvent,
        window: &CutoffWindow,
    ) -> Result<f64> {
        Self::check_shared(event_l, event_m)?;
        let (pl, pm) = (self.profile(event_l)?, self.profile(event_m)?);
        Ok(self.profile_v(&pl, window) - self.profile_v(&pm, window))
    }

    /// Coefficient of `ln(k_max/k_min)` in `V(J)`.
    pub fn log_coefficient(&self, profile: &AngularProfile) -> f64 {
        self.angular_sum(|j| Self::intensity(&profile.projections[j])) / (2.0 * PHASE_SPACE_NORM)
    }

    /// Tabulates `dδ_lm/d ln(1/k_min)` for branch pairs grouped by opening
    /// angle: for each opening angle, pairs in a common azimuthal plane with
    /// different polar angles, and pairs at equal polar angle separated in
    /// azimuth. Reports whether the coefficient depends on the opening angle
    /// alone (spread below `rel_tol` of the table's largest coefficient).
    pub fn opening_angle_test(
        &self,
        sqrt_s: f64,
        masses: (f64, f64),
        opening_angles: &[f64],
        polar_angles: &[f64],
        rel_tol: f64,
    ) -> Result<OpeningAngleVerdict> {
        let coef = |theta: f64, phi: f64| -> Result<f64> {
            let ev = build_cms_event(sqrt_s, theta, phi, masses.0, masses.1)?;
            Ok(self.log_coefficient(&self.profile(&ev)?))
        };
        let mut rows = Vec::new();
        let mut max_spread = 0.0_f64;
        for &psi in opening_angles {
            let mut group = Vec::new();
            for &theta in polar_angles {
                if theta + psi <= PI {
                    group.push((theta, 0.0, theta + psi, 0.0));
                }
                let st2 = theta.sin().powi(2);
                if st2 > 0.0 {
                    let c = (psi.cos() - theta.cos().powi(2)) / st2;
                    if (-1.0..=1.0).contains(&c) {
                        group.push((theta, 0.0, theta, c.acos()));
                    }
                }
            }
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (tl, pl, tm, pm) in group {
                let c = coef(tl, pl)? - coef(tm, pm)?;
                let el = build_cms_event(sqrt_s, tl, pl, masses.0, masses.1)?;
                let em = build_cms_event(sqrt_s, tm, pm, masses.0, masses.1)?;
                rows.push(PhaseCoefficient {
                    theta_l: tl,
                    phi_l: pl,
                    theta_m: tm,
                    phi_m: pm,
                    opening_angle: el.opening_angle(&em),
                    coefficient: c,
                });
                lo = lo.min(c);
                hi = hi.max(c);
            }
            if hi >= lo {
                max_spread = max_spread.max(hi - lo);
            }
        }
        let scale = rows.iter().fold(0.0_f64, |m, r| m.max(r.coefficient.abs()));
        let opening_angle_only = max_spread <= rel_tol * scale;
        Ok(OpeningAngleVerdict {
            rows,
            max_spread,
            scale,
            opening_angle_only,
        })
    }
}

/// `exp(−D/2 + iφ)`, the overlap of two displaced vacua whose squared
/// displacement distance is `D` and whose total relative phase is `φ`.
pub fn coherent_overlap_closed_form(distance: f64, phase: f64) -> Complex64 {
    Complex64::from_polar((-0.5 * distance).exp(), phase)
}

/// Window-independent angular moments for a set of branches. Every
/// overlap at any window is the radial sum times these.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMoments {
    /// `Σ ω |a_l|²` per branch.
    intensity: Vec<f64>,
    /// Row-major `Σ ω |a_l − a_m|²`.
    distance: Vec<f64>,
    /// Row-major `Σ ω Im(a_m* a_l)`.
    cross: Vec<f64>,
    n: usize,
}

impl OverlapMoments {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `⟨γ^m|γ^l⟩` at `window`.
    pub fn overlap(&self, model: &RadiationModel, l: usize, m: usize, window: &CutoffWindow) -> Complex64 {
        let scale = model.radial_sum(window) / PHASE_SPACE_NORM;
        let k = l * self.n + m;
        overlap_from_moments(
            scale * self.distance[k],
            scale * self.cross[k],
            scale * self.intensity[l],
            scale * self.intensity[m],
        )
    }

    /// `D_lm` at `window`.
    pub fn distance(&self, model: &RadiationModel, l: usize, m: usize, window: &CutoffWindow) -> f64 {
        model.radial_sum(window) / PHASE_SPACE_NORM * self.distance[l * self.n + m]
    }

    /// Coefficient of `ln(k_max/k_min)` in `D_lm`.
    pub fn distance_log_coefficient(&self, l: usize, m: usize) -> f64 {
        self.distance[l * self.n + m] / PHASE_SPACE_NORM
    }
}

impl RadiationModel {
    /// Angular moments for every pair of `profiles`, which must share
    /// incoming legs. Pairs are evaluated in parallel; each entry is its own
    /// ordered sum, so the result does not depend on the thread count.
    pub fn overlap_moments(&self, profiles: &[AngularProfile]) -> Result<OverlapMoments> {
        if let Some(first) = profiles.first() {
            for p in profiles {
                Self::check_shared(&first.incoming, &p.incoming)?;
            }
        }
        let n = profiles.len();
        let intensity: Vec<f64> = profiles
            .iter()
            .map(|p| self.angular_sum(|j| Self::intensity(&p.projections[j])))
            .collect();
        let rows: Vec<Vec<(f64, f64)>> = (0..n)
            .into_par_iter()
            .map(|l| {
                (0..n)
                    .map(|m| {
                        if m <= l {
                            return (0.0, 0.0);
                        }
                        let (a, b) = (&profiles[l].projections, &profiles[m].projections);
                        let mut dist = quadrature::Summation::default();
                        let mut cross = quadrature::Summation::default();
                        for (j, node) in self.quad.angular().iter().enumerate() {
                            let (x, y) = (&a[j], &b[j]);
                            dist.add(node.weight * ((x[0] - y[0]).norm_sqr() + (x[1] - y[1]).norm_sqr()));
                            cross.add(node.weight * (y[0].conj() * x[0] + y[1].conj() * x[1]).im);
                        }
                        (dist.total(), cross.total())
                    })
                    .collect()
            })
            .collect();
        let mut distance = vec![0.0; n * n];
        let mut cross = vec![0.0; n * n];
        for l in 0..n {
            for m in (l + 1)..n {
                let (d, c) = rows[l][m];
                distance[l * n + m] = d;
                distance[m * n + l] = d;
                cross[l * n + m] = c;
                cross[m * n + l] = -c;
            }
        }
        Ok(OverlapMoments {
            intensity,
            distance,
            cross,
            n,
        })
    }
}

/// Branch overlap from the photon numbers of the difference current
/// (`distance`), of each branch (`number_l`, `number_m`) and the cross term
/// `Im Σ β*α`. The dressing phase difference is `δ_lm = (N_l − N_m)/2`.
pub fn overlap_from_moments(distance: f64, cross_phase: f64, number_l: f64, number_m: f64) -> Complex64 {
    coherent_overlap_closed_form(distance, cross_phase + 0.5 * (number_l - number_m))
}

/// Geometric decade bins spanning `window` (last bin may be partial).
pub fn decade_bins(window: &CutoffWindow) -> Vec<(f64, f64)> {
    let mut bins = Vec::new();
    let mut lo = window.k_min;
    while lo < window.k_max * (1.0 - 1e-12) {
        let hi = (lo * 10.0).min(window.k_max);
        bins.push((lo, hi));
        lo = hi;
    }
    bins
}

/// Least-squares slope of `value` against `ln(1/k_min)`.
pub fn log_slope(scan: &[(f64, f64)]) -> Result<LogFit> {
    if scan.len() < 3 {
        return domain(format!("log_slope needs at least 3 points, got {}", scan.len()));
    }
    if scan.iter().any(|(k, v)| !(*k > 0.0) || !v.is_finite()) {
        return domain("log_slope needs positive k_min and finite values");
    }
    let xs: Vec<f64> = scan.iter().map(|(k, _)| (1.0 / k).ln()).collect();
    let ys: Vec<f64> = scan.iter().map(|(_, v)| *v).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return domain("log_slope needs distinct k_min values");
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    let ss_res: f64 = resid.iter().map(|r| r * r).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LogFit {
        slope,
        intercept,
        r_squared,
        max_abs_residual: resid.iter().fold(0.0, |m, r| m.max(r.abs())),
    })
}

/// Geometric `k_min` values from `k_hi` down to `k_lo`, `per_decade` per decade.
pub fn kmin_scan(k_hi: f64, k_lo: f64, per_decade: usize) -> Vec<f64> {
    let decades = (k_hi / k_lo).log10();
    let n = (decades * per_decade as f64).round() as usize;
    (0..=n)
        .map(|i| k_hi * 10f64.powf(-(i as f64) / per_decade as f64))
        .collect()
}

/// Angular profile for a mode that is not on the quadrature grid; used by
/// the Fock-space discretization.
pub fn single_mode_projections(event: &ScatteringEvent, mode: &PhotonMode, charge: f64) -> Result<[Complex64; 2]> {
    if event.is_forward() {
        return Ok([Complex64::new(0.0, 0.0); 2]);
    }
    soft_current(event, mode, charge).map(|j| transverse_projections(&j, mode))
}
