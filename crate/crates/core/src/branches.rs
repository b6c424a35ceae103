//! Branch ensemble of the dressed final state and its reduced density
//! matrix over branch labels.
//!
//! Branch 0 is the unscattered term with amplitude `M₀` and no radiation.
//! Branches `l ≥ 1` sit on a c.m.s. angular grid with `c_l ∝ M_w √ω_l`.
//! Tracing out the radiation gives `ρ_lm = c_l c_m* ⟨γ^m|γ^l⟩`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::kinematics::{build_cms_event, ScatteringEvent};
use crate::radiation::{gauss_legendre, CutoffWindow, OverlapMoments, RadiationModel};
use crate::weak::{weak_amplitude, HelicityConfig};

/// Gauss–Legendre polar × uniform azimuthal grid of outgoing-electron
/// directions. Never contains the exact forward direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchGrid {
    pub polar_nodes: usize,
    pub azimuth_nodes: usize,
}

impl Default for BranchGrid {
    fn default() -> Self {
        Self {
            polar_nodes: 8,
            azimuth_nodes: 16,
        }
    }
}

impl BranchGrid {
    /// `(theta, phi, solid-angle weight)` for every node.
    pub fn nodes(&self) -> Vec<(f64, f64, f64)> {
        let (x, w) = gauss_legendre(self.polar_nodes);
        let dphi = 2.0 * PI / self.azimuth_nodes.max(1) as f64;
        let mut out = Vec::with_capacity(self.polar_nodes * self.azimuth_nodes);
        for (c, wc) in x.iter().zip(&w) {
            for j in 0..self.azimuth_nodes {
                out.push((c.acos(), j as f64 * dphi, wc * dphi));
            }
        }
        out
    }

    pub fn refined(&self) -> Self {
        Self {
            polar_nodes: 2 * self.polar_nodes,
            azimuth_nodes: 2 * self.azimuth_nodes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentBranch {
    pub label: usize,
    pub event: ScatteringEvent,
    pub amplitude: Complex64,
    /// Solid angle represented by the branch; zero for branch 0.
    pub solid_angle: f64,
}

impl CoherentBranch {
    pub fn is_forward(&self) -> bool {
        self.event.is_forward()
    }
}

/// Kinematic and coupling inputs for a branch ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSpec {
    pub sqrt_s: f64,
    pub m_e: f64,
    pub m_nu: f64,
    pub grid: BranchGrid,
    /// `|M₀|²`, the probability of the unscattered branch.
    pub m0_weight: f64,
    pub coupling: f64,
    pub helicities: HelicityConfig,
}

/// Branch 0 plus one branch per grid node, normalized to `Σ|c_l|² = 1`.
pub fn build_branch_set(spec: &BranchSpec) -> Result<Vec<CoherentBranch>> {
    if !(0.0..1.0).contains(&spec.m0_weight) {
        return domain(format!("M0 weight must lie in [0, 1), got {}", spec.m0_weight));
    }
    let nodes = spec.grid.nodes();
    if nodes.is_empty() {
        return domain("empty angular grid");
    }
    let mut scattered = Vec::with_capacity(nodes.len());
    for &(theta, phi, w) in &nodes {
        let ev = build_cms_event(spec.sqrt_s, theta, phi, spec.m_e, spec.m_nu)?;
        let m = weak_amplitude(&ev, spec.helicities, spec.coupling)?.value;
        scattered.push((ev, m * w.sqrt(), w));
    }
    let norm: f64 = scattered.iter().map(|(_, c, _)| c.norm_sqr()).sum();
    if norm == 0.0 {
        return domain("every scattering amplitude vanishes for this helicity configuration");
    }
    let scale = ((1.0 - spec.m0_weight) / norm).sqrt();
    let mut out = Vec::with_capacity(scattered.len() + 1);
    out.push(CoherentBranch {
        label: 0,
        event: ScatteringEvent::forward(spec.sqrt_s, spec.m_e, spec.m_nu)?,
        amplitude: Complex64::new(spec.m0_weight.sqrt(), 0.0),
        solid_angle: 0.0,
    });
    out.extend(scattered.into_iter().enumerate().map(|(i, (event, c, w))| CoherentBranch {
        label: i + 1,
        event,
        amplitude: c * scale,
        solid_angle: w,
    }));
    Ok(out)
}

/// Branch ensemble with its precomputed radiation-overlap moments, so that
/// density matrices at many windows cost no further angular integration.
#[derive(Debug, Clone)]
pub struct BranchEnsemble {
    pub branches: Vec<CoherentBranch>,
    moments: OverlapMoments,
}

impl BranchEnsemble {
    pub fn new(model: &RadiationModel, branches: Vec<CoherentBranch>) -> Result<Self> {
        let profiles = branches
            .iter()
            .map(|b| model.profile(&b.event))
            .collect::<Result<Vec<_>>>()?;
        let moments = model.overlap_moments(&profiles)?;
        Ok(Self { branches, moments })
    }

    pub fn moments(&self) -> &OverlapMoments {
        &self.moments
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    /// `ρ_lm = c_l c_m* ⟨γ^m|γ^l⟩`.
    pub fn reduced_density(&self, model: &RadiationModel, window: &CutoffWindow) -> BranchDensityMatrix {
        let n = self.branches.len();
        let c: Vec<Complex64> = self.branches.iter().map(|b| b.amplitude).collect();
        let mut rho = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for l in 0..n {
            rho[(l, l)] = Complex64::new(c[l].norm_sqr(), 0.0);
            for m in (l + 1)..n {
                let v = c[l] * c[m].conj() * self.moments.overlap(model, l, m, window);
                rho[(l, m)] = v;
                rho[(m, l)] = v.conj();
            }
        }
        BranchDensityMatrix { rho, window: *window }
    }

    /// `sup_{l≠m} 2|c_l||c_m||⟨γ^m|γ^l⟩| · ‖B‖`, a bound on the interference
    /// term of any observable of norm `‖B‖` between two branches.
    pub fn interference_bound(&self, model: &RadiationModel, window: &CutoffWindow, observable_norm: f64) -> f64 {
        let n = self.branches.len();
        let mut best = 0.0_f64;
        for l in 0..n {
            for m in (l + 1)..n {
                let ov = self.moments.overlap(model, l, m, window).norm();
                best = best.max(2.0 * self.branches[l].amplitude.norm() * self.branches[m].amplitude.norm() * ov);
            }
        }
        best * observable_norm
    }

    /// `Σ_l |c_l|⁴`, the purity of the fully decohered state.
    pub fn decohered_purity(&self) -> f64 {
        self.branches.iter().map(|b| b.amplitude.norm_sqr().powi(2)).sum()
    }

    pub fn decoherence_scan(&self, model: &RadiationModel, k_max: f64, k_mins: &[f64]) -> Result<Vec<DecoherenceRow>> {
        k_mins
            .iter()
            .map(|&k_min| {
                let w = CutoffWindow::new(k_min, k_max)?;
                let rho = self.reduced_density(model, &w);
                let (max_off, l, m) = rho.max_off_diagonal();
                let eig = rho.eigenvalues();
                Ok(DecoherenceRow {
                    k_min,
                    purity: rho.purity(),
                    max_off_diagonal: max_off,
                    argmax: (l, m),
                    min_eigenvalue: eig.iter().cloned().fold(f64::INFINITY, f64::min),
                    interference_bound: self.interference_bound(model, &w, 1.0),
                    trace: rho.trace(),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceRow {
    pub k_min: f64,
    pub purity: f64,
    pub max_off_diagonal: f64,
    pub argmax: (usize, usize),
    pub min_eigenvalue: f64,
    pub interference_bound: f64,
    pub trace: f64,
}

/// Hermitian density matrix over branch labels.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchDensityMatrix {
    pub rho: DMatrix<Complex64>,
    pub window: CutoffWindow,
}

impl BranchDensityMatrix {
    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.rho[(i, i)].re).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.rho.clone().symmetric_eigenvalues().iter().cloned().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        v
    }

    /// Largest `|ρ_lm|` with `l < m`, and its position.
    pub fn max_off_diagonal(&self) -> (f64, usize, usize) {
        let n = self.dim();
        let mut best = (0.0, 0, 0);
        for l in 0..n {
            for m in (l + 1)..n {
                let v = self.rho[(l, m)].norm();
                if v > best.0 {
                    best = (v, l, m);
                }
            }
        }
        best
    }

    pub fn purity(&self) -> f64 {
        purity(&self.rho)
    }
}

/// `tr ρ²` for Hermitian `ρ`.
pub fn purity(rho: &DMatrix<Complex64>) -> f64 {
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// Builds the ensemble and its density matrix at one window.
pub fn reduced_density(
    model: &RadiationModel,
    branches: &[CoherentBranch],
    window: &CutoffWindow,
) -> Result<BranchDensityMatrix> {
    Ok(BranchEnsemble::new(model, branches.to_vec())?.reduced_density(model, window))
}

pub fn interference_bound(
    model: &RadiationModel,
    branches: &[CoherentBranch],
    window: &CutoffWindow,
    observable_norm: f64,
) -> Result<f64> {
    if observable_norm == 0.0 || branches.len() < 2 {
        return Ok(0.0);
    }
    Ok(BranchEnsemble::new(model, branches.to_vec())?.interference_bound(model, window, observable_norm))
}
