//! Discretized photon phase-space measure `d³k / k0`.
//!
//! Energies are placed at log-midpoints of equal cells in `ln k0`, so each
//! energy node carries weight `k0² Δ(ln k0)`. Directions use Gauss–Legendre
//! nodes in `cos θ` times a uniform azimuthal grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::current::PhotonMode;
use crate::error::{domain, Result};

/// IR/UV energy cutoffs. `k_min` is strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffWindow {
    pub k_min: f64,
    pub k_max: f64,
}

impl CutoffWindow {
    pub fn new(k_min: f64, k_max: f64) -> Result<Self> {
        if !(k_min > 0.0 && k_min.is_finite() && k_max.is_finite()) {
            return domain(format!("k_min must be positive and finite, got {k_min}"));
        }
        if !(k_min < k_max) {
            return domain(format!("empty window [{k_min}, {k_max}]"));
        }
        Ok(Self { k_min, k_max })
    }

    /// `ln(k_max / k_min)`.
    pub fn log_width(&self) -> f64 {
        (self.k_max / self.k_min).ln()
    }

    pub fn decades(&self) -> f64 {
        (self.k_max / self.k_min).log10()
    }
}

/// Node counts for the photon quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureResolution {
    pub energy_nodes_per_decade: usize,
    pub polar_nodes: usize,
    pub azimuth_nodes: usize,
}

impl Default for QuadratureResolution {
    fn default() -> Self {
        Self {
            energy_nodes_per_decade: 64,
            polar_nodes: 128,
            azimuth_nodes: 128,
        }
    }
}

impl QuadratureResolution {
    /// Every node count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            energy_nodes_per_decade: self.energy_nodes_per_decade * factor,
            polar_nodes: self.polar_nodes * factor,
            azimuth_nodes: self.azimuth_nodes * factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.energy_nodes_per_decade == 0 || self.polar_nodes == 0 || self.azimuth_nodes == 0 {
            return domain("quadrature node counts must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularNode {
    /// Unit-energy mode carrying direction and polarization basis.
    pub mode: PhotonMode,
    /// Solid-angle weight.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyNode {
    pub k0: f64,
    /// `k0² Δ(ln k0)`.
    pub weight: f64,
    /// `Δ(ln k0)` of the cell.
    pub log_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonQuadrature {
    resolution: QuadratureResolution,
    angular: Vec<AngularNode>,
}

impl PhotonQuadrature {
    pub fn new(resolution: QuadratureResolution) -> Result<Self> {
        resolution.validate()?;
        let (x, w) = gauss_legendre(resolution.polar_nodes);
        let n_phi = resolution.azimuth_nodes;
        let dphi = 2.0 * PI / n_phi as f64;
        let mut angular = Vec::with_capacity(x.len() * n_phi);
        for (&c, &wc) in x.iter().zip(w.iter()) {
            let theta = c.clamp(-1.0, 1.0).acos();
            for j in 0..n_phi {
                let phi = (j as f64 + 0.5) * dphi;
                angular.push(AngularNode {
                    mode: PhotonMode::from_angles(theta, phi, 1.0),
                    weight: wc * dphi,
                });
            }
        }
        Ok(Self { resolution, angular })
    }

    pub fn resolution(&self) -> QuadratureResolution {
        self.resolution
    }

    pub fn angular(&self) -> &[AngularNode] {
        &self.angular
    }

    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.resolution.refined(factor))
    }

    /// Energy nodes covering `window`; at least one cell.
    pub fn energy_nodes(&self, window: &CutoffWindow) -> Vec<EnergyNode> {
        let cells = ((window.decades() * self.resolution.energy_nodes_per_decade as f64).ceil() as usize).max(1);
        let u0 = window.k_min.ln();
        let du = window.log_width() / cells as f64;
        (0..cells)
            .map(|i| {
                let k0 = (u0 + (i as f64 + 0.5) * du).exp();
                EnergyNode {
                    k0,
                    weight: k0 * k0 * du,
                    log_step: du,
                }
            })
            .collect()
    }

    /// Total number of (energy, direction) cells for `window`.
    pub fn cell_count(&self, window: &CutoffWindow) -> usize {
        self.energy_nodes(window).len() * self.angular.len()
    }

    /// `∫ dk̃ f(k0, n̂)` over the window, summed in a fixed order.
    pub fn integrate<F: Fn(f64, &PhotonMode) -> f64>(&self, window: &CutoffWindow, f: F) -> f64 {
        let energies = self.energy_nodes(window);
        let mut acc = Summation::default();
        for e in &energies {
            for a in &self.angular {
                acc.add(e.weight * a.weight * f(e.k0, &a.mode));
            }
        }
        acc.total()
    }
}

/// Neumaier-compensated running sum; sequential, hence order-deterministic.
#[derive(Debug, Default, Clone, Copy)]
pub struct Summation {
    sum: f64,
    comp: f64,
}

impl Summation {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = Summation::default();
    for x in it {
        s.add(x);
    }
    s.total()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `P_n(z)` and its derivative by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
