//! Dirac spinors and the first-order V−A contact amplitude for `e ν → e ν`.
//!
//! Gamma matrices are in the Dirac representation,
//!
//! ```text
//! γ⁰ = [[1, 0], [0, −1]],  γⁱ = [[0, σⁱ], [−σⁱ, 0]],  γ⁵ = iγ⁰γ¹γ²γ³ = [[0, 1], [1, 0]]
//! ```
//!
//! and the vertex is `γ^μ (1 − γ⁵)`, which keeps only left-chiral
//! components. (Older conventions define `γ⁵` with the opposite sign and
//! write the same vertex as `γ^μ (1 + γ⁵)`.)

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::kinematics::{build_cms_event, FourVector, ScatteringEvent};
use crate::radiation::gauss_legendre;

/// Fermi constant in GeV⁻².
pub const FERMI_CONSTANT_GEV: f64 = 1.166_378_7e-5;
/// Electron mass in GeV.
pub const ELECTRON_MASS_GEV: f64 = 0.510_998_95e-3;

/// Fermi constant in units of `m_e⁻²`.
pub fn fermi_coupling() -> f64 {
    FERMI_CONSTANT_GEV * ELECTRON_MASS_GEV * ELECTRON_MASS_GEV
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub type Gamma = Matrix4<Complex64>;

/// Minkowski metric diagonal.
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

fn block(tl: [[Complex64; 2]; 2], tr: [[Complex64; 2]; 2], bl: [[Complex64; 2]; 2], br: [[Complex64; 2]; 2]) -> Gamma {
    Matrix4::from_fn(|r, c| match (r < 2, c < 2) {
        (true, true) => tl[r][c],
        (true, false) => tr[r][c - 2],
        (false, true) => bl[r - 2][c],
        (false, false) => br[r - 2][c - 2],
    })
}

fn pauli(i: usize) -> [[Complex64; 2]; 2] {
    match i {
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        3 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => [[ONE, ZERO], [ZERO, ONE]],
    }
}

fn neg2(m: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    m.map(|row| row.map(|x| -x))
}

/// `γ^μ` in the Dirac representation.
pub fn gamma(mu: usize) -> Gamma {
    let z = [[ZERO; 2]; 2];
    match mu {
        0 => block(pauli(0), z, z, neg2(pauli(0))),
        i @ 1..=3 => block(z, pauli(i), neg2(pauli(i)), z),
        _ => panic!("gamma index {mu} out of range"),
    }
}

/// `γ⁵ = iγ⁰γ¹γ²γ³`.
pub fn gamma5() -> Gamma {
    gamma(0) * gamma(1) * gamma(2) * gamma(3) * I
}

/// `p̸ = γ^μ p_μ`.
pub fn slash(p: &FourVector) -> Gamma {
    let c = p.as_array();
    (0..4).fold(Gamma::zeros(), |acc, mu| acc + gamma(mu) * Complex64::new(METRIC[mu] * c[mu], 0.0))
}

/// Left-chiral V−A vertex `γ^μ (1 − γ⁵)`.
pub fn vertex(mu: usize) -> Gamma {
    gamma(mu) * (Gamma::identity() - gamma5())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Helicity {
    L,
    R,
}

impl Helicity {
    pub fn sign(self) -> f64 {
        match self {
            Helicity::L => -1.0,
            Helicity::R => 1.0,
        }
    }

    pub const BOTH: [Helicity; 2] = [Helicity::L, Helicity::R];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HelicityConfig {
    pub e_in: Helicity,
    pub nu_in: Helicity,
    pub e_out: Helicity,
    pub nu_out: Helicity,
}

impl HelicityConfig {
    pub const ALL_LEFT: Self = Self {
        e_in: Helicity::L,
        nu_in: Helicity::L,
        e_out: Helicity::L,
        nu_out: Helicity::L,
    };

    /// All sixteen configurations.
    pub fn all() -> impl Iterator<Item = Self> {
        Helicity::BOTH.into_iter().flat_map(|a| {
            Helicity::BOTH.into_iter().flat_map(move |b| {
                Helicity::BOTH.into_iter().flat_map(move |c| {
                    Helicity::BOTH.into_iter().map(move |d| Self {
                        e_in: a,
                        nu_in: b,
                        e_out: c,
                        nu_out: d,
                    })
                })
            })
        })
    }
}

/// Positive-energy helicity eigenspinor normalized to `u†u = 2E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracSpinor {
    pub components: Vector4<Complex64>,
    pub momentum: FourVector,
    pub helicity: Helicity,
    pub mass: f64,
}

/// Two-component helicity eigenstate along the unit vector `(θ, φ)`.
fn two_spinor(p: &FourVector, h: Helicity) -> [Complex64; 2] {
    let rho = (p.x * p.x + p.y * p.y).sqrt();
    let theta = rho.atan2(p.z);
    let phi = if rho == 0.0 { 0.0 } else { p.y.atan2(p.x) };
    let (s, c) = (0.5 * theta).sin_cos();
    match h {
        Helicity::R => [Complex64::new(c, 0.0), Complex64::from_polar(s, phi)],
        Helicity::L => [-Complex64::from_polar(s, -phi), Complex64::new(c, 0.0)],
    }
}

pub fn dirac_spinor(p: &FourVector, helicity: Helicity, mass: f64) -> Result<DiracSpinor> {
    let shell = (p.msq() - mass * mass).abs();
    if shell > 1e-9 * p.t.abs().max(1.0).powi(2) || p.t <= 0.0 {
        return contract(format!("momentum off shell by {shell:.3e} for mass {mass}"));
    }
    let chi = two_spinor(p, helicity);
    let upper = (p.t + mass).sqrt();
    // |p|/√(E+m) = √(E−m); the massless form keeps the chiral zero exact.
    let lower = helicity.sign() * if mass == 0.0 { p.t.sqrt() } else { p.spatial_norm() / upper };
    Ok(DiracSpinor {
        components: Vector4::new(chi[0] * upper, chi[1] * upper, chi[0] * lower, chi[1] * lower),
        momentum: *p,
        helicity,
        mass,
    })
}

impl DiracSpinor {
    /// `ū = u†γ⁰` as a row.
    pub fn bar(&self) -> nalgebra::RowVector4<Complex64> {
        self.components.adjoint() * gamma(0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.components.norm_squared()
    }

    /// `‖(p̸ − m) u‖`.
    pub fn dirac_residual(&self) -> f64 {
        ((slash(&self.momentum) - Gamma::identity() * Complex64::new(self.mass, 0.0)) * self.components).norm()
    }

    /// `⟨u| Σ·p̂ |u⟩ / ⟨u|u⟩`.
    pub fn helicity_expectation(&self) -> f64 {
        let n = self.momentum.spatial_norm();
        let dir = [self.momentum.x / n, self.momentum.y / n, self.momentum.z / n];
        let sigma = (1..=3).fold(Gamma::zeros(), |acc, i| {
            acc + block(pauli(i), [[ZERO; 2]; 2], [[ZERO; 2]; 2], pauli(i)) * Complex64::new(dir[i - 1], 0.0)
        });
        (self.components.adjoint() * sigma * self.components)[(0, 0)].re / self.norm_sq()
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        Self {
            components: self.components * Complex64::from_polar(1.0, phase),
            ..*self
        }
    }
}

/// Chiral current `ū' Γ^μ u` for all four μ.
pub fn chiral_current(out: &DiracSpinor, inc: &DiracSpinor) -> [Complex64; 4] {
    let bar = out.bar();
    std::array::from_fn(|mu| (bar * vertex(mu) * inc.components)[(0, 0)])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakAmplitude {
    pub value: Complex64,
    pub theta: f64,
    pub phi: f64,
    pub helicities: HelicityConfig,
}

/// Amplitude from explicit spinors, `(G/√2) J_e·J_ν`.
pub fn amplitude_from_spinors(
    e_in: &DiracSpinor,
    nu_in: &DiracSpinor,
    e_out: &DiracSpinor,
    nu_out: &DiracSpinor,
    g: f64,
) -> Complex64 {
    let je = chiral_current(e_out, e_in);
    let jn = chiral_current(nu_out, nu_in);
    let dot: Complex64 = (0..4).map(|mu| je[mu] * jn[mu] * METRIC[mu]).sum();
    dot * (g / 2f64.sqrt())
}

pub fn weak_amplitude(event: &ScatteringEvent, helicities: HelicityConfig, g: f64) -> Result<WeakAmplitude> {
    let e_in = dirac_spinor(&event.p_e_in, helicities.e_in, event.m_e_val)?;
    let nu_in = dirac_spinor(&event.p_nu_in, helicities.nu_in, event.m_nu_val)?;
    let e_out = dirac_spinor(&event.p_e_out, helicities.e_out, event.m_e_val)?;
    let nu_out = dirac_spinor(&event.p_nu_out, helicities.nu_out, event.m_nu_val)?;
    Ok(WeakAmplitude {
        value: amplitude_from_spinors(&e_in, &nu_in, &e_out, &nu_out, g),
        theta: event.theta,
        phi: event.phi,
        helicities,
    })
}

/// `Σ |M|²` over all sixteen helicity configurations.
pub fn spin_summed_squared(event: &ScatteringEvent, g: f64) -> Result<f64> {
    HelicityConfig::all().try_fold(0.0, |acc, h| Ok(acc + weak_amplitude(event, h, g)?.value.norm_sqr()))
}

/// `Σ |M|²` with the incoming electron helicity fixed.
pub fn squared_for_electron_helicity(event: &ScatteringEvent, e_in: Helicity, g: f64) -> Result<f64> {
    HelicityConfig::all()
        .filter(|h| h.e_in == e_in)
        .try_fold(0.0, |acc, h| Ok(acc + weak_amplitude(event, h, g)?.value.norm_sqr()))
}

/// `dσ/dΩ` in the c.m.s.: initial-spin-averaged `|M|²` over `64π² s`
/// (elastic, so `|p_f| = |p_i|`).
pub fn differential_rate(event: &ScatteringEvent, g: f64) -> Result<f64> {
    let s = event.sqrt_s * event.sqrt_s;
    Ok(0.25 * spin_summed_squared(event, g)? / (64.0 * PI * PI * s))
}

/// Polar/azimuthal grid for angle-integrated cross sections.
pub const ANGULAR_POLAR_NODES: usize = 24;
pub const ANGULAR_AZIMUTH_NODES: usize = 24;

/// Integrates `f(event)` over the c.m.s. solid angle of the outgoing electron.
pub fn integrate_over_angles<F: Fn(&ScatteringEvent) -> Result<f64>>(
    sqrt_s: f64,
    m_e: f64,
    m_nu: f64,
    f: F,
) -> Result<f64> {
    let (x, w) = gauss_legendre(ANGULAR_POLAR_NODES);
    let dphi = 2.0 * PI / ANGULAR_AZIMUTH_NODES as f64;
    let mut total = 0.0;
    for (c, wc) in x.iter().zip(&w) {
        for j in 0..ANGULAR_AZIMUTH_NODES {
            let ev = build_cms_event(sqrt_s, c.acos(), (j as f64 + 0.5) * dphi, m_e, m_nu)?;
            total += wc * dphi * f(&ev)?;
        }
    }
    Ok(total)
}

/// `σ_R / σ_L` for pure incoming electron helicity states at the kinematics
/// of `event` (its angles are ignored).
pub fn helicity_asymmetry(event: &ScatteringEvent, g: f64) -> Result<f64> {
    let (rs, me, mn) = (event.sqrt_s, event.m_e_val, event.m_nu_val);
    let sigma_l = integrate_over_angles(rs, me, mn, |ev| squared_for_electron_helicity(ev, Helicity::L, g))?;
    let sigma_r = integrate_over_angles(rs, me, mn, |ev| squared_for_electron_helicity(ev, Helicity::R, g))?;
    Ok(sigma_r / sigma_l)
}

/// Relative spread `max/min − 1` of the differential rate over a polar scan.
pub fn rate_anisotropy(sqrt_s: f64, m_e: f64, m_nu: f64, g: f64, thetas: &[f64]) -> Result<f64> {
    let rates = thetas
        .iter()
        .map(|&t| differential_rate(&build_cms_event(sqrt_s, t, 0.0, m_e, m_nu)?, g))
        .collect::<Result<Vec<_>>>()?;
    let max = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(max / min - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn clifford_algebra() {
        for mu in 0..4 {
            for nu in 0..4 {
                let anti = gamma(mu) * gamma(nu) + gamma(nu) * gamma(mu);
                let expect = if mu == nu { 2.0 * METRIC[mu] } else { 0.0 };
                assert!((anti - Gamma::identity() * Complex64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
        let g5 = gamma5();
        assert!((g5 * g5 - Gamma::identity()).norm() < 1e-14);
    }

    #[test]
    fn spinor_normalization() {
        let p = FourVector::on_shell(1.0, [0.0, 0.0, 24.0f64.sqrt()]);
        assert_eq!(p.t, 5.0);
        let u = dirac_spinor(&p, Helicity::L, 1.0).unwrap();
        assert!((u.norm_sq() - 10.0).abs() < 1e-13);
    }

    #[test]
    fn off_shell_rejected() {
        let p = FourVector::new(5.0, 0.0, 0.0, 1.0);
        assert!(matches!(dirac_spinor(&p, Helicity::L, 1.0), Err(crate::Error::Contract(_))));
    }

    #[test]
    fn right_handed_massless_electron_decouples() {
        let ev = build_cms_event(10.0, 1.0, 0.4, 0.0, 0.0).unwrap();
        for h in HelicityConfig::all().filter(|h| h.e_in == Helicity::R) {
            assert_eq!(weak_amplitude(&ev, h, 1.0).unwrap().value, ZERO);
        }
        assert_eq!(helicity_asymmetry(&ev, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn phase_rotation_keeps_modulus() {
        let ev = build_cms_event(10.0, FRAC_PI_2, 0.0, 1.0, 0.0).unwrap();
        let s = |p: &FourVector, m: f64| dirac_spinor(p, Helicity::L, m).unwrap();
        let (a, b, c, d) = (s(&ev.p_e_in, 1.0), s(&ev.p_nu_in, 0.0), s(&ev.p_e_out, 1.0), s(&ev.p_nu_out, 0.0));
        let m0 = amplitude_from_spinors(&a, &b, &c, &d, 1.0);
        let m1 = amplitude_from_spinors(&a.with_phase(0.3), &b.with_phase(-1.1), &c.with_phase(2.0), &d.with_phase(0.7), 1.0);
        assert!((m0.norm() - m1.norm()).abs() < 1e-12 * m0.norm());
    }
}
