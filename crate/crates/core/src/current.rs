//! Classical soft-photon current of a scattered electron and its
//! polarization-summed intensity.
//!
//! For an electron going from `p` to `p'` the current seen by a photon of
//! four-momentum `k` is
//!
//! ```text
//! J_μ(k) = i e ( p_μ / (p·k) − p'_μ / (p'·k) )
//! ```
//!
//! Intensities are summed over the two physical transverse polarizations.
//! Because `k·J = 0` identically this equals the covariant contraction
//! `−J*·J`; both routes are exposed so the equality can be checked.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{contract, domain, Result};
use crate::kinematics::{mdot, FourVector, ScatteringEvent};

/// Fine-structure constant (CODATA 2018).
pub const FINE_STRUCTURE: f64 = 1.0 / 137.035_999_084;

/// Electric charge for a given fine-structure constant, `e = sqrt(4πα)`.
pub fn charge_from_alpha(alpha: f64) -> f64 {
    (4.0 * PI * alpha).sqrt()
}

/// Physical electron charge in natural (Heaviside-Lorentz) units.
pub fn physical_charge() -> f64 {
    charge_from_alpha(FINE_STRUCTURE)
}

/// Four complex components under the `(+,-,-,-)` metric.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexFourVector(pub [Complex64; 4]);

impl ComplexFourVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn t(&self) -> Complex64 {
        self.0[0]
    }

    pub fn spatial(&self) -> [Complex64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|c| c.conj()))
    }

    /// Metric contraction `a·b` without conjugation.
    pub fn mdot(&self, b: &Self) -> Complex64 {
        self.0[0] * b.0[0] - self.0[1] * b.0[1] - self.0[2] * b.0[2] - self.0[3] * b.0[3]
    }

    /// Contraction with a real four-vector.
    pub fn mdot_real(&self, k: &FourVector) -> Complex64 {
        self.0[0] * k.t - self.0[1] * k.x - self.0[2] * k.y - self.0[3] * k.z
    }

    /// `J*·J`, always real for any complex four-vector.
    pub fn self_contraction(&self) -> f64 {
        self.conj().mdot(self).re
    }

    pub fn euclid_norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }
}

impl std::ops::Sub for ComplexFourVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self([
            self.0[0] - o.0[0],
            self.0[1] - o.0[1],
            self.0[2] - o.0[2],
            self.0[3] - o.0[3],
        ])
    }
}

/// A photon of energy `k0` travelling along `direction`, with a real
/// transverse polarization basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonMode {
    pub direction: [f64; 3],
    pub k0: f64,
    pub polarizations: [[f64; 3]; 2],
}

impl PhotonMode {
    /// Mode with the spherical basis `(θ̂, φ̂)` attached to `direction`.
    pub fn new(direction: [f64; 3], k0: f64) -> Self {
        let n = normalize(direction);
        let rho = (n[0] * n[0] + n[1] * n[1]).sqrt();
        let (e1, e2) = if rho < 1e-12 {
            let s = n[2].signum();
            ([s, 0.0, 0.0], [0.0, 1.0, 0.0])
        } else {
            let (cp, sp) = (n[0] / rho, n[1] / rho);
            ([n[2] * cp, n[2] * sp, -rho], [-sp, cp, 0.0])
        };
        Self {
            direction: n,
            k0,
            polarizations: [e1, e2],
        }
    }

    pub fn from_angles(theta: f64, phi: f64, k0: f64) -> Self {
        Self::new(crate::kinematics::direction(theta, phi), k0)
    }

    /// Same mode with the polarization basis rotated by `angle` about the
    /// direction of travel.
    pub fn with_basis_rotation(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let [e1, e2] = self.polarizations;
        let r1 = [
            c * e1[0] + s * e2[0],
            c * e1[1] + s * e2[1],
            c * e1[2] + s * e2[2],
        ];
        let r2 = [
            -s * e1[0] + c * e2[0],
            -s * e1[1] + c * e2[1],
            -s * e1[2] + c * e2[2],
        ];
        Self {
            polarizations: [r1, r2],
            ..*self
        }
    }

    pub fn with_energy(&self, k0: f64) -> Self {
        Self { k0, ..*self }
    }

    /// Photon four-momentum `(k0, k0 n)`.
    pub fn momentum(&self) -> FourVector {
        let n = self.direction;
        FourVector::new(self.k0, self.k0 * n[0], self.k0 * n[1], self.k0 * n[2])
    }

    /// Largest deviation from an orthonormal basis transverse to the direction.
    pub fn basis_defect(&self) -> f64 {
        let [e1, e2] = self.polarizations;
        let n = self.direction;
        [
            (dot3(&e1, &e1) - 1.0).abs(),
            (dot3(&e2, &e2) - 1.0).abs(),
            dot3(&e1, &e2).abs(),
            dot3(&e1, &n).abs(),
            dot3(&e2, &n).abs(),
            (dot3(&n, &n) - 1.0).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = dot3(&v, &v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// The current for arbitrary (possibly negative-energy) photon momentum `k`.
pub fn current_at(p: &FourVector, p_out: &FourVector, k: &FourVector, charge: f64) -> ComplexFourVector {
    if p == p_out {
        return ComplexFourVector::zero();
    }
    let a = 1.0 / mdot(p, k);
    let b = 1.0 / mdot(p_out, k);
    let c = |u: f64, v: f64| Complex64::new(0.0, charge * (u * a - v * b));
    ComplexFourVector([
        c(p.t, p_out.t),
        c(p.x, p_out.x),
        c(p.y, p_out.y),
        c(p.z, p_out.z),
    ])
}

/// Soft current of the electron leg of `event` for photon `mode`.
pub fn soft_current(event: &ScatteringEvent, mode: &PhotonMode, charge: f64) -> Result<ComplexFourVector> {
    if !(mode.k0 > 0.0 && mode.k0.is_finite()) {
        return domain(format!("photon energy must be positive and finite, got {}", mode.k0));
    }
    let k = mode.momentum();
    let (pk, ppk) = (mdot(&event.p_e_in, &k), mdot(&event.p_e_out, &k));
    if pk == 0.0 || ppk == 0.0 {
        return domain("photon collinear with a massless charged leg");
    }
    Ok(current_at(&event.p_e_in, &event.p_e_out, &k, charge))
}

/// Projections `J·e^λ` (metric contraction with `e^λ = (0, ê)`).
pub fn transverse_projections(j: &ComplexFourVector, mode: &PhotonMode) -> [Complex64; 2] {
    let s = j.spatial();
    mode.polarizations
        .map(|e| -(s[0] * e[0] + s[1] * e[1] + s[2] * e[2]))
}

/// `Σ_λ |J·e^λ|²` over the mode's physical polarizations.
pub fn polarization_sum(j: &ComplexFourVector, mode: &PhotonMode) -> Result<f64> {
    let defect = mode.basis_defect();
    if defect > 1e-10 {
        return contract(format!("polarization basis not orthonormal-transverse (defect {defect:.3e})"));
    }
    Ok(transverse_projections(j, mode).iter().map(|c| c.norm_sqr()).sum())
}

/// Covariant form `−Re(J*·J)`, equal to the transverse sum for conserved currents.
pub fn metric_intensity(j: &ComplexFourVector) -> f64 {
    -j.self_contraction()
}

/// `|k·J| / (|k||J|)`; zero for a vanishing current.
pub fn conservation_residual(event: &ScatteringEvent, mode: &PhotonMode, charge: f64) -> Result<f64> {
    let j = soft_current(event, mode, charge)?;
    let norm = j.euclid_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let k = mode.momentum();
    Ok(j.mdot_real(&k).norm() / (k.euclid_norm() * norm))
}

/// Relative norm of `J*(k) − J(−k)`; zero for a vanishing current.
pub fn reality_check(event: &ScatteringEvent, mode: &PhotonMode, charge: f64) -> Result<f64> {
    let j = soft_current(event, mode, charge)?;
    let norm = j.euclid_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let minus_k = -mode.momentum();
    let j_minus = current_at(&event.p_e_in, &event.p_e_out, &minus_k, charge);
    Ok((j.conj() - j_minus).euclid_norm() / norm)
}
