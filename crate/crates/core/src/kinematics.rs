//! Minkowski four-vectors and elastic two-body kinematics in the
//! centre-of-momentum frame.
//!
//! Natural units with the electron mass set to one; the metric is
//! `(+,-,-,-)` everywhere in the crate.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Electron mass in the crate's unit system.
pub const ELECTRON_MASS: f64 = 1.0;

/// A real four-vector `(t, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FourVector {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FourVector {
    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Self { t, x, y, z }
    }

    /// On-shell vector with spatial momentum `p` and mass `m`.
    pub fn on_shell(m: f64, p: [f64; 3]) -> Self {
        let e = (m * m + p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        Self::new(e, p[0], p[1], p[2])
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn spatial_norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Minkowski square `a·a`.
    pub fn msq(&self) -> f64 {
        mdot(self, self)
    }

    /// Euclidean norm of all four components; used for relative residuals.
    pub fn euclid_norm(&self) -> f64 {
        (self.t * self.t + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.t, self.x, self.y, self.z]
    }

    /// Pure Lorentz boost with velocity `beta` (|beta| < 1).
    pub fn boost(&self, beta: [f64; 3]) -> Self {
        let b2 = beta[0] * beta[0] + beta[1] * beta[1] + beta[2] * beta[2];
        if b2 == 0.0 {
            return *self;
        }
        let gamma = 1.0 / (1.0 - b2).sqrt();
        let bp = beta[0] * self.x + beta[1] * self.y + beta[2] * self.z;
        let coef = (gamma - 1.0) * bp / b2 - gamma * self.t;
        Self::new(
            gamma * (self.t - bp),
            self.x + coef * beta[0],
            self.y + coef * beta[1],
            self.z + coef * beta[2],
        )
    }

    /// Rotation by `angle` about the beam (z) axis.
    pub fn rotate_z(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(self.t, c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }

    /// Velocity of the frame in which this (timelike) vector is at rest.
    pub fn rest_frame_velocity(&self) -> [f64; 3] {
        [self.x / self.t, self.y / self.t, self.z / self.t]
    }
}

impl Add for FourVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.t + o.t, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for FourVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.t - o.t, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for FourVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.t, -self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for FourVector {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.t * s, self.x * s, self.y * s, self.z * s)
    }
}

/// Minkowski product under `(+,-,-,-)`.
pub fn mdot(a: &FourVector, b: &FourVector) -> f64 {
    a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z
}

/// Unit vector for polar angle `theta` and azimuth `phi`.
pub fn direction(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Källén-based two-body momentum in the c.m.s.
pub fn cms_momentum(sqrt_s: f64, m1: f64, m2: f64) -> f64 {
    let s = sqrt_s * sqrt_s;
    let a = s - (m1 + m2) * (m1 + m2);
    let b = s - (m1 - m2) * (m1 - m2);
    (a * b).max(0.0).sqrt() / (2.0 * sqrt_s)
}

/// One elastic `e ν → e' ν'` event. Angles refer to the outgoing electron
/// in the c.m.s., with the incoming electron along `+z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringEvent {
    pub p_e_in: FourVector,
    pub p_nu_in: FourVector,
    pub p_e_out: FourVector,
    pub p_nu_out: FourVector,
    pub sqrt_s: f64,
    pub theta: f64,
    pub phi: f64,
    pub m_e_val: f64,
    pub m_nu_val: f64,
}

/// Builds the c.m.s. event for outgoing-electron angles `(theta, phi)`.
pub fn build_cms_event(
    sqrt_s: f64,
    theta: f64,
    phi: f64,
    m_e_val: f64,
    m_nu_val: f64,
) -> Result<ScatteringEvent> {
    if !(m_e_val >= 0.0 && m_nu_val >= 0.0 && m_e_val.is_finite() && m_nu_val.is_finite()) {
        return domain(format!("masses must be finite and non-negative, got ({m_e_val}, {m_nu_val})"));
    }
    if !(sqrt_s.is_finite() && sqrt_s > m_e_val + m_nu_val) {
        return domain(format!(
            "sqrt_s = {sqrt_s} is not above threshold {}",
            m_e_val + m_nu_val
        ));
    }
    if !(0.0..=PI).contains(&theta) || !phi.is_finite() {
        return domain(format!("theta = {theta} outside [0, pi] or non-finite phi"));
    }
    let s = sqrt_s * sqrt_s;
    let p = cms_momentum(sqrt_s, m_e_val, m_nu_val);
    let e_e = (s + m_e_val * m_e_val - m_nu_val * m_nu_val) / (2.0 * sqrt_s);
    let e_nu = (s - m_e_val * m_e_val + m_nu_val * m_nu_val) / (2.0 * sqrt_s);

    let p_e_in = FourVector::new(e_e, 0.0, 0.0, p);
    let p_nu_in = FourVector::new(e_nu, 0.0, 0.0, -p);
    let n = direction(theta, phi);
    let p_e_out = FourVector::new(e_e, p * n[0], p * n[1], p * n[2]);
    let p_nu_out = (p_e_in + p_nu_in) - p_e_out;

    Ok(ScatteringEvent {
        p_e_in,
        p_nu_in,
        p_e_out,
        p_nu_out,
        sqrt_s,
        theta,
        phi,
        m_e_val,
        m_nu_val,
    })
}

impl ScatteringEvent {
    /// The no-scatter event at the same energy: outgoing legs equal incoming.
    pub fn forward(sqrt_s: f64, m_e_val: f64, m_nu_val: f64) -> Result<Self> {
        build_cms_event(sqrt_s, 0.0, 0.0, m_e_val, m_nu_val)
    }

    pub fn legs(&self) -> [FourVector; 4] {
        [self.p_e_in, self.p_nu_in, self.p_e_out, self.p_nu_out]
    }

    /// Largest componentwise violation of four-momentum conservation.
    pub fn conservation_residual(&self) -> f64 {
        let d = (self.p_e_in + self.p_nu_in) - (self.p_e_out + self.p_nu_out);
        d.as_array().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest `|p·p - m²|` over the four legs.
    pub fn shell_residual(&self) -> f64 {
        let me2 = self.m_e_val * self.m_e_val;
        let mn2 = self.m_nu_val * self.m_nu_val;
        [
            (self.p_e_in.msq() - me2).abs(),
            (self.p_nu_in.msq() - mn2).abs(),
            (self.p_e_out.msq() - me2).abs(),
            (self.p_nu_out.msq() - mn2).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Electron momentum transfer `|p - p'|`.
    pub fn momentum_transfer(&self) -> f64 {
        (self.p_e_in - self.p_e_out).spatial_norm()
    }

    /// True when the electron leaves undeflected.
    pub fn is_forward(&self) -> bool {
        self.p_e_in == self.p_e_out
    }

    pub fn boosted(&self, beta: [f64; 3]) -> Self {
        let mut ev = *self;
        ev.p_e_in = self.p_e_in.boost(beta);
        ev.p_nu_in = self.p_nu_in.boost(beta);
        ev.p_e_out = self.p_e_out.boost(beta);
        ev.p_nu_out = self.p_nu_out.boost(beta);
        ev
    }

    /// Rigid rotation of every leg about the beam axis.
    pub fn rotated_about_beam(&self, angle: f64) -> Self {
        let mut ev = *self;
        ev.p_e_in = self.p_e_in.rotate_z(angle);
        ev.p_nu_in = self.p_nu_in.rotate_z(angle);
        ev.p_e_out = self.p_e_out.rotate_z(angle);
        ev.p_nu_out = self.p_nu_out.rotate_z(angle);
        ev.phi = self.phi + angle;
        ev
    }

    /// Whether two events start from the same incoming legs, to `tol`.
    pub fn shares_incoming(&self, other: &Self, tol: f64) -> bool {
        let close = |a: &FourVector, b: &FourVector| (*a - *b).euclid_norm() <= tol * (1.0 + a.euclid_norm());
        close(&self.p_e_in, &other.p_e_in) && close(&self.p_nu_in, &other.p_nu_in)
    }

    /// Angle between the outgoing electron momenta of two events.
    pub fn opening_angle(&self, other: &Self) -> f64 {
        angle_between(self.p_e_out.spatial(), other.p_e_out.spatial())
    }
}

/// Angle between two 3-vectors, robust near 0 and pi.
pub fn angle_between(a: [f64; 3], b: [f64; 3]) -> f64 {
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let c = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let d = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    c.atan2(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mdot_examples() {
        let u = FourVector::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(mdot(&u, &u), 1.0);
        let l = FourVector::new(1.0, 0.0, 0.0, 1.0);
        assert_eq!(mdot(&l, &l), 0.0);
        let p = FourVector::on_shell(ELECTRON_MASS, [0.3, -2.0, 7.5]);
        assert!((p.msq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn forward_event_is_fixed_point() {
        let ev = build_cms_event(10.0, 0.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(ev.p_e_out, ev.p_e_in);
        assert!(ev.is_forward());
        assert!((ev.p_nu_out - ev.p_nu_in).euclid_norm() < 1e-14);
    }

    #[test]
    fn below_threshold_is_rejected() {
        assert!(matches!(
            build_cms_event(1.0, 0.5, 0.0, 1.0, 0.0),
            Err(crate::Error::Domain(_))
        ));
        assert!(build_cms_event(10.0, -0.1, 0.0, 1.0, 0.0).is_err());
        assert!(build_cms_event(10.0, 3.2, 0.0, 1.0, 0.0).is_err());
    }

    /// Oracle: solve energy conservation for |p| by bisection, with both legs
    /// on shell and back-to-back, then compare to the closed form.
    #[test]
    fn cms_momentum_matches_constraint_solution() {
        let (sqrt_s, m1, m2) = (10.0_f64, 1.0_f64, 0.0_f64);
        let f = |p: f64| (p * p + m1 * m1).sqrt() + (p * p + m2 * m2).sqrt() - sqrt_s;
        let (mut lo, mut hi) = (0.0, sqrt_s);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        let solved = 0.5 * (lo + hi);
        assert!((solved - 4.95).abs() < 1e-12);
        let ev = build_cms_event(sqrt_s, 1.1, 0.4, m1, m2).unwrap();
        assert!((ev.p_e_in.spatial_norm() - 4.95).abs() < 1e-12);
        assert!((ev.p_e_out.spatial_norm() - 4.95).abs() < 1e-12);
    }

    #[test]
    fn incoming_legs_antiparallel() {
        let ev = build_cms_event(3.0, 1.0, 2.0, 1.0, 0.2).unwrap();
        let a = ev.p_e_in.spatial();
        let b = ev.p_nu_in.spatial();
        assert!((angle_between(a, b) - PI).abs() < 1e-12);
    }

    #[test]
    fn boost_round_trip() {
        let ev = build_cms_event(10.0, 0.7, 1.3, 1.0, 0.0).unwrap();
        let beta = [0.3, -0.2, 0.5];
        let back = ev.boosted(beta).boosted([-beta[0], -beta[1], -beta[2]]);
        for (a, b) in ev.legs().iter().zip(back.legs().iter()) {
            assert!((*a - *b).euclid_norm() < 1e-12 * a.euclid_norm());
        }
    }
}
