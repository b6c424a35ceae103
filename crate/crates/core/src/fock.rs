//! Truncated multimode Fock space, used as a brute-force oracle for the
//! coherent-state formulas of the radiation module.
//!
//! States live on the product basis `|n_1 … n_M⟩` with `0 ≤ n_j ≤ N_tr`.
//! Displacements are obtained by exponentiating the anti-Hermitian generator
//! `G = Σ_j (α_j a_j† − α_j* a_j)` on that basis, never through the
//! closed-form coherent-state expressions the oracle is meant to check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{contract, domain, Error, Result};
use crate::kinematics::ScatteringEvent;
use crate::radiation::{overlap_from_moments, single_mode_projections, CutoffWindow, RadiationModel, PHASE_SPACE_NORM};

/// Accepted probability weight on the truncation boundary.
pub const LEAKAGE_BOUND: f64 = 1e-8;

/// Largest state dimension the oracle will allocate (four modes at `N_tr = 40`).
pub const MAX_DIMENSION: usize = 41 * 41 * 41 * 41;

/// Sign of the dressing phase `exp(±i V)` that multiplies each branch's
/// displaced vacuum. Fixed by the two-mode agreement test against
/// `RadiationModel::branch_overlap`.
pub const DRESSING_PHASE_SIGN: f64 = 1.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Quadrature cell that a discrete mode came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeCell {
    pub energy_index: usize,
    pub angular_index: usize,
    pub polarization: usize,
    pub k0: f64,
    pub direction: [f64; 3],
}

/// Displacement amplitudes of a finite set of photon modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAmplitudeSet {
    pub amplitudes: Vec<Complex64>,
    /// Empty for synthetic sets.
    pub cells: Vec<ModeCell>,
    /// `Σ|α|²` over every quadrature cell, when built from a current.
    pub quadrature_total: Option<f64>,
    pub event: Option<ScatteringEvent>,
    pub window: Option<CutoffWindow>,
}

impl ModeAmplitudeSet {
    pub fn synthetic(amplitudes: Vec<Complex64>) -> Self {
        Self {
            amplitudes,
            cells: Vec::new(),
            quadrature_total: None,
            event: None,
            window: None,
        }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// `Σ_j |α_j|²`, the mean photon number carried by the selected modes.
    pub fn total_number(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Share of the full-quadrature photon number captured by the selection.
    pub fn captured_fraction(&self) -> Option<f64> {
        self.quadrature_total.map(|t| if t == 0.0 { 1.0 } else { self.total_number() / t })
    }

    pub fn max_occupation(&self) -> f64 {
        self.amplitudes.iter().fold(0.0, |m, a| m.max(a.norm_sqr()))
    }
}

/// Per-mode cutoff from the `10 max|α|² + 10` heuristic.
pub fn default_truncation(amps: &[Complex64]) -> usize {
    let max = amps.iter().fold(0.0_f64, |m, a| m.max(a.norm_sqr()));
    (10.0 * max + 10.0).ceil() as usize
}

/// `i (J·e^λ) √(Δ(ln k0) ω / (2π)³)` for the unit-energy projection `J·e^λ`;
/// equal to `i (J(k0)·e^λ) √(w / (2π)³) / k0` with `w = k0² Δ(ln k0) ω`.
fn cell_amplitude(projection: Complex64, log_step: f64, solid_angle: f64) -> Complex64 {
    Complex64::new(0.0, 1.0) * projection * (log_step * solid_angle / PHASE_SPACE_NORM).sqrt()
}

/// Discretizes the radiation of `event` onto the `m` quadrature cells
/// (energy × direction × polarization) with the largest `|α|`.
pub fn discretize_current(
    model: &RadiationModel,
    event: &ScatteringEvent,
    window: &CutoffWindow,
    m: usize,
) -> Result<ModeAmplitudeSet> {
    let quad = model.quadrature();
    let energies = quad.energy_nodes(window);
    let total_cells = energies.len() * quad.angular().len() * 2;
    if m > total_cells {
        return domain(format!("{m} modes requested but the quadrature has {total_cells} cells"));
    }
    let profile = model.profile(event)?;

    // |α|² factorizes as (w_E / k²) × (ω |J·e|²), so the top-m cells are
    // among the products of the top-m factors on each side.
    let mut ang: Vec<(f64, usize, usize)> = Vec::with_capacity(quad.angular().len() * 2);
    for (a, node) in quad.angular().iter().enumerate() {
        for lam in 0..2 {
            ang.push((node.weight * profile.projections()[a][lam].norm_sqr(), a, lam));
        }
    }
    let by_value_desc = |x: &f64, y: &f64| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal);
    ang.sort_by(|x, y| by_value_desc(&x.0, &y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut rad: Vec<(f64, usize)> = energies
        .iter()
        .enumerate()
        .map(|(i, e)| (e.log_step, i))
        .collect();
    rad.sort_by(|x, y| by_value_desc(&x.0, &y.0).then(x.1.cmp(&y.1)));

    let mut candidates = Vec::with_capacity(m * m);
    for &(rv, ei) in rad.iter().take(m) {
        for &(av, ai, lam) in ang.iter().take(m) {
            candidates.push((rv * av, ei, ai, lam));
        }
    }
    candidates.sort_by(|x, y| by_value_desc(&x.0, &y.0).then((x.1, x.2, x.3).cmp(&(y.1, y.2, y.3))));
    let cells: Vec<ModeCell> = candidates
        .into_iter()
        .take(m)
        .map(|(_, ei, ai, lam)| ModeCell {
            energy_index: ei,
            angular_index: ai,
            polarization: lam,
            k0: energies[ei].k0,
            direction: quad.angular()[ai].mode.direction,
        })
        .collect();

    let mut set = discretize_on_cells(model, event, window, &cells)?;
    let radial: f64 = energies.iter().map(|e| e.log_step).sum();
    let angular: f64 = ang.iter().map(|x| x.0).sum();
    set.quadrature_total = Some(radial * angular / PHASE_SPACE_NORM);
    Ok(set)
}

/// Amplitudes of `event`'s radiation on an explicit list of cells, so that
/// several branches can share one mode layout.
pub fn discretize_on_cells(
    model: &RadiationModel,
    event: &ScatteringEvent,
    window: &CutoffWindow,
    cells: &[ModeCell],
) -> Result<ModeAmplitudeSet> {
    let quad = model.quadrature();
    let energies = quad.energy_nodes(window);
    let amplitudes = cells
        .iter()
        .map(|c| {
            let node = quad
                .angular()
                .get(c.angular_index)
                .ok_or_else(|| Error::Contract("cell outside the quadrature".into()))?;
            let e = energies
                .get(c.energy_index)
                .ok_or_else(|| Error::Contract("cell outside the energy grid".into()))?;
            let proj = single_mode_projections(event, &node.mode, model.charge())?;
            Ok(cell_amplitude(proj[c.polarization], e.log_step, node.weight))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModeAmplitudeSet {
        amplitudes,
        cells: cells.to_vec(),
        quadrature_total: None,
        event: Some(*event),
        window: Some(*window),
    })
}

/// State on the truncated product basis; mode 0 is the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct FockStateVector {
    modes: usize,
    n_tr: usize,
    amplitudes: Vec<Complex64>,
}

impl FockStateVector {
    pub fn vacuum(modes: usize, n_tr: usize) -> Result<Self> {
        if n_tr == 0 {
            return domain("truncation must be at least 1");
        }
        let dim = dimension(modes, n_tr)?;
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { modes, n_tr, amplitudes })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn truncation(&self) -> usize {
        self.n_tr
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn stride(&self, mode: usize) -> usize {
        (self.n_tr + 1).pow((self.modes - 1 - mode) as u32)
    }

    fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % (self.n_tr + 1)
    }

    /// Occupations of basis state `index`.
    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.modes).map(|j| self.occupation(index, j)).collect()
    }

    /// Marginal photon-number distribution of one mode.
    pub fn mode_distribution(&self, mode: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.n_tr + 1];
        for (i, a) in self.amplitudes.iter().enumerate() {
            p[self.occupation(i, mode)] += a.norm_sqr();
        }
        p
    }

    pub fn mean_number(&self, mode: usize) -> f64 {
        self.mode_distribution(mode)
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Probability of basis state `|n_1 … n_M⟩`.
    pub fn probability(&self, occupations: &[usize]) -> f64 {
        let idx = occupations
            .iter()
            .enumerate()
            .map(|(j, &n)| n * self.stride(j))
            .sum::<usize>();
        self.amplitudes[idx].norm_sqr()
    }

    /// Largest probability found at `n_j = N_tr` over all modes.
    pub fn leakage(&self) -> f64 {
        (0..self.modes)
            .map(|j| self.mode_distribution(j)[self.n_tr])
            .fold(0.0, f64::max)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        let f = Complex64::from_polar(1.0, phase);
        self.amplitudes.iter_mut().for_each(|a| *a *= f);
        self
    }

    fn same_layout(&self, other: &Self) -> bool {
        self.modes == other.modes && self.n_tr == other.n_tr
    }

    /// `out = G v` for `G = Σ_j (α_j a_j† − α_j* a_j)`.
    fn apply_generator(&self, alphas: &[Complex64], v: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = ZERO);
        let top = self.n_tr;
        for (j, &alpha) in alphas.iter().enumerate() {
            if alpha == ZERO {
                continue;
            }
            let stride = self.stride(j);
            for (i, &x) in v.iter().enumerate() {
                if x == ZERO {
                    continue;
                }
                let n = (i / stride) % (top + 1);
                if n < top {
                    out[i + stride] += alpha * ((n + 1) as f64).sqrt() * x;
                }
                if n > 0 {
                    out[i - stride] -= alpha.conj() * (n as f64).sqrt() * x;
                }
            }
        }
    }

    /// `exp(G) |self⟩` by a scaled Taylor series, summed to machine precision.
    pub fn displace(&self, alphas: &[Complex64]) -> Result<Self> {
        if alphas.len() != self.modes {
            return contract(format!("{} amplitudes for {} modes", alphas.len(), self.modes));
        }
        let bound: f64 = alphas.iter().map(|a| 2.0 * a.norm() * ((self.n_tr + 1) as f64).sqrt()).sum();
        let steps = (bound / 4.0).ceil().max(1.0) as usize;
        let scaled: Vec<Complex64> = alphas.iter().map(|a| a / steps as f64).collect();

        let dim = self.amplitudes.len();
        let mut v = self.amplitudes.clone();
        let mut term = vec![ZERO; dim];
        let mut next = vec![ZERO; dim];
        for _ in 0..steps {
            term.copy_from_slice(&v);
            let mut acc = v.clone();
            for k in 1..200 {
                self.apply_generator(&scaled, &term, &mut next);
                let inv = 1.0 / k as f64;
                let mut tnorm = 0.0;
                for (t, n) in term.iter_mut().zip(next.iter()) {
                    *t = n * inv;
                    tnorm += t.norm_sqr();
                }
                for (a, t) in acc.iter_mut().zip(term.iter()) {
                    *a += t;
                }
                if tnorm.sqrt() < 1e-18 {
                    break;
                }
            }
            v = acc;
        }
        Ok(Self {
            modes: self.modes,
            n_tr: self.n_tr,
            amplitudes: v,
        })
    }
}

fn dimension(modes: usize, n_tr: usize) -> Result<usize> {
    if modes == 0 {
        return domain("at least one mode required");
    }
    let mut dim: usize = 1;
    for _ in 0..modes {
        dim = dim
            .checked_mul(n_tr + 1)
            .filter(|d| *d <= MAX_DIMENSION)
            .ok_or_else(|| Error::Domain(format!("basis of {modes} modes at N_tr = {n_tr} exceeds {MAX_DIMENSION} states")))?;
    }
    Ok(dim)
}

/// `D(α)|0⟩` on the truncated basis; fails if the boundary population
/// exceeds [`LEAKAGE_BOUND`].
pub fn displaced_vacuum(amps: &ModeAmplitudeSet, n_tr: usize) -> Result<FockStateVector> {
    let state = FockStateVector::vacuum(amps.len(), n_tr)?.displace(&amps.amplitudes)?;
    let leakage = state.leakage();
    if leakage > LEAKAGE_BOUND {
        return Err(Error::Truncation {
            leakage,
            bound: LEAKAGE_BOUND,
        });
    }
    Ok(state)
}

/// Displaced vacuum carrying the branch dressing phase `exp(i ½Σ|α|²)`.
pub fn dressed_vacuum(amps: &ModeAmplitudeSet, n_tr: usize) -> Result<FockStateVector> {
    Ok(displaced_vacuum(amps, n_tr)?.with_phase(DRESSING_PHASE_SIGN * 0.5 * amps.total_number()))
}

/// `⟨a|b⟩`.
pub fn state_overlap(a: &FockStateVector, b: &FockStateVector) -> Result<Complex64> {
    if !a.same_layout(b) {
        return contract("states have different mode layouts");
    }
    Ok(a.amplitudes
        .iter()
        .zip(b.amplitudes.iter())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Closed form `⟨D(β)0|D(α)0⟩ = exp(−½Σ|α−β|² + i Im Σ β*α)`.
pub fn coherent_overlap(alpha: &[Complex64], beta: &[Complex64]) -> Complex64 {
    let dist: f64 = alpha.iter().zip(beta).map(|(a, b)| (a - b).norm_sqr()).sum();
    let phase: f64 = alpha.iter().zip(beta).map(|(a, b)| (b.conj() * a).im).sum();
    Complex64::from_polar((-0.5 * dist).exp(), phase)
}

/// Single-mode annihilation operator on `n_tr + 1` levels.
pub fn annihilation(n_tr: usize) -> DMatrix<Complex64> {
    let d = n_tr + 1;
    DMatrix::from_fn(d, d, |r, c| {
        if c == r + 1 {
            Complex64::new((c as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

/// Dense single-mode displacement `exp(α a† − α* a)`.
pub fn dense_displacement(alpha: Complex64, n_tr: usize) -> DMatrix<Complex64> {
    let a = annihilation(n_tr);
    let g = a.adjoint() * alpha - &a * alpha.conj();
    g.exp()
}

/// Max column norm of `D†aD − (a + α)` over occupations below `N_tr/2`,
/// maximized over modes. Modes other than `j` drop out of `D†a_jD`
/// because their displacements commute with `a_j` and are unitary on the
/// truncated space, so each mode is checked with its own dense `D_j`.
pub fn bogoliubov_residual(amps: &ModeAmplitudeSet, n_tr: usize) -> Result<f64> {
    if n_tr < 2 {
        return domain("truncation too small for a sector check");
    }
    let a = annihilation(n_tr);
    let low = n_tr / 2;
    let mut worst = 0.0_f64;
    for &alpha in &amps.amplitudes {
        let d = dense_displacement(alpha, n_tr);
        let shifted = d.adjoint() * &a * &d;
        for c in 0..low {
            let mut col = 0.0;
            for r in 0..low {
                let mut expect = a[(r, c)];
                if r == c {
                    expect += alpha;
                }
                col += (shifted[(r, c)] - expect).norm_sqr();
            }
            worst = worst.max(col.sqrt());
        }
    }
    Ok(worst)
}

/// `D(α)|0⟩` assembled as the tensor product of per-mode columns of the
/// dense matrix exponential, in the layout of [`FockStateVector`].
pub fn dense_displaced_vacuum(alphas: &[Complex64], n_tr: usize) -> Result<FockStateVector> {
    let mut state = FockStateVector::vacuum(alphas.len(), n_tr)?;
    let columns: Vec<Vec<Complex64>> = alphas
        .iter()
        .map(|&a| dense_displacement(a, n_tr).column(0).iter().cloned().collect())
        .collect();
    for (i, amp) in state.amplitudes.iter_mut().enumerate() {
        let occ = {
            let mut rest = i;
            let mut occ = vec![0; alphas.len()];
            for j in (0..alphas.len()).rev() {
                occ[j] = rest % (n_tr + 1);
                rest /= n_tr + 1;
            }
            occ
        };
        *amp = occ.iter().enumerate().map(|(j, &n)| columns[j][n]).product();
    }
    Ok(state)
}

/// Oracle-versus-closed-form comparison for one pair of branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairVerification {
    pub modes: usize,
    pub n_tr: usize,
    pub number_l: f64,
    pub number_m: f64,
    /// `⟨γ^m|γ^l⟩` from the displaced Fock states.
    pub oracle: Complex64,
    /// Same overlap from the dense per-mode exponentials.
    pub dense: Complex64,
    /// Same overlap from the radiation module's closed form.
    pub analytic: Complex64,
    pub overlap_error: f64,
    pub dense_error: f64,
    pub poisson_error: f64,
    pub norm_error: f64,
    pub bogoliubov_residual: f64,
    pub leakage: f64,
}

/// Dresses both branches on the `m` strongest cells of `event_l` and
/// compares `⟨γ^m|γ^l⟩` across the Taylor-series states, the dense
/// exponential and the closed form.
pub fn verify_pair(
    model: &RadiationModel,
    event_l: &ScatteringEvent,
    event_m: &ScatteringEvent,
    window: &CutoffWindow,
    m: usize,
    n_tr: usize,
) -> Result<PairVerification> {
    RadiationModel::check_shared(event_l, event_m)?;
    let amps_l = discretize_current(model, event_l, window, m)?;
    let amps_m = discretize_on_cells(model, event_m, window, &amps_l.cells)?;
    let (nl, nm) = (amps_l.total_number(), amps_m.total_number());
    let dressing = |n: f64| DRESSING_PHASE_SIGN * 0.5 * n;

    let sl = dressed_vacuum(&amps_l, n_tr)?;
    let sm = dressed_vacuum(&amps_m, n_tr)?;
    let oracle = state_overlap(&sm, &sl)?;
    let dl = dense_displaced_vacuum(&amps_l.amplitudes, n_tr)?.with_phase(dressing(nl));
    let dm = dense_displaced_vacuum(&amps_m.amplitudes, n_tr)?.with_phase(dressing(nm));
    let dense = state_overlap(&dm, &dl)?;

    let (a, b) = (&amps_l.amplitudes, &amps_m.amplitudes);
    let distance: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let cross: f64 = a.iter().zip(b).map(|(x, y)| (y.conj() * x).im).sum();
    let analytic = overlap_from_moments(distance, cross, nl, nm);

    let mut poisson_error = 0.0_f64;
    for (state, amps) in [(&sl, &amps_l), (&sm, &amps_m)] {
        for (j, alpha) in amps.amplitudes.iter().enumerate() {
            let mean = alpha.norm_sqr();
            let dist = state.mode_distribution(j);
            let mut p = (-mean).exp();
            for (n, q) in dist.iter().enumerate() {
                if n > 0 {
                    p *= mean / n as f64;
                }
                poisson_error = poisson_error.max((q - p).abs());
            }
        }
    }
    let norm_error = (sl.norm() - 1.0).abs().max((sm.norm() - 1.0).abs());
    let bogoliubov = bogoliubov_residual(&amps_l, n_tr)?.max(bogoliubov_residual(&amps_m, n_tr)?);
    Ok(PairVerification {
        modes: m,
        n_tr,
        number_l: nl,
        number_m: nm,
        oracle,
        dense,
        analytic,
        overlap_error: (oracle - analytic).norm(),
        dense_error: (dense - analytic).norm(),
        poisson_error,
        norm_error,
        bogoliubov_residual: bogoliubov,
        leakage: sl.leakage().max(sm.leakage()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_displacement_is_identity() {
        let amps = ModeAmplitudeSet::synthetic(vec![ZERO, ZERO]);
        let s = displaced_vacuum(&amps, 10).unwrap();
        assert_eq!(s, FockStateVector::vacuum(2, 10).unwrap());
        assert_eq!(bogoliubov_residual(&amps, 10).unwrap(), 0.0);
    }

    #[test]
    fn overlap_layout_mismatch() {
        let a = FockStateVector::vacuum(1, 10).unwrap();
        let b = FockStateVector::vacuum(1, 12).unwrap();
        assert!(matches!(state_overlap(&a, &b), Err(Error::Contract(_))));
    }

    #[test]
    fn truncation_error_reports_leakage() {
        let amps = ModeAmplitudeSet::synthetic(vec![c(2.0, 0.0)]);
        match displaced_vacuum(&amps, 6) {
            Err(Error::Truncation { leakage, .. }) => assert!(leakage > LEAKAGE_BOUND),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn oversized_basis_rejected() {
        assert!(FockStateVector::vacuum(5, 40).is_err());
        assert!(FockStateVector::vacuum(4, 40).is_ok());
    }

    #[test]
    fn composition_returns_vacuum() {
        let alphas = vec![c(0.3, -0.2), c(-0.1, 0.5)];
        let neg: Vec<_> = alphas.iter().map(|a| -a).collect();
        let v = FockStateVector::vacuum(2, 30).unwrap();
        let back = v.displace(&alphas).unwrap().displace(&neg).unwrap();
        for (x, y) in back.amplitudes().iter().zip(v.amplitudes()) {
            assert!((x - y).norm() < 1e-8);
        }
    }

    #[test]
    fn heuristic_truncation() {
        assert_eq!(default_truncation(&[c(0.5, 0.5)]), 15);
        assert_eq!(default_truncation(&[]), 10);
    }
}
