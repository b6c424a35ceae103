//! C ABI over `irdeco`.
//!
//! Objects are opaque heap handles created by `*_new` functions and released
//! by the matching `*_free`. Every fallible call returns an [`IrdecoStatus`];
//! on failure the message is available from [`irdeco_last_error_message`]
//! on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use irdeco::branches::{build_branch_set, BranchDensityMatrix, BranchEnsemble, BranchGrid, BranchSpec};
use irdeco::current::charge_from_alpha;
use irdeco::radiation::{CutoffWindow, PhotonQuadrature, QuadratureResolution, RadiationModel};
use irdeco::restoration::restoration_mc;
use irdeco::weak::{helicity_asymmetry, HelicityConfig};
use irdeco::{build_cms_event, Error, ScatteringEvent};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrdecoStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Contract = 3,
    Truncation = 4,
    Config = 5,
    Io = 6,
    Panic = 7,
}

pub struct IrdecoEvent(ScatteringEvent);
pub struct IrdecoModel(RadiationModel);
pub struct IrdecoBranchSet(BranchEnsemble);
pub struct IrdecoDensity(BranchDensityMatrix);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> IrdecoStatus {
    match e {
        Error::Domain(_) => IrdecoStatus::Domain,
        Error::Contract(_) => IrdecoStatus::Contract,
        Error::Truncation { .. } => IrdecoStatus::Truncation,
        Error::Config(_) => IrdecoStatus::Config,
        Error::Io(_) => IrdecoStatus::Io,
    }
}

struct NullArg;

fn guard<F>(f: F) -> IrdecoStatus
where
    F: FnOnce() -> Result<Result<(), Error>, NullArg>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(Ok(()))) => IrdecoStatus::Ok,
        Ok(Ok(Err(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(NullArg)) => {
            set_error("null pointer argument".into());
            IrdecoStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic".into());
            IrdecoStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, NullArg> {
    p.as_ref().ok_or(NullArg)
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), NullArg> {
    if out.is_null() {
        return Err(NullArg);
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn irdeco_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn irdeco_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => c"",
    };
    VERSION.as_ptr()
}

/// Builds an elastic c.m.s. event; energies and masses in units of `m_e`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn irdeco_event_new(
    sqrt_s: f64,
    theta: f64,
    phi: f64,
    m_e: f64,
    m_nu: f64,
    out: *mut *mut IrdecoEvent,
) -> IrdecoStatus {
    guard(|| {
        if out.is_null() {
            return Err(NullArg);
        }
        Ok(build_cms_event(sqrt_s, theta, phi, m_e, m_nu).map(|ev| {
            out.write(Box::into_raw(Box::new(IrdecoEvent(ev))));
        }))
    })
}

/// # Safety
/// `event` must be null or a handle from [`irdeco_event_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn irdeco_event_free(event: *mut IrdecoEvent) {
    if !event.is_null() {
        drop(Box::from_raw(event));
    }
}

/// Radiation model with the given quadrature and fine-structure constant.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn irdeco_model_new(
    energy_nodes_per_decade: usize,
    polar_nodes: usize,
    azimuth_nodes: usize,
    alpha: f64,
    out: *mut *mut IrdecoModel,
) -> IrdecoStatus {
    guard(|| {
        if out.is_null() {
            return Err(NullArg);
        }
        let res = QuadratureResolution {
            energy_nodes_per_decade,
            polar_nodes,
            azimuth_nodes,
        };
        Ok((|| {
            if !(alpha > 0.0) {
                return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
            }
            let model = RadiationModel::new(PhotonQuadrature::new(res)?, charge_from_alpha(alpha));
            out.write(Box::into_raw(Box::new(IrdecoModel(model))));
            Ok(())
        })())
    })
}

/// # Safety
/// `model` must be null or a handle from [`irdeco_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn irdeco_model_free(model: *mut IrdecoModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// `N̄` of `event` over `[k_min, k_max]`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn irdeco_mean_photon_number(
    model: *const IrdecoModel,
    event: *const IrdecoEvent,
    k_min: f64,
    k_max: f64,
    out: *mut f64,
) -> IrdecoStatus {
    guard(|| {
        let (m, e) = (get(model)?, get(event)?);
        let r = CutoffWindow::new(k_min, k_max).and_then(|w| m.0.mean_photon_number(&e.0, &w));
        match r {
            Ok(v) => put(out, v).map(Ok),
            Err(e) => Ok(Err(e)),
        }
    })
}

/// `exp(−V)`, the no-emission amplitude of `event`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn irdeco_vacuum_persistence(
    model: *const IrdecoModel,
    event: *const IrdecoEvent,
    k_min: f64,
    k_max: f64,
    out: *mut f64,
) -> IrdecoStatus {
    guard(|| {
        let (m, e) = (get(model)?, get(event)?);
        match CutoffWindow::new(k_min, k_max).and_then(|w| m.0.vacuum_persistence(&e.0, &w)) {
            Ok(v) => put(out, v).map(Ok),
            Err(e) => Ok(Err(e)),
        }
    })
}

/// `⟨γ^m|γ^l⟩` as real and imaginary parts.
///
/// # Safety
/// Handles must be live; `out_re` and `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn irdeco_branch_overlap(
    model: *const IrdecoModel,
    event_l: *const IrdecoEvent,
    event_m: *const IrdecoEvent,
    k_min: f64,
    k_max: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> IrdecoStatus {
    guard(|| {
        let (m, l, r) = (get(model)?, get(event_l)?, get(event_m)?);
        if out_re.is_null() || out_im.is_null() {
            return Err(NullArg);
        }
        match CutoffWindow::new(k_min, k_max).and_then(|w| m.0.branch_overlap(&l.0, &r.0, &w)) {
            Ok(z) => {
                put(out_re, z.re)?;
                put(out_im, z.im).map(Ok)
            }
            Err(e) => Ok(Err(e)),
        }
    })
}

/// Branch ensemble on a `polar × azimuth` c.m.s. grid with all-left
/// helicities, plus the unscattered branch of weight `m0_weight`.
///
/// # Safety
/// `model` must be live; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn irdeco_branch_set_new(
    model: *const IrdecoModel,
    sqrt_s: f64,
    m_e: f64,
    m_nu: f64,
    polar_nodes: usize,
    azimuth_nodes: usize,
    m0_weight: f64,
    coupling: f64,
    out: *mut *mut IrdecoBranchSet,
) -> IrdecoStatus {
    guard(|| {
        let m = get(model)?;
        if out.is_null() {
            return Err(NullArg);
        }
        let spec = BranchSpec {
            sqrt_s,
            m_e,
            m_nu,
            grid: BranchGrid {
                polar_nodes,
                azimuth_nodes,
            },
            m0_weight,
            coupling,
            helicities: HelicityConfig::ALL_LEFT,
        };
        Ok(build_branch_set(&spec)
            .and_then(|b| BranchEnsemble::new(&m.0, b))
            .map(|ens| out.write(Box::into_raw(Box::new(IrdecoBranchSet(ens))))))
    })
}

/// Number of branches, including the unscattered one; 0 for null.
///
/// # Safety
/// `set` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn irdeco_branch_set_len(set: *const IrdecoBranchSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `set` must be null or a handle from [`irdeco_branch_set_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn irdeco_branch_set_free(set: *mut IrdecoBranchSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Reduced density matrix of `set` at `[k_min, k_max]`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn irdeco_density_new(
    set: *const IrdecoBranchSet,
    model: *const IrdecoModel,
    k_min: f64,
    k_max: f64,
    out: *mut *mut IrdecoDensity,
) -> IrdecoStatus {
    guard(|| {
        let (s, m) = (get(set)?, get(model)?);
        if out.is_null() {
            return Err(NullArg);
        }
        Ok(CutoffWindow::new(k_min, k_max)
            .map(|w| out.write(Box::into_raw(Box::new(IrdecoDensity(s.0.reduced_density(&m.0, &w)))))))
    })
}

/// Matrix dimension; 0 for null.
///
/// # Safety
/// `rho` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn irdeco_density_dim(rho: *const IrdecoDensity) -> usize {
    rho.as_ref().map_or(0, |r| r.0.dim())
}

/// `tr ρ²`.
///
/// # Safety
/// `rho` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn irdeco_density_purity(rho: *const IrdecoDensity, out: *mut f64) -> IrdecoStatus {
    guard(|| put(out, get(rho)?.0.purity()).map(Ok))
}

/// Element `ρ_lm`.
///
/// # Safety
/// `rho` must be live; `out_re` and `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn irdeco_density_get(
    rho: *const IrdecoDensity,
    l: usize,
    m: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> IrdecoStatus {
    guard(|| {
        let r = get(rho)?;
        if out_re.is_null() || out_im.is_null() {
            return Err(NullArg);
        }
        let n = r.0.dim();
        if l >= n || m >= n {
            return Ok(Err(Error::Domain(format!("index ({l}, {m}) outside a {n}×{n} matrix"))));
        }
        let z = r.0.rho[(l, m)];
        put(out_re, z.re)?;
        put(out_im, z.im).map(Ok)
    })
}

/// # Safety
/// `rho` must be null or a handle from [`irdeco_density_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn irdeco_density_free(rho: *mut IrdecoDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// `σ_R/σ_L` for the incoming electron at the given c.m.s. energy. Zero
/// up to rounding when `m_nu` is zero.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn irdeco_helicity_ratio(
    sqrt_s: f64,
    m_e: f64,
    m_nu: f64,
    coupling: f64,
    out: *mut f64,
) -> IrdecoStatus {
    guard(|| {
        match build_cms_event(sqrt_s, std::f64::consts::FRAC_PI_2, 0.0, m_e, m_nu)
            .and_then(|ev| helicity_asymmetry(&ev, coupling))
        {
            Ok(v) => put(out, v).map(Ok),
            Err(e) => Ok(Err(e)),
        }
    })
}

/// Isotropic restoration frequency within `epsilon` and its binomial error.
///
/// # Safety
/// `out_p` and `out_sigma` must be writable.
#[no_mangle]
pub unsafe extern "C" fn irdeco_restoration_mc(
    sqrt_s: f64,
    epsilon: f64,
    samples: u64,
    seed: u64,
    out_p: *mut f64,
    out_sigma: *mut f64,
) -> IrdecoStatus {
    guard(|| {
        if out_p.is_null() || out_sigma.is_null() {
            return Err(NullArg);
        }
        match restoration_mc(sqrt_s, epsilon, samples, seed) {
            Ok(r) => {
                put(out_p, r.p_hat)?;
                put(out_sigma, r.sigma).map(Ok)
            }
            Err(e) => Ok(Err(e)),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn null_out_pointer_is_reported() {
        let s = unsafe { irdeco_event_new(10.0, 1.0, 0.0, 1.0, 0.0, ptr::null_mut()) };
        assert_eq!(s, IrdecoStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(irdeco_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "null pointer argument");
    }

    #[test]
    fn domain_error_code() {
        let mut ev = ptr::null_mut();
        let s = unsafe { irdeco_event_new(0.5, 1.0, 0.0, 1.0, 0.0, &mut ev) };
        assert_eq!(s, IrdecoStatus::Domain);
        assert!(ev.is_null());
    }

    #[test]
    fn version_matches_crate() {
        let v = unsafe { CStr::from_ptr(irdeco_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
