//! C ABI over the `gkp_repeater` library.
//!
//! Every fallible function returns a [`GkpStatus`] and writes its result
//! through an out-pointer. Chain plans are opaque handles created with
//! [`gkp_chain_new`] and released with [`gkp_chain_free`]. The detail of the
//! most recent failure on the calling thread is available from
//! [`gkp_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gkp_repeater::analytic::achievable_distance;
use gkp_repeater::codes::CodeName;
use gkp_repeater::cost::station_costs;
use gkp_repeater::keyrate::{ad_key_rate, key_rate_from_flips, plob, BellDiagonal};
use gkp_repeater::mc::chain::{run_chain, ChainConfig, ChainPlan, Scheme};
use gkp_repeater::mc::estimate::{estimate, EstimateOptions};
use gkp_repeater::quad::{error_likelihood, flip_prob, FiberParams, RandomStream, Squeezing};
use gkp_repeater::Error;

/// Result codes shared by all functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GkpStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Config = 3,
    PrecisionExhausted = 4,
    BudgetExceeded = 5,
    Infeasible = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GkpScheme {
    GkpOnly = 0,
    C4 = 1,
    Steane7 = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GkpCode {
    C4 = 0,
    Steane7 = 1,
}

/// Outcome of an adaptive Monte-Carlo estimate over a chain of links.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GkpEstimate {
    pub p_err_x: f64,
    pub p_err_z: f64,
    pub se_x: f64,
    pub se_z: f64,
    pub trials: u64,
    pub converged: bool,
}

/// Opaque precomputed chain: schedule, coefficients and noise model.
pub struct GkpChain {
    plan: ChainPlan,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GkpStatus {
    match e {
        Error::Domain(_) | Error::InfeasibleQber(_) | Error::SingularConversion(_) | Error::Insufficient(_) => {
            GkpStatus::Domain
        }
        Error::Config(_) | Error::Io(_) => GkpStatus::Config,
        Error::PrecisionExhausted { .. } => GkpStatus::PrecisionExhausted,
        Error::BudgetExceeded { .. } => GkpStatus::BudgetExceeded,
        Error::Infeasible(_) => GkpStatus::Infeasible,
    }
}

fn guard<F: FnOnce() -> Result<(), Error>>(f: F) -> GkpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GkpStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".to_owned());
            GkpStatus::Internal
        }
    }
}

macro_rules! out_ptr {
    ($p:expr) => {
        if $p.is_null() {
            set_error(format!("null pointer: {}", stringify!($p)));
            return GkpStatus::NullPointer;
        }
    };
}

/// Static description of a status code. Never null; do not free.
#[no_mangle]
pub extern "C" fn gkp_status_message(status: GkpStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        GkpStatus::Ok => b"ok\0",
        GkpStatus::NullPointer => b"null pointer argument\0",
        GkpStatus::Domain => b"argument outside the valid domain\0",
        GkpStatus::Config => b"invalid configuration\0",
        GkpStatus::PrecisionExhausted => b"arithmetic precision exhausted\0",
        GkpStatus::BudgetExceeded => b"sample budget exceeded\0",
        GkpStatus::Infeasible => b"no feasible result\0",
        GkpStatus::Internal => b"internal error\0",
    };
    s.as_ptr() as *const c_char
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn gkp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map(|c| c.as_bytes()).unwrap_or(b"");
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Repeaterless key capacity of a pure-loss fibre (bits per mode); +inf at 0 km.
#[no_mangle]
pub extern "C" fn gkp_plob(length_km: f64) -> f64 {
    plob(length_km)
}

/// Probability that a Gaussian shift of std `sigma` is corrected to a logical flip.
///
/// # Safety
/// `out` must be null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gkp_flip_prob(sigma: f64, out: *mut f64) -> GkpStatus {
    out_ptr!(out);
    guard(|| {
        *out = flip_prob(sigma)?;
        Ok(())
    })
}

/// Flip likelihood given the measured syndrome `x0` ∈ [−√π/2, √π/2).
///
/// # Safety
/// `out` must be null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gkp_error_likelihood(sigma: f64, x0: f64, out: *mut f64) -> GkpStatus {
    out_ptr!(out);
    guard(|| {
        *out = error_likelihood(sigma, x0)?;
        Ok(())
    })
}

/// Squeezing in dB for a GKP noise standard deviation.
///
/// # Safety
/// `out` must be null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gkp_squeezing_db(sigma: f64, out: *mut f64) -> GkpStatus {
    out_ptr!(out);
    guard(|| {
        *out = Squeezing::from_sigma(sigma)?.db;
        Ok(())
    })
}

/// Six-state key fraction with advantage distillation for Bell-diagonal coefficients.
///
/// # Safety
/// `out` must be null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gkp_ad_key_rate(p00: f64, p01: f64, p10: f64, p11: f64, out: *mut f64) -> GkpStatus {
    out_ptr!(out);
    guard(|| {
        *out = ad_key_rate(&BellDiagonal::new(p00, p01, p10, p11)?);
        Ok(())
    })
}

/// Key fraction for independent end-to-end X and Z flip probabilities.
#[no_mangle]
pub extern "C" fn gkp_key_rate_from_flips(q_x: f64, q_z: f64) -> f64 {
    key_rate_from_flips(q_x, q_z)
}

/// Largest distance (km) at which a GKP-only chain keeps key per mode above
/// `threshold`, with the station spacing optimised.
///
/// # Safety
/// `out_km` must be null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gkp_analytic_distance(eta0: f64, sigma: f64, threshold: f64, out_km: *mut f64) -> GkpStatus {
    out_ptr!(out_km);
    guard(|| {
        let f = FiberParams::new(eta0)?;
        let s = Squeezing::from_sigma(sigma)?;
        *out_km = achievable_distance(f, s, threshold);
        Ok(())
    })
}

/// Storage cost of a type-B and a type-A station for `code`.
///
/// # Safety
/// Out-pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn gkp_station_cost(code: GkpCode, out_type_b: *mut u32, out_type_a: *mut u32) -> GkpStatus {
    out_ptr!(out_type_b);
    out_ptr!(out_type_a);
    let name = match code {
        GkpCode::C4 => CodeName::C4,
        GkpCode::Steane7 => CodeName::Steane7,
    };
    let (b, a) = station_costs(name);
    *out_type_b = b;
    *out_type_a = a;
    GkpStatus::Ok
}

/// Build a chain plan. On success `*out` owns a handle to release with
/// [`gkp_chain_free`].
///
/// # Safety
/// `out` must be null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gkp_chain_new(
    eta0: f64,
    sigma_gkp: f64,
    scheme: GkpScheme,
    n_multi: u32,
    n_all: u32,
    analog: bool,
    digits: u32,
    out: *mut *mut GkpChain,
) -> GkpStatus {
    out_ptr!(out);
    *out = std::ptr::null_mut();
    guard(|| {
        let scheme = match scheme {
            GkpScheme::GkpOnly => Scheme::GkpOnly,
            GkpScheme::C4 => Scheme::C4,
            GkpScheme::Steane7 => Scheme::Steane7,
        };
        let mut cfg = ChainConfig::new(FiberParams::new(eta0)?, Squeezing::from_sigma_or_perfect(sigma_gkp)?, scheme, n_multi, n_all)?;
        cfg.analog = analog;
        let plan = ChainPlan::new(cfg, digits)?;
        *out = Box::into_raw(Box::new(GkpChain { plan }));
        Ok(())
    })
}

/// Release a handle from [`gkp_chain_new`]. Null is ignored.
///
/// # Safety
/// `chain` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gkp_chain_free(chain: *mut GkpChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Run the single trial with stream `(seed, index)`.
///
/// # Safety
/// `chain` must be a live handle; out-pointers null or valid.
#[no_mangle]
pub unsafe extern "C" fn gkp_chain_trial(
    chain: *const GkpChain,
    seed: u64,
    index: u64,
    out_flip_x: *mut bool,
    out_flip_z: *mut bool,
) -> GkpStatus {
    out_ptr!(chain);
    out_ptr!(out_flip_x);
    out_ptr!(out_flip_z);
    guard(|| {
        let mut s = RandomStream::new(seed, index);
        let r = run_chain(&(*chain).plan, &mut s);
        *out_flip_x = r.flip_x;
        *out_flip_z = r.flip_z;
        Ok(())
    })
}

/// Adaptive estimate of the logical flip probabilities over the chain.
/// Returns `BudgetExceeded` (with `*out` filled and `converged = false`) when
/// the budget stops the sampling first.
///
/// # Safety
/// `chain` must be a live handle; `out` null or valid.
#[no_mangle]
pub unsafe extern "C" fn gkp_chain_estimate(
    chain: *const GkpChain,
    threshold: f64,
    seed: u64,
    budget: u64,
    out: *mut GkpEstimate,
) -> GkpStatus {
    out_ptr!(chain);
    out_ptr!(out);
    guard(|| {
        let opts = EstimateOptions::new(threshold, seed)?.with_budget(budget);
        let e = estimate(&(*chain).plan, &opts)?;
        *out = GkpEstimate {
            p_err_x: e.p_err_x,
            p_err_z: e.p_err_z,
            se_x: e.se_x,
            se_z: e.se_z,
            trials: e.trials,
            converged: e.converged,
        };
        if e.budget_exceeded {
            Err(Error::BudgetExceeded { budget })
        } else {
            Ok(())
        }
    })
}
