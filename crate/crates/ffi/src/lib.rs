//! C ABI over `fput-core`.
//!
//! Every fallible call returns an [`FputStatus`]; on failure a description is
//! available from [`fput_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function. Arrays are passed
//! as pointer plus length.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fput_core::diagnostics::QuarticKernel;
use fput_core::experiment::{init_out_of_equilibrium, init_thermal};
use fput_core::integrator::{evolve, IntegratorConfig};
use fput_core::lattice::hamiltonian_physical;
use fput_core::normalform::{scan_bound, wick_m, EtaDistribution, RandomField};
use fput_core::spectral::ModeTransform;
use fput_core::{ChainState, Error, LatticeParams};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FputStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    BlowUp = 4,
    NonResonance = 5,
    Precondition = 6,
    DegenerateDenominator = 7,
    Io = 8,
    Internal = 9,
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> FputStatus {
    match err {
        Error::Config(_) => FputStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => FputStatus::DimensionMismatch,
        Error::BlowUp { .. } => FputStatus::BlowUp,
        Error::NonResonance { .. } => FputStatus::NonResonance,
        Error::Precondition(_) => FputStatus::Precondition,
        Error::DegenerateDenominator { .. } => FputStatus::DegenerateDenominator,
        Error::Io { .. } | Error::Format { .. } => FputStatus::Io,
        Error::Consistency(_) | Error::Observer { .. } => FputStatus::Internal,
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Runs `body`, turning errors and panics into a status plus last-error text.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> FputStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FputStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} is null"));
            FputStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let text = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {text}"));
            FputStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    unsafe { p.as_mut() }.ok_or(Failure::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &'static str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts_mut(p, len) })
}

/// Message of the last failed call on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fput_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static, nul-terminated name of a status code; unknown codes are named too.
#[no_mangle]
pub extern "C" fn fput_status_name(status: i32) -> *const c_char {
    let name: &'static CStr = match status {
        0 => c"ok",
        1 => c"null pointer",
        2 => c"invalid argument",
        3 => c"dimension mismatch",
        4 => c"integration blew up",
        5 => c"non-resonance violated",
        6 => c"precondition violated",
        7 => c"degenerate denominator",
        8 => c"i/o error",
        9 => c"internal error",
        10 => c"panic",
        _ => c"unknown status",
    };
    name.as_ptr()
}

/// Library version, nul-terminated.
#[no_mangle]
pub extern "C" fn fput_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// A periodic chain together with its current state.
pub struct FputChain {
    params: LatticeParams,
    state: ChainState,
    modes: ModeTransform,
    kernel: QuarticKernel,
}

/// Quartic sums of the current state (real parts).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FputQuarticSums {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

/// Coefficient-sum totals for one `k1`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FputBoundScan {
    pub sum_b1: f64,
    pub sum_b2: f64,
    pub sum_b3: f64,
    pub total: f64,
    pub normalized: f64,
}

/// Creates a chain at rest. Release with [`fput_chain_free`].
///
/// # Safety
/// `out` must be null or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn fput_chain_new(n: usize, m: f64, kappa: f64, beta: f64, out: *mut *mut FputChain) -> FputStatus {
    guard(|| {
        let out = unsafe { deref_mut(out, "out") }?;
        *out = ptr::null_mut();
        let params = LatticeParams::new(n, m, kappa, beta)?;
        let chain = FputChain {
            params,
            state: ChainState::at_rest(n),
            modes: ModeTransform::new(&params),
            kernel: QuarticKernel::new(&params),
        };
        *out = Box::into_raw(Box::new(chain));
        Ok(())
    })
}

/// Releases a chain; null is ignored.
///
/// # Safety
/// `chain` must be null or come from [`fput_chain_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fput_chain_free(chain: *mut FputChain) {
    if !chain.is_null() {
        drop(unsafe { Box::from_raw(chain) });
    }
}

/// Number of masses.
///
/// # Safety
/// `chain` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn fput_chain_len(chain: *const FputChain, out: *mut usize) -> FputStatus {
    guard(|| {
        let chain = unsafe { deref(chain, "chain") }?;
        *unsafe { deref_mut(out, "out") }? = chain.params.n();
        Ok(())
    })
}

/// Replaces positions, momenta and time. Both arrays have `len` entries.
///
/// # Safety
/// `q` and `p` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn fput_chain_set_state(
    chain: *mut FputChain,
    q: *const f64,
    p: *const f64,
    len: usize,
    t: f64,
) -> FputStatus {
    guard(|| {
        let chain = unsafe { deref_mut(chain, "chain") }?;
        let q = unsafe { slice(q, len, "q") }?;
        let p = unsafe { slice(p, len, "p") }?;
        let state = ChainState::new(q.to_vec(), p.to_vec(), t)?;
        state.check(&chain.params)?;
        if !state.is_finite() {
            return Err(Error::Config("state contains non-finite values".into()).into());
        }
        chain.state = state;
        Ok(())
    })
}

/// Copies positions and momenta into caller buffers of `len` entries; `t` may be null.
///
/// # Safety
/// `q` and `p` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fput_chain_get_state(
    chain: *const FputChain,
    q: *mut f64,
    p: *mut f64,
    len: usize,
    t: *mut f64,
) -> FputStatus {
    guard(|| {
        let chain = unsafe { deref(chain, "chain") }?;
        if len != chain.params.n() {
            return Err(Error::DimensionMismatch {
                expected: chain.params.n(),
                actual: len,
            }
            .into());
        }
        unsafe { slice_mut(q, len, "q") }?.copy_from_slice(&chain.state.q);
        unsafe { slice_mut(p, len, "p") }?.copy_from_slice(&chain.state.p);
        if let Some(t) = unsafe { t.as_mut() } {
            *t = chain.state.t;
        }
        Ok(())
    })
}

/// Random-phase initial data: `kind` 0 is thermal, 1 out-of-equilibrium. Resets `t` to 0.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fput_chain_init_random_phase(chain: *mut FputChain, kind: u32, seed: u64) -> FputStatus {
    guard(|| {
        let chain = unsafe { deref_mut(chain, "chain") }?;
        let field = match kind {
            0 => init_thermal(&chain.params, seed),
            1 => init_out_of_equilibrium(&chain.params, seed),
            other => return Err(Error::Config(format!("unknown initial-condition kind {other}")).into()),
        };
        chain.state = chain.modes.from_normal_modes(&field)?;
        Ok(())
    })
}

/// Integrates to `t_max` with step `h` using the sixth-order scheme.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fput_chain_evolve(chain: *mut FputChain, h: f64, t_max: f64) -> FputStatus {
    guard(|| {
        let chain = unsafe { deref_mut(chain, "chain") }?;
        let config = IntegratorConfig::new(h, 1)?;
        let (next, _) = evolve(&chain.state, &chain.params, &config, t_max, &mut [])?;
        chain.state = next;
        Ok(())
    })
}

/// Total energy of the current state.
///
/// # Safety
/// `chain` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn fput_chain_energy(chain: *const FputChain, out: *mut f64) -> FputStatus {
    guard(|| {
        let chain = unsafe { deref(chain, "chain") }?;
        *unsafe { deref_mut(out, "out") }? = hamiltonian_physical(&chain.state, &chain.params)?;
        Ok(())
    })
}

/// Resonant and non-resonant quartic sums of the current state.
///
/// # Safety
/// `chain` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn fput_chain_quartic_sums(chain: *const FputChain, out: *mut FputQuarticSums) -> FputStatus {
    guard(|| {
        let chain = unsafe { deref(chain, "chain") }?;
        let out = unsafe { deref_mut(out, "out") }?;
        let field = chain.modes.to_normal_modes(&chain.state)?;
        let sums = chain.kernel.sums(&field)?;
        *out = FputQuarticSums {
            s1: sums.s1.re,
            s2: sums.s2.re,
            s3: sums.s3.re,
        };
        Ok(())
    })
}

/// Sums of squared transformation coefficients over all quartets with this `k1`.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fput_scan_bound(n: usize, kappa: f64, m: f64, k1: usize, out: *mut FputBoundScan) -> FputStatus {
    guard(|| {
        let out = unsafe { deref_mut(out, "out") }?;
        let params = LatticeParams::new(n, m, kappa, 0.0)?;
        let r = scan_bound(k1, &params)?;
        *out = FputBoundScan {
            sum_b1: r.sums[0],
            sum_b2: r.sums[1],
            sum_b3: r.sums[2],
            total: r.total,
            normalized: r.normalized,
        };
        Ok(())
    })
}

/// Wick second moment of the B1 sum for `b_k = √φ_k η_k`, Gaussian `η`.
///
/// `phi` holds `φ_1..φ_{N-1}`, so `len = N - 1`.
///
/// # Safety
/// `phi` must point to `len` readable doubles; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn fput_wick_moment(
    k1: usize,
    phi: *const f64,
    len: usize,
    kappa: f64,
    m: f64,
    out: *mut f64,
) -> FputStatus {
    guard(|| {
        let out = unsafe { deref_mut(out, "out") }?;
        let phi = unsafe { slice(phi, len, "phi") }?;
        let params = LatticeParams::new(len + 1, m, kappa, 0.0)?;
        let field = RandomField::new(phi.to_vec(), EtaDistribution::ComplexGaussian, 0)?;
        *out = wick_m(k1, &field, &params)?;
        Ok(())
    })
}
