//! C ABI for the semiphi toolkit.
//!
//! Fallible calls return a [`SemiphiStatus`]. After a failure the message is
//! available from [`semiphi_last_error`] until the next call on the same
//! thread. Handles are released with their `_free` function and strings
//! returned through `char **` out-parameters with [`semiphi_string_free`].
//! Reports are the same JSON documents the command line tool prints.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use semiphi::cli_io::{self, CheckReport, InstanceFile, RunOptions};
use semiphi::generate::{generate_scaled, Dims, Instance, InstanceKind};
use semiphi::semiphi::{SolverOptions, Verdict};
use semiphi::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemiphiStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Io = 4,
    ShapeMismatch = 5,
    UnsupportedDims = 6,
    /// Input maps lack a required property (Hermitian, CP, unital, ...).
    InvalidInput = 7,
    /// The instance was decided against (not semi-phi, not equivalent, ...).
    Rejected = 8,
    /// Iterative method ran out of budget or the problem is ill-conditioned.
    Numerical = 9,
    Internal = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemiphiVerdict {
    CompletelySemiPhi = 0,
    NotSemiPhi = 1,
    Undecided = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemiphiKind {
    PhiMap = 0,
    Subordinate = 1,
    Adversarial = 2,
}

/// `E = M_{p x n}` acting from `C^d1` to `C^d2`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SemiphiDims {
    pub p: usize,
    pub n: usize,
    pub d1: usize,
    pub d2: usize,
}

/// Solver settings. Pass `NULL` wherever a pointer to options is accepted
/// to use [`semiphi_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemiphiOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

/// A validated instance `(Phi, phi)`.
pub struct SemiphiInstance {
    file: InstanceFile,
    inst: Instance,
}

/// Outcome of a certification run.
pub struct SemiphiCertificate {
    report: CheckReport,
}

struct Failure {
    status: SemiphiStatus,
    message: String,
}

impl Failure {
    fn null(name: &str) -> Self {
        Self { status: SemiphiStatus::NullArgument, message: format!("{name} is NULL") }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse(_) => SemiphiStatus::Parse,
            Error::Io(_) => SemiphiStatus::Io,
            Error::ShapeMismatch(_) => SemiphiStatus::ShapeMismatch,
            Error::UnsupportedDims(_) => SemiphiStatus::UnsupportedDims,
            Error::NotHermitian { .. }
            | Error::NotCp { .. }
            | Error::NotUnital { .. }
            | Error::EmptyInput
            | Error::NotRepresentation { .. } => SemiphiStatus::InvalidInput,
            Error::NotSemiPhi { .. }
            | Error::NotEquivalent { .. }
            | Error::NotInCommutant { .. }
            | Error::NotPositive { .. }
            | Error::OrderFails(_) => SemiphiStatus::Rejected,
            Error::NoConvergence { .. } | Error::InfeasibleWithinBudget { .. } | Error::IllConditioned(_) => {
                SemiphiStatus::Numerical
            }
            Error::InvariantViolation(_) | Error::ProjectionLeak { .. } => SemiphiStatus::Internal,
        };
        Self { status, message: e.to_string() }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: Option<String>) {
    let message = message.map(|m| CString::new(m.replace('\0', " ")).expect("NUL bytes removed"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SemiphiStatus {
    set_last_error(None);
    let failure = match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => return SemiphiStatus::Ok,
        Ok(Err(f)) => f,
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            Failure { status: SemiphiStatus::Internal, message: format!("panic: {what}") }
        }
    };
    set_last_error(Some(failure.message));
    failure.status
}

unsafe fn deref<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| Failure::null(name))
}

unsafe fn out_slot<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| Failure::null(name))
}

unsafe fn text<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure::null(name));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|e| Failure { status: SemiphiStatus::InvalidUtf8, message: format!("{name}: {e}") })
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON escapes NUL").into_raw()
}

unsafe fn run_options(opts: *const SemiphiOptions) -> Result<RunOptions, Failure> {
    let o = opts.as_ref().copied().unwrap_or_else(|| semiphi_options_default());
    if !(o.tol.is_finite() && o.tol > 0.0) {
        return Err(Error::Parse(format!("tol must be positive, got {}", o.tol)).into());
    }
    Ok(RunOptions { solver: SolverOptions { tol: o.tol, max_iter: o.max_iter }, seed: o.seed })
}

fn new_instance(file: InstanceFile) -> Result<*mut SemiphiInstance, Failure> {
    let inst = file.to_instance()?;
    Ok(Box::into_raw(Box::new(SemiphiInstance { file, inst })))
}

unsafe fn write_report<R: serde::Serialize>(
    out_json: *mut *mut c_char,
    compute: impl FnOnce() -> Result<R, Failure>,
) -> SemiphiStatus {
    guard(|| {
        let out = out_slot(out_json, "out_json")?;
        *out = owned_string(cli_io::to_json(&compute()?));
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn semiphi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or `NULL` if it succeeded.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn semiphi_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |m| m.as_ptr()))
}

/// # Safety
/// `s` must be `NULL` or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn semiphi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn semiphi_options_default() -> SemiphiOptions {
    let s = SolverOptions::default();
    SemiphiOptions { tol: s.tol, max_iter: s.max_iter, seed: 0 }
}

/// Parse and validate an instance document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_instance_from_json(
    json: *const c_char,
    out: *mut *mut SemiphiInstance,
) -> SemiphiStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        let file = InstanceFile::from_json(text(json, "json")?)?;
        *out = new_instance(file)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_instance_read(path: *const c_char, out: *mut *mut SemiphiInstance) -> SemiphiStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        let file = InstanceFile::read(Path::new(text(path, "path")?))?;
        *out = new_instance(file)?;
        Ok(())
    })
}

/// Seeded instance. For `SEMIPHI_KIND_SUBORDINATE`, `parent_out` may receive
/// the dominating phi-map; it must be `NULL` for the other kinds.
///
/// # Safety
/// `out` must be writable; `parent_out` must be `NULL` or writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_instance_generate(
    kind: SemiphiKind,
    dims: SemiphiDims,
    seed: u64,
    scale: f64,
    out: *mut *mut SemiphiInstance,
    parent_out: *mut *mut SemiphiInstance,
) -> SemiphiStatus {
    guard(|| {
        let out = out_slot(out, "out")?;
        let kind = match kind {
            SemiphiKind::PhiMap => InstanceKind::PhiMap,
            SemiphiKind::Subordinate => InstanceKind::Subordinate,
            SemiphiKind::Adversarial => InstanceKind::Adversarial,
        };
        let dims = Dims::new(dims.p, dims.n, dims.d1, dims.d2);
        let g = generate_scaled(kind, dims, seed, scale)?;
        let parent = match parent_out.as_mut() {
            None => None,
            Some(_) if g.parent.is_none() => {
                return Err(Error::UnsupportedDims(format!("parent requested for a {kind} instance")).into())
            }
            Some(slot) => {
                let p = generate_scaled(InstanceKind::PhiMap, dims, seed, scale)?;
                Some((slot, InstanceFile::from_generated(&p)))
            }
        };
        let child = new_instance(InstanceFile::from_generated(&g))?;
        if let Some((slot, file)) = parent {
            match new_instance(file) {
                Ok(p) => *slot = p,
                Err(e) => {
                    drop(Box::from_raw(child));
                    return Err(e);
                }
            }
        }
        *out = child;
        Ok(())
    })
}

/// # Safety
/// `inst` must be `NULL` or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn semiphi_instance_free(inst: *mut SemiphiInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// # Safety
/// `inst` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_instance_dims(inst: *const SemiphiInstance, out: *mut SemiphiDims) -> SemiphiStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let out = out_slot(out, "out")?;
        let d = inst.inst.dims();
        *out = SemiphiDims { p: d.p, n: d.n, d1: d.d1, d2: d.d2 };
        Ok(())
    })
}

/// Instance document, including ground truth when the instance was generated.
///
/// # Safety
/// `inst` must be a live handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_instance_to_json(
    inst: *const SemiphiInstance,
    out_json: *mut *mut c_char,
) -> SemiphiStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let out = out_slot(out_json, "out_json")?;
        *out = owned_string(inst.file.to_json());
        Ok(())
    })
}

/// Decide whether the instance is completely semi-phi. A verdict of any kind
/// is a successful call.
///
/// # Safety
/// `inst` must be a live handle, `opts` `NULL` or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_certify(
    inst: *const SemiphiInstance,
    opts: *const SemiphiOptions,
    out: *mut *mut SemiphiCertificate,
) -> SemiphiStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let out = out_slot(out, "out")?;
        let report = cli_io::check(&inst.inst, &run_options(opts)?)?;
        *out = Box::into_raw(Box::new(SemiphiCertificate { report }));
        Ok(())
    })
}

/// # Safety
/// `cert` must be `NULL` or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn semiphi_certificate_free(cert: *mut SemiphiCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// # Safety
/// `cert` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_certificate_verdict(
    cert: *const SemiphiCertificate,
    out: *mut SemiphiVerdict,
) -> SemiphiStatus {
    guard(|| {
        let cert = deref(cert, "cert")?;
        *out_slot(out, "out")? = match cert.report.verdict {
            Verdict::CompletelySemiPhi => SemiphiVerdict::CompletelySemiPhi,
            Verdict::NotSemiPhi => SemiphiVerdict::NotSemiPhi,
            Verdict::Undecided => SemiphiVerdict::Undecided,
        };
        Ok(())
    })
}

/// Smallest eigenvalue of the Gram kernel; negative exactly when the
/// instance is rejected outright.
///
/// # Safety
/// `cert` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_certificate_gram_min_eig(
    cert: *const SemiphiCertificate,
    out: *mut f64,
) -> SemiphiStatus {
    guard(|| {
        let cert = deref(cert, "cert")?;
        *out_slot(out, "out")? = cert.report.gram_min_eig;
        Ok(())
    })
}

/// Solver iterations, `0` when the solver did not run.
///
/// # Safety
/// `cert` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_certificate_iterations(
    cert: *const SemiphiCertificate,
    out: *mut usize,
) -> SemiphiStatus {
    guard(|| {
        let cert = deref(cert, "cert")?;
        *out_slot(out, "out")? = cert.report.iterations.unwrap_or(0);
        Ok(())
    })
}

/// Full check report.
///
/// # Safety
/// `cert` must be a live handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_certificate_to_json(
    cert: *const SemiphiCertificate,
    out_json: *mut *mut c_char,
) -> SemiphiStatus {
    guard(|| {
        let cert = deref(cert, "cert")?;
        *out_slot(out_json, "out_json")? = owned_string(cli_io::to_json(&cert.report));
        Ok(())
    })
}

/// Dilation pair report, minimized when `minimized` is true.
///
/// # Safety
/// `inst` must be a live handle, `opts` `NULL` or valid, `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_dilate(
    inst: *const SemiphiInstance,
    opts: *const SemiphiOptions,
    minimized: bool,
    out_json: *mut *mut c_char,
) -> SemiphiStatus {
    write_report(out_json, || {
        let inst = deref(inst, "inst")?;
        Ok(cli_io::dilate(&inst.inst, &run_options(opts)?, minimized)?)
    })
}

/// Equivalence of two independently built minimal pairs.
///
/// # Safety
/// `inst` must be a live handle, `opts` `NULL` or valid, `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_equiv(
    inst: *const SemiphiInstance,
    opts: *const SemiphiOptions,
    out_json: *mut *mut c_char,
) -> SemiphiStatus {
    write_report(out_json, || {
        let inst = deref(inst, "inst")?;
        Ok(cli_io::equiv(&inst.inst, &run_options(opts)?)?)
    })
}

/// Commutant of the minimal dilation.
///
/// # Safety
/// `inst` must be a live handle, `opts` `NULL` or valid, `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_commutant(
    inst: *const SemiphiInstance,
    opts: *const SemiphiOptions,
    out_json: *mut *mut c_char,
) -> SemiphiStatus {
    write_report(out_json, || {
        let inst = deref(inst, "inst")?;
        Ok(cli_io::commutant(&inst.inst, &run_options(opts)?)?)
    })
}

/// Whether `sub << dom`, with free `(1,1)` corners when `relaxed`.
///
/// # Safety
/// `sub` and `dom` must be live handles, `opts` `NULL` or valid, `out_json`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_order(
    sub: *const SemiphiInstance,
    dom: *const SemiphiInstance,
    opts: *const SemiphiOptions,
    relaxed: bool,
    out_json: *mut *mut c_char,
) -> SemiphiStatus {
    write_report(out_json, || {
        let (sub, dom) = (deref(sub, "sub")?, deref(dom, "dom")?);
        Ok(cli_io::order(&sub.inst, &dom.inst, &run_options(opts)?, relaxed)?)
    })
}

/// Radon-Nikodym derivative of `sub` with respect to `dom`.
///
/// # Safety
/// `sub` and `dom` must be live handles, `opts` `NULL` or valid, `out_json`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_rn(
    sub: *const SemiphiInstance,
    dom: *const SemiphiInstance,
    opts: *const SemiphiOptions,
    relaxed: bool,
    out_json: *mut *mut c_char,
) -> SemiphiStatus {
    write_report(out_json, || {
        let (sub, dom) = (deref(sub, "sub")?, deref(dom, "dom")?);
        Ok(cli_io::rn(&sub.inst, &dom.inst, &run_options(opts)?, relaxed)?)
    })
}

/// Purity of the instance's `phi`.
///
/// # Safety
/// `inst` must be a live handle, `opts` `NULL` or valid, `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn semiphi_purity(
    inst: *const SemiphiInstance,
    opts: *const SemiphiOptions,
    out_json: *mut *mut c_char,
) -> SemiphiStatus {
    write_report(out_json, || {
        let inst = deref(inst, "inst")?;
        Ok(cli_io::purity(&inst.inst.phi, &run_options(opts)?)?)
    })
}
