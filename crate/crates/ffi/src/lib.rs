//! C interface to the surgery library.
//!
//! Domains are opaque heap handles created by `ss_domain_*` constructors and
//! released with [`ss_domain_free`]. Every fallible call returns an
//! [`SsStatus`]; on failure a message is kept per thread and can be read with
//! [`ss_last_error`]. Strings returned by the library are released with
//! [`ss_string_free`]. Panics never cross the boundary: they are reported as
//! [`SsStatus::Internal`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use spectral_surgery::domain::{load_domain, measure, perimeter, save_domain, GridDomain};
use spectral_surgery::harness::{generate, CorpusSpec};
use spectral_surgery::pde::{eigenvalues, solve_torsion, EigenOptions, TorsionOptions};
use spectral_surgery::surgery::{bounded_surgery, strip_surgery, Mode, SurgeryConfig, Verdict};
use spectral_surgery::Error;

/// Opaque rasterized domain.
pub struct SsDomain(GridDomain);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    EmptyDomain = 3,
    NotConverged = 4,
    NotSubset = 5,
    Io = 6,
    Parse = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsVerdict {
    Pass = 0,
    NoOp = 1,
    Fail = 2,
}

impl From<Verdict> for SsVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => SsVerdict::Pass,
            Verdict::NoOp => SsVerdict::NoOp,
            Verdict::Fail => SsVerdict::Fail,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SsStatus {
    match e {
        Error::EmptyDomain => SsStatus::EmptyDomain,
        Error::NotConverged { .. } => SsStatus::NotConverged,
        Error::NotSubset => SsStatus::NotSubset,
        Error::Io(_) => SsStatus::Io,
        Error::Json(_) | Error::Csv(_) | Error::Bitmap(_) | Error::Config(_) => SsStatus::Parse,
        _ => SsStatus::InvalidArgument,
    }
}

struct Fail(SsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SsStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SsStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            SsStatus::Internal
        }
    }
}

unsafe fn domain<'a>(d: *const SsDomain) -> Result<&'a GridDomain, Fail> {
    d.as_ref().map(|d| &d.0).ok_or_else(|| null("domain"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn string<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(SsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn boxed(d: GridDomain) -> *mut SsDomain {
    Box::into_raw(Box::new(SsDomain(d)))
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(SsStatus::Internal, "string contains a nul byte".into()))
}

fn mode(factor: f64) -> Result<Mode, Fail> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Fail(
            SsStatus::InvalidArgument,
            format!("mode factor must be positive, got {factor}"),
        ));
    }
    Ok(if factor == 1.0 {
        Mode::Faithful
    } else {
        Mode::Practical(factor)
    })
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a domain from `nx * ny` occupancy bytes, row-major with row 0 at
/// the lowest second coordinate. Nonzero bytes are occupied; the border must
/// be empty.
#[no_mangle]
pub unsafe extern "C" fn ss_domain_from_cells(
    nx: usize,
    ny: usize,
    h: f64,
    origin_x: f64,
    origin_y: f64,
    cells: *const u8,
    out_domain: *mut *mut SsDomain,
) -> SsStatus {
    guard(|| {
        let o = out(out_domain, "out_domain")?;
        if cells.is_null() {
            return Err(null("cells"));
        }
        let len = nx
            .checked_mul(ny)
            .ok_or_else(|| Fail(SsStatus::InvalidArgument, "nx * ny overflows".into()))?;
        let bytes = std::slice::from_raw_parts(cells, len);
        let d = GridDomain::new(
            nx,
            ny,
            h,
            [origin_x, origin_y],
            bytes.iter().map(|&b| b != 0).collect(),
        )?;
        *o = boxed(d);
        Ok(())
    })
}

/// Rasterizes a corpus spec given as JSON, for example
/// `{"id":"b","generator":"ball","radius":0.5,"h":0.0078125,"seed":1}`.
#[no_mangle]
pub unsafe extern "C" fn ss_domain_generate(
    spec_json: *const c_char,
    out_domain: *mut *mut SsDomain,
) -> SsStatus {
    guard(|| {
        let o = out(out_domain, "out_domain")?;
        let spec: CorpusSpec =
            serde_json::from_str(string(spec_json, "spec_json")?).map_err(Error::from)?;
        *o = boxed(generate(&spec)?);
        Ok(())
    })
}

/// Loads a PBM bitmap and its JSON sidecar.
#[no_mangle]
pub unsafe extern "C" fn ss_domain_load(
    path: *const c_char,
    out_domain: *mut *mut SsDomain,
) -> SsStatus {
    guard(|| {
        let o = out(out_domain, "out_domain")?;
        *o = boxed(load_domain(Path::new(string(path, "path")?))?);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ss_domain_save(d: *const SsDomain, path: *const c_char) -> SsStatus {
    guard(|| {
        save_domain(domain(d)?, Path::new(string(path, "path")?))?;
        Ok(())
    })
}

/// Releases a domain. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ss_domain_free(d: *mut SsDomain) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Releases a string returned by the library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ss_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn ss_domain_cell_count(
    d: *const SsDomain,
    out_count: *mut usize,
) -> SsStatus {
    guard(|| {
        *out(out_count, "out_count")? = domain(d)?.cell_count();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ss_domain_measure(d: *const SsDomain, out_measure: *mut f64) -> SsStatus {
    guard(|| {
        *out(out_measure, "out_measure")? = measure(domain(d)?);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ss_domain_perimeter(
    d: *const SsDomain,
    out_perimeter: *mut f64,
) -> SsStatus {
    guard(|| {
        *out(out_perimeter, "out_perimeter")? = perimeter(domain(d)?);
        Ok(())
    })
}

/// New domain dilated by `t` about the origin.
#[no_mangle]
pub unsafe extern "C" fn ss_domain_rescale(
    d: *const SsDomain,
    t: f64,
    out_domain: *mut *mut SsDomain,
) -> SsStatus {
    guard(|| {
        let o = out(out_domain, "out_domain")?;
        *o = boxed(domain(d)?.rescale(t)?);
        Ok(())
    })
}

/// Maximum and integral of the torsion function. `tol <= 0` selects the
/// default solver tolerance.
#[no_mangle]
pub unsafe extern "C" fn ss_torsion(
    d: *const SsDomain,
    tol: f64,
    out_max: *mut f64,
    out_integral: *mut f64,
) -> SsStatus {
    guard(|| {
        let (m, i) = (out(out_max, "out_max")?, out(out_integral, "out_integral")?);
        let mut opts = TorsionOptions::default();
        if tol > 0.0 {
            opts.tol = tol;
        }
        let f = solve_torsion(domain(d)?, &opts)?;
        *m = f.max();
        *i = f.integral();
        Ok(())
    })
}

/// Writes the `k` lowest Dirichlet eigenvalues, ascending, to `out_values`,
/// which must hold `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn ss_eigenvalues(
    d: *const SsDomain,
    k: usize,
    out_values: *mut f64,
) -> SsStatus {
    guard(|| {
        if out_values.is_null() {
            return Err(null("out_values"));
        }
        let s = eigenvalues(domain(d)?, k, &EigenOptions::default())?;
        std::slice::from_raw_parts_mut(out_values, k).copy_from_slice(&s.eigenvalues);
        Ok(())
    })
}

/// Strip surgery protecting the `k` lowest eigenvalues below `k_threshold`.
/// `mode_factor` 1 is faithful mode, anything else scales the energy
/// penalty. `p_bound <= 0` uses the input perimeter. On success the output
/// domain, the JSON report (free with [`ss_string_free`]) and the verdict are
/// written; `out_report_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn ss_strip_surgery(
    d: *const SsDomain,
    k_threshold: f64,
    k: usize,
    p_bound: f64,
    mode_factor: f64,
    out_domain: *mut *mut SsDomain,
    out_report_json: *mut *mut c_char,
    out_verdict: *mut SsVerdict,
) -> SsStatus {
    guard(|| {
        let (od, ov) = (
            out(out_domain, "out_domain")?,
            out(out_verdict, "out_verdict")?,
        );
        let mut cfg = SurgeryConfig::default();
        cfg.constants.mode = mode(mode_factor)?;
        let p = (p_bound > 0.0).then_some(p_bound);
        let o = strip_surgery(domain(d)?, k_threshold, k, p, &cfg)?;
        if !out_report_json.is_null() {
            *out_report_json = c_string(serde_json::to_string(&o.report).map_err(Error::from)?)?;
        }
        *ov = o.report.verdict.into();
        *od = boxed(o.domain);
        Ok(())
    })
}

/// Penalized-energy truncation and rescale; outputs as in
/// [`ss_strip_surgery`].
#[no_mangle]
pub unsafe extern "C" fn ss_bounded_surgery(
    d: *const SsDomain,
    k_threshold: f64,
    k: usize,
    mode_factor: f64,
    out_domain: *mut *mut SsDomain,
    out_report_json: *mut *mut c_char,
    out_verdict: *mut SsVerdict,
) -> SsStatus {
    guard(|| {
        let (od, ov) = (
            out(out_domain, "out_domain")?,
            out(out_verdict, "out_verdict")?,
        );
        let mut cfg = SurgeryConfig::default();
        cfg.constants.mode = mode(mode_factor)?;
        let o = bounded_surgery(domain(d)?, k_threshold, k, &cfg)?;
        if !out_report_json.is_null() {
            *out_report_json = c_string(serde_json::to_string(&o.report).map_err(Error::from)?)?;
        }
        *ov = o.report.verdict.into();
        *od = boxed(o.domain);
        Ok(())
    })
}
