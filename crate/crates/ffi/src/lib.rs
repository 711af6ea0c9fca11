//! C ABI over `moowarm`.
//!
//! Conventions:
//! - Every fallible function returns an [`MwStatus`]; results come back
//!   through out-pointers that are written only on `MW_STATUS_OK`.
//! - Objects are opaque handles created by `mw_*` constructors and released
//!   with the matching `*_free` function. Freeing `NULL` is a no-op.
//! - On failure, `mw_last_error()` returns a message for the calling thread,
//!   valid until that thread's next call into the library.
//! - Strings returned through `char **` are owned by the caller and must be
//!   released with `mw_string_free`.
//! - Panics never cross the boundary; they surface as `MW_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use moowarm::ecm::{run_ecm, EcmConfig, GridSpec, OrderSignature, WarmPolicy};
use moowarm::experiment::verify;
use moowarm::instances::{generate, Family, GenSpec};
use moowarm::report::{write_report_csv, RunReport};
use moowarm::wsm::{run_wsm, WeightOrdering, WsmConfig, WsmWarm};
use moowarm::{Error, Problem};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad argument, malformed input or dimension mismatch.
    InvalidArgument = 2,
    Io = 3,
    Infeasible = 4,
    Unbounded = 5,
    LimitExceeded = 6,
    TooLarge = 7,
    Numerical = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwOrdering {
    Random = 0,
    Lexicographic = 1,
    Angle = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwWarm {
    None = 0,
    /// WSM: previous optimum. ECM: preceding subproblem.
    Weak = 1,
    /// ECM only: best candidate from all earlier subproblems.
    Strong = 2,
}

/// Run totals plus warm-start and propagation counts.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MwTotals {
    pub subproblems: usize,
    pub solves: usize,
    pub skips: usize,
    pub injections: usize,
    pub lp_iterations: usize,
    pub nodes: usize,
    pub wall_ms: f64,
    pub warm_starts: usize,
    pub detections: usize,
    pub archive_points: usize,
}

/// Opaque multi-objective problem.
pub struct MwProblem {
    inner: Problem,
}

/// Opaque result of one WSM or ECM run.
pub struct MwReport {
    inner: RunReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &Error) -> MwStatus {
    match e {
        Error::Parse(_) | Error::Validation(_) | Error::Dimension { .. } => MwStatus::InvalidArgument,
        Error::Io(_) | Error::Csv(_) => MwStatus::Io,
        Error::InfeasibleModel => MwStatus::Infeasible,
        Error::Unbounded => MwStatus::Unbounded,
        Error::LimitExceeded(_) => MwStatus::LimitExceeded,
        Error::TooLarge(_) => MwStatus::TooLarge,
        Error::NumericalFailure(_) => MwStatus::Numerical,
    }
}

struct Fail(MwStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(MwStatus::NullPointer, format!("{what} is NULL"))
}

fn invalid(message: impl Into<String>) -> Fail {
    Fail(MwStatus::InvalidArgument, message.into())
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> MwStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            MwStatus::Ok
        }
        Ok(Err(Fail(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MwStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

fn owned_string(text: String) -> Result<*mut c_char, Fail> {
    CString::new(text)
        .map(CString::into_raw)
        .map_err(|_| invalid("output contains a NUL byte"))
}

/// Message for the last failed call on this thread; empty after a success.
#[no_mangle]
pub extern "C" fn mw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn mw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads an instance JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mw_problem_load(path: *const c_char, out: *mut *mut MwProblem) -> MwStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = moowarm::load_instance(path)?;
        write_out(out, MwProblem { inner });
        Ok(())
    })
}

/// Parses instance JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mw_problem_from_json(json: *const c_char, out: *mut *mut MwProblem) -> MwStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = Problem::from_json(text)?;
        write_out(out, MwProblem { inner });
        Ok(())
    })
}

/// Generates a seeded instance; `family` is `"KP"`, `"AP"` or `"TSP"`.
///
/// # Safety
/// `family` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mw_problem_generate(
    family: *const c_char,
    size: usize,
    p: usize,
    seed: u64,
    out: *mut *mut MwProblem,
) -> MwStatus {
    guard(|| {
        let family: Family = str_arg(family, "family")?.parse()?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = generate(&GenSpec::new(family, size, p, seed))?;
        write_out(out, MwProblem { inner });
        Ok(())
    })
}

/// # Safety
/// `problem` must be NULL or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn mw_problem_free(problem: *mut MwProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of decision variables; 0 for NULL.
///
/// # Safety
/// `problem` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw_problem_num_vars(problem: *const MwProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.num_vars())
}

/// Number of objectives; 0 for NULL.
///
/// # Safety
/// `problem` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw_problem_num_objectives(problem: *const MwProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.objective_count())
}

/// Canonical instance JSON; release with `mw_string_free`.
///
/// # Safety
/// `problem` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mw_problem_to_json(problem: *const MwProblem, out: *mut *mut c_char) -> MwStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = owned_string(p.inner.to_json())?;
        Ok(())
    })
}

/// Weighted-sum run with `samples` sampled weights.
///
/// # Safety
/// `problem` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mw_solve_wsm(
    problem: *const MwProblem,
    samples: usize,
    ordering: u32,
    warm: u32,
    seed: u64,
    out: *mut *mut MwReport,
) -> MwStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let ordering = match ordering {
            0 => WeightOrdering::Random,
            1 => WeightOrdering::Lexicographic,
            2 => WeightOrdering::Angle,
            v => return Err(invalid(format!("unknown ordering {v}"))),
        };
        let warm_start = match warm {
            0 => WsmWarm::None,
            1 => WsmWarm::Previous,
            v => return Err(invalid(format!("WSM supports warm NONE or WEAK, got {v}"))),
        };
        let config = WsmConfig {
            num_samples: samples,
            ordering,
            warm_start,
            seed,
        };
        write_out(
            out,
            MwReport {
                inner: run_wsm(&p.inner, &config)?,
            },
        );
        Ok(())
    })
}

/// Augmented epsilon-constraint run. `grid` is the number of levels per
/// objective, or 0 for every integer level between ideal and nadir estimate.
/// `signature` is NULL (all ascending) or a label such as `"o+-"`.
/// `rho <= 0` selects the automatic augmentation weight.
///
/// # Safety
/// `problem` must be a live handle; `signature` NULL or NUL-terminated;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mw_solve_ecm(
    problem: *const MwProblem,
    grid: usize,
    signature: *const c_char,
    warm: u32,
    propagate: bool,
    rho: f64,
    out: *mut *mut MwReport,
) -> MwStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let signature = if signature.is_null() {
            OrderSignature::all_ascending(p.inner.objective_count().saturating_sub(1))
        } else {
            str_arg(signature, "signature")?.parse()?
        };
        let warm = match warm {
            0 => WarmPolicy::None,
            1 => WarmPolicy::Weak,
            2 => WarmPolicy::Strong,
            v => return Err(invalid(format!("unknown warm policy {v}"))),
        };
        let config = EcmConfig {
            grid: if grid == 0 {
                GridSpec::IntegerRange { upper: None }
            } else {
                GridSpec::Equidistant(grid)
            },
            signature,
            warm,
            propagate,
            rho: (rho > 0.0).then_some(rho),
        };
        write_out(
            out,
            MwReport {
                inner: run_ecm(&p.inner, &config)?,
            },
        );
        Ok(())
    })
}

/// # Safety
/// `report` must be NULL or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn mw_report_free(report: *mut MwReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mw_report_totals(report: *const MwReport, out: *mut MwTotals) -> MwStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.inner;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = MwTotals {
            subproblems: r.records.len(),
            solves: r.totals.solves,
            skips: r.totals.skips,
            injections: r.totals.injections,
            lp_iterations: r.totals.lp_iterations,
            nodes: r.totals.nodes,
            wall_ms: r.totals.wall_ms,
            warm_starts: r.stats.warm_starts,
            detections: r.stats.detections,
            archive_points: r.archive.len(),
        };
        Ok(())
    })
}

/// Copies the objective vector of archive entry `index` (lexicographic
/// order) into `values`, which must hold `capacity >= p` doubles.
///
/// # Safety
/// `report` must be a live handle; `values` must point to `capacity`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mw_report_archive_point(
    report: *const MwReport,
    index: usize,
    values: *mut f64,
    capacity: usize,
) -> MwStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.inner;
        if values.is_null() {
            return Err(null("values"));
        }
        let entry = r
            .archive
            .entries()
            .get(index)
            .ok_or_else(|| invalid(format!("archive index {index} out of range ({})", r.archive.len())))?;
        let y = entry.objectives.values();
        if capacity < y.len() {
            return Err(invalid(format!(
                "capacity {capacity} below objective count {}",
                y.len()
            )));
        }
        std::slice::from_raw_parts_mut(values, y.len()).copy_from_slice(y);
        Ok(())
    })
}

/// Per-subproblem CSV; release with `mw_string_free`.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mw_report_to_csv(report: *const MwReport, out: *mut *mut c_char) -> MwStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut buf = Vec::new();
        write_report_csv(&mut buf, std::slice::from_ref(r))?;
        let text = String::from_utf8(buf).map_err(|_| invalid("report is not UTF-8"))?;
        *out = owned_string(text)?;
        Ok(())
    })
}

/// Checks `report` against the brute-force oracle of `problem`. `passed`
/// receives the verdict; the violations, if any, are in `mw_last_error()`
/// only when the call itself fails.
///
/// # Safety
/// Both handles must be live; `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mw_verify(problem: *const MwProblem, report: *const MwReport, passed: *mut bool) -> MwStatus {
    guard(|| {
        let p = &problem.as_ref().ok_or_else(|| null("problem"))?.inner;
        let r = &report.as_ref().ok_or_else(|| null("report"))?.inner;
        let passed = passed.as_mut().ok_or_else(|| null("passed"))?;
        *passed = verify(p, r)?.passed();
        Ok(())
    })
}
