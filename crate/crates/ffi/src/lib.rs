//! C ABI over `ramsey-core`.
//!
//! Every structure is an opaque handle created by a `*_build`, `*_generate`
//! or `*_parse` function and released by the matching `*_free`. Fallible
//! functions return a [`RamseyStatus`] and write results through out
//! pointers; on failure [`ramsey_last_error`] describes the error.
//! Strings returned to the caller are released with [`ramsey_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ramsey_core::eval::{self, EvalConfig, Suite};
use ramsey_core::oracle::{self, OracleIndex};
use ramsey_core::ranking::{self, RankingIndex};
use ramsey_core::{Error, MetricKind, MetricSpace};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RamseyStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    UnknownPoint = 4,
    OutOfRange = 5,
    Io = 6,
    /// A check in an evaluation report failed.
    CheckFailed = 7,
    Internal = 8,
}

pub struct RamseyMetric(MetricSpace);
pub struct RamseyOracle(OracleIndex);
pub struct RamseyRanking(RankingIndex);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: RamseyStatus, msg: impl Into<String>) -> RamseyStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> RamseyStatus {
    let status = match &e {
        Error::Parse { .. } => RamseyStatus::Parse,
        Error::InvalidMetric(_) | Error::InvalidTree(_) | Error::InvalidParameter(_) => RamseyStatus::InvalidArgument,
        Error::UnknownPoint(_) => RamseyStatus::UnknownPoint,
        Error::PositionOutOfRange { .. } | Error::NoSuchAncestor => RamseyStatus::OutOfRange,
        Error::Io(_) => RamseyStatus::Io,
    };
    fail(status, e.to_string())
}

/// Runs `f`, mapping errors and panics to a status.
fn guard(f: impl FnOnce() -> Result<(), RamseyStatus>) -> RamseyStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RamseyStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(RamseyStatus::Internal, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, RamseyStatus>;
}

impl<T> OrStatus<T> for ramsey_core::Result<T> {
    fn or_status(self) -> Result<T, RamseyStatus> {
        self.map_err(from_error)
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, RamseyStatus> {
    p.as_ref().ok_or_else(|| fail(RamseyStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, RamseyStatus> {
    p.as_mut().ok_or_else(|| fail(RamseyStatus::NullPointer, format!("{what} is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, RamseyStatus> {
    if p.is_null() {
        return Err(fail(RamseyStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(RamseyStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn into_c_string(s: String) -> Result<*mut c_char, RamseyStatus> {
    CString::new(s).map(CString::into_raw).map_err(|_| fail(RamseyStatus::Internal, "string contains a nul byte"))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn ramsey_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn ramsey_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` is null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ramsey_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Generates a metric; `kind` is `euclidean[:dim]`, `graph[:density]`,
/// `equilateral` or `uniform`.
///
/// # Safety
/// `kind` is a nul-terminated string and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_metric_generate(
    kind: *const c_char,
    n: usize,
    seed: u64,
    out_metric: *mut *mut RamseyMetric,
) -> RamseyStatus {
    guard(|| {
        let kind: MetricKind = text(kind, "kind")?.parse().or_status()?;
        let slot = out(out_metric, "out_metric")?;
        let m = MetricSpace::generate(kind, n, seed).or_status()?;
        *slot = Box::into_raw(Box::new(RamseyMetric(m)));
        Ok(())
    })
}

/// Builds a metric from a row-major `n × n` matrix, validating it.
///
/// # Safety
/// `dist` points to `n * n` readable doubles and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_metric_from_matrix(
    n: usize,
    dist: *const f64,
    out_metric: *mut *mut RamseyMetric,
) -> RamseyStatus {
    guard(|| {
        if dist.is_null() {
            return Err(fail(RamseyStatus::NullPointer, "dist is null"));
        }
        let len = n.checked_mul(n).ok_or_else(|| fail(RamseyStatus::InvalidArgument, "n is too large"))?;
        let slot = out(out_metric, "out_metric")?;
        let m = MetricSpace::from_matrix(n, std::slice::from_raw_parts(dist, len).to_vec()).or_status()?;
        *slot = Box::into_raw(Box::new(RamseyMetric(m)));
        Ok(())
    })
}

/// Parses a metric in the text file format.
///
/// # Safety
/// `src` is a nul-terminated string and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_metric_parse(src: *const c_char, out_metric: *mut *mut RamseyMetric) -> RamseyStatus {
    guard(|| {
        let m = MetricSpace::parse(text(src, "text")?).or_status()?;
        *out(out_metric, "out_metric")? = Box::into_raw(Box::new(RamseyMetric(m)));
        Ok(())
    })
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `m` is null or a live metric handle.
#[no_mangle]
pub unsafe extern "C" fn ramsey_metric_len(m: *const RamseyMetric) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

/// # Safety
/// `m` is a live metric handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_metric_distance(
    m: *const RamseyMetric,
    x: usize,
    y: usize,
    out_d: *mut f64,
) -> RamseyStatus {
    guard(|| {
        let m = &borrow(m, "metric")?.0;
        for p in [x, y] {
            if p >= m.len() {
                return Err(from_error(Error::UnknownPoint(p)));
            }
        }
        *out(out_d, "out_d")? = m.d(x, y);
        Ok(())
    })
}

/// Serializes a metric; release the result with [`ramsey_string_free`].
///
/// # Safety
/// `m` is a live metric handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_metric_to_text(m: *const RamseyMetric, out_text: *mut *mut c_char) -> RamseyStatus {
    guard(|| {
        let s = borrow(m, "metric")?.0.to_text();
        *out(out_text, "out_text")? = into_c_string(s)?;
        Ok(())
    })
}

/// # Safety
/// `m` is null or a metric handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ramsey_metric_free(m: *mut RamseyMetric) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Builds a distance oracle with stretch at most `128k`; `k > 1`.
///
/// # Safety
/// `m` is a live metric handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_oracle_build(
    m: *const RamseyMetric,
    k: f64,
    seed: u64,
    out_oracle: *mut *mut RamseyOracle,
) -> RamseyStatus {
    guard(|| {
        let m = &borrow(m, "metric")?.0;
        let slot = out(out_oracle, "out_oracle")?;
        let o = oracle::build_oracle(m, k, seed).or_status()?;
        *slot = Box::into_raw(Box::new(RamseyOracle(o)));
        Ok(())
    })
}

/// Distance estimate `E` with `d <= E <= 128k·d`. When `out_accesses` is
/// non-null it receives the number of stored cells the query read.
///
/// # Safety
/// `o` is a live oracle handle, `out_e` is writable and `out_accesses` is
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_oracle_query(
    o: *const RamseyOracle,
    x: usize,
    y: usize,
    out_e: *mut f64,
    out_accesses: *mut u32,
) -> RamseyStatus {
    guard(|| {
        let o = &borrow(o, "oracle")?.0;
        let slot = out(out_e, "out_e")?;
        let (e, cost) = o.query_counted(x, y).or_status()?;
        *slot = e;
        if let Some(a) = out_accesses.as_mut() {
            *a = cost;
        }
        Ok(())
    })
}

/// # Safety
/// `o` is null or a live oracle handle.
#[no_mangle]
pub unsafe extern "C" fn ramsey_oracle_len(o: *const RamseyOracle) -> usize {
    o.as_ref().map_or(0, |o| o.0.point_count())
}

/// # Safety
/// `o` is a live oracle handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_oracle_to_text(o: *const RamseyOracle, out_text: *mut *mut c_char) -> RamseyStatus {
    guard(|| {
        let s = borrow(o, "oracle")?.0.to_text();
        *out(out_text, "out_text")? = into_c_string(s)?;
        Ok(())
    })
}

/// # Safety
/// `src` is a nul-terminated string and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_oracle_parse(src: *const c_char, out_oracle: *mut *mut RamseyOracle) -> RamseyStatus {
    guard(|| {
        let o = OracleIndex::parse(text(src, "text")?).or_status()?;
        *out(out_oracle, "out_oracle")? = Box::into_raw(Box::new(RamseyOracle(o)));
        Ok(())
    })
}

/// # Safety
/// `o` is null or an oracle handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ramsey_oracle_free(o: *mut RamseyOracle) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

/// Builds a proximity ranking index; `k > 1`.
///
/// # Safety
/// `m` is a live metric handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_ranking_build(
    m: *const RamseyMetric,
    k: f64,
    seed: u64,
    out_ranking: *mut *mut RamseyRanking,
) -> RamseyStatus {
    guard(|| {
        let m = &borrow(m, "metric")?.0;
        let slot = out(out_ranking, "out_ranking")?;
        let r = ranking::build_ranking(m, k, seed).or_status()?;
        *slot = Box::into_raw(Box::new(RamseyRanking(r)));
        Ok(())
    })
}

/// The point at 1-based position `i` of `x`'s ranking.
///
/// # Safety
/// `r` is a live ranking handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_ranking_access(
    r: *const RamseyRanking,
    x: usize,
    i: usize,
    out_y: *mut usize,
) -> RamseyStatus {
    guard(|| {
        let r = &borrow(r, "ranking")?.0;
        let slot = out(out_y, "out_y")?;
        *slot = r.rank_access(x, i).or_status()?;
        Ok(())
    })
}

/// The 1-based position of `y` in `x`'s ranking.
///
/// # Safety
/// `r` is a live ranking handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_ranking_rank(
    r: *const RamseyRanking,
    x: usize,
    y: usize,
    out_i: *mut usize,
) -> RamseyStatus {
    guard(|| {
        let r = &borrow(r, "ranking")?.0;
        let slot = out(out_i, "out_i")?;
        *slot = r.rank_of(x, y).or_status()?;
        Ok(())
    })
}

/// # Safety
/// `r` is null or a live ranking handle.
#[no_mangle]
pub unsafe extern "C" fn ramsey_ranking_len(r: *const RamseyRanking) -> usize {
    r.as_ref().map_or(0, |r| r.0.point_count())
}

/// # Safety
/// `r` is a live ranking handle and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_ranking_to_text(r: *const RamseyRanking, out_text: *mut *mut c_char) -> RamseyStatus {
    guard(|| {
        let s = borrow(r, "ranking")?.0.to_text();
        *out(out_text, "out_text")? = into_c_string(s)?;
        Ok(())
    })
}

/// # Safety
/// `src` is a nul-terminated string and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_ranking_parse(
    src: *const c_char,
    out_ranking: *mut *mut RamseyRanking,
) -> RamseyStatus {
    guard(|| {
        let r = RankingIndex::parse(text(src, "text")?).or_status()?;
        *out(out_ranking, "out_ranking")? = Box::into_raw(Box::new(RamseyRanking(r)));
        Ok(())
    })
}

/// # Safety
/// `r` is null or a ranking handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ramsey_ranking_free(r: *mut RamseyRanking) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Runs an evaluation suite (`all` for every suite). `n`, `k` and
/// `trials` override the suite defaults when positive. The report is
/// written to `out_report` even when a check fails, in which case the
/// status is `CheckFailed`.
///
/// # Safety
/// `suite` is a nul-terminated string and `out_report` is writable.
#[no_mangle]
pub unsafe extern "C" fn ramsey_eval(
    suite: *const c_char,
    seed: u64,
    n: usize,
    k: f64,
    trials: usize,
    out_report: *mut *mut c_char,
) -> RamseyStatus {
    guard(|| {
        let name = text(suite, "suite")?;
        let slot = out(out_report, "out_report")?;
        let cfg = EvalConfig {
            seed,
            n: (n > 0).then_some(n),
            k: (k > 0.0).then_some(k),
            trials: (trials > 0).then_some(trials),
        };
        let report =
            if name == "all" { eval::run_all(&cfg) } else { eval::run(name.parse::<Suite>().or_status()?, &cfg) }
                .or_status()?;
        *slot = into_c_string(report.to_text())?;
        if report.passed() {
            Ok(())
        } else {
            Err(fail(RamseyStatus::CheckFailed, format!("{} checks failed", report.failures().count())))
        }
    })
}
