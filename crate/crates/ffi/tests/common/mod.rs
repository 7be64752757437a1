//! Safe wrappers over the C ABI for tests.
#![allow(dead_code)]

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use ramsey_ffi::*;

pub fn check(status: RamseyStatus) {
    assert_eq!(status, RamseyStatus::Ok, "{}", last_error());
}

pub fn last_error() -> String {
    let p = ramsey_last_error();
    if p.is_null() {
        String::new()
    } else {
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }
}

/// Takes ownership of a library string.
///
/// # Safety
/// `s` was returned by the library and is not yet freed.
pub unsafe fn take(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { ramsey_string_free(s) };
    out
}

pub struct Metric(pub *mut RamseyMetric);

impl Metric {
    pub fn generate(kind: &str, n: usize, seed: u64) -> Metric {
        let kind = CString::new(kind).unwrap();
        let mut m = ptr::null_mut();
        check(unsafe { ramsey_metric_generate(kind.as_ptr(), n, seed, &mut m) });
        Metric(m)
    }

    pub fn len(&self) -> usize {
        unsafe { ramsey_metric_len(self.0) }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn d(&self, x: usize, y: usize) -> f64 {
        let mut d = 0.0;
        check(unsafe { ramsey_metric_distance(self.0, x, y, &mut d) });
        d
    }
}

impl Drop for Metric {
    fn drop(&mut self) {
        unsafe { ramsey_metric_free(self.0) }
    }
}

pub struct Oracle(pub *mut RamseyOracle);

impl Oracle {
    pub fn build(m: &Metric, k: f64, seed: u64) -> Oracle {
        let mut o = ptr::null_mut();
        check(unsafe { ramsey_oracle_build(m.0, k, seed, &mut o) });
        Oracle(o)
    }

    pub fn query(&self, x: usize, y: usize) -> (f64, u32) {
        let (mut e, mut a) = (0.0, 0u32);
        check(unsafe { ramsey_oracle_query(self.0, x, y, &mut e, &mut a) });
        (e, a)
    }

    pub fn text(&self) -> String {
        let mut s = ptr::null_mut();
        check(unsafe { ramsey_oracle_to_text(self.0, &mut s) });
        unsafe { take(s) }
    }
}

impl Drop for Oracle {
    fn drop(&mut self) {
        unsafe { ramsey_oracle_free(self.0) }
    }
}

pub struct Ranking(pub *mut RamseyRanking);

impl Ranking {
    pub fn build(m: &Metric, k: f64, seed: u64) -> Ranking {
        let mut r = ptr::null_mut();
        check(unsafe { ramsey_ranking_build(m.0, k, seed, &mut r) });
        Ranking(r)
    }

    pub fn access(&self, x: usize, i: usize) -> usize {
        let mut y = 0;
        check(unsafe { ramsey_ranking_access(self.0, x, i, &mut y) });
        y
    }

    pub fn rank(&self, x: usize, y: usize) -> usize {
        let mut i = 0;
        check(unsafe { ramsey_ranking_rank(self.0, x, y, &mut i) });
        i
    }

    pub fn text(&self) -> String {
        let mut s = ptr::null_mut();
        check(unsafe { ramsey_ranking_to_text(self.0, &mut s) });
        unsafe { take(s) }
    }
}

impl Drop for Ranking {
    fn drop(&mut self) {
        unsafe { ramsey_ranking_free(self.0) }
    }
}

/// Runs a suite; returns the status and the report.
pub fn eval(suite: &str, seed: u64, n: usize, k: f64, trials: usize) -> (RamseyStatus, String) {
    let suite = CString::new(suite).unwrap();
    let mut report = ptr::null_mut();
    let status = unsafe { ramsey_eval(suite.as_ptr(), seed, n, k, trials, &mut report) };
    let text = if report.is_null() { String::new() } else { unsafe { take(report) } };
    (status, text)
}
