//! Line-oriented text helpers shared by every on-disk format.

use crate::error::{Error, Result};

/// 17 significant digits; parses back to the identical `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

pub fn join_f64(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(" ")
}

pub fn join_usize(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Cursor over non-empty lines with 1-based line numbers for error reports.
pub struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate().peekable(), last: 0 }
    }

    pub fn next_line(&mut self) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            if !t.is_empty() {
                self.last = i + 1;
                return Ok((i + 1, t));
            }
        }
        Err(Error::Parse { line: self.last + 1, msg: "unexpected end of input".into() })
    }

    /// Next line, which must start with `key`; returns the remaining tokens.
    pub fn keyed(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (no, line) = self.next_line()?;
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some(k) if k == key => Ok((no, toks.collect())),
            other => Err(Error::Parse { line: no, msg: format!("expected `{key}`, found `{}`", other.unwrap_or("")) }),
        }
    }

    pub fn finish(mut self) -> Result<()> {
        match self.inner.find(|(_, l)| !l.trim().is_empty()) {
            None => Ok(()),
            Some((i, _)) => Err(Error::Parse { line: i + 1, msg: "trailing content".into() }),
        }
    }
}

pub fn parse_tok<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse::<T>().map_err(|_| Error::Parse { line, msg: format!("cannot parse `{tok}`") })
}

pub fn parse_all<T: std::str::FromStr>(toks: &[&str], line: usize) -> Result<Vec<T>> {
    toks.iter().map(|t| parse_tok(t, line)).collect()
}

pub fn expect_len<T>(v: &[T], n: usize, line: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::Parse { line, msg: format!("{what}: expected {n} values, found {}", v.len()) });
    }
    Ok(())
}
