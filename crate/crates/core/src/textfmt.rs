//! Plain-text serialization.
//!
//! A series block is a header line `vars: z1 chi1 tau ; trunc: N` followed by
//! one line per term, `e1 e2 … ek : re im`, in graded-lex order. Containers
//! hold `key: value` header lines and labeled blocks: a line `Label:` with
//! nothing after the colon starts a block that runs to the next blank line,
//! label or header. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{Mono, Series, Vars};

/// Renders a series block.
pub fn write_series<C: Scalar>(s: &Series<C>) -> String {
    let mut out = format!("vars: {} ; trunc: {}\n", s.vars().names().join(" "), s.trunc());
    for (m, c) in s.terms() {
        let exps: Vec<String> = m.0.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(out, "{} : {}", exps.join(" "), c.fmt_text());
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line: &str, lineno: usize) -> Result<(Vars, u32)> {
    let rest = line
        .trim()
        .strip_prefix("vars:")
        .ok_or_else(|| perr(lineno, "expected `vars: … ; trunc: N`"))?;
    let (names, trunc) = rest
        .split_once(';')
        .ok_or_else(|| perr(lineno, "missing `; trunc: N` in series header"))?;
    let trunc = trunc
        .trim()
        .strip_prefix("trunc:")
        .ok_or_else(|| perr(lineno, "missing `trunc:` in series header"))?
        .trim()
        .parse::<u32>()
        .map_err(|e| perr(lineno, format!("bad truncation order: {e}")))?;
    let names: Vec<&str> = names.split_whitespace().collect();
    if names.is_empty() {
        return Err(perr(lineno, "series header lists no variables"));
    }
    Ok((Vars::new(&names), trunc))
}

fn parse_term<C: Scalar>(line: &str, lineno: usize, nvars: usize, trunc: u32) -> Result<(Mono, C)> {
    let (exps, coeff) = line
        .split_once(':')
        .ok_or_else(|| perr(lineno, "term line must look like `e1 … ek : re im`"))?;
    let exps: Vec<u16> = exps
        .split_whitespace()
        .map(|t| t.parse::<u16>().map_err(|e| perr(lineno, format!("bad exponent `{t}`: {e}"))))
        .collect::<Result<_>>()?;
    if exps.len() != nvars {
        return Err(perr(
            lineno,
            format!("expected {nvars} exponents, found {}", exps.len()),
        ));
    }
    let m = Mono::from_slice(&exps);
    if m.degree() > trunc {
        return Err(perr(
            lineno,
            format!("monomial degree {} exceeds trunc {trunc}", m.degree()),
        ));
    }
    let parts: Vec<&str> = coeff.split_whitespace().collect();
    let c = match parts.as_slice() {
        [re] => C::parse_text(re, "0"),
        [re, im] => C::parse_text(re, im),
        _ => Err("coefficient must be `re` or `re im`".to_string()),
    }
    .map_err(|e| perr(lineno, e))?;
    Ok((m, c))
}

/// Parses a standalone series block. `first_line` is the file line number of
/// the header, used in error messages.
pub fn parse_series<C: Scalar>(text: &str, first_line: usize) -> Result<Series<C>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + first_line, strip_comment(l)))
        .filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| perr(first_line, "empty series block"))?;
    let (vars, trunc) = parse_header(header, hl)?;
    let mut s = Series::zero(&vars, trunc);
    let mut seen = BTreeMap::new();
    for (ln, l) in lines {
        let (m, c) = parse_term::<C>(l, ln, vars.len(), trunc)?;
        if let Some(prev) = seen.insert(m.clone(), ln) {
            return Err(perr(ln, format!("monomial repeated (first seen at line {prev})")));
        }
        s.add_term(m, c);
    }
    Ok(s)
}

fn strip_comment(l: &str) -> &str {
    match l.find('#') {
        Some(i) => &l[..i],
        None => l,
    }
}

#[derive(Debug, Clone)]
struct Block {
    line: usize,
    text: String,
}

/// A parsed container of headers and labeled series blocks.
#[derive(Debug, Clone, Default)]
pub struct Document {
    headers: Vec<(String, String, usize)>,
    blocks: Vec<(String, Block)>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Document::default();
        let mut current: Option<(String, Block)> = None;
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = strip_comment(raw);
            let t = line.trim();
            if t.is_empty() {
                if let Some(b) = current.take() {
                    doc.blocks.push(b);
                }
                continue;
            }
            let in_block = current.as_ref().map(|(_, b)| !b.text.is_empty()).unwrap_or(false);
            let header_like = t
                .split_once(':')
                .map(|(k, _)| is_key(k) && k != "vars" && k.starts_with(|c: char| c.is_ascii_alphabetic()))
                .unwrap_or(false);
            if header_like && in_block {
                if let Some(b) = current.take() {
                    doc.blocks.push(b);
                }
            }
            let in_block = in_block && !header_like;
            if let Some((label, rest)) = t.split_once(':') {
                if is_key(label) && label != "vars" && rest.trim().is_empty() {
                    if let Some(b) = current.take() {
                        doc.blocks.push(b);
                    }
                    if doc.blocks.iter().any(|(l, _)| l == label) {
                        return Err(perr(ln, format!("duplicate block `{label}`")));
                    }
                    current = Some((
                        label.to_string(),
                        Block {
                            line: ln + 1,
                            text: String::new(),
                        },
                    ));
                    continue;
                }
            }
            match current.as_mut() {
                Some((_, b)) if (t.starts_with("vars:") && b.text.is_empty()) || in_block => {
                    if b.text.is_empty() {
                        b.line = ln;
                    }
                    b.text.push_str(line);
                    b.text.push('\n');
                }
                Some((label, _)) => {
                    return Err(perr(ln, format!("block `{label}` must start with a `vars:` header")));
                }
                _ if header_like => {
                    let (k, v) = t.split_once(':').expect("checked above");
                    doc.headers.push((k.trim().to_string(), v.trim().to_string(), ln));
                }
                None => return Err(perr(ln, format!("unexpected line `{t}`"))),
            }
        }
        if let Some(b) = current.take() {
            doc.blocks.push(b);
        }
        for (label, b) in &doc.blocks {
            if b.text.is_empty() {
                return Err(perr(b.line - 1, format!("block `{label}` is empty")));
            }
        }
        Ok(doc)
    }

    pub fn header(&self, key: &str) -> Option<&str> {
        self.headers.iter().find(|(k, _, _)| k == key).map(|(_, v, _)| v.as_str())
    }

    /// Header value parsed with `FromStr`, with the line number on failure.
    pub fn header_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.headers.iter().find(|(k, _, _)| k == key) {
            None => Ok(None),
            Some((_, v, ln)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| perr(*ln, format!("bad value for `{key}`: {e}"))),
        }
    }

    /// Whitespace- or comma-separated integer list header.
    pub fn header_list(&self, key: &str) -> Result<Option<Vec<i64>>> {
        match self.headers.iter().find(|(k, _, _)| k == key) {
            None => Ok(None),
            Some((_, v, ln)) => v
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<i64>().map_err(|e| perr(*ln, format!("bad entry `{t}` in `{key}`: {e}"))))
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    pub fn has_block(&self, label: &str) -> bool {
        self.blocks.iter().any(|(l, _)| l == label)
    }

    pub fn series<C: Scalar>(&self, label: &str) -> Result<Option<Series<C>>> {
        match self.blocks.iter().find(|(l, _)| l == label) {
            None => Ok(None),
            Some((_, b)) => parse_series(&b.text, b.line).map(Some),
        }
    }

    pub fn require_series<C: Scalar>(&self, label: &str) -> Result<Series<C>> {
        self.series(label)?
            .ok_or_else(|| Error::Invalid(format!("missing `{label}:` block")))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.blocks.iter().map(|(l, _)| l.as_str())
    }
}

fn is_key(k: &str) -> bool {
    !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Incremental writer for container documents.
#[derive(Debug, Default)]
pub struct DocWriter {
    out: String,
}

impl DocWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn header(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.out, "{key}: {value}");
        self
    }

    pub fn list<T: std::fmt::Display>(&mut self, key: &str, items: &[T]) -> &mut Self {
        let v: Vec<String> = items.iter().map(|x| x.to_string()).collect();
        self.header(key, v.join(" "))
    }

    pub fn series<C: Scalar>(&mut self, label: &str, s: &Series<C>) -> &mut Self {
        if !self.out.is_empty() && !self.out.ends_with("\n\n") {
            self.out.push('\n');
        }
        let _ = writeln!(self.out, "{label}:");
        self.out.push_str(&write_series(s));
        self.out.push('\n');
        self
    }

    pub fn finish(&self) -> String {
        self.out.clone()
    }
}
