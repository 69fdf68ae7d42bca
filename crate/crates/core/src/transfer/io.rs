//! Text formats: coordinate-list matrices and CSV density vectors.
//!
//! A matrix file starts with `#` header lines
//!
//! ```text
//! # n=100
//! # q=100
//! # span=discrete:-10:1
//! row,col,value
//! ```
//!
//! followed by one `row,col,value` line per stored entry, columns in
//! ascending order.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::transfer::matrix::{TimeSpan, TransferMatrix};
use crate::transfer::operator::LinearOperator;

pub fn write_coo<W: Write>(p: &TransferMatrix, mut out: W) -> Result<()> {
    writeln!(out, "# n={}", p.dim())?;
    writeln!(out, "# q={}", p.q())?;
    writeln!(out, "# span={}", p.span())?;
    writeln!(out, "row,col,value")?;
    let q = p.q() as f64;
    for j in 0..p.dim() {
        for (i, c) in p.column(j) {
            writeln!(out, "{i},{j},{:?}", c as f64 / q)?;
        }
    }
    Ok(())
}

fn parse_err(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: format!("{source}:{line}"),
        message: message.into(),
    }
}

pub fn read_coo<R: BufRead>(input: R, source: &str) -> Result<TransferMatrix> {
    let (mut n, mut q, mut span) = (None, None, None);
    let mut entries = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let lineno = k + 1;
        if line.is_empty() || line == "row,col,value" {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            let (key, value) = h
                .trim()
                .split_once('=')
                .ok_or_else(|| parse_err(source, lineno, "header lines are `# key=value`"))?;
            match key.trim() {
                "n" => n = Some(value.trim().parse::<usize>().map_err(|e| parse_err(source, lineno, e.to_string()))?),
                "q" => q = Some(value.trim().parse::<u32>().map_err(|e| parse_err(source, lineno, e.to_string()))?),
                "span" => span = Some(value.parse::<TimeSpan>()?),
                other => return Err(parse_err(source, lineno, format!("unknown header {other:?}"))),
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(parse_err(source, lineno, "expected row,col,value"));
        }
        let i: u32 = fields[0].parse().map_err(|_| parse_err(source, lineno, "bad row"))?;
        let j: usize = fields[1].parse().map_err(|_| parse_err(source, lineno, "bad column"))?;
        let v: f64 = fields[2].parse().map_err(|_| parse_err(source, lineno, "bad value"))?;
        entries.push((lineno, i, j, v));
    }
    let n = n.ok_or_else(|| parse_err(source, 0, "missing `# n=` header"))?;
    let q = q.ok_or_else(|| parse_err(source, 0, "missing `# q=` header"))?;
    let span = span.ok_or_else(|| parse_err(source, 0, "missing `# span=` header"))?;
    let mut columns = vec![Vec::new(); n];
    for (lineno, i, j, v) in entries {
        if j >= n {
            return Err(parse_err(source, lineno, format!("column {j} out of range")));
        }
        let c = (v * q as f64).round();
        if !(c >= 0.0) || (c - v * q as f64).abs() > 1e-6 {
            return Err(parse_err(source, lineno, format!("{v} is not a multiple of 1/{q}")));
        }
        columns[j].push((i, c as u32));
    }
    TransferMatrix::from_columns(n, q, span, columns)
}

/// Write `box,value` rows.
pub fn write_vector<W: Write>(v: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "box,value")?;
    for (i, x) in v.iter().enumerate() {
        writeln!(out, "{i},{x:?}")?;
    }
    Ok(())
}

pub fn read_vector<R: BufRead>(input: R, source: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line == "box,value" {
            continue;
        }
        let (i, x) = line
            .split_once(',')
            .ok_or_else(|| parse_err(source, k + 1, "expected box,value"))?;
        let i: usize = i.trim().parse().map_err(|_| parse_err(source, k + 1, "bad box index"))?;
        if i != out.len() {
            return Err(parse_err(source, k + 1, format!("expected box {}, found {i}", out.len())));
        }
        out.push(x.trim().parse().map_err(|_| parse_err(source, k + 1, "bad value"))?);
    }
    Ok(out)
}
