//! Line-oriented spectrum files.
//!
//! ```text
//! # n=7 eps=1e-9
//! A 12.000000000000 7
//! B 7.000000000000 7.000000000000 12.000000000000 7
//! ```
//!
//! A file may hold `A` lines, `B` lines, or both. Blank lines and other `#`
//! lines are ignored.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectrum::{DistanceSpectrum, TriangleSpectrum, DEFAULT_QUANTIZATION};

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumFile {
    pub n: usize,
    pub tolerance: f64,
    pub distance: Option<DistanceSpectrum>,
    pub triangle: Option<TriangleSpectrum>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn number(line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_err(line, format!("`{field}` is not a number")))?;
    if !v.is_finite() || v < 0.0 {
        return Err(parse_err(
            line,
            format!("`{field}` must be finite and non-negative"),
        ));
    }
    Ok(v)
}

fn parse_header(line: usize, text: &str) -> Result<(Option<usize>, Option<f64>)> {
    let (mut n, mut eps) = (None, None);
    for token in text.split_whitespace() {
        if let Some(v) = token.strip_prefix("n=") {
            n = Some(
                v.parse()
                    .map_err(|_| parse_err(line, format!("bad length `{v}`")))?,
            );
        } else if let Some(v) = token.strip_prefix("eps=") {
            eps = Some(
                v.parse()
                    .map_err(|_| parse_err(line, format!("bad tolerance `{v}`")))?,
            );
        }
    }
    Ok((n, eps))
}

pub fn parse_spectrum(text: &str) -> Result<SpectrumFile> {
    let mut n = None;
    let mut eps = None;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let (hn, he) = parse_header(line, rest)?;
            n = n.or(hn);
            eps = eps.or(he);
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match fields[0] {
            "A" if fields.len() == 3 => {
                a.push((number(line, fields[1])?, number(line, fields[2])?))
            }
            "B" if fields.len() == 5 => b.push((
                [
                    number(line, fields[1])?,
                    number(line, fields[2])?,
                    number(line, fields[3])?,
                ],
                number(line, fields[4])?,
            )),
            "A" => return Err(parse_err(line, "expected `A <sq_distance> <multiplicity>`")),
            "B" => {
                return Err(parse_err(
                    line,
                    "expected `B <sq_energy1> <sq_energy2> <sq_distance> <multiplicity>`",
                ))
            }
            other => return Err(parse_err(line, format!("unknown record `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| parse_err(1, "missing `# n=<length>` header"))?;
    let tolerance = eps.unwrap_or(DEFAULT_QUANTIZATION);
    if a.is_empty() && b.is_empty() {
        return Err(parse_err(1, "no spectrum entries"));
    }
    Ok(SpectrumFile {
        n,
        tolerance,
        distance: (!a.is_empty()).then(|| DistanceSpectrum::from_entries(n, tolerance, a)),
        triangle: (!b.is_empty()).then(|| TriangleSpectrum::from_entries(n, tolerance, b)),
    })
}

pub fn read_spectrum(path: &Path) -> Result<SpectrumFile> {
    parse_spectrum(&std::fs::read_to_string(path)?)
}

pub fn write_distance_spectrum<W: Write>(spectrum: &DistanceSpectrum, mut out: W) -> Result<()> {
    writeln!(out, "# n={} eps={:e}", spectrum.n(), spectrum.tolerance())?;
    for &(k, m) in spectrum.entries() {
        writeln!(out, "A {k:.12} {m}")?;
    }
    Ok(())
}

pub fn write_triangle_spectrum<W: Write>(spectrum: &TriangleSpectrum, mut out: W) -> Result<()> {
    writeln!(out, "# n={} eps={:e}", spectrum.n(), spectrum.tolerance())?;
    for &(k, m) in spectrum.entries() {
        writeln!(out, "B {:.12} {:.12} {:.12} {m}", k[0], k[1], k[2])?;
    }
    Ok(())
}
