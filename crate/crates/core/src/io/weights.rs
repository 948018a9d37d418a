//! Weight distribution files: a `# n=<length>` header then `<d> <A_d>` lines.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct WeightFile {
    pub n: usize,
    pub weights: BTreeMap<usize, f64>,
}

pub fn parse_weights(text: &str) -> Result<WeightFile> {
    let err = |line: usize, message: String| Error::Parse { line, message };
    let mut n = None;
    let mut weights = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            for token in rest.split_whitespace() {
                if let Some(v) = token.strip_prefix("n=") {
                    n = Some(
                        v.parse()
                            .map_err(|_| err(line, format!("bad length `{v}`")))?,
                    );
                }
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(line, "expected `<weight> <multiplicity>`".into()));
        }
        let d: usize = fields[0]
            .parse()
            .map_err(|_| err(line, format!("`{}` is not a weight", fields[0])))?;
        let count: f64 = fields[1]
            .parse()
            .map_err(|_| err(line, format!("`{}` is not a number", fields[1])))?;
        if !count.is_finite() || count < 0.0 {
            return Err(err(
                line,
                format!("multiplicity `{}` must be non-negative", fields[1]),
            ));
        }
        *weights.entry(d).or_insert(0.0) += count;
    }
    let n = n.ok_or_else(|| err(1, "missing `# n=<length>` header".into()))?;
    Ok(WeightFile { n, weights })
}

pub fn read_weights(path: &Path) -> Result<WeightFile> {
    parse_weights(&std::fs::read_to_string(path)?)
}
