//! JSON trellis files.
//!
//! ```text
//! {
//!   "n": 2,
//!   "stages": [
//!     { "nt": 1, "branches": [ { "from": 0, "to": 0, "label": [1.0] }, ... ] },
//!     ...
//!   ]
//! }
//! ```
//!
//! An optional top-level `"codewords"` field declares the number of paths.
//! Invariant violations are reported with the line of the offending branch
//! (or stage, or the top-level object).

use std::io::Write;

use serde::Deserialize;
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::trellis::{Branch, Stage, Trellis};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDto<'a> {
    n: usize,
    #[serde(borrow)]
    stages: Vec<&'a RawValue>,
    #[serde(default)]
    codewords: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StageDto<'a> {
    nt: usize,
    #[serde(borrow)]
    branches: Vec<&'a RawValue>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchDto {
    from: usize,
    to: usize,
    label: Vec<f64>,
}

fn line_of(text: &str, raw: &RawValue) -> usize {
    let offset = raw.get().as_ptr() as usize - text.as_ptr() as usize;
    text[..offset].bytes().filter(|&b| b == b'\n').count() + 1
}

fn json_error(base_line: usize, e: serde_json::Error) -> Error {
    Error::Parse {
        line: base_line + e.line().saturating_sub(1),
        message: e.to_string(),
    }
}

/// Parses and validates a trellis from JSON text.
pub fn parse_trellis(text: &str) -> Result<Trellis> {
    let file: FileDto = serde_json::from_str(text).map_err(|e| json_error(1, e))?;
    let mut stages = Vec::with_capacity(file.stages.len());
    let mut stage_lines = Vec::with_capacity(file.stages.len());
    let mut branch_lines = Vec::with_capacity(file.stages.len());
    for raw_stage in &file.stages {
        let line = line_of(text, raw_stage);
        let dto: StageDto =
            serde_json::from_str(raw_stage.get()).map_err(|e| json_error(line, e))?;
        let mut branches = Vec::with_capacity(dto.branches.len());
        let mut lines = Vec::with_capacity(dto.branches.len());
        for raw_branch in &dto.branches {
            let bl = line_of(text, raw_branch);
            let b: BranchDto =
                serde_json::from_str(raw_branch.get()).map_err(|e| json_error(bl, e))?;
            branches.push(Branch::new(b.from, b.to, b.label));
            lines.push(bl);
        }
        stages.push(Stage::new(dto.nt, branches));
        stage_lines.push(line);
        branch_lines.push(lines);
    }

    let declared = file.codewords.map(u128::from);
    let unchecked = Trellis::unchecked(file.n, stages, declared);
    let report = unchecked.validate();
    if !report.is_valid() {
        let items = report
            .violations
            .iter()
            .map(|v| {
                let line = match (v.stage, v.branch) {
                    (Some(s), Some(b)) => branch_lines[s][b],
                    (Some(s), None) => stage_lines[s],
                    _ => 1,
                };
                (line, v.to_string())
            })
            .collect();
        return Err(Error::InvalidTrellisFile(items));
    }
    let stages = unchecked.stages().to_vec();
    match declared {
        Some(m) => Trellis::with_codeword_count(file.n, stages, m),
        None => Trellis::new(file.n, stages),
    }
}

pub fn read_trellis(path: &std::path::Path) -> Result<Trellis> {
    parse_trellis(&std::fs::read_to_string(path)?)
}

/// Writes a trellis in the JSON layout above, one branch per line.
pub fn write_trellis<W: Write>(trellis: &Trellis, mut out: W) -> Result<()> {
    writeln!(out, "{{")?;
    writeln!(out, "  \"n\": {},", trellis.n())?;
    if let Some(m) = trellis.declared_codewords() {
        writeln!(out, "  \"codewords\": {m},")?;
    }
    writeln!(out, "  \"stages\": [")?;
    let n_stages = trellis.num_stages();
    for (t, stage) in trellis.stages().iter().enumerate() {
        writeln!(out, "    {{ \"nt\": {}, \"branches\": [", stage.nt)?;
        let nb = stage.branches.len();
        for (i, b) in stage.branches.iter().enumerate() {
            let label: Vec<String> = b.label.iter().map(|x| format!("{x:?}")).collect();
            writeln!(
                out,
                "      {{ \"from\": {}, \"to\": {}, \"label\": [{}] }}{}",
                b.from,
                b.to,
                label.join(", "),
                if i + 1 < nb { "," } else { "" }
            )?;
        }
        writeln!(out, "    ] }}{}", if t + 1 < n_stages { "," } else { "" })?;
    }
    writeln!(out, "  ]")?;
    writeln!(out, "}}")?;
    Ok(())
}

pub fn trellis_to_string(trellis: &Trellis) -> String {
    let mut buf = Vec::new();
    write_trellis(trellis, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("utf-8 output")
}
