//! The sweep/simulate CSV layout. Reals are written with 12 significant
//! digits; absent quantities are empty fields.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

pub const HEADER: &str = "snr_db,sigma,union,sb,tb,tsb,fer,fer_stderr,frames";

#[derive(Clone, Debug, Default)]
pub struct Row {
    pub snr_db: f64,
    pub sigma: f64,
    pub union: Option<f64>,
    pub sb: Option<f64>,
    pub tb: Option<f64>,
    pub tsb: Option<f64>,
    pub fer: Option<(f64, f64, u64)>,
}

fn real(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

pub fn write_header<W: Write + ?Sized>(out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")
}

pub fn write_row<W: Write + ?Sized>(out: &mut W, r: &Row) -> std::io::Result<()> {
    let (fer, stderr, frames) = match r.fer {
        Some((f, s, n)) => (real(f), real(s), n.to_string()),
        None => Default::default(),
    };
    writeln!(
        out,
        "{},{},{},{},{},{},{fer},{stderr},{frames}",
        real(r.snr_db),
        real(r.sigma),
        opt(r.union),
        opt(r.sb),
        opt(r.tb),
        opt(r.tsb)
    )
}

/// Appends `row`, writing the header first when the file is new or empty.
pub fn append_row(path: &Path, row: &Row) -> std::io::Result<()> {
    let fresh = std::fs::metadata(path)
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        write_header(&mut f)?;
    }
    write_row(&mut f, row)
}
