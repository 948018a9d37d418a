//! `mlbound`: spectra, bounds, SNR sweeps and Monte-Carlo runs from the
//! command line. SNR is always `E_avg / (n σ²)` in dB, not Eb/N0.

mod csv;
mod sweep;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mlbound_core::io::{
    read_spectrum, read_trellis, read_weights, write_distance_spectrum, write_triangle_spectrum,
};
use mlbound_core::simulate::{monte_carlo_fer_with, SimulationOptions};
use mlbound_core::spectrum::{euclidean_spectrum, triangle_spectrum, DEFAULT_QUANTIZATION};
use mlbound_core::ChannelParams;

#[derive(Parser)]
#[command(
    name = "mlbound",
    version,
    about = "Upper bounds on ML decoding error probability over AWGN"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a Euclidean or triangle distance spectrum from a trellis.
    Spectrum(SpectrumArgs),
    /// Evaluate bounds (and optionally simulate) over an SNR grid.
    Sweep(sweep::SweepArgs),
    /// Estimate the frame error rate at one noise level.
    Simulate(SimulateArgs),
    /// Check a trellis, spectrum or weight file and summarize it.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Euclidean,
    Triangle,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    trellis: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Quantization tolerance for merging distances.
    #[arg(long, default_value_t = DEFAULT_QUANTIZATION)]
    tolerance: f64,
    #[arg(long, value_enum, default_value = "euclidean")]
    kind: Kind,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    trellis: PathBuf,
    #[arg(long, conflicts_with = "snr_db", required_unless_present = "snr_db")]
    sigma: Option<f64>,
    /// SNR in dB of E_avg / (n σ²).
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    #[arg(long)]
    frames: u64,
    #[arg(long)]
    seed: u64,
    /// Worker threads (default: rayon's global pool).
    #[arg(long)]
    workers: Option<usize>,
    /// CSV file to append the row to; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ValidateArgs {
    #[arg(long)]
    trellis: Option<PathBuf>,
    #[arg(long)]
    spectrum: Option<PathBuf>,
    #[arg(long)]
    weights: Option<PathBuf>,
}

/// Failure classes, mapped to exit statuses 1 and 2.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(mlbound_core::Error),
}

impl From<mlbound_core::Error> for Failure {
    fn from(e: mlbound_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

fn in_file(path: &Path) -> impl Fn(mlbound_core::Error) -> Failure + '_ {
    move |e| Failure::Usage(format!("{}: {e}", path.display()))
}

/// Writes to a sibling temporary file and renames it into place, so a
/// failed run never leaves a partial file behind.
fn write_atomically(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> CliResult<()>,
) -> CliResult<()> {
    let tmp = path.with_extension("partial");
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
        Ok(())
    })();
    match result {
        Ok(()) => Ok(std::fs::rename(&tmp, path)?),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}

fn cmd_spectrum(a: SpectrumArgs) -> CliResult<()> {
    let trellis = read_trellis(&a.trellis).map_err(in_file(&a.trellis))?;
    let (entries, mass) = match a.kind {
        Kind::Euclidean => {
            let s = euclidean_spectrum(&trellis, a.tolerance)?;
            write_atomically(&a.out, |w| Ok(write_distance_spectrum(&s, w)?))?;
            (s.entries().len(), s.total_mass())
        }
        Kind::Triangle => {
            let s = triangle_spectrum(&trellis, a.tolerance)?;
            write_atomically(&a.out, |w| Ok(write_triangle_spectrum(&s, w)?))?;
            (s.entries().len(), s.total_mass())
        }
    };
    println!(
        "{entries} entries, total mass {mass}, written to {}",
        a.out.display()
    );
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> CliResult<()> {
    if a.frames == 0 {
        return Err(Failure::Usage("--frames must be positive".into()));
    }
    let trellis = read_trellis(&a.trellis).map_err(in_file(&a.trellis))?;
    let energy = trellis.average_energy()?;
    let ch = match (a.sigma, a.snr_db) {
        (Some(s), _) => ChannelParams::new(s, trellis.n(), energy)?,
        (None, Some(db)) => ChannelParams::from_snr_db(db, trellis.n(), energy)?,
        (None, None) => unreachable!("clap requires one of --sigma and --snr-db"),
    };
    let mut opts = SimulationOptions::new(a.frames, a.seed);
    opts.workers = a.workers;
    let est = monte_carlo_fer_with(&trellis, ch.sigma, &opts)?;
    println!(
        "sigma={} snr_db={} fer={} stderr={} errors={} frames={}",
        ch.sigma,
        ch.snr_db(),
        est.fer,
        est.stderr,
        est.errors_observed,
        est.frames
    );
    let row = csv::Row {
        snr_db: ch.snr_db(),
        sigma: ch.sigma,
        fer: Some((est.fer, est.stderr, est.frames)),
        ..csv::Row::default()
    };
    match a.out {
        Some(path) => csv::append_row(&path, &row)?,
        None => {
            let mut out = std::io::stdout().lock();
            csv::write_header(&mut out)?;
            csv::write_row(&mut out, &row)?;
        }
    }
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> CliResult<()> {
    if let Some(p) = a.trellis {
        let t = read_trellis(&p).map_err(in_file(&p))?;
        let max_states = (0..=t.num_stages())
            .map(|i| t.state_count(i))
            .max()
            .unwrap_or(0);
        println!(
            "valid trellis: n={} stages={} max states={} codewords={} average energy={}",
            t.n(),
            t.num_stages(),
            max_states,
            t.path_count(),
            t.average_energy()?
        );
    } else if let Some(p) = a.spectrum {
        let s = read_spectrum(&p).map_err(in_file(&p))?;
        println!(
            "valid spectrum file: n={} eps={} A entries={} B entries={}",
            s.n,
            s.tolerance,
            s.distance.as_ref().map_or(0, |d| d.entries().len()),
            s.triangle.as_ref().map_or(0, |t| t.entries().len())
        );
    } else if let Some(p) = a.weights {
        let w = read_weights(&p).map_err(in_file(&p))?;
        println!(
            "valid weight file: n={} weights={} total={}",
            w.n,
            w.weights.len(),
            w.weights.values().sum::<f64>()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Sweep(a) => sweep::run(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
