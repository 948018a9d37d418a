//! `mlbound sweep`: bounds and optional simulation over an SNR grid.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use mlbound_core::bounds::{
    binary_sphere_bound, binary_tangential_bound, binary_tsb, sphere_bound_general,
    tangential_bound_general, tangential_sphere_bound_general, union_bound,
};
use mlbound_core::io::{read_spectrum, read_trellis, read_weights};
use mlbound_core::simulate::{monte_carlo_fer_with, SimulationOptions};
use mlbound_core::spectrum::{
    binary_spectra_from_weights, euclidean_spectrum, triangle_spectrum, DEFAULT_QUANTIZATION,
};
use mlbound_core::{ChannelParams, DistanceSpectrum, QuadratureConfig, Trellis, TriangleSpectrum};
use rayon::prelude::*;

use crate::csv::{self, Row};
use crate::{in_file, write_atomically, CliResult, Failure};

#[derive(Args)]
pub struct SweepArgs {
    /// Trellis file; supplies spectra not given otherwise, and is required for simulation.
    #[arg(long)]
    trellis: Option<PathBuf>,
    /// Spectrum file with A lines (B lines in it are used too).
    #[arg(long)]
    spectrum: Option<PathBuf>,
    /// Spectrum file with B lines.
    #[arg(long)]
    triangle_spectrum: Option<PathBuf>,
    /// Weight distribution of a binary linear code under BPSK; selects the binary bounds.
    #[arg(long, conflicts_with_all = ["spectrum", "triangle_spectrum"])]
    weights: Option<PathBuf>,
    /// Average codeword energy, when it cannot be taken from the inputs.
    #[arg(long)]
    energy: Option<f64>,
    /// Comma-separated subset of union,sb,tb,tsb, or `none`.
    #[arg(long, default_value = "union,sb,tb,tsb")]
    bounds: String,
    /// SNR grid in dB of E_avg / (n σ²), as START:STOP:STEP.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: String,
    /// Monte-Carlo frames per point (0 disables simulation).
    #[arg(long, default_value_t = 0)]
    frames: u64,
    /// Seed for the simulation; every point uses the same seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Probability mass that each truncated integration domain may omit.
    #[arg(long, default_value_t = 1e-12)]
    tail_cutoff: f64,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Wanted {
    union: bool,
    sb: bool,
    tb: bool,
    tsb: bool,
}

fn parse_bounds(list: &str) -> CliResult<Wanted> {
    let mut w = Wanted::default();
    if list.trim() == "none" {
        return Ok(w);
    }
    for item in list.split(',').map(str::trim) {
        match item {
            "union" => w.union = true,
            "sb" => w.sb = true,
            "tb" => w.tb = true,
            "tsb" => w.tsb = true,
            other => {
                return Err(Failure::Usage(format!(
                    "unknown bound `{other}` in --bounds (expected union, sb, tb, tsb or none)"
                )))
            }
        }
    }
    Ok(w)
}

/// Parses `START:STOP:STEP` into the grid points `START + i·STEP ≤ STOP`.
fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || Failure::Usage(format!("--snr-db expects START:STOP:STEP, got `{spec}`"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(start.is_finite() && stop.is_finite() && step > 0.0 && step.is_finite()) || start > stop {
        return Err(Failure::Usage(format!(
            "--snr-db needs finite START <= STOP and STEP > 0, got `{spec}`"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

struct Inputs {
    n: usize,
    energy: f64,
    distance: Option<DistanceSpectrum>,
    triangle: Option<TriangleSpectrum>,
    weights: Option<BTreeMap<usize, f64>>,
    trellis: Option<Trellis>,
}

fn same_n(n: &mut Option<usize>, found: usize) -> CliResult<()> {
    match *n {
        Some(expected) if expected != found => {
            Err(mlbound_core::Error::LengthMismatch { expected, found }.into())
        }
        _ => {
            *n = Some(found);
            Ok(())
        }
    }
}

fn load(a: &SweepArgs, want: Wanted) -> CliResult<Inputs> {
    let mut n = None;
    let trellis = match &a.trellis {
        Some(p) => Some(read_trellis(p).map_err(in_file(p))?),
        None => None,
    };
    if let Some(t) = &trellis {
        same_n(&mut n, t.n())?;
    }
    let (mut distance, mut triangle, mut weights) = (None, None, None);
    for p in [&a.spectrum, &a.triangle_spectrum].into_iter().flatten() {
        let f = read_spectrum(p).map_err(in_file(p))?;
        same_n(&mut n, f.n)?;
        distance = distance.or(f.distance);
        triangle = triangle.or(f.triangle);
    }
    if let Some(p) = &a.weights {
        let f = read_weights(p).map_err(in_file(p))?;
        same_n(&mut n, f.n)?;
        let (ad, bd) = binary_spectra_from_weights(&f.weights, f.n)?;
        distance = Some(ad);
        triangle = Some(bd);
        weights = Some(f.weights);
    }
    let Some(n) = n else {
        return Err(Failure::Usage(
            "sweep needs an input: --trellis, --spectrum, --triangle-spectrum or --weights".into(),
        ));
    };

    if (want.tb || want.tsb) && triangle.is_none() {
        let Some(t) = &trellis else {
            return Err(Failure::Usage(
                "tb/tsb need a triangle spectrum: pass --triangle-spectrum, --trellis or --weights"
                    .into(),
            ));
        };
        triangle = Some(triangle_spectrum(t, DEFAULT_QUANTIZATION)?);
    }
    if (want.union || want.sb) && distance.is_none() {
        distance =
            match (&triangle, &trellis) {
                (Some(b), _) => Some(b.marginal()),
                (None, Some(t)) => Some(euclidean_spectrum(t, DEFAULT_QUANTIZATION)?),
                (None, None) => return Err(Failure::Usage(
                    "union/sb need a distance spectrum: pass --spectrum, --trellis or --weights"
                        .into(),
                )),
            };
    }
    if a.frames > 0 && trellis.is_none() {
        return Err(Failure::Usage(
            "simulation (--frames > 0) needs --trellis".into(),
        ));
    }

    let energy = match (a.energy, &trellis, &weights, &triangle) {
        (Some(e), ..) => e,
        (None, Some(t), ..) => t.average_energy()?,
        (None, None, Some(_), _) => n as f64,
        (None, None, None, Some(b)) => match b.diagonal_mean_energy() {
            Some(e) => e,
            None => {
                return Err(Failure::Usage(
                    "cannot infer the average energy; pass --energy".into(),
                ))
            }
        },
        _ => {
            return Err(Failure::Usage(
                "cannot infer the average energy; pass --energy".into(),
            ))
        }
    };
    Ok(Inputs {
        n,
        energy,
        distance,
        triangle,
        weights,
        trellis,
    })
}

fn point(
    inp: &Inputs,
    want: Wanted,
    q: &QuadratureConfig,
    sim: Option<&SimulationOptions>,
    snr_db: f64,
) -> CliResult<Row> {
    let ch = ChannelParams::from_snr_db(snr_db, inp.n, inp.energy)?;
    let a = || inp.distance.as_ref().expect("distance spectrum loaded");
    let b = || inp.triangle.as_ref().expect("triangle spectrum loaded");
    let n = inp.n;
    let mut row = Row {
        snr_db,
        sigma: ch.sigma,
        ..Row::default()
    };
    if want.union {
        row.union = Some(union_bound(a(), &ch)?.value);
    }
    if let Some(w) = &inp.weights {
        if want.sb {
            row.sb = Some(binary_sphere_bound(w, n, &ch, q)?.value);
        }
        if want.tb {
            row.tb = Some(binary_tangential_bound(w, n, &ch, q)?.value);
        }
        if want.tsb {
            row.tsb = Some(binary_tsb(w, n, &ch, q)?.value);
        }
    } else {
        if want.sb {
            row.sb = Some(sphere_bound_general(a(), &ch, q)?.value);
        }
        if want.tb {
            row.tb = Some(tangential_bound_general(b(), &ch, q)?.value);
        }
        if want.tsb {
            row.tsb = Some(tangential_sphere_bound_general(b(), &ch, q)?.value);
        }
    }
    if let (Some(opts), Some(t)) = (sim, &inp.trellis) {
        let est = monte_carlo_fer_with(t, ch.sigma, opts)?;
        row.fer = Some((est.fer, est.stderr, est.frames));
    }
    Ok(row)
}

pub fn run(a: SweepArgs) -> CliResult<()> {
    let want = parse_bounds(&a.bounds)?;
    let grid = parse_grid(&a.snr_db)?;
    if want == Wanted::default() && a.frames == 0 {
        return Err(Failure::Usage(
            "nothing to do: request bounds or --frames > 0".into(),
        ));
    }
    let sim = if a.frames > 0 {
        let Some(seed) = a.seed else {
            return Err(Failure::Usage("simulation needs an explicit --seed".into()));
        };
        let mut o = SimulationOptions::new(a.frames, seed);
        o.workers = a.workers;
        Some(o)
    } else {
        None
    };
    let q = QuadratureConfig {
        relative_tolerance: a.tolerance,
        tail_mass_cutoff: a.tail_cutoff,
        ..QuadratureConfig::default()
    };
    q.validate()?;
    let inputs = load(&a, want)?;

    let rows: Vec<Row> = grid
        .par_iter()
        .map(|&s| point(&inputs, want, &q, sim.as_ref(), s))
        .collect::<CliResult<_>>()?;

    let emit = |w: &mut dyn std::io::Write| -> std::io::Result<()> {
        csv::write_header(w)?;
        rows.iter().try_for_each(|r| csv::write_row(w, r))
    };
    match &a.out {
        Some(path) => {
            write_atomically(path, |w| Ok(emit(w)?))?;
            println!("{} rows written to {}", rows.len(), path.display());
        }
        None => emit(&mut std::io::stdout().lock())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_stop() {
        assert_eq!(parse_grid("0:8:1").unwrap().len(), 9);
        assert_eq!(parse_grid("0:0:1").unwrap(), vec![0.0]);
        assert_eq!(parse_grid("-1:0:0.5").unwrap(), vec![-1.0, -0.5, 0.0]);
        assert_eq!(parse_grid("0:1:0.1").unwrap().len(), 11);
    }

    #[test]
    fn grid_rejects_bad_specs() {
        for s in ["1:0:1", "0:1:0", "0:1", "a:b:c", "0:1:-1"] {
            assert!(parse_grid(s).is_err(), "{s}");
        }
    }

    #[test]
    fn bound_lists() {
        assert_eq!(parse_bounds("none").unwrap(), Wanted::default());
        let w = parse_bounds("union, tsb").unwrap();
        assert!(w.union && w.tsb && !w.sb && !w.tb);
        assert!(parse_bounds("union,foo").is_err());
    }
}
