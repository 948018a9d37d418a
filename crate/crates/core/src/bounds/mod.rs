//! Upper bounds on the ML frame-error probability.
//!
//! General-code bounds take a [`DistanceSpectrum`](crate::DistanceSpectrum)
//! (union, sphere) or a [`TriangleSpectrum`](crate::TriangleSpectrum)
//! (tangential, tangential-sphere). The binary variants take the weight
//! distribution of a binary linear code with BPSK signalling and use the
//! closed-form optimal region parameters.
//!
//! Infinite integration domains are cut at quantiles of the relevant
//! distribution and the probability mass outside the cut is added to the
//! value, so every returned value stays an upper bound. Kinks of the
//! `min{·, 1}` integrands are located and used as breakpoints, which keeps
//! the actual quadrature error far below the requested tolerance.

mod sphere;
mod tangential;
mod tsb;
mod union;

use std::collections::BTreeMap;

pub use sphere::{binary_sphere_bound, binary_sphere_threshold, sphere_bound_general};
pub use tangential::{binary_tangential_bound, tangential_bound_general};
pub use tsb::{binary_tsb, binary_tsb_threshold, tangential_sphere_bound_general};
pub use union::union_bound;

use crate::error::{Error, Result};

/// AWGN channel seen by a code of length `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    pub sigma: f64,
    pub n: usize,
    pub avg_codeword_energy: f64,
}

impl ChannelParams {
    pub fn new(sigma: f64, n: usize, avg_codeword_energy: f64) -> Result<Self> {
        let ch = Self {
            sigma,
            n,
            avg_codeword_energy,
        };
        ch.check()?;
        Ok(ch)
    }

    /// Noise level giving `snr_db = 10 log10(E_avg / (n σ²))`.
    pub fn from_snr_db(snr_db: f64, n: usize, avg_codeword_energy: f64) -> Result<Self> {
        let snr = 10f64.powf(snr_db / 10.0);
        Self::new(
            (avg_codeword_energy / (n as f64 * snr)).sqrt(),
            n,
            avg_codeword_energy,
        )
    }

    pub fn snr(&self) -> f64 {
        self.avg_codeword_energy / (self.n as f64 * self.sigma * self.sigma)
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.snr().log10()
    }

    fn check(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter(
                "code length must be positive".into(),
            ));
        }
        if !(self.avg_codeword_energy > 0.0 && self.avg_codeword_energy.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "average codeword energy must be positive, got {}",
                self.avg_codeword_energy
            )));
        }
        Ok(())
    }
}

/// Numerical controls shared by the integral bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub relative_tolerance: f64,
    /// Probability mass that the truncated domains of one bound may omit in
    /// total.
    pub tail_mass_cutoff: f64,
    /// Function-evaluation budget per one-dimensional integral.
    pub max_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-8,
            tail_mass_cutoff: 1e-12,
            max_nodes: 100_000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.relative_tolerance > 0.0 && self.relative_tolerance <= 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "relative tolerance {} outside (0, 1e-3]",
                self.relative_tolerance
            )));
        }
        if !(self.tail_mass_cutoff > 0.0 && self.tail_mass_cutoff <= 1e-6) {
            return Err(Error::InvalidParameter(format!(
                "tail mass cutoff {} outside (0, 1e-6]",
                self.tail_mass_cutoff
            )));
        }
        if self.max_nodes < 30 {
            return Err(Error::InvalidParameter(
                "max_nodes must be at least 30".into(),
            ));
        }
        Ok(())
    }

    /// Absolute error below which refinement is pointless: far smaller than
    /// the truncation mass already added.
    fn abs_tol(&self) -> f64 {
        1e-3 * self.tail_mass_cutoff * self.relative_tolerance
    }
}

/// A bound value with its numerical bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundResult {
    /// Upper bound on the frame-error probability, in `[0, 1]`.
    pub value: f64,
    /// Optimal region parameter, when the bound has one (`r₁` or `z*`).
    pub optimal_parameter: Option<f64>,
    /// Probability mass outside the truncated domains, included in `value`.
    pub truncation_tail_added: f64,
    /// Quadrature error estimate (reported, not added to `value`).
    pub quadrature_error_estimate: f64,
    /// Whether the raw sum exceeded 1 and was clamped.
    pub clamped: bool,
}

impl BoundResult {
    fn finish(raw: f64, optimal_parameter: Option<f64>, tail: f64, error: f64) -> Self {
        Self {
            value: raw.clamp(0.0, 1.0),
            optimal_parameter,
            truncation_tail_added: tail,
            quadrature_error_estimate: error,
            clamped: raw > 1.0,
        }
    }
}

fn check_length(spectrum_n: usize, ch: &ChannelParams) -> Result<()> {
    ch.check()?;
    if spectrum_n != ch.n {
        return Err(Error::LengthMismatch {
            expected: ch.n,
            found: spectrum_n,
        });
    }
    Ok(())
}

fn check_dimension(bound: &'static str, n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::DimensionTooSmall { bound, n, min })
    } else {
        Ok(())
    }
}

/// Positive weights of a binary weight distribution, as `(d, A_d)` with `d ≥ 1`.
fn positive_weights(weights: &BTreeMap<usize, f64>, n: usize) -> Result<Vec<(usize, f64)>> {
    crate::spectrum::check_binary_weights(weights, n)?;
    let w: Vec<(usize, f64)> = weights
        .iter()
        .filter(|&(&d, &a)| d > 0 && a > 0.0)
        .map(|(&d, &a)| (d, a))
        .collect();
    if w.is_empty() {
        return Err(Error::DegenerateSpectrum);
    }
    Ok(w)
}

/// Thins a sorted list of breakpoints to at most `cap` entries.
fn thin(mut points: Vec<f64>, cap: usize) -> Vec<f64> {
    points.sort_by(f64::total_cmp);
    points.dedup();
    if points.len() <= cap {
        return points;
    }
    let step = points.len() as f64 / cap as f64;
    (0..cap)
        .map(|i| points[(i as f64 * step) as usize])
        .collect()
}

const MAX_BREAKPOINTS: usize = 200;
