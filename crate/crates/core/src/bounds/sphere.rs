use std::collections::BTreeMap;

use super::{
    check_dimension, check_length, positive_weights, thin, BoundResult, ChannelParams,
    QuadratureConfig, MAX_BREAKPOINTS,
};
use crate::error::{Error, Result};
use crate::quadrature::integrate_smoothed;
use crate::root::solve_threshold;
use crate::special::{cap_ratio_cos, Chi};
use crate::spectrum::DistanceSpectrum;

/// Conditional union bound on a sphere of radius `r`: `Σ a · cap(n, arccos(h / r))`
/// over `(h, a)` with `h < r`, where `h` is the distance from the centre to
/// the pair's bisecting hyperplane. Stops once the sum reaches `cap`.
pub(super) fn caps_sum(n: usize, terms: &[(f64, f64)], r: f64, cap: f64) -> f64 {
    let mut sum = 0.0;
    for &(h, a) in terms {
        if h >= r {
            break;
        }
        sum += a * cap_ratio_cos(n, h / r);
        if sum >= cap {
            break;
        }
    }
    sum
}

/// Radii cutting `tail_mass_cutoff / 2` off each side of the chi law.
pub(super) fn cut_points(chi: &Chi, q: &QuadratureConfig) -> (f64, f64) {
    (
        chi.lower_quantile(0.5 * q.tail_mass_cutoff),
        chi.upper_quantile(0.5 * q.tail_mass_cutoff),
    )
}

/// Integrates `integrand · chi_pdf` over `[start, end]` with the chi law
/// truncated to `[r_lo, r_hi]`. Below `start` the integrand must vanish.
/// Returns `(integral, error, tail)` where `tail` is the truncated mass
/// that must be added.
pub(super) fn radial_integral<F: Fn(f64) -> f64>(
    chi: &Chi,
    (r_lo, r_hi): (f64, f64),
    integrand: F,
    start: f64,
    end: f64,
    breakpoints: Vec<f64>,
    q: &QuadratureConfig,
) -> (f64, f64, f64) {
    let (mut a, mut tail) = if r_lo > start {
        (r_lo, chi.cdf(r_lo))
    } else {
        (start, 0.0)
    };
    let b = if end > r_hi {
        tail += chi.sf(r_hi);
        r_hi
    } else {
        end
    };
    if a >= b {
        // Whole interval sits in the lower tail: integrate it directly.
        a = start;
        tail = 0.0;
    }
    let res = integrate_smoothed(
        |r| integrand(r) * chi.pdf(r),
        a,
        b,
        &thin(breakpoints, MAX_BREAKPOINTS),
        q.relative_tolerance,
        q.abs_tol(),
        q.max_nodes,
    );
    (res.value, res.error, tail)
}

/// Sphere bound from the Euclidean distance spectrum:
/// `∫ min{f_u(r), 1} g(r) dr` over the radius `r` of the noise vector.
pub fn sphere_bound_general(
    spectrum: &DistanceSpectrum,
    ch: &ChannelParams,
    q: &QuadratureConfig,
) -> Result<BoundResult> {
    check_length(spectrum.n(), ch)?;
    q.validate()?;
    let n = ch.n;
    check_dimension("sphere bound", n, 2)?;
    let chi = Chi::new(n, ch.sigma);
    let terms: Vec<(f64, f64)> = spectrum
        .positive()
        .map(|(d2, a)| (0.5 * d2.sqrt(), a))
        .collect();
    if terms.is_empty() {
        if spectrum.entries().is_empty() {
            let (r_lo, r_hi) = cut_points(&chi, q);
            let tail = chi.cdf(r_lo) + chi.sf(r_hi);
            return Ok(BoundResult::finish(tail, None, tail, 0.0));
        }
        return Err(Error::DegenerateSpectrum);
    }
    // f_u grows with r, so min{f_u, 1} is f_u below the threshold and 1 above.
    let r1 = threshold_of(n, &terms)?;
    let breaks = terms.iter().map(|t| t.0).filter(|&h| h < r1).collect();
    let (value, error, tail) = radial_integral(
        &chi,
        cut_points(&chi, q),
        |r| caps_sum(n, &terms, r, f64::INFINITY),
        terms[0].0,
        r1,
        breaks,
        q,
    );
    let beyond = if r1.is_finite() { chi.sf(r1) } else { 0.0 };
    Ok(BoundResult::finish(
        value + tail + beyond,
        Some(r1),
        tail,
        error,
    ))
}

fn binary_terms(weights: &BTreeMap<usize, f64>, n: usize) -> Result<Vec<(f64, f64)>> {
    check_dimension("sphere bound", n, 2)?;
    Ok(positive_weights(weights, n)?
        .into_iter()
        .map(|(d, a)| ((d as f64).sqrt(), a))
        .collect())
}

pub(super) fn threshold_of(n: usize, terms: &[(f64, f64)]) -> Result<f64> {
    let total: f64 = terms.iter().map(|t| t.1).sum();
    if total / 2.0 <= 1.0 {
        return Ok(f64::INFINITY);
    }
    let f = |r: f64| caps_sum(n, terms, r, f64::INFINITY);
    let lo = terms[0].0;
    let mut hi = 2.0 * lo;
    while f(hi) <= 1.0 {
        hi *= 2.0;
    }
    solve_threshold(f, lo, hi)
}

/// Optimal radius `r₁` of the binary sphere bound in units where BPSK
/// symbols are `±1`: the root of `Σ_d A_d cap(n, arccos(√d / r)) = 1`, or
/// `+∞` when the left side stays at or below 1. It does not depend on the
/// noise level.
pub fn binary_sphere_threshold(weights: &BTreeMap<usize, f64>, n: usize) -> Result<f64> {
    threshold_of(n, &binary_terms(weights, n)?)
}

/// Sphere bound of a binary linear code with BPSK signalling, evaluated at
/// the optimal radius.
pub fn binary_sphere_bound(
    weights: &BTreeMap<usize, f64>,
    n: usize,
    ch: &ChannelParams,
    q: &QuadratureConfig,
) -> Result<BoundResult> {
    check_length(n, ch)?;
    q.validate()?;
    let terms = binary_terms(weights, n)?;
    let r1 = threshold_of(n, &terms)?;
    let chi = Chi::new(n, ch.sigma);
    let breaks = terms.iter().map(|t| t.0).filter(|&h| h < r1).collect();
    let (value, error, tail) = radial_integral(
        &chi,
        cut_points(&chi, q),
        |r| caps_sum(n, &terms, r, f64::INFINITY),
        terms[0].0,
        r1,
        breaks,
        q,
    );
    let beyond = if r1.is_finite() { chi.sf(r1) } else { 0.0 };
    Ok(BoundResult::finish(
        value + tail + beyond,
        Some(r1),
        tail,
        error,
    ))
}
