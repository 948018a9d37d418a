use std::collections::BTreeMap;

use super::sphere::{caps_sum, cut_points, radial_integral, threshold_of};
use super::tangential::{gaussian_pdf, pairs_of, Pair};
use super::{
    check_dimension, check_length, positive_weights, thin, BoundResult, ChannelParams,
    QuadratureConfig, MAX_BREAKPOINTS,
};
use crate::error::Result;
use crate::quadrature::{integrate, integrate_smoothed};
use crate::root::level_crossings;
use crate::special::{cap_ratio_cos, q_function, q_inverse, Chi};
use crate::spectrum::TriangleSpectrum;

/// Probability that a pair with offset `beta` is confused when the noise
/// orthogonal to the axis is uniform on a sphere of radius `r` in `dim`
/// dimensions.
fn cone_p2(dim: usize, beta: f64, r: f64) -> f64 {
    if r <= beta.abs() {
        if beta > 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        cap_ratio_cos(dim, beta / r)
    }
}

/// Bounds inner quadrature errors as `err(z) ≤ ratio · v(z) + floor`, so
/// that their average under the outer law is at most
/// `ratio · ∫ v φ + floor`.
#[derive(Clone, Copy, Debug)]
struct InnerErrors {
    ratio: f64,
    floor: f64,
}

impl InnerErrors {
    fn new(floor: f64) -> Self {
        Self { ratio: 0.0, floor }
    }

    fn record(&mut self, value: f64, error: f64) {
        let excess = error - self.floor;
        if excess > 0.0 {
            if value > 0.0 {
                self.ratio = self.ratio.max(excess / value);
            } else {
                self.floor = error;
            }
        }
    }

    fn total(&self, outer_value: f64) -> f64 {
        self.ratio * outer_value + self.floor
    }
}

/// The inner integrals get a quarter of the relative tolerance and half of
/// the tail budget; the outer truncation spends the other half.
/// Samples used to locate where the conditional bounds saturate at 1.
const KINK_SCAN: usize = 128;
const INNER_KINK_SCAN: usize = 32;

fn inner_config(q: &QuadratureConfig) -> QuadratureConfig {
    QuadratureConfig {
        relative_tolerance: q.relative_tolerance / 4.0,
        tail_mass_cutoff: q.tail_mass_cutoff / 2.0,
        ..*q
    }
}

/// Tangential-sphere bound from the triangle distance spectrum: for each
/// axial noise component `z`, a conditional sphere bound over the radius of
/// the orthogonal noise, then `∫ min{·, 1} φ(z) dz`.
pub fn tangential_sphere_bound_general(
    tspec: &TriangleSpectrum,
    ch: &ChannelParams,
    q: &QuadratureConfig,
) -> Result<BoundResult> {
    check_length(tspec.n(), ch)?;
    q.validate()?;
    let n = ch.n;
    check_dimension("tangential-sphere bound", n, 3)?;
    let pairs: Vec<Pair> = pairs_of(tspec)?;
    let sigma = ch.sigma;
    let qi = inner_config(q);
    let chi = Chi::new(n - 1, sigma);
    let (r_lo, r_hi) = cut_points(&chi, &qi);
    let inner_tail = chi.cdf(r_lo) + chi.sf(r_hi);
    let mut inner_errors = InnerErrors::new(q.abs_tol());

    let conditional = |z: f64, errs: &mut InnerErrors| -> f64 {
        // Collinear pairs do not depend on r.
        let mut fixed = 0.0;
        let mut betas = Vec::with_capacity(pairs.len());
        for p in &pairs {
            match p.beta(z) {
                Some(b) => betas.push((b, p.mult)),
                None => fixed += p.mult * p.step(z),
            }
        }
        if fixed >= 1.0 {
            return 1.0;
        }
        let f_s = |r: f64| {
            let mut sum = fixed;
            for &(b, m) in &betas {
                sum += m * cone_p2(n - 1, b, r);
                if sum >= 1.0 {
                    return 1.0;
                }
            }
            sum
        };
        let mut breaks = thin(betas.iter().map(|b| b.0.abs()).collect(), MAX_BREAKPOINTS);
        breaks.extend(level_crossings(f_s, r_lo, r_hi, INNER_KINK_SCAN));
        let res = integrate_smoothed(
            |r| f_s(r) * chi.pdf(r),
            r_lo,
            r_hi,
            &breaks,
            qi.relative_tolerance,
            qi.abs_tol(),
            qi.max_nodes,
        );
        errs.record(res.value, res.error);
        (res.value + inner_tail).min(1.0)
    };

    let zq = sigma * q_inverse(0.25 * q.tail_mass_cutoff);
    let outer_tail = 2.0 * q_function(zq / sigma);
    // The inner breakpoints |β(z)| have a corner where β changes sign, so
    // every crossing is an outer breakpoint, collinear or not.
    let mut breaks = thin(
        pairs.iter().filter_map(Pair::crossing).collect(),
        MAX_BREAKPOINTS,
    );
    breaks.extend(level_crossings(
        |z| conditional(z, &mut InnerErrors::new(0.0)),
        -zq,
        zq,
        KINK_SCAN,
    ));
    let res = integrate(
        |z| conditional(z, &mut inner_errors) * gaussian_pdf(z, sigma),
        -zq,
        zq,
        &breaks,
        q.relative_tolerance / 2.0,
        q.abs_tol(),
        q.max_nodes,
    );
    let error = res.error + inner_errors.total(res.value);
    Ok(BoundResult::finish(
        res.value + outer_tail,
        None,
        outer_tail + inner_tail,
        error,
    ))
}

/// `(ρ_d, A_d)` for `d < n` with `ρ_d = √(n d / (n − d))`, the offsets of the
/// conditional problem after rescaling the orthogonal noise radius.
fn scaled_offsets(weights: &BTreeMap<usize, f64>, n: usize) -> Result<Vec<(f64, f64)>> {
    check_dimension("tangential-sphere bound", n, 3)?;
    let nf = n as f64;
    Ok(positive_weights(weights, n)?
        .into_iter()
        .filter(|&(d, _)| d < n)
        .map(|(d, a)| ((nf * d as f64 / (nf - d as f64)).sqrt(), a))
        .collect())
}

/// Inner radius `r₁` of the binary tangential-sphere bound in rescaled
/// units: the root of `Σ_{ρ_d < r} A_d cap(n − 1, arccos(ρ_d / r)) = 1`, or
/// `+∞`. It does not depend on the noise level.
pub fn binary_tsb_threshold(weights: &BTreeMap<usize, f64>, n: usize) -> Result<f64> {
    let terms = scaled_offsets(weights, n)?;
    if terms.is_empty() {
        return Ok(f64::INFINITY);
    }
    threshold_of(n - 1, &terms)
}

/// Tangential-sphere bound of a binary linear code with BPSK signalling.
pub fn binary_tsb(
    weights: &BTreeMap<usize, f64>,
    n: usize,
    ch: &ChannelParams,
    q: &QuadratureConfig,
) -> Result<BoundResult> {
    check_length(n, ch)?;
    q.validate()?;
    let terms = scaled_offsets(weights, n)?;
    let r1 = if terms.is_empty() {
        f64::INFINITY
    } else {
        threshold_of(n - 1, &terms)?
    };
    let sigma = ch.sigma;
    let sqrt_n = (n as f64).sqrt();
    let qi = inner_config(q);
    let unit = Chi::new(n - 1, 1.0);
    let (u_lo, u_hi) = cut_points(&unit, &qi);
    let breaks: Vec<f64> = terms.iter().map(|t| t.0).filter(|&p| p < r1).collect();
    let mut inner_errors = InnerErrors::new(q.abs_tol());

    let conditional = |z: f64, errs: &mut InnerErrors| -> f64 {
        if terms.is_empty() {
            return 0.0;
        }
        let scaled = sqrt_n * sigma / (sqrt_n - z);
        if !(scaled.is_finite() && scaled > 0.0) {
            return 1.0;
        }
        let chi = Chi::new(n - 1, scaled);
        let (value, error, tail) = radial_integral(
            &chi,
            (scaled * u_lo, scaled * u_hi),
            |r| caps_sum(n - 1, &terms, r, f64::INFINITY),
            terms[0].0,
            r1,
            breaks.clone(),
            &qi,
        );
        errs.record(value, error);
        let beyond = if r1.is_finite() { chi.sf(r1) } else { 0.0 };
        (value + tail + beyond).min(1.0)
    };

    let zq = sigma * q_inverse(0.25 * q.tail_mass_cutoff);
    let lower_tail = q_function(zq / sigma);
    let top = sqrt_n.min(zq);
    let res = integrate(
        |z| conditional(z, &mut inner_errors) * gaussian_pdf(z, sigma),
        -zq,
        top,
        &[],
        q.relative_tolerance / 2.0,
        q.abs_tol(),
        q.max_nodes,
    );
    let inner_tail = unit.cdf(u_lo) + unit.sf(u_hi);
    let tail = lower_tail + inner_tail + if sqrt_n > zq { lower_tail } else { 0.0 };
    let error = res.error + inner_errors.total(res.value);
    let raw = res.value + lower_tail + q_function(top / sigma);
    Ok(BoundResult::finish(raw, Some(r1), tail, error))
}
