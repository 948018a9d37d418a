use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{
    check_dimension, check_length, positive_weights, thin, BoundResult, ChannelParams,
    QuadratureConfig, MAX_BREAKPOINTS,
};
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::root::{level_crossings, solve_threshold};
use crate::special::{q_function, q_inverse};
use crate::spectrum::TriangleSpectrum;

/// Geometry of one triangle-spectrum entry seen from the transmitted
/// codeword `s`: `z` is the noise component along `−s/‖s‖`, and the pair
/// is confused once the component orthogonal to it exceeds
/// `β(z) = (δ − 2 z cos θ) / (2 sin θ)`.
#[derive(Clone, Copy, Debug)]
pub(super) struct Pair {
    pub delta: f64,
    pub cos: f64,
    pub sin: f64,
    pub mult: f64,
}

impl Pair {
    /// `None` when the pair is collinear with the origin (`sin θ = 0`).
    pub fn beta(&self, z: f64) -> Option<f64> {
        (self.sin > 0.0).then(|| (self.delta - 2.0 * z * self.cos) / (2.0 * self.sin))
    }

    /// Error indicator for collinear pairs.
    pub fn step(&self, z: f64) -> f64 {
        if 2.0 * z * self.cos >= self.delta {
            1.0
        } else {
            0.0
        }
    }

    /// Where `β(z)` changes sign.
    pub fn crossing(&self) -> Option<f64> {
        (self.cos != 0.0).then(|| self.delta / (2.0 * self.cos))
    }
}

pub(super) fn pairs_of(tspec: &TriangleSpectrum) -> Result<Vec<Pair>> {
    let mut out = Vec::new();
    for (key, mult) in tspec.positive() {
        let [e1, e2, d2] = key;
        if e1 <= 0.0 {
            return Err(Error::UnsupportedGeometry { e1, e2, d2 });
        }
        let cosine = (e1 + d2 - e2) / (2.0 * (e1 * d2).sqrt());
        if cosine.abs() > 1.0 + 1e-9 {
            return Err(Error::CorruptSpectrum { e1, e2, d2, cosine });
        }
        let cos = cosine.clamp(-1.0, 1.0);
        out.push(Pair {
            delta: d2.sqrt(),
            cos,
            sin: ((1.0 - cos) * (1.0 + cos)).sqrt(),
            mult,
        });
    }
    if out.is_empty() && !tspec.entries().is_empty() {
        return Err(Error::DegenerateSpectrum);
    }
    Ok(out)
}

pub(super) fn gaussian_pdf(z: f64, sigma: f64) -> f64 {
    let u = z / sigma;
    (-0.5 * u * u).exp() / (sigma * (2.0 * PI).sqrt())
}

/// Jump points of the collinear indicators. Pairs off the axis vary
/// smoothly through their crossing and need no breakpoint.
pub(super) fn crossings(pairs: &[Pair]) -> Vec<f64> {
    thin(
        pairs
            .iter()
            .filter(|p| p.sin == 0.0)
            .filter_map(Pair::crossing)
            .collect(),
        MAX_BREAKPOINTS,
    )
}

/// Samples used to locate the kinks of `min{f_u, 1}`.
const KINK_SCAN: usize = 256;

/// Tangential bound from the triangle distance spectrum:
/// `∫ min{Σ B · P(pair confused | z), 1} φ(z) dz`.
pub fn tangential_bound_general(
    tspec: &TriangleSpectrum,
    ch: &ChannelParams,
    q: &QuadratureConfig,
) -> Result<BoundResult> {
    check_length(tspec.n(), ch)?;
    q.validate()?;
    let pairs = pairs_of(tspec)?;
    let sigma = ch.sigma;
    let zq = sigma * q_inverse(0.5 * q.tail_mass_cutoff);
    let tail = 2.0 * q_function(zq / sigma);
    let f_u = |z: f64| {
        let mut sum = 0.0;
        for p in &pairs {
            sum += p.mult
                * match p.beta(z) {
                    Some(b) => q_function(b / sigma),
                    None => p.step(z),
                };
            if sum >= 1.0 {
                return 1.0;
            }
        }
        sum
    };
    let mut breaks = crossings(&pairs);
    breaks.extend(level_crossings(f_u, -zq, zq, KINK_SCAN));
    let res = integrate(
        |z| f_u(z) * gaussian_pdf(z, sigma),
        -zq,
        zq,
        &breaks,
        q.relative_tolerance,
        q.abs_tol(),
        q.max_nodes,
    );
    Ok(BoundResult::finish(res.value + tail, None, tail, res.error))
}

/// Tangential bound of a binary linear code with BPSK signalling, with the
/// optimal half-space parameter `z* ≤ √n`.
pub fn binary_tangential_bound(
    weights: &BTreeMap<usize, f64>,
    n: usize,
    ch: &ChannelParams,
    q: &QuadratureConfig,
) -> Result<BoundResult> {
    check_length(n, ch)?;
    q.validate()?;
    check_dimension("tangential bound", n, 2)?;
    let sigma = ch.sigma;
    let sqrt_n = (n as f64).sqrt();
    // (√d / √(n − d), A_d) for d < n; the antipodal word only errs for z ≥ √n.
    let terms: Vec<(f64, f64)> = positive_weights(weights, n)?
        .into_iter()
        .filter(|&(d, _)| d < n)
        .map(|(d, a)| (((d as f64) / ((n - d) as f64)).sqrt(), a))
        .collect();
    let f_u = |z: f64| -> f64 {
        terms
            .iter()
            .map(|&(k, a)| a * q_function(k * (sqrt_n - z) / sigma))
            .sum()
    };
    let at_top: f64 = terms.iter().map(|t| t.1).sum::<f64>() / 2.0;
    let z_star = if at_top <= 1.0 {
        sqrt_n
    } else {
        let mut step = 1.0;
        while f_u(sqrt_n - step) >= 1.0 {
            step *= 2.0;
        }
        solve_threshold(f_u, sqrt_n - step, sqrt_n)?
    };

    let zq = sigma * q_inverse(0.5 * q.tail_mass_cutoff);
    let lower_tail = q_function(zq / sigma);
    let top = z_star.min(zq);
    let res = integrate(
        |z| f_u(z) * gaussian_pdf(z, sigma),
        -zq,
        top,
        &[],
        q.relative_tolerance,
        q.abs_tol(),
        q.max_nodes,
    );
    let tail = if z_star > zq {
        2.0 * lower_tail
    } else {
        lower_tail
    };
    let raw = res.value + lower_tail + q_function(top / sigma);
    Ok(BoundResult::finish(raw, Some(z_star), tail, res.error))
}
