//! Special functions: Gaussian tail, spherical-cap ratio, regularized
//! incomplete beta, and the scaled chi distribution.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::erfc_inv;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

/// Gaussian tail `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * libm::erfc(x / SQRT_2)
}

/// Inverse of [`q_function`] on `(0, 1)`.
pub fn q_inverse(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::INFINITY;
    }
    if p >= 1.0 {
        return f64::NEG_INFINITY;
    }
    // Polish the rational approximation with Newton steps on Q itself.
    let mut x = SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..3 {
        let density = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        if density == 0.0 {
            break;
        }
        x += (q_function(x) - p) / density;
    }
    x
}

/// Stirling-series remainder `ln Γ(z) − [(z − ½) ln z − z + ½ ln 2π]`, for `z ≥ 10`.
fn stirling_correction(z: f64) -> f64 {
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
        -3617.0 / 122400.0,
    ];
    let zi = 1.0 / z;
    let z2 = zi * zi;
    let mut acc = 0.0;
    for c in C.iter().rev() {
        acc = acc * z2 + c;
    }
    acc * zi
}

/// `ln Γ(a + b) − ln Γ(a)` without cancellation for large `a`.
pub fn ln_gamma_ratio(a: f64, b: f64) -> f64 {
    if a >= 10.0 && a + b >= 10.0 {
        (a - 0.5) * (b / a).ln_1p() + b * (a + b).ln() - b + stirling_correction(a + b)
            - stirling_correction(a)
    } else {
        ln_gamma(a + b) - ln_gamma(a)
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    // Put the larger argument first so the ratio form applies.
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    ln_gamma(small) - ln_gamma_ratio(big, small)
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..20_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`, with `y = 1 − x` supplied
/// separately so that either side can be given to full precision.
pub fn inc_beta(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_x = if x > 0.5 { (-y).ln_1p() } else { x.ln() };
    let ln_y = if y > 0.5 { (-x).ln_1p() } else { y.ln() };
    let front = (a * ln_x + b * ln_y - ln_beta(a, b)).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, y) / b
    }
}

/// Fraction of the surface of a sphere in `R^n` lying within angle `theta`
/// of a pole.
pub fn cap_ratio(n: usize, theta: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    if theta >= PI {
        return 1.0;
    }
    let s = theta.sin();
    let c = theta.cos();
    let half = 0.5 * inc_beta((n as f64 - 1.0) / 2.0, 0.5, s * s, c * c);
    if theta <= PI / 2.0 {
        half
    } else {
        1.0 - half
    }
}

/// [`cap_ratio`] at angle `arccos(c)`; `c` is clamped to `[-1, 1]`.
pub fn cap_ratio_cos(n: usize, c: f64) -> f64 {
    let c = c.clamp(-1.0, 1.0);
    match n {
        2 => return c.acos() / PI,
        3 => return 0.5 * (1.0 - c),
        _ => {}
    }
    let half = 0.5 * inc_beta((n as f64 - 1.0) / 2.0, 0.5, (1.0 - c) * (1.0 + c), c * c);
    if c >= 0.0 {
        half
    } else {
        1.0 - half
    }
}

/// Norm of a `k`-dimensional isotropic Gaussian vector with per-dimension
/// standard deviation `sigma`.
#[derive(Clone, Copy, Debug)]
pub struct Chi {
    k: f64,
    sigma: f64,
    ln_norm: f64,
}

impl Chi {
    pub fn new(k: usize, sigma: f64) -> Self {
        let k = k as f64;
        let ln_norm = (k / 2.0 - 1.0) * std::f64::consts::LN_2 + k * sigma.ln() + ln_gamma(k / 2.0);
        Self { k, sigma, ln_norm }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn pdf(&self, r: f64) -> f64 {
        if r <= 0.0 || !r.is_finite() {
            return if r == 0.0 && self.k == 1.0 {
                (2.0 / PI).sqrt() / self.sigma
            } else {
                0.0
            };
        }
        let u = r / self.sigma;
        ((self.k - 1.0) * r.ln() - 0.5 * u * u - self.ln_norm).exp()
    }

    pub fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r == f64::INFINITY {
            return 1.0;
        }
        let u = r / self.sigma;
        gamma_lr(self.k / 2.0, 0.5 * u * u)
    }

    pub fn sf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 1.0;
        }
        if r == f64::INFINITY {
            return 0.0;
        }
        let u = r / self.sigma;
        gamma_ur(self.k / 2.0, 0.5 * u * u)
    }

    /// Smallest `r` with `cdf(r) ≥ p` (to bisection accuracy).
    pub fn lower_quantile(&self, p: f64) -> f64 {
        let hi = self.upper_bracket(0.5);
        bisect(|r| self.cdf(r) >= p, 0.0, hi)
    }

    /// Smallest `r` with `sf(r) ≤ p`.
    pub fn upper_quantile(&self, p: f64) -> f64 {
        let hi = self.upper_bracket(p);
        bisect(|r| self.sf(r) <= p, 0.0, hi)
    }

    fn upper_bracket(&self, p: f64) -> f64 {
        let mut hi = self.sigma * (self.k.sqrt() + 8.0);
        while self.sf(hi) > p {
            hi *= 2.0;
        }
        hi
    }
}

/// Bisection for the boundary of a predicate that is false at `lo` side and
/// true at `hi` side.
fn bisect<F: Fn(f64) -> bool>(pred: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
