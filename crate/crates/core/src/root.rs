//! Threshold equations `f(x) = 1` for nondecreasing `f`.

use crate::error::{Error, Result};

/// Bisection for `f(x) = 1` on `[lo, hi]`, requiring `f(lo) < 1 < f(hi)`.
/// Stops when the bracket is narrower than `1e-12 · (hi − lo)` and returns
/// its midpoint.
pub fn solve_threshold<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo < 1.0 && f_hi > 1.0) {
        return Err(Error::Bracket { f_lo, f_hi });
    }
    let width = 1e-12 * (hi - lo);
    let (mut a, mut b) = (lo, hi);
    while b - a > width {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) < 1.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Points in `(a, b)` where `f` crosses the level 1, found by scanning
/// `samples` equal cells and bisecting each cell whose ends straddle it.
/// Crossings that enter and leave within a single cell are missed.
pub fn level_crossings<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, samples: usize) -> Vec<f64> {
    let h = (b - a) / samples as f64;
    let above = |x: f64| f(x) >= 1.0;
    let mut out = Vec::new();
    let mut prev = above(a);
    for i in 1..=samples {
        let x = if i == samples { b } else { a + h * i as f64 };
        let now = above(x);
        if now != prev {
            let (mut lo, mut hi) = (x - h, x);
            while hi - lo > 1e-12 * (b - a) {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if above(mid) == prev {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        prev = now;
    }
    out
}
