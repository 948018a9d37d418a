use super::{check_length, BoundResult, ChannelParams};
use crate::error::Result;
use crate::special::q_function;
use crate::spectrum::DistanceSpectrum;

/// `Σ_{δ>0} A_δ Q(δ / 2σ)`, clamped to 1.
pub fn union_bound(spectrum: &DistanceSpectrum, ch: &ChannelParams) -> Result<BoundResult> {
    check_length(spectrum.n(), ch)?;
    let raw: f64 = spectrum
        .positive()
        .map(|(d2, a)| a * q_function(d2.sqrt() / (2.0 * ch.sigma)))
        .sum();
    Ok(BoundResult::finish(raw, None, 0.0, 0.0))
}
