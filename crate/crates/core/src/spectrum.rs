//! Euclidean and triangle Euclidean distance spectra.
//!
//! Spectra are sparse maps from quantized squared distances (or triples of
//! `(‖s‖², ‖ŝ‖², ‖s − ŝ‖²)`) to average ordered-pair multiplicities. They are
//! computed over the product error trellis, where every ordered pair of paths
//! is a path of state pairs, keeping only pairs that differ in a single error
//! event. The diagonal pairs `s = ŝ` are kept at key 0.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{sq_dist, sq_norm, Scalar};
use crate::trellis::{Codeword, Trellis};

/// Default relative merge tolerance for real exponents.
pub const DEFAULT_QUANTIZATION: f64 = 1e-9;

/// Default limit on `|S_t|²` per stage of the product trellis.
pub const DEFAULT_PRODUCT_STATE_LIMIT: usize = 1_000_000;

/// Largest codeword count accepted by [`brute_force_pair_spectrum`].
pub const PAIR_GUARD: usize = 1 << 12;

/// Pending terms per polynomial before an intermediate merge.
const COMPACT_THRESHOLD: usize = 1 << 18;

/// Exponent of a sparse real polynomial: a squared distance, or a triple for
/// the triangle enumerator.
pub(crate) trait Exponent: Copy + Send + Sync {
    const ZERO: Self;
    fn shift(self, by: Self) -> Self;
    /// Sorts and merges near-equal exponents, keeping ascending order.
    fn merge(terms: &mut Vec<(Self, f64)>, eps: f64);
}

fn tol(eps: f64, anchor: f64) -> f64 {
    eps.max(eps * anchor.abs())
}

impl Exponent for f64 {
    const ZERO: Self = 0.0;

    fn shift(self, by: Self) -> Self {
        self + by
    }

    fn merge(terms: &mut Vec<(f64, f64)>, eps: f64) {
        terms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(terms.len());
        let mut i = 0;
        while i < terms.len() {
            let anchor = terms[i].0;
            let limit = tol(eps, anchor);
            let (mut weight, mut moment) = (0.0, 0.0);
            let mut j = i;
            while j < terms.len() && terms[j].0 - anchor <= limit {
                weight += terms[j].1;
                moment += terms[j].1 * (terms[j].0 - anchor);
                j += 1;
            }
            let key = if moment == 0.0 {
                anchor
            } else {
                anchor + moment / weight
            };
            out.push((key, weight));
            i = j;
        }
        *terms = out;
    }
}

impl Exponent for [f64; 3] {
    const ZERO: Self = [0.0; 3];

    fn shift(self, by: Self) -> Self {
        [self[0] + by[0], self[1] + by[1], self[2] + by[2]]
    }

    fn merge(terms: &mut Vec<([f64; 3], f64)>, eps: f64) {
        terms.sort_by(|a, b| {
            a.0[0]
                .total_cmp(&b.0[0])
                .then(a.0[1].total_cmp(&b.0[1]))
                .then(a.0[2].total_cmp(&b.0[2]))
                .then(a.1.total_cmp(&b.1))
        });
        struct Cluster {
            anchor: [f64; 3],
            weight: f64,
            moment: [f64; 3],
        }
        let mut clusters: Vec<Cluster> = Vec::new();
        // Clusters before `open` can no longer absorb terms (first coordinate too far).
        let mut open = 0;
        for &(key, w) in terms.iter() {
            while open < clusters.len()
                && key[0] - clusters[open].anchor[0] > tol(eps, clusters[open].anchor[0])
            {
                open += 1;
            }
            let hit = clusters[open..]
                .iter_mut()
                .find(|c| (0..3).all(|i| (key[i] - c.anchor[i]).abs() <= tol(eps, c.anchor[i])));
            match hit {
                Some(c) => {
                    c.weight += w;
                    for i in 0..3 {
                        c.moment[i] += w * (key[i] - c.anchor[i]);
                    }
                }
                None => clusters.push(Cluster {
                    anchor: key,
                    weight: w,
                    moment: [0.0; 3],
                }),
            }
        }
        *terms = clusters
            .into_iter()
            .map(|c| {
                let mut key = c.anchor;
                for i in 0..3 {
                    if c.moment[i] != 0.0 {
                        key[i] += c.moment[i] / c.weight;
                    }
                }
                (key, c.weight)
            })
            .collect();
        terms.sort_by(|a, b| {
            a.0[0]
                .total_cmp(&b.0[0])
                .then(a.0[1].total_cmp(&b.0[1]))
                .then(a.0[2].total_cmp(&b.0[2]))
        });
    }
}

fn push_compacting<K: Exponent>(list: &mut Vec<(K, f64)>, key: K, weight: f64, eps: f64) {
    list.push((key, weight));
    if list.len() >= COMPACT_THRESHOLD {
        K::merge(list, eps);
    }
}

/// `A_{δ_d}` keyed by `δ_d²`, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceSpectrum {
    entries: Vec<(f64, f64)>,
    n: usize,
    tolerance: f64,
}

/// `B_{δ_{d1},δ_{d2},δ_d}` keyed by `(δ_{d1}², δ_{d2}², δ_d²)`, lexicographically ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleSpectrum {
    entries: Vec<([f64; 3], f64)>,
    n: usize,
    tolerance: f64,
}

impl DistanceSpectrum {
    /// Builds a spectrum from raw terms, merging keys within the tolerance.
    pub fn from_entries(n: usize, tolerance: f64, mut entries: Vec<(f64, f64)>) -> Self {
        f64::merge(&mut entries, tolerance);
        Self {
            entries,
            n,
            tolerance,
        }
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Entries at positive squared distance (self-pairs excluded).
    pub fn positive(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.entries
            .iter()
            .copied()
            .filter(|&(k, a)| k > 0.0 && a > 0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Multiplicity at the key matching `key` within the tolerance.
    pub fn get(&self, key: f64) -> f64 {
        self.entries
            .iter()
            .filter(|e| (e.0 - key).abs() <= tol(self.tolerance, key))
            .map(|e| e.1)
            .sum()
    }
}

impl TriangleSpectrum {
    pub fn from_entries(n: usize, tolerance: f64, mut entries: Vec<([f64; 3], f64)>) -> Self {
        <[f64; 3]>::merge(&mut entries, tolerance);
        Self {
            entries,
            n,
            tolerance,
        }
    }

    pub fn entries(&self) -> &[([f64; 3], f64)] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn positive(&self) -> impl Iterator<Item = ([f64; 3], f64)> + '_ {
        self.entries
            .iter()
            .copied()
            .filter(|&(k, b)| k[2] > 0.0 && b > 0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn get(&self, key: [f64; 3]) -> f64 {
        self.entries
            .iter()
            .filter(|e| (0..3).all(|i| (e.0[i] - key[i]).abs() <= tol(self.tolerance, key[i])))
            .map(|e| e.1)
            .sum()
    }

    /// Sums out the two energies.
    pub fn marginal(&self) -> DistanceSpectrum {
        DistanceSpectrum::from_entries(
            self.n,
            self.tolerance,
            self.entries.iter().map(|&(k, b)| (k[2], b)).collect(),
        )
    }

    /// Mean codeword energy recovered from the diagonal (key `δ_d² = 0`) entries,
    /// if the spectrum carries them.
    pub fn diagonal_mean_energy(&self) -> Option<f64> {
        let (mut mass, mut moment) = (0.0, 0.0);
        for &(k, b) in &self.entries {
            if k[2] == 0.0 && k[0] == k[1] {
                mass += b;
                moment += b * k[0];
            }
        }
        (mass > 0.0).then(|| moment / mass)
    }
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if tolerance > 0.0 && tolerance <= 1e-3 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "quantization tolerance {tolerance} outside (0, 1e-3]"
        )))
    }
}

/// Forward pass over the product error trellis. `alpha` holds pairs that are
/// identical so far or inside their (only) error event; `closed` holds pairs
/// whose single error event has remerged.
fn product_trellis_dp<T, K, G>(
    trellis: &Trellis<T>,
    eps: f64,
    state_limit: usize,
    gamma: G,
) -> Result<Vec<(K, f64)>>
where
    T: Scalar,
    K: Exponent,
    G: Fn(&[f64], &[f64]) -> K,
{
    trellis.ensure_valid()?;
    check_tolerance(eps)?;
    let outgoing = trellis.outgoing();
    let mut width = trellis.state_count(0);
    let mut alpha: Vec<Vec<(K, f64)>> = vec![Vec::new(); width * width];
    let mut closed: Vec<Vec<(K, f64)>> = vec![Vec::new(); width * width];
    alpha[0].push((K::ZERO, 1.0));

    for (t, stage) in trellis.stages().iter().enumerate() {
        let next_width = trellis.state_count(t + 1);
        let pairs = next_width * next_width;
        if pairs > state_limit {
            return Err(Error::ProductStateLimit {
                stage: t + 1,
                pairs,
                limit: state_limit,
            });
        }
        let labels: Vec<Vec<f64>> = stage
            .branches
            .iter()
            .map(|b| b.label.iter().map(|x| x.widen()).collect())
            .collect();
        let mut next_alpha: Vec<Vec<(K, f64)>> = vec![Vec::new(); pairs];
        let mut next_closed: Vec<Vec<(K, f64)>> = vec![Vec::new(); pairs];

        for s1 in 0..width {
            for s2 in 0..width {
                let p = s1 * width + s2;
                if alpha[p].is_empty() && closed[p].is_empty() {
                    continue;
                }
                for &i in &outgoing[t][s1] {
                    for &j in &outgoing[t][s2] {
                        let (b, bh) = (&stage.branches[i], &stage.branches[j]);
                        let q = b.to * next_width + bh.to;
                        let g = gamma(&labels[i], &labels[j]);
                        if i == j {
                            for &(k, c) in &closed[p] {
                                push_compacting(&mut next_closed[q], k.shift(g), c, eps);
                            }
                            for &(k, c) in &alpha[p] {
                                push_compacting(&mut next_alpha[q], k.shift(g), c, eps);
                            }
                        } else if b.to == bh.to {
                            for &(k, c) in &alpha[p] {
                                push_compacting(&mut next_closed[q], k.shift(g), c, eps);
                            }
                        } else {
                            for &(k, c) in &alpha[p] {
                                push_compacting(&mut next_alpha[q], k.shift(g), c, eps);
                            }
                        }
                    }
                }
            }
        }
        for list in next_alpha.iter_mut().chain(next_closed.iter_mut()) {
            if !list.is_empty() {
                K::merge(list, eps);
            }
        }
        alpha = next_alpha;
        closed = next_closed;
        width = next_width;
    }

    // At (0,0) `alpha` only holds the M diagonal pairs.
    let m = trellis.path_count() as f64;
    let mut terms = std::mem::take(&mut closed[0]);
    terms.extend(alpha[0].iter().copied());
    K::merge(&mut terms, eps);
    for t in &mut terms {
        t.1 /= m;
    }
    Ok(terms)
}

/// Euclidean distance spectrum over single-error-event pairs plus the diagonal.
pub fn euclidean_spectrum<T: Scalar>(
    trellis: &Trellis<T>,
    tolerance: f64,
) -> Result<DistanceSpectrum> {
    euclidean_spectrum_with_limit(trellis, tolerance, DEFAULT_PRODUCT_STATE_LIMIT)
}

pub fn euclidean_spectrum_with_limit<T: Scalar>(
    trellis: &Trellis<T>,
    tolerance: f64,
    state_limit: usize,
) -> Result<DistanceSpectrum> {
    let entries = product_trellis_dp(trellis, tolerance, state_limit, sq_dist)?;
    Ok(DistanceSpectrum {
        entries,
        n: trellis.n(),
        tolerance,
    })
}

/// Triangle Euclidean distance spectrum over single-error-event pairs plus
/// the diagonal.
pub fn triangle_spectrum<T: Scalar>(
    trellis: &Trellis<T>,
    tolerance: f64,
) -> Result<TriangleSpectrum> {
    triangle_spectrum_with_limit(trellis, tolerance, DEFAULT_PRODUCT_STATE_LIMIT)
}

pub fn triangle_spectrum_with_limit<T: Scalar>(
    trellis: &Trellis<T>,
    tolerance: f64,
    state_limit: usize,
) -> Result<TriangleSpectrum> {
    let entries = product_trellis_dp(trellis, tolerance, state_limit, |a, b| {
        [sq_norm(a), sq_norm(b), sq_dist(a, b)]
    })?;
    Ok(TriangleSpectrum {
        entries,
        n: trellis.n(),
        tolerance,
    })
}

/// Both spectra over all `M²` ordered codeword pairs, divided by `M`.
pub fn brute_force_pair_spectrum<T: Scalar>(
    codewords: &[Codeword<T>],
    tolerance: f64,
) -> Result<(DistanceSpectrum, TriangleSpectrum)> {
    check_tolerance(tolerance)?;
    let m = codewords.len();
    if m == 0 {
        return Err(Error::EmptyCodeList);
    }
    if m > PAIR_GUARD {
        return Err(Error::PairGuard {
            m,
            limit: PAIR_GUARD,
        });
    }
    let n = codewords[0].len();
    if let Some((index, c)) = codewords.iter().enumerate().find(|(_, c)| c.len() != n) {
        return Err(Error::RaggedCodewords {
            index,
            expected: n,
            found: c.len(),
        });
    }
    let samples: Vec<Vec<f64>> = codewords
        .iter()
        .map(|c| c.samples.iter().map(|x| x.widen()).collect())
        .collect();
    let energies: Vec<f64> = samples.iter().map(|s| sq_norm(s)).collect();
    let mut a_terms = Vec::new();
    let mut b_terms = Vec::new();
    for (i, si) in samples.iter().enumerate() {
        for (j, sj) in samples.iter().enumerate() {
            let d = sq_dist(si, sj);
            push_compacting(&mut a_terms, d, 1.0, tolerance);
            push_compacting(&mut b_terms, [energies[i], energies[j], d], 1.0, tolerance);
        }
    }
    f64::merge(&mut a_terms, tolerance);
    <[f64; 3]>::merge(&mut b_terms, tolerance);
    let mf = m as f64;
    for t in &mut a_terms {
        t.1 /= mf;
    }
    for t in &mut b_terms {
        t.1 /= mf;
    }
    Ok((
        DistanceSpectrum {
            entries: a_terms,
            n,
            tolerance,
        },
        TriangleSpectrum {
            entries: b_terms,
            n,
            tolerance,
        },
    ))
}

/// Binomial coefficient as a real number.
pub fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Spectra of the BPSK image of a binary linear code from its weight
/// distribution: `A` at `4d` and `B` at `(n, n, 4d)`.
pub fn binary_spectra_from_weights(
    weights: &BTreeMap<usize, f64>,
    n: usize,
) -> Result<(DistanceSpectrum, TriangleSpectrum)> {
    check_binary_weights(weights, n)?;
    let nf = n as f64;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (&d, &count) in weights {
        if count == 0.0 {
            continue;
        }
        let key = 4.0 * d as f64;
        a.push((key, count));
        b.push(([nf, nf, key], count));
    }
    Ok((
        DistanceSpectrum::from_entries(n, DEFAULT_QUANTIZATION, a),
        TriangleSpectrum::from_entries(n, DEFAULT_QUANTIZATION, b),
    ))
}

pub(crate) fn check_binary_weights(weights: &BTreeMap<usize, f64>, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "code length must be positive".into(),
        ));
    }
    for (&d, &count) in weights {
        if d > n {
            return Err(Error::WeightOutOfRange { d, n });
        }
        if !(count >= 0.0) || !count.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "weight {d} has multiplicity {count}"
            )));
        }
        if d == 0 && count != 1.0 && count != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "A_0 must be 1 when present, got {count}"
            )));
        }
        let max = binomial(n, d);
        if count > max * (1.0 + 1e-12) {
            return Err(Error::ImpossibleWeight { d, n, count, max });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes;
    use crate::trellis::{trivial_trellis, DEFAULT_ENUMERATION_LIMIT};

    const EPS: f64 = DEFAULT_QUANTIZATION;

    fn hamming() -> Trellis {
        crate::trellis::bpsk_linear_code_trellis(&codes::hamming74_generator()).unwrap()
    }

    #[test]
    fn antipodal_pair() {
        let t = trivial_trellis(&[vec![1.0], vec![-1.0]]).unwrap();
        let a = euclidean_spectrum(&t, EPS).unwrap();
        assert_eq!(a.entries(), &[(0.0, 1.0), (4.0, 1.0)]);
        let words = t.enumerate_codewords(4).unwrap();
        let (bf, _) = brute_force_pair_spectrum(&words, EPS).unwrap();
        assert_eq!(bf, a);
    }

    #[test]
    fn hamming_spectrum() {
        let a = euclidean_spectrum(&hamming(), EPS).unwrap();
        assert_eq!(
            a.entries(),
            &[(0.0, 1.0), (12.0, 7.0), (16.0, 7.0), (28.0, 1.0)]
        );
        let words = hamming()
            .enumerate_codewords(DEFAULT_ENUMERATION_LIMIT)
            .unwrap();
        let (bf_a, bf_b) = brute_force_pair_spectrum(&words, EPS).unwrap();
        assert_eq!(bf_a, a);
        assert_eq!(bf_b, triangle_spectrum(&hamming(), EPS).unwrap());
    }

    #[test]
    fn repetition_triangle_spectrum() {
        let t: Trellis = crate::trellis::bpsk_linear_code_trellis(&[vec![1, 1, 1]]).unwrap();
        let b = triangle_spectrum(&t, EPS).unwrap();
        assert_eq!(
            b.entries(),
            &[([3.0, 3.0, 0.0], 1.0), ([3.0, 3.0, 12.0], 1.0)]
        );
        assert_eq!(b.diagonal_mean_energy(), Some(3.0));
    }

    #[test]
    fn bpsk_triangle_mass_sits_at_n() {
        let b = triangle_spectrum(&hamming(), EPS).unwrap();
        assert!(b.entries().iter().all(|(k, _)| k[0] == 7.0 && k[1] == 7.0));
        assert_eq!(b.marginal(), euclidean_spectrum(&hamming(), EPS).unwrap());
    }

    #[test]
    fn equilateral_triangle() {
        // Three points at mutual squared distance 8.
        let s3 = 3f64.sqrt();
        let words: Vec<Codeword> = [vec![2.0, 0.0], vec![-1.0, s3], vec![-1.0, -s3]]
            .into_iter()
            .map(Codeword::new)
            .collect();
        let (a, _) = brute_force_pair_spectrum(&words, 1e-6).unwrap();
        assert_eq!(a.entries().len(), 2);
        assert_eq!(a.entries()[0], (0.0, 1.0));
        assert!((a.entries()[1].0 - 12.0).abs() < 1e-9);
        assert_eq!(a.entries()[1].1, 2.0);
        let words: Vec<Codeword> = [
            vec![2.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ]
        .into_iter()
        .map(Codeword::new)
        .collect();
        let (a, _) = brute_force_pair_spectrum(&words, EPS).unwrap();
        assert_eq!(a.entries(), &[(0.0, 1.0), (8.0, 2.0)]);
    }

    #[test]
    fn binary_adapter() {
        let w: BTreeMap<usize, f64> = [(3, 7.0), (4, 7.0), (7, 1.0)].into_iter().collect();
        let (a, b) = binary_spectra_from_weights(&w, 7).unwrap();
        assert_eq!(a.entries(), &[(12.0, 7.0), (16.0, 7.0), (28.0, 1.0)]);
        assert_eq!(b.entries()[0], ([7.0, 7.0, 12.0], 7.0));

        let w: BTreeMap<usize, f64> = [(3, 1.0)].into_iter().collect();
        let (a, b) = binary_spectra_from_weights(&w, 3).unwrap();
        assert_eq!(a.entries(), &[(12.0, 1.0)]);
        assert_eq!(b.entries(), &[([3.0, 3.0, 12.0], 1.0)]);

        let w: BTreeMap<usize, f64> = [(1, 2.0)].into_iter().collect();
        assert!(matches!(
            binary_spectra_from_weights(&w, 1),
            Err(Error::ImpossibleWeight { d: 1, .. })
        ));
        let w: BTreeMap<usize, f64> = [(4, 1.0)].into_iter().collect();
        assert!(matches!(
            binary_spectra_from_weights(&w, 3),
            Err(Error::WeightOutOfRange { d: 4, n: 3 })
        ));
    }

    #[test]
    fn binary_adapter_matches_trellis_dp() {
        let w = codes::weight_distribution(&codes::hamming74_generator()).unwrap();
        let (a, b) = binary_spectra_from_weights(&w, 7).unwrap();
        assert_eq!(
            a.entries(),
            euclidean_spectrum(&hamming(), EPS).unwrap().entries()
        );
        assert_eq!(
            b.entries(),
            triangle_spectrum(&hamming(), EPS).unwrap().entries()
        );
    }

    #[test]
    fn merge_uses_weighted_mean() {
        let s = DistanceSpectrum::from_entries(
            1,
            1e-6,
            vec![(1.0, 1.0), (1.0 + 4e-7, 3.0), (2.0, 1.0)],
        );
        assert_eq!(s.entries().len(), 2);
        assert!((s.entries()[0].0 - (1.0 + 3e-7)).abs() < 1e-15);
        assert_eq!(s.entries()[0].1, 4.0);
    }

    #[test]
    fn triple_merge_handles_interleaved_keys() {
        let s = TriangleSpectrum::from_entries(
            1,
            1e-6,
            vec![
                ([1.0, 5.0, 1.0], 1.0),
                ([1.0 + 1e-9, 3.0, 1.0], 1.0),
                ([1.0 + 2e-9, 5.0, 1.0], 1.0),
            ],
        );
        assert_eq!(s.entries().len(), 2);
        assert_eq!(s.get([1.0, 5.0, 1.0]), 2.0);
        assert_eq!(s.get([1.0, 3.0, 1.0]), 1.0);
    }

    #[test]
    fn product_state_limit() {
        let t =
            codes::terminated_convolutional_trellis(&[0b101, 0b111], 2, 4, codes::bpsk).unwrap();
        assert!(matches!(
            euclidean_spectrum_with_limit(&t, EPS, 8),
            Err(Error::ProductStateLimit {
                pairs: 16,
                limit: 8,
                ..
            })
        ));
    }

    #[test]
    fn tolerance_guard() {
        let t = trivial_trellis(&[vec![1.0], vec![-1.0]]).unwrap();
        assert!(euclidean_spectrum(&t, 0.0).is_err());
        assert!(euclidean_spectrum(&t, 1e-2).is_err());
    }

    #[test]
    fn pair_guard() {
        let words = vec![Codeword::new(vec![0.0f64]); PAIR_GUARD + 1];
        assert!(matches!(
            brute_force_pair_spectrum(&words, EPS),
            Err(Error::PairGuard { .. })
        ));
    }
}
