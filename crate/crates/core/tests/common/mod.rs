//! Independent oracles and code generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use mlbound_core::codes;
use mlbound_core::spectrum::{DistanceSpectrum, TriangleSpectrum};
use mlbound_core::Trellis;
use rand::Rng;

/// States visited by a path, boundary by boundary.
fn states(trellis: &Trellis, path: &[usize]) -> Vec<usize> {
    let mut s = vec![0];
    for (stage, &i) in trellis.stages().iter().zip(path) {
        s.push(stage.branches[i].to);
    }
    s
}

/// Whether the ordered path pair differs in exactly one error event: it
/// splits at some stage, has distinct states until it remerges, and
/// agrees branch-for-branch afterwards. Identical pairs count as well.
pub fn single_event_or_equal(trellis: &Trellis, p: &[usize], q: &[usize]) -> bool {
    let Some(first) = (0..p.len()).find(|&t| p[t] != q[t]) else {
        return true;
    };
    let (sp, sq) = (states(trellis, p), states(trellis, q));
    // Boundary t + 1 follows stage t.
    let merge = (first..p.len())
        .find(|&t| sp[t + 1] == sq[t + 1])
        .expect("paths end in state 0");
    (merge + 1..p.len()).all(|t| p[t] == q[t])
}

/// Spectra over the identical and single-error-event ordered pairs, by
/// exhaustive enumeration.
pub fn event_filtered_spectra(trellis: &Trellis, eps: f64) -> (DistanceSpectrum, TriangleSpectrum) {
    let paths = trellis.enumerate_paths(1 << 12).unwrap();
    let words: Vec<Vec<f64>> = paths.iter().map(|p| trellis.path_samples(p)).collect();
    let m = paths.len() as f64;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        for (j, q) in paths.iter().enumerate() {
            if !single_event_or_equal(trellis, p, q) {
                continue;
            }
            let d: f64 = words[i]
                .iter()
                .zip(&words[j])
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            let e1: f64 = words[i].iter().map(|x| x * x).sum();
            let e2: f64 = words[j].iter().map(|x| x * x).sum();
            a.push((d, 1.0 / m));
            b.push(([e1, e2, d], 1.0 / m));
        }
    }
    (
        DistanceSpectrum::from_entries(trellis.n(), eps, a),
        TriangleSpectrum::from_entries(trellis.n(), eps, b),
    )
}

/// Random rate-1/k terminated convolutional trellis with at most 8 states
/// and at most 12 stages. With `integer_labels` the output bits are mapped
/// to BPSK or natural 4-AM; otherwise every output pattern gets a random
/// real label.
pub fn random_convolutional<R: Rng>(rng: &mut R, integer_labels: bool) -> Trellis {
    let memory = rng.random_range(1..=3usize);
    let k = rng.random_range(2..=3usize);
    let info_len = rng.random_range(1..=12 - memory);
    let full = 1u32 << (memory + 1);
    let generators: Vec<u32> = (0..k).map(|_| rng.random_range(1..full)).collect();
    let table: Vec<Vec<f64>> = (0..1u32 << k)
        .map(|_| (0..k).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let mode = rng.random_range(0..3u8);
    codes::terminated_convolutional_trellis(&generators, memory, info_len, move |bits| {
        if !integer_labels {
            let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            return table[idx].clone();
        }
        match mode {
            0 | 1 => codes::bpsk(bits),
            _ => codes::four_am(bits),
        }
    })
    .unwrap()
}

pub fn hamming_weights() -> BTreeMap<usize, f64> {
    codes::weight_distribution(&codes::hamming74_generator()).unwrap()
}

pub fn golay_weights() -> BTreeMap<usize, f64> {
    codes::weight_distribution(&codes::golay23_generator()).unwrap()
}

/// Same entries up to key tolerance (matched by key, not position) and
/// multiplicities equal to 1e-12 relative.
pub fn assert_same_distance(got: &DistanceSpectrum, want: &DistanceSpectrum) {
    assert_eq!(
        got.entries().len(),
        want.entries().len(),
        "{got:?}\nvs\n{want:?}"
    );
    for &(k, m) in got.entries() {
        let w = want.get(k);
        assert!(
            (m - w).abs() <= 1e-12 * w,
            "key {k}: {m} vs {w}\n{got:?}\nvs\n{want:?}"
        );
    }
}

pub fn assert_same_triangle(got: &TriangleSpectrum, want: &TriangleSpectrum) {
    assert_eq!(
        got.entries().len(),
        want.entries().len(),
        "{got:?}\nvs\n{want:?}"
    );
    for &(k, m) in got.entries() {
        let w = want.get(k);
        assert!(
            (m - w).abs() <= 1e-12 * w,
            "key {k:?}: {m} vs {w}\n{got:?}\nvs\n{want:?}"
        );
    }
}
