//! Small example codes: binary linear block codes, terminated convolutional
//! trellises and 4-AM toy trellises.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trellis::{Branch, Stage, Trellis, MAX_GENERATOR_ROWS};

/// BPSK image `1 - 2c` of a binary word.
pub fn bpsk<T: Scalar>(bits: &[u8]) -> Vec<T> {
    bits.iter()
        .map(|&b| if b == 0 { T::one() } else { -T::one() })
        .collect()
}

/// Systematic generator of the (7,4) Hamming code.
pub fn hamming74_generator() -> Vec<Vec<u8>> {
    vec![
        vec![1, 0, 0, 0, 1, 1, 0],
        vec![0, 1, 0, 0, 1, 0, 1],
        vec![0, 0, 1, 0, 0, 1, 1],
        vec![0, 0, 0, 1, 1, 1, 1],
    ]
}

/// Cyclic generator of the (23,12) binary Golay code,
/// `g(x) = 1 + x^2 + x^4 + x^5 + x^6 + x^10 + x^11`.
pub fn golay23_generator() -> Vec<Vec<u8>> {
    let g = [1u8, 0, 1, 0, 1, 1, 1, 0, 0, 0, 1, 1];
    (0..12)
        .map(|shift| {
            let mut row = vec![0u8; 23];
            row[shift..shift + g.len()].copy_from_slice(&g);
            row
        })
        .collect()
}

fn check_generator(generator: &[Vec<u8>]) -> Result<(usize, usize)> {
    let k = generator.len();
    if k == 0 {
        return Err(Error::InvalidGenerator("no rows".into()));
    }
    if k > MAX_GENERATOR_ROWS {
        return Err(Error::GeneratorTooLarge {
            k,
            limit: MAX_GENERATOR_ROWS,
        });
    }
    let n = generator[0].len();
    if n < k {
        return Err(Error::InvalidGenerator(format!(
            "n = {n} is smaller than k = {k}"
        )));
    }
    for (i, row) in generator.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidGenerator(format!(
                "row {i} has length {}, expected {n}",
                row.len()
            )));
        }
        if row.iter().any(|&b| b > 1) {
            return Err(Error::InvalidGenerator(format!(
                "row {i} has a non-binary entry"
            )));
        }
    }
    Ok((k, n))
}

/// Every codeword `m G`, in increasing order of the message `m` read with
/// row 0 as the least significant bit.
pub fn linear_code_words(generator: &[Vec<u8>]) -> Result<Vec<Vec<u8>>> {
    let (k, n) = check_generator(generator)?;
    let mut words = Vec::with_capacity(1 << k);
    for m in 0u32..(1 << k) {
        let mut word = vec![0u8; n];
        for (i, row) in generator.iter().enumerate() {
            if (m >> i) & 1 == 1 {
                for (w, &g) in word.iter_mut().zip(row) {
                    *w ^= g;
                }
            }
        }
        words.push(word);
    }
    Ok(words)
}

/// Hamming weight histogram over all `2^k` codewords (including weight 0).
pub fn weight_distribution(generator: &[Vec<u8>]) -> Result<BTreeMap<usize, f64>> {
    let mut hist = BTreeMap::new();
    for w in linear_code_words(generator)? {
        let d = w.iter().filter(|&&b| b == 1).count();
        *hist.entry(d).or_insert(0.0) += 1.0;
    }
    Ok(hist)
}

/// Gray-free natural 4-AM mapping of a bit pair: `00 → -3, 01 → -1, 10 → 1, 11 → 3`.
pub fn four_am(bits: &[u8]) -> Vec<f64> {
    bits.chunks(2)
        .map(|p| {
            let v = 2 * p[0] + p.get(1).copied().unwrap_or(0);
            2.0 * v as f64 - 3.0
        })
        .collect()
}

/// Terminated trellis of a rate-`1/k` feed-forward convolutional encoder.
///
/// `generators` are tap masks over `memory + 1` bits, bit `memory` being the
/// current input. The encoder is driven by `info_len` free input bits followed
/// by `memory` zero tail bits, so the trellis has `info_len + memory` stages.
/// `map` turns the `k` output bits of one stage into the branch label.
pub fn terminated_convolutional_trellis<F>(
    generators: &[u32],
    memory: usize,
    info_len: usize,
    map: F,
) -> Result<Trellis>
where
    F: Fn(&[u8]) -> Vec<f64>,
{
    if generators.is_empty() || memory == 0 || memory > 16 || info_len == 0 {
        return Err(Error::InvalidParameter(
            "convolutional encoder needs generators, 1 <= memory <= 16, info_len >= 1".into(),
        ));
    }
    let n_stages = info_len + memory;
    let mut stages = Vec::with_capacity(n_stages);
    // Registers reachable at the current boundary, mapped to dense indices.
    let mut current: Vec<u32> = vec![0];
    let mut n = 0usize;
    let mut nt = None;
    for t in 0..n_stages {
        let inputs: &[u32] = if t < info_len { &[0, 1] } else { &[0] };
        let mut next_index: HashMap<u32, usize> = HashMap::new();
        let mut next: Vec<u32> = Vec::new();
        let mut branches = Vec::new();
        for (from, &reg) in current.iter().enumerate() {
            for &u in inputs {
                let full = (u << memory) | reg;
                let out: Vec<u8> = generators
                    .iter()
                    .map(|&g| ((g & full).count_ones() & 1) as u8)
                    .collect();
                let succ = full >> 1;
                let to = *next_index.entry(succ).or_insert_with(|| {
                    next.push(succ);
                    next.len() - 1
                });
                branches.push(Branch::new(from, to, map(&out)));
            }
        }
        let width = branches[0].label.len();
        if *nt.get_or_insert(width) != width {
            return Err(Error::InvalidParameter(
                "label mapping changed width".into(),
            ));
        }
        n += width;
        stages.push(Stage::new(width, branches));
        current = next;
    }
    Trellis::with_codeword_count(n, stages, 1u128 << info_len)
}

/// Three-stage, two-state 4-AM trellis with unequal codeword energies.
pub fn four_am_toy_trellis() -> Trellis {
    let stages = vec![
        Stage::new(
            1,
            vec![Branch::new(0, 0, vec![1.0]), Branch::new(0, 1, vec![3.0])],
        ),
        Stage::new(
            1,
            vec![
                Branch::new(0, 0, vec![-1.0]),
                Branch::new(0, 1, vec![3.0]),
                Branch::new(1, 0, vec![-3.0]),
                Branch::new(1, 1, vec![1.0]),
            ],
        ),
        Stage::new(
            1,
            vec![
                Branch::new(0, 0, vec![1.0]),
                Branch::new(0, 0, vec![-3.0]),
                Branch::new(1, 0, vec![-1.0]),
                Branch::new(1, 0, vec![3.0]),
            ],
        ),
    ];
    Trellis::with_codeword_count(3, stages, 8).expect("toy trellis is valid")
}
