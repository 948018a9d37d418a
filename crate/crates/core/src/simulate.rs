//! Monte-Carlo frame-error rates under exact ML (Viterbi) decoding.
//!
//! Frame `i` of a run with seed `s` draws all of its randomness from
//! `ChaCha12Rng::seed_from_u64(s)` switched to stream `i`, so results do not
//! depend on how frames are spread over worker threads. Gaussian samples use
//! the Box–Muller transform on 53-bit uniforms; the transmitted codeword is
//! drawn uniformly over trellis paths with one 128-bit draw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trellis::{Codeword, Trellis};

/// Estimated frame-error rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FerEstimate {
    pub fer: f64,
    pub stderr: f64,
    pub frames: u64,
    pub errors_observed: u64,
    pub seed: u64,
}

impl FerEstimate {
    fn new(errors_observed: u64, frames: u64, seed: u64) -> Self {
        let fer = errors_observed as f64 / frames as f64;
        Self {
            fer,
            stderr: (fer * (1.0 - fer) / frames as f64).sqrt(),
            frames,
            errors_observed,
            seed,
        }
    }
}

/// Which codeword each frame carries.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum Transmit {
    /// Uniform over all codewords.
    #[default]
    Uniform,
    /// Always the given path (one branch index per stage).
    Path(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationOptions {
    pub frames: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub transmit: Transmit,
}

impl SimulationOptions {
    pub fn new(frames: u64, seed: u64) -> Self {
        Self {
            frames,
            seed,
            workers: None,
            transmit: Transmit::Uniform,
        }
    }
}

/// Viterbi decoder with reusable buffers.
#[derive(Clone, Debug)]
pub struct ViterbiDecoder<'a, T: Scalar> {
    trellis: &'a Trellis<T>,
    metric: Vec<T>,
    next: Vec<T>,
    /// Winning incoming branch per stage and end state.
    survivor: Vec<Vec<usize>>,
    path: Vec<usize>,
}

impl<'a, T: Scalar> ViterbiDecoder<'a, T> {
    pub fn new(trellis: &'a Trellis<T>) -> Result<Self> {
        trellis.ensure_valid()?;
        let survivor = (0..trellis.num_stages())
            .map(|t| vec![usize::MAX; trellis.state_count(t + 1)])
            .collect();
        Ok(Self {
            trellis,
            metric: Vec::new(),
            next: Vec::new(),
            survivor,
            path: vec![0; trellis.num_stages()],
        })
    }

    /// Branch indices of a path nearest to `received`. Ties go to the
    /// lowest branch index at each state.
    pub fn decode_path(&mut self, received: &[T]) -> Result<&[usize]> {
        if received.len() != self.trellis.n() {
            return Err(Error::LengthMismatch {
                expected: self.trellis.n(),
                found: received.len(),
            });
        }
        self.metric.clear();
        self.metric.push(T::zero());
        let mut offset = 0;
        for (t, stage) in self.trellis.stages().iter().enumerate() {
            let y = &received[offset..offset + stage.nt];
            offset += stage.nt;
            self.next.clear();
            self.next
                .resize(self.trellis.state_count(t + 1), T::infinity());
            let survivors = &mut self.survivor[t];
            for (i, b) in stage.branches.iter().enumerate() {
                let mut m = self.metric[b.from];
                for (&yi, &li) in y.iter().zip(&b.label) {
                    let d = yi - li;
                    m = m + d * d;
                }
                if m < self.next[b.to] || survivors[b.to] == usize::MAX {
                    self.next[b.to] = m;
                    survivors[b.to] = i;
                }
            }
            survivors.iter_mut().for_each(|s| {
                if *s == usize::MAX {
                    *s = 0;
                }
            });
            std::mem::swap(&mut self.metric, &mut self.next);
        }
        let mut state = 0;
        for t in (0..self.trellis.num_stages()).rev() {
            let i = self.survivor[t][state];
            self.path[t] = i;
            state = self.trellis.stages()[t].branches[i].from;
        }
        for s in self.survivor.iter_mut() {
            s.iter_mut().for_each(|x| *x = usize::MAX);
        }
        Ok(&self.path)
    }
}

/// Codeword nearest to `received` in squared Euclidean distance.
pub fn viterbi_decode<T: Scalar>(trellis: &Trellis<T>, received: &[T]) -> Result<Codeword<T>> {
    let mut dec = ViterbiDecoder::new(trellis)?;
    let path = dec.decode_path(received)?.to_vec();
    Ok(Codeword::new(trellis.path_samples(&path)))
}

/// Uniform path sampler over a trellis.
struct PathSampler {
    total: u128,
    counts: Vec<Vec<u128>>,
    outgoing: Vec<Vec<Vec<usize>>>,
}

impl PathSampler {
    fn new<T: Scalar>(trellis: &Trellis<T>) -> Result<Self> {
        let counts = trellis.backward_path_counts();
        let total = counts[0][0];
        if total == u128::MAX {
            return Err(Error::InvalidParameter(
                "too many codewords for exact uniform sampling".into(),
            ));
        }
        Ok(Self {
            total,
            counts,
            outgoing: trellis.outgoing(),
        })
    }

    fn sample<T: Scalar, R: Rng>(&self, trellis: &Trellis<T>, rng: &mut R, path: &mut [usize]) {
        let mut x = rng.random_range(0..self.total);
        let mut state = 0;
        for (t, stage) in trellis.stages().iter().enumerate() {
            for &i in &self.outgoing[t][state] {
                let c = self.counts[t + 1][stage.branches[i].to];
                if x < c {
                    path[t] = i;
                    state = stage.branches[i].to;
                    break;
                }
                x -= c;
            }
        }
    }
}

/// Fills `out` with independent `N(0, 1)` samples (Box–Muller).
pub fn standard_normals<R: Rng>(rng: &mut R, out: &mut [f64]) {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    for chunk in out.chunks_mut(2) {
        // 1 − u lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - (rng.next_u64() >> 11) as f64 * SCALE;
        let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        chunk[0] = r * c;
        if let Some(z) = chunk.get_mut(1) {
            *z = r * s;
        }
    }
}

/// The generator used for frame `frame` of a run seeded with `seed`.
pub fn frame_rng(seed: u64, frame: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

/// Frame-error rate with uniformly drawn codewords and the global thread pool.
pub fn monte_carlo_fer<T: Scalar>(
    trellis: &Trellis<T>,
    sigma: f64,
    frames: u64,
    seed: u64,
) -> Result<FerEstimate> {
    monte_carlo_fer_with(trellis, sigma, &SimulationOptions::new(frames, seed))
}

pub fn monte_carlo_fer_with<T: Scalar>(
    trellis: &Trellis<T>,
    sigma: f64,
    opts: &SimulationOptions,
) -> Result<FerEstimate> {
    trellis.ensure_valid()?;
    if opts.frames == 0 {
        return Err(Error::InvalidParameter("frames must be positive".into()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if opts.workers == Some(0) {
        return Err(Error::InvalidParameter("workers must be positive".into()));
    }
    let fixed = match &opts.transmit {
        Transmit::Uniform => None,
        Transmit::Path(p) => {
            check_path(trellis, p)?;
            Some(p.clone())
        }
    };
    let sampler = PathSampler::new(trellis)?;
    let n = trellis.n();
    let stages = trellis.num_stages();

    let run = || -> u64 {
        (0..opts.frames)
            .into_par_iter()
            .map_init(
                || {
                    (
                        ViterbiDecoder::new(trellis).expect("validated above"),
                        vec![0usize; stages],
                        vec![0.0f64; n],
                        Vec::<T>::with_capacity(n),
                    )
                },
                |(dec, path, noise, received), frame| {
                    let mut rng = frame_rng(opts.seed, frame);
                    match &fixed {
                        Some(p) => path.copy_from_slice(p),
                        None => sampler.sample(trellis, &mut rng, path),
                    }
                    standard_normals(&mut rng, noise);
                    received.clear();
                    let mut k = 0;
                    for (stage, &i) in trellis.stages().iter().zip(path.iter()) {
                        for &x in &stage.branches[i].label {
                            received.push(x + T::from_f64_lossy(sigma * noise[k]));
                            k += 1;
                        }
                    }
                    let decoded = dec.decode_path(received).expect("length matches");
                    let same = trellis
                        .stages()
                        .iter()
                        .zip(decoded.iter().zip(path.iter()))
                        .all(|(stage, (&a, &b))| {
                            a == b || stage.branches[a].label == stage.branches[b].label
                        });
                    u64::from(!same)
                },
            )
            .sum()
    };
    let errors = match opts.workers {
        None => run(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run),
    };
    Ok(FerEstimate::new(errors, opts.frames, opts.seed))
}

fn check_path<T: Scalar>(trellis: &Trellis<T>, path: &[usize]) -> Result<()> {
    if path.len() != trellis.num_stages() {
        return Err(Error::InvalidParameter(format!(
            "path has {} branches, trellis has {} stages",
            path.len(),
            trellis.num_stages()
        )));
    }
    let mut state = 0;
    for (t, (stage, &i)) in trellis.stages().iter().zip(path).enumerate() {
        let b = stage
            .branches
            .get(i)
            .ok_or_else(|| Error::InvalidParameter(format!("stage {t} has no branch {i}")))?;
        if b.from != state {
            return Err(Error::InvalidParameter(format!(
                "branch {i} of stage {t} does not leave state {state}"
            )));
        }
        state = b.to;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes;
    use crate::scalar::sq_dist;
    use crate::trellis::trivial_trellis;

    fn nearest(words: &[Codeword], y: &[f64]) -> f64 {
        words
            .iter()
            .map(|w| sq_dist(&w.samples, y))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn exact_codeword_decodes_to_itself() {
        let t = codes::four_am_toy_trellis();
        for w in t.enumerate_codewords(64).unwrap() {
            assert_eq!(viterbi_decode(&t, &w.samples).unwrap(), w);
        }
    }

    #[test]
    fn just_past_the_bisector() {
        let t = trivial_trellis(&[vec![1.0, 1.0], vec![-1.0, 3.0]]).unwrap();
        let eps = 1e-9;
        let y = [0.0 + eps * -2.0, 2.0 + eps * 2.0];
        assert_eq!(viterbi_decode(&t, &y).unwrap().samples, vec![-1.0, 3.0]);
        let y = [0.0 - eps * -2.0, 2.0 - eps * 2.0];
        assert_eq!(viterbi_decode(&t, &y).unwrap().samples, vec![1.0, 1.0]);
    }

    #[test]
    fn matches_exhaustive_search() {
        let trellises = [
            codes::four_am_toy_trellis(),
            codes::terminated_convolutional_trellis(&[0b101, 0b111], 2, 4, codes::bpsk).unwrap(),
        ];
        for t in &trellises {
            let words = t.enumerate_codewords(1 << 12).unwrap();
            let mut rng = frame_rng(7, 0);
            let mut y = vec![0.0; t.n()];
            for _ in 0..10_000 {
                standard_normals(&mut rng, &mut y);
                y.iter_mut().for_each(|v| *v *= 2.0);
                let d = viterbi_decode(t, &y).unwrap();
                assert_eq!(sq_dist(&d.samples, &y), nearest(&words, &y));
            }
        }
    }

    #[test]
    fn ties_go_to_lowest_branch() {
        let t = trivial_trellis(&[vec![1.0], vec![-1.0]]).unwrap();
        assert_eq!(viterbi_decode(&t, &[0.0]).unwrap().samples, vec![1.0]);
    }

    #[test]
    fn length_mismatch() {
        let t = codes::four_am_toy_trellis();
        assert!(matches!(
            viterbi_decode(&t, &[0.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn tiny_noise_never_errs() {
        let t = codes::four_am_toy_trellis();
        let est = monte_carlo_fer(&t, 1e-6, 10_000, 3).unwrap();
        assert_eq!(est.errors_observed, 0);
    }

    #[test]
    fn uniform_sampler_hits_every_path_evenly() {
        let t = codes::four_am_toy_trellis();
        let sampler = PathSampler::new(&t).unwrap();
        let paths = t.enumerate_paths(64).unwrap();
        let mut hits = vec![0u32; paths.len()];
        let mut path = vec![0; 3];
        for i in 0..80_000 {
            sampler.sample(&t, &mut frame_rng(1, i), &mut path);
            hits[paths.iter().position(|p| *p == path).unwrap()] += 1;
        }
        // 10^4 expected per path, stderr ≈ 94.
        assert!(
            hits.iter().all(|&h| (h as f64 - 10_000.0).abs() < 500.0),
            "{hits:?}"
        );
    }

    #[test]
    fn normals_have_unit_variance() {
        let mut rng = frame_rng(11, 0);
        let mut z = vec![0.0; 200_001];
        standard_normals(&mut rng, &mut z);
        let mean = z.iter().sum::<f64>() / z.len() as f64;
        let var = z.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / z.len() as f64;
        assert!(mean.abs() < 0.01 && (var - 1.0).abs() < 0.01);
    }

    #[test]
    fn option_guards() {
        let t = codes::four_am_toy_trellis();
        assert!(monte_carlo_fer(&t, 1.0, 0, 1).is_err());
        assert!(monte_carlo_fer(&t, 0.0, 10, 1).is_err());
        let mut o = SimulationOptions::new(10, 1);
        o.transmit = Transmit::Path(vec![0, 2, 0]);
        assert!(monte_carlo_fer_with(&t, 1.0, &o).is_err());
        o.transmit = Transmit::Path(vec![1, 3, 2]);
        assert!(monte_carlo_fer_with(&t, 1.0, &o).is_ok());
    }

    #[test]
    fn single_precision_decoder() {
        let t = codes::four_am_toy_trellis().cast::<f32>();
        let est = monte_carlo_fer(&t, 1e-3, 1000, 5).unwrap();
        assert_eq!(est.errors_observed, 0);
    }
}
