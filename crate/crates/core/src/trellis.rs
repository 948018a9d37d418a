//! Trellis representation of a general code.
//!
//! A trellis has `N` stages; stage `t` carries `n_t` real symbols per branch
//! and connects states of `S_t` to states of `S_{t+1}`, with
//! `S_0 = S_N = {0}`. Every root-to-terminal path spells one codeword. Parallel
//! branches, including ones with identical labels, are allowed and counted
//! with multiplicity.

use std::fmt;

use crate::codes;
use crate::error::{Error, Result};
use crate::scalar::{sq_norm, Scalar};

/// Default refusal threshold for exhaustive path enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 1 << 20;

/// Largest generator dimension accepted by [`bpsk_linear_code_trellis`].
pub const MAX_GENERATOR_ROWS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct Branch<T = f64> {
    pub from: usize,
    pub to: usize,
    pub label: Vec<T>,
}

impl<T> Branch<T> {
    pub fn new(from: usize, to: usize, label: Vec<T>) -> Self {
        Self { from, to, label }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stage<T = f64> {
    /// Symbols per branch label at this stage.
    pub nt: usize,
    pub branches: Vec<Branch<T>>,
}

impl<T> Stage<T> {
    pub fn new(nt: usize, branches: Vec<Branch<T>>) -> Self {
        Self { nt, branches }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trellis<T = f64> {
    n: usize,
    stages: Vec<Stage<T>>,
    declared_codewords: Option<u128>,
}

/// A codeword together with its energy `‖s‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct Codeword<T = f64> {
    pub samples: Vec<T>,
    pub energy: T,
}

impl<T: Scalar> Codeword<T> {
    pub fn new(samples: Vec<T>) -> Self {
        let energy = sq_norm(&samples);
        Self { samples, energy }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationKind {
    NoStages,
    LengthSum { declared: usize, sum: usize },
    LabelLength { expected: usize, found: usize },
    NonFiniteLabel,
    EmptyStage,
    StartState { from: usize },
    EndState { to: usize },
    DeadEnd { state: usize },
    Unreachable { state: usize },
    PathCount { declared: u128, actual: u128 },
}

/// One invariant violation, addressed by stage and branch where applicable.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub stage: Option<usize>,
    pub branch: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::NoStages => write!(f, "trellis has no stages"),
            ViolationKind::LengthSum { declared, sum } => {
                write!(f, "sum of n_t is {sum} but n = {declared}")
            }
            ViolationKind::LabelLength { expected, found } => {
                write!(
                    f,
                    "label has {found} symbols, stage declares nt = {expected}"
                )
            }
            ViolationKind::NonFiniteLabel => write!(f, "label contains a non-finite value"),
            ViolationKind::EmptyStage => write!(f, "stage has no branches"),
            ViolationKind::StartState { from } => {
                write!(
                    f,
                    "first-stage branch starts in state {from}, must start in 0"
                )
            }
            ViolationKind::EndState { to } => {
                write!(f, "last-stage branch ends in state {to}, must end in 0")
            }
            ViolationKind::DeadEnd { state } => {
                write!(
                    f,
                    "branch ends in state {state}, which has no outgoing branch"
                )
            }
            ViolationKind::Unreachable { state } => {
                write!(f, "branch starts in state {state}, which no branch reaches")
            }
            ViolationKind::PathCount { declared, actual } => {
                write!(
                    f,
                    "trellis has {actual} paths, declared codeword count is {declared}"
                )
            }
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.stage, self.branch) {
            (Some(s), Some(b)) => write!(f, "stage {s} branch {b}: {}", self.kind),
            (Some(s), None) => write!(f, "stage {s}: {}", self.kind),
            _ => write!(f, "{}", self.kind),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, stage: Option<usize>, branch: Option<usize>, kind: ViolationKind) {
        self.violations.push(Violation {
            stage,
            branch,
            kind,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

impl<T: Scalar> Trellis<T> {
    /// Builds a validated trellis. Branches within each stage are stably
    /// sorted by `(from, to)`.
    pub fn new(n: usize, stages: Vec<Stage<T>>) -> Result<Self> {
        Self::build(n, stages, None)
    }

    /// Like [`Trellis::new`], additionally checking the number of paths.
    pub fn with_codeword_count(n: usize, stages: Vec<Stage<T>>, m: u128) -> Result<Self> {
        Self::build(n, stages, Some(m))
    }

    fn build(n: usize, mut stages: Vec<Stage<T>>, declared: Option<u128>) -> Result<Self> {
        for stage in &mut stages {
            stage.branches.sort_by_key(|b| (b.from, b.to));
        }
        let t = Self::unchecked(n, stages, declared);
        let report = t.validate();
        if report.is_valid() {
            Ok(t)
        } else {
            Err(Error::InvalidTrellis(report))
        }
    }

    /// Stores the parts as given, without validation or sorting. Use
    /// [`Trellis::validate`] to obtain the list of violations.
    pub fn unchecked(n: usize, stages: Vec<Stage<T>>, declared_codewords: Option<u128>) -> Self {
        Self {
            n,
            stages,
            declared_codewords,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stages(&self) -> &[Stage<T>] {
        &self.stages
    }

    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn declared_codewords(&self) -> Option<u128> {
        self.declared_codewords
    }

    /// Size of the state index range at boundary `t` (`0..=N`).
    pub fn state_count(&self, t: usize) -> usize {
        let mut max = 0usize;
        if t > 0 {
            if let Some(stage) = self.stages.get(t - 1) {
                for b in &stage.branches {
                    max = max.max(b.to);
                }
            }
        }
        if let Some(stage) = self.stages.get(t) {
            for b in &stage.branches {
                max = max.max(b.from);
            }
        }
        max + 1
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let last = match self.stages.len() {
            0 => {
                report.push(None, None, ViolationKind::NoStages);
                return report;
            }
            len => len - 1,
        };

        let sum: usize = self.stages.iter().map(|s| s.nt).sum();
        if sum != self.n {
            report.push(
                None,
                None,
                ViolationKind::LengthSum {
                    declared: self.n,
                    sum,
                },
            );
        }

        for (t, stage) in self.stages.iter().enumerate() {
            if stage.branches.is_empty() {
                report.push(Some(t), None, ViolationKind::EmptyStage);
            }
            for (i, b) in stage.branches.iter().enumerate() {
                if b.label.len() != stage.nt {
                    report.push(
                        Some(t),
                        Some(i),
                        ViolationKind::LabelLength {
                            expected: stage.nt,
                            found: b.label.len(),
                        },
                    );
                }
                if b.label.iter().any(|x| !x.is_finite()) {
                    report.push(Some(t), Some(i), ViolationKind::NonFiniteLabel);
                }
                if t == 0 && b.from != 0 {
                    report.push(Some(t), Some(i), ViolationKind::StartState { from: b.from });
                }
                if t == last && b.to != 0 {
                    report.push(Some(t), Some(i), ViolationKind::EndState { to: b.to });
                }
            }
        }

        // Connectivity between consecutive stages.
        for t in 0..last {
            let width = self.state_count(t + 1);
            let mut has_out = vec![false; width];
            let mut has_in = vec![false; width];
            for b in &self.stages[t + 1].branches {
                has_out[b.from] = true;
            }
            for b in &self.stages[t].branches {
                has_in[b.to] = true;
            }
            for (i, b) in self.stages[t].branches.iter().enumerate() {
                if !has_out[b.to] {
                    report.push(Some(t), Some(i), ViolationKind::DeadEnd { state: b.to });
                }
            }
            for (i, b) in self.stages[t + 1].branches.iter().enumerate() {
                if !has_in[b.from] {
                    report.push(
                        Some(t + 1),
                        Some(i),
                        ViolationKind::Unreachable { state: b.from },
                    );
                }
            }
        }

        if let Some(declared) = self.declared_codewords {
            if report.is_valid() {
                let actual = self.path_count();
                if actual != declared {
                    report.push(None, None, ViolationKind::PathCount { declared, actual });
                }
            }
        }
        report
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidTrellis(report))
        }
    }

    /// Number of root-to-terminal paths (saturating at `u128::MAX`).
    pub fn path_count(&self) -> u128 {
        let mut counts = vec![1u128];
        for (t, stage) in self.stages.iter().enumerate() {
            let mut next = vec![0u128; self.state_count(t + 1)];
            for b in &stage.branches {
                let c = counts.get(b.from).copied().unwrap_or(0);
                next[b.to] = next[b.to].saturating_add(c);
            }
            counts = next;
        }
        counts.first().copied().unwrap_or(0)
    }

    /// Path counts from every state at boundary `t` to the final state.
    pub(crate) fn backward_path_counts(&self) -> Vec<Vec<u128>> {
        let n_stages = self.stages.len();
        let mut out = vec![Vec::new(); n_stages + 1];
        out[n_stages] = vec![1u128];
        for t in (0..n_stages).rev() {
            let mut cur = vec![0u128; self.state_count(t)];
            for b in &self.stages[t].branches {
                let c = out[t + 1].get(b.to).copied().unwrap_or(0);
                cur[b.from] = cur[b.from].saturating_add(c);
            }
            out[t] = cur;
        }
        out
    }

    /// Branch indices grouped by starting state, per stage.
    pub(crate) fn outgoing(&self) -> Vec<Vec<Vec<usize>>> {
        self.stages
            .iter()
            .enumerate()
            .map(|(t, stage)| {
                let mut by_state = vec![Vec::new(); self.state_count(t)];
                for (i, b) in stage.branches.iter().enumerate() {
                    by_state[b.from].push(i);
                }
                by_state
            })
            .collect()
    }

    /// Concatenates the labels along a path given as one branch index per stage.
    pub fn path_samples(&self, path: &[usize]) -> Vec<T> {
        let mut samples = Vec::with_capacity(self.n);
        for (stage, &i) in self.stages.iter().zip(path) {
            samples.extend_from_slice(&stage.branches[i].label);
        }
        samples
    }

    /// All root-to-terminal paths as branch-index sequences, in lexicographic
    /// order of branch indices.
    pub fn enumerate_paths(&self, limit: u128) -> Result<Vec<Vec<usize>>> {
        self.ensure_valid()?;
        let count = self.path_count();
        if count > limit {
            return Err(Error::EnumerationLimit {
                limit,
                reached: count,
            });
        }
        let outgoing = self.outgoing();
        let n_stages = self.stages.len();
        let mut paths = Vec::with_capacity(count as usize);
        // Iterative DFS; `cursor[t]` indexes into the outgoing list at stage t.
        let mut path: Vec<usize> = Vec::with_capacity(n_stages);
        let mut cursor: Vec<usize> = vec![0; n_stages];
        let mut state = 0usize;
        let mut t = 0usize;
        loop {
            if t == n_stages {
                paths.push(path.clone());
                t -= 1;
                let b = path.pop().expect("non-empty path");
                state = self.stages[t].branches[b].from;
                cursor[t] += 1;
                continue;
            }
            let options = outgoing[t].get(state).map(Vec::as_slice).unwrap_or(&[]);
            if cursor[t] < options.len() {
                let b = options[cursor[t]];
                path.push(b);
                state = self.stages[t].branches[b].to;
                t += 1;
                if t < n_stages {
                    cursor[t] = 0;
                }
            } else {
                if t == 0 {
                    break;
                }
                t -= 1;
                let b = path.pop().expect("non-empty path");
                state = self.stages[t].branches[b].from;
                cursor[t] += 1;
            }
        }
        Ok(paths)
    }

    /// All codewords by depth-first traversal; refuses when the trellis has
    /// more than `limit` paths.
    pub fn enumerate_codewords(&self, limit: u128) -> Result<Vec<Codeword<T>>> {
        Ok(self
            .enumerate_paths(limit)?
            .iter()
            .map(|p| Codeword::new(self.path_samples(p)))
            .collect())
    }

    /// Mean codeword energy under equiprobable codewords, from one forward
    /// pass accumulating path counts and energy sums per state.
    pub fn average_energy(&self) -> Result<f64> {
        self.ensure_valid()?;
        let mut counts = vec![1.0f64];
        let mut sums = vec![0.0f64];
        for (t, stage) in self.stages.iter().enumerate() {
            let width = self.state_count(t + 1);
            let mut next_counts = vec![0.0; width];
            let mut next_sums = vec![0.0; width];
            for b in &stage.branches {
                let c = counts[b.from];
                next_counts[b.to] += c;
                next_sums[b.to] += sums[b.from] + c * sq_norm(&b.label).widen();
            }
            counts = next_counts;
            sums = next_sums;
        }
        Ok(sums[0] / counts[0])
    }

    /// Converts labels to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Trellis<U> {
        let stages = self
            .stages
            .iter()
            .map(|s| Stage {
                nt: s.nt,
                branches: s
                    .branches
                    .iter()
                    .map(|b| Branch {
                        from: b.from,
                        to: b.to,
                        label: b
                            .label
                            .iter()
                            .map(|&x| U::from_f64_lossy(x.widen()))
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        Trellis {
            n: self.n,
            stages,
            declared_codewords: self.declared_codewords,
        }
    }
}

/// One-stage trellis with a parallel branch per codeword.
pub fn trivial_trellis<T: Scalar>(codewords: &[Vec<T>]) -> Result<Trellis<T>> {
    let first = codewords.first().ok_or(Error::EmptyCodeList)?;
    let n = first.len();
    if n == 0 {
        return Err(Error::RaggedCodewords {
            index: 0,
            expected: 1,
            found: 0,
        });
    }
    for (index, c) in codewords.iter().enumerate() {
        if c.len() != n {
            return Err(Error::RaggedCodewords {
                index,
                expected: n,
                found: c.len(),
            });
        }
    }
    let branches = codewords
        .iter()
        .map(|c| Branch::new(0, 0, c.clone()))
        .collect();
    Trellis::with_codeword_count(n, vec![Stage::new(n, branches)], codewords.len() as u128)
}

/// Trivial trellis over the BPSK images `s_t = 1 - 2 c_t` of every codeword
/// in the row space of a binary generator matrix.
pub fn bpsk_linear_code_trellis<T: Scalar>(generator: &[Vec<u8>]) -> Result<Trellis<T>> {
    let words = codes::linear_code_words(generator)?;
    let images: Vec<Vec<T>> = words.iter().map(|c| codes::bpsk(c)).collect();
    trivial_trellis(&images)
}
