use thiserror::Error;

use crate::trellis::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid trellis:\n{0}")]
    InvalidTrellis(ValidationReport),

    #[error("path enumeration refused: more than {limit} paths (reached {reached})")]
    EnumerationLimit { limit: u128, reached: u128 },

    #[error("codeword list is empty")]
    EmptyCodeList,

    #[error("codeword {index} has length {found}, expected {expected}")]
    RaggedCodewords {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid generator matrix: {0}")]
    InvalidGenerator(String),

    #[error("generator has k = {k} rows; enumeration is limited to k <= {limit}")]
    GeneratorTooLarge { k: usize, limit: usize },

    #[error("product trellis at stage {stage} has {pairs} state pairs, limit is {limit}")]
    ProductStateLimit {
        stage: usize,
        pairs: usize,
        limit: usize,
    },

    #[error("pair enumeration over {m} codewords exceeds guard of {limit}")]
    PairGuard { m: usize, limit: usize },

    #[error("weight {d} is outside 0..={n}")]
    WeightOutOfRange { d: usize, n: usize },

    #[error("weight {d} has multiplicity {count}, but only C({n},{d}) = {max} words exist")]
    ImpossibleWeight {
        d: usize,
        n: usize,
        count: f64,
        max: f64,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("{bound} requires n >= {min}, got n = {n}")]
    DimensionTooSmall {
        bound: &'static str,
        n: usize,
        min: usize,
    },

    #[error("spectrum has no mass at positive distance")]
    DegenerateSpectrum,

    #[error("unsupported geometry: entry ({e1}, {e2}, {d2}) has a zero-energy reference codeword")]
    UnsupportedGeometry { e1: f64, e2: f64, d2: f64 },

    #[error("corrupt spectrum entry ({e1}, {e2}, {d2}): cosine {cosine} outside [-1, 1]")]
    CorruptSpectrum {
        e1: f64,
        e2: f64,
        d2: f64,
        cosine: f64,
    },

    #[error("bracket violated: f(lo) = {f_lo}, f(hi) = {f_hi}, need f(lo) < 1 < f(hi)")]
    Bracket { f_lo: f64, f_hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid trellis file:\n{}", format_lines(.0))]
    InvalidTrellisFile(Vec<(usize, String)>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Failures of numerical machinery (brackets, guards, geometry) as
    /// opposed to malformed input or usage.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EnumerationLimit { .. }
                | Error::GeneratorTooLarge { .. }
                | Error::ProductStateLimit { .. }
                | Error::PairGuard { .. }
                | Error::DegenerateSpectrum
                | Error::UnsupportedGeometry { .. }
                | Error::CorruptSpectrum { .. }
                | Error::Bracket { .. }
        )
    }
}

fn format_lines(items: &[(usize, String)]) -> String {
    items
        .iter()
        .map(|(line, msg)| format!("  line {line}: {msg}"))
        .collect::<Vec<_>>()
        .join("\n")
}
