//! File formats: JSON trellises, text spectra and weight distributions.

pub mod spectrum;
pub mod trellis;
pub mod weights;

pub use spectrum::{
    parse_spectrum, read_spectrum, write_distance_spectrum, write_triangle_spectrum, SpectrumFile,
};
pub use trellis::{parse_trellis, read_trellis, trellis_to_string, write_trellis};
pub use weights::{parse_weights, read_weights, WeightFile};
