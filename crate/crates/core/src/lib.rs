//! Upper bounds on the maximum-likelihood decoding error probability of
//! general (not necessarily binary, linear or equal-energy) codes over the
//! AWGN channel, computed from trellis-based distance spectra.
//!
//! The crate is organised bottom-up:
//!
//! - [`trellis`]: trellis representation, validation and enumeration;
//! - [`spectrum`]: Euclidean and triangle distance spectra over the product
//!   error trellis;
//! - [`bounds`]: union, sphere, tangential and tangential-sphere bounds;
//! - [`simulate`]: Viterbi decoding and Monte-Carlo frame error rates.
//!
//! Trellis labels and simulation are generic over [`Scalar`] (`f32`/`f64`);
//! spectra and bounds are computed in `f64`.

// Reference constants keep every digit they were published with, and
// `!(x > y)` is used deliberately so that NaN takes the rejecting branch.
#![allow(
    clippy::excessive_precision,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop
)]

pub mod bounds;
pub mod codes;
pub mod error;
pub mod io;
pub mod quadrature;
pub mod root;
pub mod scalar;
pub mod simulate;
pub mod special;
pub mod spectrum;
pub mod trellis;

pub use bounds::{BoundResult, ChannelParams, QuadratureConfig};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use simulate::{FerEstimate, SimulationOptions, Transmit};
pub use spectrum::{DistanceSpectrum, TriangleSpectrum};
pub use trellis::{Branch, Codeword, Stage, Trellis};

pub type Trellis32 = Trellis<f32>;
pub type Codeword32 = Codeword<f32>;
