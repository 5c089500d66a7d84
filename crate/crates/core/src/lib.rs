//! Lossy compression of 2D/3D regular-grid scalar fields that keeps every
//! persistence pair at least as persistent as a threshold ε, with exact
//! critical values, and removes all the others.
//!
//! ```
//! use topc::field::{Dims, ScalarField};
//! use topc::pipeline::{compress, decompress, CompressOptions, Epsilon};
//!
//! let values = (0..64).map(|i| ((i * 37) % 64) as f64).collect();
//! let field = ScalarField::new(Dims::planar(8, 8).unwrap(), values).unwrap();
//! let archive = compress(&field, &CompressOptions::new(Epsilon::Percent(10.0))).unwrap();
//! let restored = decompress(&archive).unwrap();
//! assert_eq!(restored.dims(), field.dims());
//! ```

pub mod cli;
pub mod codec;
pub mod field;
pub mod metrics;
pub mod persistence;
pub mod pipeline;
pub mod quantize;
pub mod rawio;
pub mod simplify;

use thiserror::Error;

/// Any failure of the compression pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] field::FieldError),
    #[error(transparent)]
    Persistence(#[from] persistence::PersistenceError),
    #[error(transparent)]
    Simplify(#[from] simplify::SimplifyError),
    #[error(transparent)]
    Quantize(#[from] quantize::QuantizeError),
    #[error(transparent)]
    Codec(#[from] codec::CodecError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
    #[error("invalid threshold {0}")]
    InvalidEpsilon(f64),
    #[error("reconstruction failed: {0}")]
    Reconstruction(String),
}
