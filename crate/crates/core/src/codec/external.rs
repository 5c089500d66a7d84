//! Pluggable lossy codecs whose output is stored next to the topological
//! data and cropped back into the quantization intervals at decode time.

use crate::field::{Dims, ScalarField};

use super::CodecError;

pub trait FieldCodec {
    fn name(&self) -> &'static str;
    fn compress_field(&self, field: &ScalarField) -> Vec<u8>;
    fn decompress_field(&self, bytes: &[u8], dims: Dims) -> Result<Vec<f64>, CodecError>;
}

/// Uniform 8-bit quantization over the global range: 256 equal bins,
/// reconstruction at the bin centers.
#[derive(Debug, Clone, Copy, Default)]
pub struct Uq8;

const BINS: f64 = 256.0;

impl FieldCodec for Uq8 {
    fn name(&self) -> &'static str {
        "uq8"
    }

    fn compress_field(&self, field: &ScalarField) -> Vec<u8> {
        let (lo, hi) = field.range();
        let span = hi - lo;
        let mut out = Vec::with_capacity(16 + field.len());
        out.extend_from_slice(&lo.to_le_bytes());
        out.extend_from_slice(&hi.to_le_bytes());
        out.extend(field.values().iter().map(|&x| {
            if span > 0.0 {
                ((x - lo) / span * BINS).floor().clamp(0.0, BINS - 1.0) as u8
            } else {
                0
            }
        }));
        out
    }

    fn decompress_field(&self, bytes: &[u8], dims: Dims) -> Result<Vec<f64>, CodecError> {
        if bytes.len() != 16 + dims.len() {
            return Err(CodecError::DimsMismatch {
                expected: dims.len(),
                actual: bytes.len().saturating_sub(16),
            });
        }
        let lo = f64::from_le_bytes(bytes[0..8].try_into().unwrap());
        let hi = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let span = hi - lo;
        Ok(bytes[16..]
            .iter()
            .map(|&c| {
                if span > 0.0 {
                    (lo + (c as f64 + 0.5) / BINS * span).clamp(lo, hi)
                } else {
                    lo
                }
            })
            .collect())
    }
}
