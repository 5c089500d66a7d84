//! Stores an 8-bit lossy stream next to the topological data, and plugs in a
//! custom codec at decode time.

use topc::codec::{CodecError, FieldCodec, Uq8};
use topc::field::{Dims, ScalarField};
use topc::metrics::max_norm;
use topc::pipeline::{compress_detailed, decompress, decompress_with, CompressOptions, Epsilon, External};

/// Ignores the stream and returns zeros; decoding still crops every value
/// into its interval, so the topology survives.
struct Zeros;

impl FieldCodec for Zeros {
    fn name(&self) -> &'static str {
        "zeros"
    }

    fn compress_field(&self, _field: &ScalarField) -> Vec<u8> {
        Vec::new()
    }

    fn decompress_field(&self, _bytes: &[u8], dims: Dims) -> Result<Vec<f64>, CodecError> {
        Ok(vec![0.0; dims.len()])
    }
}

fn main() -> Result<(), topc::Error> {
    let dims = Dims::planar(64, 64).unwrap();
    let values = (0..dims.len())
        .map(|v| {
            let (x, y, _) = dims.coords(v);
            (x as f64 * 0.2).sin() * (y as f64 * 0.15).sin() * 100.0
        })
        .collect();
    let f = ScalarField::new(dims, values)?;
    let plain = compress_detailed(&f, &CompressOptions::new(Epsilon::Percent(5.0)))?;
    let opts = CompressOptions::new(Epsilon::Percent(5.0)).external(Some(External::Uq8));
    let with_uq8 = compress_detailed(&f, &opts)?;

    let g = decompress(&with_uq8.bytes)?;
    let z = decompress_with(&with_uq8.bytes, &Zeros)?;
    println!("{} stream, {} B vs {} B without", Uq8.name(), with_uq8.bytes.len(), plain.bytes.len());
    println!("max error with stream {:.3}", max_norm(&f, &g).unwrap());
    println!("max error, stream replaced by zeros {:.3}", max_norm(&f, &z).unwrap());
    println!("max error without stream {:.3}", max_norm(&f, &decompress(&plain.bytes)?).unwrap());
    Ok(())
}
