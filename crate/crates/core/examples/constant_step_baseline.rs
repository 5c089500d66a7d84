//! Compares topology-aware compression with plain constant-step
//! quantization at a similar archive size.

use topc::codec::Backend;
use topc::field::{Dims, ScalarField};
use topc::metrics::bottleneck;
use topc::persistence::compute_diagram;
use topc::pipeline::{compress_detailed, decompress, sq_r_compress, sq_r_decompress, CompressOptions, Epsilon};

fn main() -> Result<(), topc::Error> {
    let n = 20;
    let dims = Dims::new(n, n, n).unwrap();
    let values = (0..dims.len())
        .map(|v| {
            let (x, y, z) = dims.coords(v);
            (x as f64 * 0.5).sin() * (y as f64 * 0.4).cos() + (z as f64 * 0.3).sin() + 0.15 * ((v * 2654435761) % 1000) as f64 / 1000.0
        })
        .collect();
    let f = ScalarField::new(dims, values)?;
    let df = compute_diagram(&f);

    let ours = compress_detailed(&f, &CompressOptions::new(Epsilon::Percent(5.0)))?;
    let g = decompress(&ours.bytes)?;

    // the constant step whose archive size is closest to ours
    let (step, bytes) = (0..200)
        .map(|k| f.span() * 1e-4 * 10f64.powf(k as f64 / 50.0))
        .map(|step| (step, sq_r_compress(&f, step, Backend::Bzip2).unwrap()))
        .min_by_key(|(_, bytes)| bytes.len().abs_diff(ours.bytes.len()))
        .unwrap();
    let (sq, sq_bytes) = (sq_r_decompress(&bytes)?, bytes.len());
    println!("topology-aware: {:>6} B, bottleneck {:.4}", ours.bytes.len(), bottleneck(&df, &compute_diagram(&g)));
    println!("constant step:  {:>6} B, bottleneck {:.4} (step {step:.4})", sq_bytes, bottleneck(&df, &compute_diagram(&sq)));
    Ok(())
}
