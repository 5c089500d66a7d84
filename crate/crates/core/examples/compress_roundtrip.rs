//! Compresses a synthetic 3D field at a few thresholds and checks what
//! survived the round trip.

use topc::field::{Dims, ScalarField};
use topc::metrics::{bottleneck, max_norm, psnr};
use topc::persistence::compute_diagram;
use topc::pipeline::{compress_detailed, decompress, CompressOptions, Epsilon};

fn wavy(n: usize) -> ScalarField {
    let dims = Dims::new(n, n, n).unwrap();
    let values = (0..dims.len())
        .map(|v| {
            let (x, y, z) = dims.coords(v);
            let (x, y, z) = (x as f64 / n as f64, y as f64 / n as f64, z as f64 / n as f64);
            (6.0 * x).sin() * (5.0 * y).cos() + 0.5 * (9.0 * z + 3.0 * x).sin() + 0.05 * ((v * 7919) % 101) as f64 / 101.0
        })
        .collect();
    ScalarField::new(dims, values).unwrap()
}

fn main() -> Result<(), topc::Error> {
    let f = wavy(24);
    let diagram = compute_diagram(&f);
    println!("{} vertices, {} pairs", f.len(), diagram.len());
    for pct in [1.0, 5.0, 20.0] {
        let c = compress_detailed(&f, &CompressOptions::new(Epsilon::Percent(pct)))?;
        let g = decompress(&c.bytes)?;
        let after = compute_diagram(&g);
        println!(
            "{pct:>4}%: {:>6} B, rate {:>6.1}, kept {:>4} pairs, bottleneck {:.4} (eps {:.4}), max err {:.4}, psnr {:.1} dB",
            c.bytes.len(),
            c.rate(),
            after.len(),
            bottleneck(&diagram, &after),
            c.epsilon,
            max_norm(&f, &g).unwrap(),
            psnr(&f, &g).unwrap(),
        );
    }
    Ok(())
}
