//! Shows the adaptive partition built from critical values, with and
//! without the pointwise error cap, and how vertices map onto it.

use topc::field::{Dims, ScalarField};
use topc::persistence::{compute_diagram, filter_diagram};
use topc::quantize::{build_partition, quantize};
use topc::simplify::{simplify, ConstraintSet};

fn main() {
    let dims = Dims::planar(40, 40).unwrap();
    let values = (0..dims.len())
        .map(|v| {
            let (x, y, _) = dims.coords(v);
            (x as f64 * 0.45).sin() * 10.0 + (y as f64 * 0.3).cos() * 4.0 + x as f64 * 0.3
        })
        .collect();
    let f = ScalarField::new(dims, values).unwrap();
    let eps = 0.05 * f.span();
    let (kept, _) = filter_diagram(&compute_diagram(&f), eps).unwrap();
    let g = simplify(&f, &ConstraintSet::from_diagram(&kept).unwrap()).unwrap();
    let preserved = compute_diagram(&g);

    for pointwise in [false, true] {
        let partition = build_partition(&preserved, pointwise, eps).unwrap();
        let q = quantize(&g, &preserved, &partition).unwrap();
        println!(
            "pointwise {pointwise}: {} bounds, {} slots, {} used, widest gap {:.3}",
            partition.bounds().len(),
            partition.len(),
            q.interval_count(),
            partition.widest()
        );
        let decoded = q.values();
        let worst = g.values().iter().zip(&decoded).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("  worst quantization error {worst:.3} (eps {eps:.3})");
    }
}
