//! Distances between two fields and between their persistence diagrams.

use topc::field::{Dims, ScalarField};
use topc::metrics::{bottleneck, max_norm, p_norm, psnr, wasserstein};
use topc::persistence::compute_diagram;

fn main() {
    let dims = Dims::planar(32, 32).unwrap();
    let f_values: Vec<f64> = (0..dims.len())
        .map(|v| {
            let (x, y, _) = dims.coords(v);
            (x as f64 * 0.4).sin() + (y as f64 * 0.3).cos()
        })
        .collect();
    let g_values: Vec<f64> = f_values.iter().enumerate().map(|(v, x)| x + 0.02 * ((v * 31) % 7) as f64).collect();
    let f = ScalarField::new(dims, f_values).unwrap();
    let g = ScalarField::new(dims, g_values).unwrap();

    let (df, dg) = (compute_diagram(&f), compute_diagram(&g));
    println!("pairs: {} vs {}", df.len(), dg.len());
    println!("bottleneck  {:.4}", bottleneck(&df, &dg));
    println!("wasserstein {:.4}", wasserstein(&df, &dg).unwrap());
    println!("max norm    {:.4}", max_norm(&f, &g).unwrap());
    println!("l2 norm     {:.4}", p_norm(&f, &g, 2.0).unwrap());
    println!("psnr        {:.2} dB", psnr(&f, &g).unwrap());
}
