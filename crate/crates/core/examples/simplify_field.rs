//! Removes small features from a 2D field by flooding, keeping the extrema
//! of the persistent pairs.

use topc::field::{Dims, ScalarField};
use topc::persistence::{compute_diagram, filter_diagram};
use topc::simplify::{simplify, ConstraintSet};

fn main() {
    let dims = Dims::planar(16, 16).unwrap();
    let values = (0..dims.len())
        .map(|v| {
            let (x, y, _) = dims.coords(v);
            (x as f64 * 0.7).sin() + (y as f64 * 0.5).cos() + 0.3 * (x as f64 * 2.9 + y as f64 * 1.7).sin()
        })
        .collect();
    let f = ScalarField::new(dims, values).unwrap();
    let diagram = compute_diagram(&f);
    let (kept, removed) = filter_diagram(&diagram, 0.1 * f.span()).unwrap();
    let constraints = ConstraintSet::from_diagram(&kept).unwrap();
    let g = simplify(&f, &constraints).unwrap();

    let changed = f.values().iter().zip(g.values()).filter(|(a, b)| a != b).count();
    let moved = f.values().iter().zip(g.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("{changed} of {} values flooded, largest change {moved:.3}", f.len());
    println!("removed {} pairs, kept {}", removed.len(), kept.len());
    println!("diagram after flooding equals the kept pairs: {}", compute_diagram(&g).same_points(&kept));
}
