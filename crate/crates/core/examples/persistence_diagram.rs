//! Computes the persistence diagram of a small 2D field, filters it and
//! writes it as CSV.

use topc::field::{Dims, ScalarField};
use topc::persistence::{compute_diagram, filter_diagram};

fn main() {
    // two basins separated by a low ridge, plus a shallow dent
    #[rustfmt::skip]
    let values = vec![
        9.0, 8.0, 7.0, 8.0, 9.0,
        8.0, 1.0, 5.0, 2.0, 8.0,
        7.0, 6.0, 5.5, 6.0, 7.0,
        8.0, 6.5, 4.0, 6.5, 8.0,
        9.0, 8.0, 7.0, 8.0, 9.0,
    ];
    let f = ScalarField::new(Dims::planar(5, 5).unwrap(), values).unwrap();
    let diagram = compute_diagram(&f);
    println!("full diagram:");
    diagram.write_csv(std::io::stdout()).unwrap();

    let (kept, removed) = filter_diagram(&diagram, 2.0).unwrap();
    println!("\nkept with eps = 2:");
    kept.write_csv(std::io::stdout()).unwrap();
    for p in removed {
        println!("removed {} ({}, {}) persistence {}", p.class, p.birth_value, p.death_value, p.persistence());
    }
}
