//! Neighborhoods and link components checked against a triangulation built
//! explicitly, cell by cell, instead of from the stencil tables.

mod common;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use topc::field::{classify_all, link_betti, Dims, ScalarField, Triangulation};

/// Every top simplex of the Freudenthal triangulation: each cell is split
/// along the walks from its lowest corner that add one axis at a time.
fn simplices(dims: Dims) -> Vec<Vec<usize>> {
    let axes: Vec<usize> = if dims.is_3d() { vec![0, 1, 2] } else { vec![0, 1] };
    let mut perms = Vec::new();
    permute(&mut axes.clone(), 0, &mut perms);
    let cells = [
        dims.nx.saturating_sub(1),
        dims.ny.saturating_sub(1),
        if dims.is_3d() { dims.nz - 1 } else { 1 },
    ];
    let mut out = Vec::new();
    for z in 0..cells[2] {
        for y in 0..cells[1] {
            for x in 0..cells[0] {
                for p in &perms {
                    let mut c = [x, y, z];
                    let mut s = vec![dims.index(c[0], c[1], c[2])];
                    for &a in p {
                        c[a] += 1;
                        s.push(dims.index(c[0], c[1], c[2]));
                    }
                    out.push(s);
                }
            }
        }
    }
    out
}

fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

fn edge_sets(dims: Dims) -> Vec<BTreeSet<usize>> {
    let mut nbrs = vec![BTreeSet::new(); dims.len()];
    for s in simplices(dims) {
        for &a in &s {
            for &b in &s {
                if a != b {
                    nbrs[a].insert(b);
                }
            }
        }
    }
    nbrs
}

/// Lower and upper link component counts from the triangles around `v`.
fn oracle_betti(dims: Dims, tris: &[Vec<usize>], rank: &[usize], v: usize) -> (usize, usize) {
    let nbrs = &edge_sets(dims)[v];
    let count = |lower: bool| {
        let side: Vec<usize> = nbrs.iter().copied().filter(|&u| (rank[u] < rank[v]) == lower).collect();
        let mut label: Vec<usize> = (0..side.len()).collect();
        for t in tris.iter().filter(|t| t.contains(&v)) {
            for &a in t {
                for &b in t {
                    let (Some(i), Some(j)) = (side.iter().position(|&x| x == a), side.iter().position(|&x| x == b))
                    else {
                        continue;
                    };
                    let (li, lj) = (label[i], label[j]);
                    if li != lj {
                        for l in label.iter_mut() {
                            if *l == lj {
                                *l = li;
                            }
                        }
                    }
                }
            }
        }
        label.iter().collect::<BTreeSet<_>>().len()
    };
    (count(true), count(false))
}

#[test]
fn neighbors_match_the_explicit_triangulation() {
    let shapes = [(2, 2, 1), (3, 4, 1), (5, 5, 1), (2, 2, 2), (3, 4, 5), (4, 4, 4), (2, 5, 1), (5, 2, 3)];
    for (nx, ny, nz) in shapes {
        let dims = Dims::new(nx, ny, nz).unwrap();
        let tri = Triangulation::new(dims);
        let expected = edge_sets(dims);
        for v in 0..dims.len() {
            let got: BTreeSet<usize> = tri.neighbors(v).into_iter().collect();
            assert_eq!(got, expected[v], "dims {nx}x{ny}x{nz}, vertex {v}");
        }
    }
}

#[test]
fn interior_valence_is_six_and_fourteen() {
    let tri = Triangulation::new(Dims::planar(5, 5).unwrap());
    assert_eq!(tri.neighbors(12).len(), 6);
    let dims = Dims::new(5, 5, 5).unwrap();
    let tri = Triangulation::new(dims);
    assert_eq!(tri.neighbors(dims.index(2, 2, 2)).len(), 14);
    // corners of the main diagonal
    assert_eq!(tri.neighbors(0).len(), 7);
    assert_eq!(tri.neighbors(dims.index(4, 0, 0)).len(), 4);
}

#[test]
fn link_components_match_the_explicit_triangles() {
    let mut rng = common::rng(11);
    for case in 0..60 {
        let dims = if case % 2 == 0 {
            Dims::planar(rng.gen_range(2..7), rng.gen_range(2..7)).unwrap()
        } else {
            Dims::new(rng.gen_range(2..5), rng.gen_range(2..5), rng.gen_range(2..5)).unwrap()
        };
        let tris: Vec<Vec<usize>> = simplices(dims)
            .iter()
            .flat_map(|s| {
                let mut t = Vec::new();
                for i in 0..s.len() {
                    for j in i + 1..s.len() {
                        for k in j + 1..s.len() {
                            t.push(vec![s[i], s[j], s[k]]);
                        }
                    }
                }
                t
            })
            .collect();
        let mut rank: Vec<usize> = (0..dims.len()).collect();
        rank.shuffle(&mut rng);
        let tri = Triangulation::new(dims);
        for v in 0..dims.len() {
            assert_eq!(
                link_betti(&tri, &rank, v),
                oracle_betti(dims, &tris, &rank, v),
                "case {case}, vertex {v}"
            );
        }
    }
}

#[test]
fn extrema_are_local_extrema_of_the_neighborhood() {
    let mut rng = common::rng(12);
    for _ in 0..40 {
        let dims = common::random_dims(&mut rng, 8, 8, 5);
        let f = common::mixed(dims, &mut rng);
        let order = f.order();
        let types = classify_all(&f, &order);
        let tri = f.triangulation();
        for v in 0..f.len() {
            let n = tri.neighbors(v);
            let lower = n.iter().all(|&u| order.rank[u] > order.rank[v]);
            let upper = n.iter().all(|&u| order.rank[u] < order.rank[v]);
            assert_eq!(types[v] == topc::field::CriticalType::Minimum, lower);
            assert_eq!(types[v] == topc::field::CriticalType::Maximum, upper);
        }
    }
}

#[test]
fn classification_ignores_values_beyond_the_order() {
    // same order, different values: same types
    let mut rng = common::rng(13);
    let dims = Dims::new(6, 5, 4).unwrap();
    let f = common::uniform(dims, &mut rng);
    let g = ScalarField::new(dims, f.values().iter().map(|x| x.powi(3) * 7.0 - 2.0).collect()).unwrap();
    assert_eq!(classify_all(&f, &f.order()), classify_all(&g, &g.order()));
}
