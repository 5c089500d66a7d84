mod common;

use rand::Rng;
use topc::field::{Dims, ScalarField};
use topc::metrics::{bottleneck, max_norm, p_norm, psnr, wasserstein};
use topc::persistence::compute_diagram;

#[test]
fn distances_equal_exhaustive_enumeration_on_dyadic_diagrams() {
    let mut rng = common::rng(41);
    for case in 0..400 {
        let d1 = common::random_diagram(&mut rng, 6, true);
        let d2 = common::random_diagram(&mut rng, 6, true);
        let (bn, ws) = common::diagram_oracle(&d1, &d2);
        assert_eq!(bottleneck(&d1, &d2), bn, "case {case}");
        assert_eq!(wasserstein(&d1, &d2).unwrap(), ws, "case {case}");
    }
}

#[test]
fn distances_match_enumeration_on_real_valued_diagrams() {
    let mut rng = common::rng(42);
    for case in 0..300 {
        let d1 = common::random_diagram(&mut rng, 6, false);
        let d2 = common::random_diagram(&mut rng, 6, false);
        let (bn, ws) = common::diagram_oracle(&d1, &d2);
        assert_eq!(bottleneck(&d1, &d2), bn, "case {case}");
        assert!((wasserstein(&d1, &d2).unwrap() - ws).abs() <= 1e-12, "case {case}");
    }
}

#[test]
fn symmetry_and_ordering() {
    let mut rng = common::rng(43);
    for _ in 0..200 {
        let d1 = common::random_diagram(&mut rng, 8, false);
        let d2 = common::random_diagram(&mut rng, 8, false);
        let (b12, b21) = (bottleneck(&d1, &d2), bottleneck(&d2, &d1));
        let (w12, w21) = (wasserstein(&d1, &d2).unwrap(), wasserstein(&d2, &d1).unwrap());
        assert_eq!(b12, b21);
        assert!((w12 - w21).abs() <= 1e-12);
        assert!(b12 <= w12 + 1e-12);
        assert_eq!(bottleneck(&d1, &d1), 0.0);
        assert_eq!(wasserstein(&d1, &d1).unwrap(), 0.0);
    }
}

#[test]
fn larger_diagrams_agree_between_the_two_solvers() {
    // with a single class pair count, the bottleneck equals the optimum of
    // the max cost and never exceeds the Wasserstein sum
    let mut rng = common::rng(44);
    for _ in 0..20 {
        let d1 = common::random_diagram(&mut rng, 60, false);
        let d2 = common::random_diagram(&mut rng, 60, false);
        let b = bottleneck(&d1, &d2);
        let w = wasserstein(&d1, &d2).unwrap();
        assert!(b <= w + 1e-9);
    }
}

#[test]
fn psnr_of_a_four_vertex_field() {
    let dims = Dims::planar(2, 2).unwrap();
    let f = ScalarField::new(dims, vec![0.0, 1.0, 2.0, 4.0]).unwrap();
    let g = ScalarField::new(dims, vec![0.5, 1.0, 2.0, 3.0]).unwrap();
    // ||f - g||_2 = sqrt(0.25 + 1) ; sqrt(n)/2 * range = 1 * 4
    let expected = 20.0 * (4.0 / 1.25f64.sqrt()).log10();
    assert!((psnr(&f, &g).unwrap() - expected).abs() <= 1e-9);
    assert_eq!(psnr(&f, &f).unwrap(), f64::INFINITY);
    assert_eq!(max_norm(&f, &g).unwrap(), 1.0);
    assert!((p_norm(&f, &g, 2.0).unwrap() - 1.25f64.sqrt()).abs() <= 1e-15);
    assert!((p_norm(&f, &g, 1.0).unwrap() - 1.5).abs() <= 1e-15);
}

#[test]
fn order_preserving_perturbations_move_the_diagram_by_at_most_their_size() {
    let mut rng = common::rng(45);
    for _ in 0..200 {
        let dims = common::random_dims(&mut rng, 10, 10, 4);
        let f = common::bumpy(dims, 4, 0.2, &mut rng);
        let delta = rng.gen_range(0.001..0.1);
        // x + δ/2 sin(x/δ) is increasing and within δ/2 of x
        let values: Vec<f64> = f.values().iter().map(|x| x + 0.5 * delta * (x / delta).sin()).collect();
        let real = common::max_abs_diff(f.values(), &values);
        let g = ScalarField::with_offsets(dims, values, f.offsets().to_vec()).unwrap();
        let b = bottleneck(&compute_diagram(&f), &compute_diagram(&g));
        assert!(b <= real + 1e-12, "bottleneck {b} above perturbation {real}");
    }
}

#[test]
fn arbitrary_perturbations_are_measured() {
    // Unmatched pairs cost their full persistence and equal-size classes
    // must be matched completely, so a perturbation that trades one small
    // pair for another elsewhere can cost more than its own size. Report
    // how often that happens.
    let mut rng = common::rng(46);
    let cases = 200;
    let mut above = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let dims = common::random_dims(&mut rng, 10, 10, 4);
        let f = common::bumpy(dims, 4, 0.2, &mut rng);
        let delta = rng.gen_range(0.001..0.1);
        let values: Vec<f64> = f.values().iter().map(|x| x + rng.gen_range(-delta..=delta)).collect();
        let real = common::max_abs_diff(f.values(), &values);
        let g = ScalarField::with_offsets(dims, values, f.offsets().to_vec()).unwrap();
        let b = bottleneck(&compute_diagram(&f), &compute_diagram(&g));
        worst = worst.max(b / real);
        if b > real + 1e-12 {
            above += 1;
        }
    }
    println!("bottleneck above the perturbation size in {above}/{cases} cases, worst ratio {worst:.3}");
}

#[test]
fn sparse_assignment_matches_the_dense_solver() {
    use topc::metrics::{assignment, assignment_ranked, hungarian};
    let mut rng = common::rng(47);
    for case in 0..6 {
        let rows = rng.gen_range(250..400);
        let cols = rng.gen_range(rows..1200);
        let pts: Vec<(f64, f64)> = (0..rows + cols)
            .map(|_| {
                let b: f64 = rng.gen_range(0.0..1.0);
                (b, b + rng.gen_range(0.0..0.3))
            })
            .collect();
        // diagram-shaped costs for half the cases, plain noise otherwise
        let cost = |i: usize, j: usize| {
            if case % 2 == 0 {
                let (a, b) = (pts[i], pts[rows + j]);
                (a.0 - b.0).abs().max((a.1 - b.1).abs()) - (b.1 - b.0)
            } else {
                (((i * 7919 + j * 104_729) % 1000) as f64) / 997.0
            }
        };
        let dense: Vec<Vec<f64>> = (0..rows).map(|i| (0..cols).map(|j| cost(i, j)).collect()).collect();
        let a = hungarian(&dense, cols);
        // a ranking unrelated to the costs forces many repair rounds
        let rank = |i: usize, j: usize| {
            if case % 2 == 0 {
                let (a, b) = (pts[i], pts[rows + j]);
                (a.0 - b.0).abs().max((a.1 - b.1).abs())
            } else {
                ((i + 3 * j) % 11) as f64
            }
        };
        let total = |sol: &[usize]| topc::metrics::neumaier_sum(sol.iter().enumerate().map(|(i, &j)| cost(i, j)));
        for b in [assignment(rows, cols, cost), assignment_ranked(rows, cols, cost, rank)] {
            let mut seen = vec![false; cols];
            assert!(b.iter().all(|&j| !std::mem::replace(&mut seen[j], true)));
            assert!((total(&a) - total(&b)).abs() <= 1e-9, "case {case}: {} vs {}", total(&a), total(&b));
        }
    }
}
