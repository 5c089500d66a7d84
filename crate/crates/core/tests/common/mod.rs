#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topc::field::{Dims, ScalarField};
use topc::persistence::{PairClass, PersistenceDiagram, PersistencePair};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform noise in [0, 1).
pub fn uniform(dims: Dims, rng: &mut ChaCha8Rng) -> ScalarField {
    let values = (0..dims.len()).map(|_| rng.gen::<f64>()).collect();
    ScalarField::new(dims, values).unwrap()
}

/// Small integer values, lots of exact ties and plateaus.
pub fn integer(dims: Dims, levels: u32, rng: &mut ChaCha8Rng) -> ScalarField {
    let values = (0..dims.len())
        .map(|_| f64::from(rng.gen_range(0..levels)))
        .collect();
    ScalarField::new(dims, values).unwrap()
}

/// Sum of a few random gaussian bumps plus uniform noise of amplitude `noise`.
pub fn bumpy(dims: Dims, bumps: usize, noise: f64, rng: &mut ChaCha8Rng) -> ScalarField {
    let centers: Vec<([f64; 3], f64, f64)> = (0..bumps)
        .map(|_| {
            let c = [
                rng.gen::<f64>() * dims.nx as f64,
                rng.gen::<f64>() * dims.ny as f64,
                rng.gen::<f64>() * dims.nz as f64,
            ];
            let amp = rng.gen_range(-1.0..1.0);
            let width = rng.gen_range(1.5..(dims.nx as f64 / 3.0).max(2.0));
            (c, amp, width)
        })
        .collect();
    let values = (0..dims.len())
        .map(|v| {
            let (x, y, z) = dims.coords(v);
            let p = [x as f64, y as f64, z as f64];
            let mut s = 0.0;
            for (c, amp, w) in &centers {
                let d2: f64 = (0..3).map(|i| (p[i] - c[i]).powi(2)).sum();
                s += amp * (-d2 / (2.0 * w * w)).exp();
            }
            s + noise * rng.gen::<f64>()
        })
        .collect();
    ScalarField::new(dims, values).unwrap()
}

/// Random dims up to the given bounds (2D when `max_z == 1`).
pub fn random_dims(rng: &mut ChaCha8Rng, max_x: usize, max_y: usize, max_z: usize) -> Dims {
    let nx = rng.gen_range(2..=max_x);
    let ny = rng.gen_range(2..=max_y);
    let nz = if max_z <= 1 || rng.gen_bool(0.3) {
        1
    } else {
        rng.gen_range(2..=max_z)
    };
    Dims::new(nx, ny, nz).unwrap()
}

/// Mixed corpus field: uniform, integer-tied or bumpy.
pub fn mixed(dims: Dims, rng: &mut ChaCha8Rng) -> ScalarField {
    match rng.gen_range(0..3) {
        0 => uniform(dims, rng),
        1 => integer(dims, rng.gen_range(2..12), rng),
        _ => {
            let noise = rng.gen_range(0.0..0.3);
            let bumps = rng.gen_range(1..6);
            bumpy(dims, bumps, noise, rng)
        }
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Bits per id for `count` distinct ids, computed by doubling.
pub fn id_bits(count: usize) -> usize {
    let mut bits = 1;
    while (1usize << bits) < count {
        bits += 1;
    }
    bits
}

/// Payload size predicted from the layout: fixed prefix, optional
/// fixed-step fields, index block, slot bitmap, interval ids, optional
/// external stream and the checksum, each bit block padded to a byte.
pub fn predicted_payload_len(
    n_v: usize,
    n_c: usize,
    n_i: usize,
    raw_slots: usize,
    fixed_step: bool,
    external: Option<usize>,
) -> usize {
    let prefix = 3 * 4 + 8 + 4 + 4 + if fixed_step { 8 + 4 } else { 0 };
    let index = (n_c * (id_bits(n_v) + 2 + 64)).div_ceil(8);
    let bitmap = raw_slots.div_ceil(8);
    let ids = (n_v * id_bits(n_i)).div_ceil(8);
    prefix + index + bitmap + ids + external.map_or(0, |n| 8 + n) + 4
}

/// A random but well-formed quantized field with its index and an optional
/// external stream.
pub fn random_quantized(
    rng: &mut ChaCha8Rng,
) -> (
    topc::quantize::QuantizedField,
    topc::codec::TopologicalIndex,
    Option<Vec<u8>>,
) {
    use topc::codec::{IndexEntry, IndexType, TopologicalIndex};
    use topc::quantize::{IntervalPartition, QuantizedField};

    let dims = random_dims(rng, 12, 12, 6);
    let n = dims.len();
    let fixed = rng.gen_bool(0.2);
    let (partition, entries) = if fixed {
        let origin = rng.gen_range(-100.0..100.0);
        let step = rng.gen_range(0.01..10.0);
        let count = rng.gen_range(1..300);
        (IntervalPartition::fixed_step(origin, step, count).unwrap(), Vec::new())
    } else {
        let n_c = rng.gen_range(1..=n.min(40));
        let mut vertices: Vec<usize> = (0..n).collect();
        vertices.shuffle(rng);
        vertices.truncate(n_c);
        let levels = rng.gen_range(1..20);
        let entries: Vec<IndexEntry> = vertices
            .into_iter()
            .map(|v| IndexEntry {
                vertex: v,
                kind: IndexType::from_code(rng.gen_range(0..4)),
                value: f64::from(rng.gen_range(0..levels)) * 0.37 - 1.0 + rng.gen::<f64>() * 1e-3,
            })
            .collect();
        let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
        let pointwise = rng.gen_bool(0.5);
        let width = rng.gen_range(0.05..2.0);
        (IntervalPartition::adaptive(&values, pointwise, width).unwrap(), entries)
    };
    let mut critical = vec![false; n];
    for e in &entries {
        critical[e.vertex] = true;
    }
    let slots = partition.len();
    // a few popular slots so that ids repeat
    let popular: Vec<usize> = (0..rng.gen_range(1..6)).map(|_| rng.gen_range(0..slots)).collect();
    let raw: Vec<usize> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.7) {
                popular[rng.gen_range(0..popular.len())]
            } else {
                rng.gen_range(0..slots)
            }
        })
        .collect();
    let mut nonempty = vec![false; slots];
    for v in (0..n).filter(|&v| !critical[v]) {
        nonempty[raw[v]] = true;
    }
    let mut compact = vec![0u32; slots];
    let mut next = 0;
    for i in 0..slots {
        if nonempty[i] {
            compact[i] = next;
            next += 1;
        }
    }
    let interval_id = (0..n).map(|v| if critical[v] { 0 } else { compact[raw[v]] }).collect();
    let q = QuantizedField {
        dims,
        partition,
        nonempty,
        interval_id,
        critical: entries.iter().map(|e| (e.vertex, e.value)).collect(),
    };
    let external = rng
        .gen_bool(0.3)
        .then(|| (0..rng.gen_range(0..200)).map(|_| rng.gen::<u8>()).collect());
    (q, TopologicalIndex { entries }, external)
}

pub fn pair(class: PairClass, b: f64, d: f64) -> PersistencePair {
    PersistencePair {
        birth_vertex: 0,
        death_vertex: 0,
        birth_value: b,
        death_value: d,
        class,
    }
}

/// A diagram with one essential pair and up to `max` pairs per class; with
/// `dyadic` set, values are multiples of 1/4 so every sum is exact.
pub fn random_diagram(rng: &mut ChaCha8Rng, max: usize, dyadic: bool) -> PersistenceDiagram {
    let value = |rng: &mut ChaCha8Rng| {
        if dyadic {
            f64::from(rng.gen_range(0..40)) / 4.0
        } else {
            rng.gen_range(0.0..10.0)
        }
    };
    let mut pairs = Vec::new();
    let lo = value(rng).min(1.0);
    pairs.push(pair(PairClass::Essential, lo, lo + 9.0));
    for class in [PairClass::MinSaddle, PairClass::SaddleMax] {
        for _ in 0..rng.gen_range(0..=max) {
            let (a, b) = (value(rng), value(rng));
            pairs.push(pair(class, a.min(b), a.max(b)));
        }
    }
    PersistenceDiagram {
        pairs,
        field_range: (0.0, 10.0),
    }
}

pub fn linf(a: &PersistencePair, b: &PersistencePair) -> f64 {
    (a.birth_value - b.birth_value)
        .abs()
        .max((a.death_value - b.death_value).abs())
}

/// Visits every injection of `small` into `large` and calls `f` with the
/// cost of each matched or unmatched pair.
pub fn injections(small: &[PersistencePair], large: &[PersistencePair], f: &mut dyn FnMut(&[f64])) {
    fn go(
        i: usize,
        small: &[PersistencePair],
        large: &[PersistencePair],
        used: &mut Vec<bool>,
        costs: &mut Vec<f64>,
        f: &mut dyn FnMut(&[f64]),
    ) {
        if i == small.len() {
            let mut all = costs.clone();
            all.extend((0..large.len()).filter(|&j| !used[j]).map(|j| large[j].persistence()));
            f(&all);
            return;
        }
        for j in 0..large.len() {
            if !used[j] {
                used[j] = true;
                costs.push(linf(&small[i], &large[j]));
                go(i + 1, small, large, used, costs, f);
                costs.pop();
                used[j] = false;
            }
        }
    }
    go(0, small, large, &mut vec![false; large.len()], &mut Vec::new(), f);
}

/// Exhaustive (bottleneck, wasserstein).
pub fn diagram_oracle(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> (f64, f64) {
    let mut bn: f64 = 0.0;
    let mut ws = 0.0;
    for class in [PairClass::Essential, PairClass::MinSaddle, PairClass::SaddleMax] {
        let a: Vec<_> = d1.of_class(class).copied().collect();
        let b: Vec<_> = d2.of_class(class).copied().collect();
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        let mut best_max = f64::INFINITY;
        let mut best_sum = f64::INFINITY;
        injections(&small, &large, &mut |costs| {
            best_max = best_max.min(costs.iter().copied().fold(0.0, f64::max));
            // exact sum for dyadic inputs; compensated otherwise
            let mut sorted = costs.to_vec();
            sorted.sort_by(f64::total_cmp);
            best_sum = best_sum.min(sorted.iter().sum());
        });
        bn = bn.max(best_max);
        ws += best_sum;
    }
    (bn, ws)
}

