//! Persistence diagrams of `(0, 1)` and `(d-1, d)` critical point pairs.
//!
//! Pairs come from two union-find sweeps over the vertex order: an ascending
//! sweep tracking sub-level set components (minimum/saddle pairs) and a
//! descending sweep tracking sur-level set components (saddle/maximum pairs).
//! Merges follow the Elder rule: the component born last dies.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::field::{compare_keys, ScalarField, Triangulation};

/// Largest field accepted by [`brute_force_diagram`].
pub const ORACLE_MAX_VERTICES: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PersistenceError {
    #[error("negative persistence threshold {0}")]
    NegativeThreshold(f64),
    #[error("field has {0} vertices, the brute-force oracle accepts at most {ORACLE_MAX_VERTICES}")]
    OracleTooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairClass {
    MinSaddle,
    SaddleMax,
    Essential,
}

impl PairClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PairClass::MinSaddle => "min-saddle",
            PairClass::SaddleMax => "saddle-max",
            PairClass::Essential => "essential",
        }
    }
}

impl fmt::Display for PairClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub birth_vertex: usize,
    pub death_vertex: usize,
    pub birth_value: f64,
    pub death_value: f64,
    pub class: PairClass,
}

impl PersistencePair {
    pub fn persistence(&self) -> f64 {
        self.death_value - self.birth_value
    }

    /// Point of the diagram plane, `(birth, death)`.
    pub fn point(&self) -> (f64, f64) {
        (self.birth_value, self.death_value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
    pub field_range: (f64, f64),
}

impl PersistenceDiagram {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn essential(&self) -> Option<&PersistencePair> {
        self.pairs.iter().find(|p| p.class == PairClass::Essential)
    }

    pub fn of_class(&self, class: PairClass) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(move |p| p.class == class)
    }

    /// `(class, birth, death)` triples sorted, for multiset comparison.
    pub fn signature(&self) -> Vec<(PairClass, f64, f64)> {
        let mut sig: Vec<_> = self
            .pairs
            .iter()
            .map(|p| (p.class, p.birth_value, p.death_value))
            .collect();
        sig.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.total_cmp(&b.2))
        });
        sig
    }

    /// Exact multiset equality on `(class, birth, death)`.
    pub fn same_points(&self, other: &PersistenceDiagram) -> bool {
        self.signature() == other.signature()
    }

    /// Distinct critical values carried by the pairs, ascending.
    pub fn critical_values(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self
            .pairs
            .iter()
            .flat_map(|p| [p.birth_value, p.death_value])
            .collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        values
    }

    /// Vertices appearing in at least one pair, ascending by id.
    pub fn vertices(&self) -> Vec<usize> {
        let mut vs: Vec<usize> = self
            .pairs
            .iter()
            .flat_map(|p| [p.birth_vertex, p.death_vertex])
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn max_persistence(&self) -> f64 {
        self.pairs
            .iter()
            .filter(|p| p.class != PairClass::Essential)
            .map(PersistencePair::persistence)
            .fold(0.0, f64::max)
    }

    /// Writes one CSV row per pair, with a header line.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "birth_vertex,death_vertex,birth_value,death_value,persistence,class"
        )?;
        for p in &self.pairs {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                p.birth_vertex,
                p.death_vertex,
                p.birth_value,
                p.death_value,
                p.persistence(),
                p.class
            )?;
        }
        Ok(())
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// One directional sweep. `sequence` lists vertices from oldest to youngest
/// birth order; returns `(extremum, saddle)` pairs in emission order.
fn sweep(tri: &Triangulation, rank: &[usize], sequence: &[usize], ascending: bool) -> Vec<(usize, usize)> {
    let n = rank.len();
    let mut uf = UnionFind::new(n);
    let mut processed = vec![false; n];
    // extremum that created the component rooted at each root
    let mut extremum = vec![usize::MAX; n];
    let mut pairs = Vec::new();
    let mut roots: Vec<usize> = Vec::with_capacity(14);
    // age of an extremum: smaller is older
    let age = |v: usize| if ascending { rank[v] } else { n - 1 - rank[v] };

    for &v in sequence {
        roots.clear();
        tri.for_each_neighbor(v, |u| {
            if processed[u] {
                roots.push(u);
            }
        });
        for r in roots.iter_mut() {
            *r = uf.find(*r);
        }
        roots.sort_unstable();
        roots.dedup();
        processed[v] = true;
        match roots.len() {
            0 => extremum[v] = v,
            _ => {
                roots.sort_by_key(|&r| age(extremum[r]));
                let survivor = roots[0];
                for &dying in &roots[1..] {
                    pairs.push((extremum[dying], v));
                    uf.parent[dying] = survivor;
                }
                uf.parent[v] = survivor;
            }
        }
    }
    pairs
}

fn assemble(
    field: &ScalarField,
    lowest: usize,
    highest: usize,
    min_saddle: Vec<(usize, usize)>,
    saddle_max: Vec<(usize, usize)>,
) -> PersistenceDiagram {
    let values = field.values();
    let mut pairs = Vec::with_capacity(1 + min_saddle.len() + saddle_max.len());
    pairs.push(PersistencePair {
        birth_vertex: lowest,
        death_vertex: highest,
        birth_value: values[lowest],
        death_value: values[highest],
        class: PairClass::Essential,
    });
    pairs.extend(min_saddle.into_iter().map(|(m, s)| PersistencePair {
        birth_vertex: m,
        death_vertex: s,
        birth_value: values[m],
        death_value: values[s],
        class: PairClass::MinSaddle,
    }));
    pairs.extend(saddle_max.into_iter().map(|(m, s)| PersistencePair {
        birth_vertex: s,
        death_vertex: m,
        birth_value: values[s],
        death_value: values[m],
        class: PairClass::SaddleMax,
    }));
    PersistenceDiagram {
        pairs,
        field_range: (values[lowest], values[highest]),
    }
}

/// Persistence diagram of the `(0,1)` and `(d-1,d)` pairs plus the essential
/// (global minimum, global maximum) pair.
pub fn compute_diagram(field: &ScalarField) -> PersistenceDiagram {
    let order = field.order();
    let tri = field.triangulation();
    let min_saddle = sweep(&tri, &order.rank, &order.sorted, true);
    let descending: Vec<usize> = order.sorted.iter().rev().copied().collect();
    let saddle_max = sweep(&tri, &order.rank, &descending, false);
    assemble(
        field,
        order.min_vertex(),
        order.max_vertex(),
        min_saddle,
        saddle_max,
    )
}

/// Reference diagram computed with explicit component labels, relabelled by
/// flood fill at every merge. Slow; meant for cross-checking.
pub fn brute_force_diagram(field: &ScalarField) -> Result<PersistenceDiagram, PersistenceError> {
    let n = field.len();
    if n > ORACLE_MAX_VERTICES {
        return Err(PersistenceError::OracleTooLarge(n));
    }
    let values = field.values();
    let offsets = field.offsets();
    let mut ascending: Vec<usize> = (0..n).collect();
    ascending.sort_by(|&a, &b| compare_keys(values[a], offsets[a], values[b], offsets[b]));
    let mut position = vec![0; n];
    for (i, &v) in ascending.iter().enumerate() {
        position[v] = i;
    }
    let descending: Vec<usize> = ascending.iter().rev().copied().collect();
    let neighbors: Vec<Vec<usize>> = {
        let tri = field.triangulation();
        (0..n).map(|v| tri.neighbors(v)).collect()
    };

    let labelled_sweep = |sequence: &[usize], older: &dyn Fn(usize, usize) -> Ordering| {
        // label[v] = extremum that created v's component, usize::MAX if unseen
        let mut label = vec![usize::MAX; n];
        let mut pairs = Vec::new();
        let mut stack = Vec::new();
        for &v in sequence {
            let mut labels: Vec<usize> = neighbors[v]
                .iter()
                .map(|&u| label[u])
                .filter(|&l| l != usize::MAX)
                .collect();
            labels.sort_by(|&a, &b| older(a, b));
            labels.dedup();
            if labels.is_empty() {
                label[v] = v;
                continue;
            }
            let keep = labels[0];
            label[v] = keep;
            for &dead in &labels[1..] {
                pairs.push((dead, v));
                // flood the dying component and give it the surviving label
                stack.clear();
                for &u in &neighbors[v] {
                    if label[u] == dead {
                        label[u] = keep;
                        stack.push(u);
                    }
                }
                while let Some(w) = stack.pop() {
                    for &u in &neighbors[w] {
                        if label[u] == dead {
                            label[u] = keep;
                            stack.push(u);
                        }
                    }
                }
            }
        }
        pairs
    };

    let min_saddle = labelled_sweep(&ascending, &|a, b| position[a].cmp(&position[b]));
    let saddle_max = labelled_sweep(&descending, &|a, b| position[b].cmp(&position[a]));
    Ok(assemble(
        field,
        ascending[0],
        ascending[n - 1],
        min_saddle,
        saddle_max,
    ))
}

/// Splits a diagram at threshold `epsilon`: pairs with persistence at least
/// `epsilon` are kept, together with the essential pair; the rest are removed.
pub fn filter_diagram(
    diagram: &PersistenceDiagram,
    epsilon: f64,
) -> Result<(PersistenceDiagram, Vec<PersistencePair>), PersistenceError> {
    if epsilon < 0.0 || epsilon.is_nan() {
        return Err(PersistenceError::NegativeThreshold(epsilon));
    }
    let (kept, removed): (Vec<_>, Vec<_>) = diagram
        .pairs
        .iter()
        .partition(|p| p.class == PairClass::Essential || p.persistence() >= epsilon);
    Ok((
        PersistenceDiagram {
            pairs: kept,
            field_range: diagram.field_range,
        },
        removed,
    ))
}
