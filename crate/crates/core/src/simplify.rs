//! Topological simplification by flooding.
//!
//! A sub-level flood grows from the minima to preserve, visiting vertices in
//! order with a priority queue; every vertex reached below the current water
//! level is raised to it, which fills the basins of all other minima. The
//! sur-level flood does the same from the maxima to preserve, lowering the
//! hills of all other maxima. Offsets are reassigned to the visiting order so
//! flat regions stay monotone. Both floods alternate until the extrema of the
//! field are exactly the constrained ones.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::field::{ScalarField, Triangulation};
use crate::persistence::{PairClass, PersistenceDiagram};

/// Upper bound on flood rounds before giving up.
const MAX_ROUNDS: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimplifyError {
    #[error("constraint set must contain at least one minimum and one maximum")]
    EmptyConstraints,
    #[error("constraint vertex {vertex} out of range (field has {len} vertices)")]
    OutOfRange { vertex: usize, len: usize },
    #[error("vertex {0} is constrained as both minimum and maximum")]
    Conflicting(usize),
    #[error("constrained {kind} at vertex {vertex} cannot be enforced by flooding")]
    Unattainable { vertex: usize, kind: &'static str },
    #[error("flooding did not reach a fixpoint after {0} rounds")]
    NotConverged(usize),
    #[error("offset rebuild would change the value of vertex {vertex} ({before} -> {after})")]
    ValuesChanged { vertex: usize, before: f64, after: f64 },
}

/// Extrema that simplification must preserve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    minima: Vec<usize>,
    maxima: Vec<usize>,
}

impl ConstraintSet {
    pub fn new(mut minima: Vec<usize>, mut maxima: Vec<usize>) -> Result<Self, SimplifyError> {
        minima.sort_unstable();
        minima.dedup();
        maxima.sort_unstable();
        maxima.dedup();
        if minima.is_empty() || maxima.is_empty() {
            return Err(SimplifyError::EmptyConstraints);
        }
        if let Some(&v) = minima.iter().find(|v| maxima.binary_search(v).is_ok()) {
            return Err(SimplifyError::Conflicting(v));
        }
        Ok(Self { minima, maxima })
    }

    /// Extrema of the pairs of `diagram`: births of minimum/saddle pairs,
    /// deaths of saddle/maximum pairs, and both ends of the essential pair.
    pub fn from_diagram(diagram: &PersistenceDiagram) -> Result<Self, SimplifyError> {
        let mut minima = Vec::new();
        let mut maxima = Vec::new();
        for p in &diagram.pairs {
            match p.class {
                PairClass::MinSaddle => minima.push(p.birth_vertex),
                PairClass::SaddleMax => maxima.push(p.death_vertex),
                PairClass::Essential => {
                    minima.push(p.birth_vertex);
                    maxima.push(p.death_vertex);
                }
            }
        }
        Self::new(minima, maxima)
    }

    pub fn minima(&self) -> &[usize] {
        &self.minima
    }

    pub fn maxima(&self) -> &[usize] {
        &self.maxima
    }

    fn check_range(&self, len: usize) -> Result<(), SimplifyError> {
        match self.minima.iter().chain(&self.maxima).find(|&&v| v >= len) {
            Some(&vertex) => Err(SimplifyError::OutOfRange { vertex, len }),
            None => Ok(()),
        }
    }
}

/// Mutable working state: values plus a rank permutation consistent with them.
struct Flood<'a> {
    tri: &'a Triangulation,
    values: Vec<f64>,
    rank: Vec<usize>,
    queued: Vec<bool>,
}

impl Flood<'_> {
    /// Sub-level flood from `seeds`: raises every unseeded basin.
    fn raise(&mut self, seeds: &[usize]) {
        let n = self.values.len();
        self.queued.iter_mut().for_each(|q| *q = false);
        let mut heap = BinaryHeap::with_capacity(n);
        for &s in seeds {
            self.queued[s] = true;
            heap.push(Reverse((self.rank[s], s)));
        }
        let mut next_rank = vec![0; n];
        let mut level = f64::NEG_INFINITY;
        let mut visited = 0;
        while let Some(Reverse((_, v))) = heap.pop() {
            level = level.max(self.values[v]);
            self.values[v] = level;
            next_rank[v] = visited;
            visited += 1;
            let (rank, queued) = (&self.rank, &mut self.queued);
            self.tri.for_each_neighbor(v, |u| {
                if !queued[u] {
                    queued[u] = true;
                    heap.push(Reverse((rank[u], u)));
                }
            });
        }
        self.rank = next_rank;
    }

    /// Sur-level flood from `seeds`: lowers every unseeded hill.
    fn lower(&mut self, seeds: &[usize]) {
        let n = self.values.len();
        self.queued.iter_mut().for_each(|q| *q = false);
        let mut heap = BinaryHeap::with_capacity(n);
        for &s in seeds {
            self.queued[s] = true;
            heap.push((self.rank[s], s));
        }
        let mut next_rank = vec![0; n];
        let mut level = f64::INFINITY;
        let mut visited = 0;
        while let Some((_, v)) = heap.pop() {
            level = level.min(self.values[v]);
            self.values[v] = level;
            next_rank[v] = n - 1 - visited;
            visited += 1;
            let (rank, queued) = (&self.rank, &mut self.queued);
            self.tri.for_each_neighbor(v, |u| {
                if !queued[u] {
                    queued[u] = true;
                    heap.push((rank[u], u));
                }
            });
        }
        self.rank = next_rank;
    }

    fn is_minimum(&self, v: usize) -> bool {
        let r = self.rank[v];
        let mut lowest = true;
        self.tri.for_each_neighbor(v, |u| lowest &= self.rank[u] > r);
        lowest
    }

    fn is_maximum(&self, v: usize) -> bool {
        let r = self.rank[v];
        let mut highest = true;
        self.tri.for_each_neighbor(v, |u| highest &= self.rank[u] < r);
        highest
    }

    fn extrema(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.values.len();
        let minima = (0..n).filter(|&v| self.is_minimum(v)).collect();
        let maxima = (0..n).filter(|&v| self.is_maximum(v)).collect();
        (minima, maxima)
    }
}

/// Simplifies `field` so that its extrema are exactly `constraints`.
///
/// Constrained extrema keep their values; every other basin (hill) is filled
/// (flattened) up (down) to the saddle through which the flood first reached
/// it. The returned field carries rebuilt offsets.
pub fn simplify(field: &ScalarField, constraints: &ConstraintSet) -> Result<ScalarField, SimplifyError> {
    constraints.check_range(field.len())?;
    let tri = field.triangulation();
    let order = field.order();
    let mut flood = Flood {
        tri: &tri,
        values: field.values().to_vec(),
        rank: order.rank,
        queued: vec![false; field.len()],
    };

    for round in 0..MAX_ROUNDS {
        flood.raise(&constraints.minima);
        if round == 0 {
            if let Some(&v) = constraints.minima.iter().find(|&&v| !flood.is_minimum(v)) {
                return Err(SimplifyError::Unattainable {
                    vertex: v,
                    kind: "minimum",
                });
            }
        }
        flood.lower(&constraints.maxima);
        if round == 0 {
            if let Some(&v) = constraints.maxima.iter().find(|&&v| !flood.is_maximum(v)) {
                return Err(SimplifyError::Unattainable {
                    vertex: v,
                    kind: "maximum",
                });
            }
        }
        let (minima, maxima) = flood.extrema();
        if minima == constraints.minima && maxima == constraints.maxima {
            let Flood { values, rank, .. } = flood;
            return Ok(ScalarField::from_parts_unchecked(field.dims(), values, rank));
        }
    }
    Err(SimplifyError::NotConverged(MAX_ROUNDS))
}

/// Resolves flat plateaus: same values, offsets rebuilt so that the only
/// extrema are the constrained ones. Fails if that would require changing a
/// value.
pub fn rebuild_offsets(field: &ScalarField, constraints: &ConstraintSet) -> Result<ScalarField, SimplifyError> {
    let out = simplify(field, constraints)?;
    for (vertex, (&before, &after)) in field.values().iter().zip(out.values()).enumerate() {
        if before != after {
            return Err(SimplifyError::ValuesChanged {
                vertex,
                before,
                after,
            });
        }
    }
    Ok(out)
}
