//! Distortion metrics between fields and distances between diagrams.
//!
//! Diagram distances match pairs of the same class only. Within a class the
//! smaller diagram is injected into the larger one; a pair of the larger
//! diagram left unmatched costs its full persistence (it collapses onto its
//! own birth). Costs between matched pairs are the L∞ distance between their
//! `(birth, death)` points.

use std::collections::{BinaryHeap, VecDeque};

use thiserror::Error;

use crate::field::ScalarField;
use crate::persistence::{PairClass, PersistenceDiagram, PersistencePair};

/// Largest assignment problem (rows × columns) accepted by [`wasserstein`].
pub const MAX_ASSIGNMENT: usize = 2000 * 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("fields have different dimensions")]
    DimsMismatch,
    #[error("p-norm needs p >= 1, got {0}")]
    InvalidP(f64),
    #[error("assignment of {rows}x{cols} pairs exceeds the {MAX_ASSIGNMENT} entry limit")]
    TooLarge { rows: usize, cols: usize },
}

fn check_dims(f: &ScalarField, g: &ScalarField) -> Result<(), MetricsError> {
    if f.dims() == g.dims() {
        Ok(())
    } else {
        Err(MetricsError::DimsMismatch)
    }
}

/// Compensated (Neumaier) sum.
pub fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if f64::abs(sum) >= f64::abs(x) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `(Σ |f - g|^p)^(1/p)`.
pub fn p_norm(f: &ScalarField, g: &ScalarField, p: f64) -> Result<f64, MetricsError> {
    check_dims(f, g)?;
    if !(p >= 1.0) {
        return Err(MetricsError::InvalidP(p));
    }
    let diffs: Vec<f64> = f.values().iter().zip(g.values()).map(|(a, b)| (a - b).abs()).collect();
    let peak = diffs.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    // scaled by the peak so large p neither overflows nor underflows
    let s = neumaier_sum(diffs.iter().map(|d| (d / peak).powf(p)));
    Ok(peak * s.powf(1.0 / p))
}

pub fn max_norm(f: &ScalarField, g: &ScalarField) -> Result<f64, MetricsError> {
    check_dims(f, g)?;
    Ok(f.values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// `20 log10((sqrt(n_v) / 2) · range(f) / ||f - g||_2)`; infinite when the
/// fields are equal.
pub fn psnr(f: &ScalarField, g: &ScalarField) -> Result<f64, MetricsError> {
    let l2 = p_norm(f, g, 2.0)?;
    if l2 == 0.0 {
        return Ok(f64::INFINITY);
    }
    let n = f.len() as f64;
    Ok(20.0 * ((n.sqrt() / 2.0) * f.span() / l2).log10())
}

/// L∞ distance between two diagram points.
pub fn point_distance(a: &PersistencePair, b: &PersistencePair) -> f64 {
    (a.birth_value - b.birth_value)
        .abs()
        .max((a.death_value - b.death_value).abs())
}

const CLASSES: [PairClass; 3] = [PairClass::MinSaddle, PairClass::SaddleMax, PairClass::Essential];

/// The two sides of one class: `small` is injected into `large`.
fn sides(d1: &PersistenceDiagram, d2: &PersistenceDiagram, class: PairClass) -> (Vec<PersistencePair>, Vec<PersistencePair>) {
    let a: Vec<_> = d1.of_class(class).copied().collect();
    let b: Vec<_> = d2.of_class(class).copied().collect();
    if a.len() <= b.len() {
        (a, b)
    } else {
        (b, a)
    }
}

/// Bottleneck distance.
pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> f64 {
    CLASSES
        .iter()
        .map(|&c| {
            let (small, large) = sides(d1, d2, c);
            bottleneck_class(&small, &large)
        })
        .fold(0.0, f64::max)
}

fn bottleneck_class(small: &[PersistencePair], large: &[PersistencePair]) -> f64 {
    let mut candidates: Vec<f64> = large.iter().map(PersistencePair::persistence).collect();
    for a in small {
        candidates.extend(large.iter().map(|b| point_distance(a, b)));
    }
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    // the largest candidate is always feasible: every edge is allowed and
    // no large pair is heavier than it
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if bottleneck_feasible(small, large, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Whether some injection keeps every matched cost and every unmatched
/// persistence within `t`. A matching covering `small` and a matching
/// covering the large pairs heavier than `t` can be merged into one that
/// covers both (Mendelsohn–Dulmage), so two separate checks suffice.
fn bottleneck_feasible(small: &[PersistencePair], large: &[PersistencePair], t: f64) -> bool {
    let adj: Vec<Vec<usize>> = small
        .iter()
        .map(|a| (0..large.len()).filter(|&j| point_distance(a, &large[j]) <= t).collect())
        .collect();
    if hopcroft_karp(&adj, large.len()) < small.len() {
        return false;
    }
    let heavy: Vec<usize> = (0..large.len()).filter(|&j| large[j].persistence() > t).collect();
    if heavy.len() > small.len() {
        return false;
    }
    let adj_heavy: Vec<Vec<usize>> = heavy
        .iter()
        .map(|&j| (0..small.len()).filter(|&i| point_distance(&small[i], &large[j]) <= t).collect())
        .collect();
    hopcroft_karp(&adj_heavy, small.len()) == heavy.len()
}

/// Maximum bipartite matching size; `adj[u]` lists right vertices of left
/// vertex `u`.
pub fn hopcroft_karp(adj: &[Vec<usize>], right: usize) -> usize {
    const NONE: usize = usize::MAX;
    let left = adj.len();
    let mut match_l = vec![NONE; left];
    let mut match_r = vec![NONE; right];
    let mut dist = vec![0usize; left];
    let mut matched = 0;
    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for u in 0..left {
            if match_l[u] == NONE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = NONE;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == NONE {
                    found = true;
                } else if dist[w] == NONE {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            return matched;
        }
        // DFS along the layers, iteratively
        let mut next = vec![0usize; left];
        for root in 0..left {
            if match_l[root] != NONE {
                continue;
            }
            let mut stack = vec![root];
            while let Some(&u) = stack.last() {
                if next[u] == adj[u].len() {
                    dist[u] = NONE;
                    stack.pop();
                    continue;
                }
                let v = adj[u][next[u]];
                next[u] += 1;
                let w = match_r[v];
                if w == NONE {
                    // augment along the stack
                    let mut v = v;
                    while let Some(u) = stack.pop() {
                        let prev = match_l[u];
                        match_l[u] = v;
                        match_r[v] = u;
                        v = prev;
                    }
                    matched += 1;
                    break;
                } else if dist[w] == dist[u] + 1 {
                    stack.push(w);
                }
            }
        }
    }
}

/// Wasserstein distance (sum of matched L∞ costs plus unmatched
/// persistences).
pub fn wasserstein(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<f64, MetricsError> {
    let mut terms = Vec::new();
    for c in CLASSES {
        let (small, large) = sides(d1, d2, c);
        if small.len() * large.len() > MAX_ASSIGNMENT {
            return Err(MetricsError::TooLarge {
                rows: small.len(),
                cols: large.len(),
            });
        }
        // rank candidates by distance alone: the persistence offset would
        // make every row prefer the same few prominent columns
        let assignment = assignment_ranked(
            small.len(),
            large.len(),
            |i, j| point_distance(&small[i], &large[j]) - large[j].persistence(),
            |i, j| point_distance(&small[i], &large[j]),
        );
        let mut used = vec![false; large.len()];
        for (i, &j) in assignment.iter().enumerate() {
            used[j] = true;
            terms.push(point_distance(&small[i], &large[j]));
        }
        terms.extend((0..large.len()).filter(|&j| !used[j]).map(|j| large[j].persistence()));
    }
    Ok(neumaier_sum(terms))
}

/// Problems up to this many entries are solved densely.
const DENSE_LIMIT: usize = 200_000;
/// Candidate columns kept per row by the sparse solver.
const CANDIDATES: usize = 24;

/// Minimum-cost assignment of every row to a distinct column
/// (`rows ≤ cols`), for costs given as a function. Large problems are
/// solved on each row's cheapest columns first; the dual potentials of that
/// solution are then checked against every entry and violated entries join
/// the candidates until none is left, which certifies optimality on the
/// full matrix.
pub fn assignment(rows: usize, cols: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    assignment_ranked(rows, cols, &cost, &cost)
}

/// [`assignment`] where the first candidates of each row are its smallest
/// columns under `rank` rather than under `cost`. The result is the same;
/// only the number of repair rounds changes.
pub fn assignment_ranked(
    rows: usize,
    cols: usize,
    cost: impl Fn(usize, usize) -> f64,
    rank: impl Fn(usize, usize) -> f64,
) -> Vec<usize> {
    assert!(rows <= cols, "more rows than columns");
    if rows == 0 {
        return Vec::new();
    }
    if rows * cols <= DENSE_LIMIT {
        let dense: Vec<Vec<f64>> = (0..rows).map(|i| (0..cols).map(|j| cost(i, j)).collect()).collect();
        return hungarian(&dense, cols);
    }
    let k = CANDIDATES.min(cols);
    let mut scale: f64 = 1.0;
    let mut adj: Vec<Vec<usize>> = (0..rows)
        .map(|i| {
            scale = (0..cols).fold(scale, |m, j| m.max(cost(i, j).abs()));
            let mut row: Vec<(f64, usize)> = (0..cols).map(|j| (rank(i, j), j)).collect();
            if k < cols {
                row.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
                row.truncate(k);
            }
            row.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    let tol = 1e-13 * scale;
    loop {
        let (assign, u, v) = match sparse_assignment(&adj, cols, &cost) {
            Ok(solution) => solution,
            Err(stuck) => {
                adj[stuck] = (0..cols).collect();
                continue;
            }
        };
        let mut added = false;
        for (i, row) in adj.iter_mut().enumerate() {
            let mut extra: Vec<usize> = (0..cols)
                .filter(|&j| cost(i, j) - u[i] - v[j] < -tol)
                .filter(|j| !row.contains(j))
                .collect();
            added |= !extra.is_empty();
            row.append(&mut extra);
        }
        if !added {
            return assign;
        }
    }
}

#[derive(PartialEq)]
struct Dist(f64, usize);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    // reversed: BinaryHeap pops the smallest distance
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

type Potentials = (Vec<usize>, Vec<f64>, Vec<f64>);

const NONE: usize = usize::MAX;

/// Dijkstra state over the columns, reset lazily between searches.
struct Search {
    dist: Vec<f64>,
    pred: Vec<usize>,
    done: Vec<bool>,
    touched: Vec<usize>,
    heap: BinaryHeap<Dist>,
}

impl Search {
    fn new(cols: usize) -> Self {
        Self {
            dist: vec![f64::INFINITY; cols],
            pred: vec![NONE; cols],
            done: vec![false; cols],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    fn reset(&mut self) {
        for &j in &self.touched {
            self.dist[j] = f64::INFINITY;
            self.pred[j] = NONE;
            self.done[j] = false;
        }
        self.touched.clear();
        self.heap.clear();
    }

    /// Relaxes the candidate edges of row `i`, reached at distance `di`.
    fn relax(&mut self, i: usize, di: f64, row: &[usize], reduced: impl Fn(usize) -> f64) {
        for &j in row {
            if self.done[j] {
                continue;
            }
            let nd = di + reduced(j).max(0.0);
            if nd < self.dist[j] {
                if self.dist[j] == f64::INFINITY {
                    self.touched.push(j);
                }
                self.dist[j] = nd;
                self.pred[j] = i;
                self.heap.push(Dist(nd, j));
            }
        }
    }
}

/// Successive shortest augmenting paths (Dijkstra on reduced costs) over the
/// candidate edges `adj`. Returns the assignment and the row and column
/// potentials, or the row that cannot reach a free column.
fn sparse_assignment(
    adj: &[Vec<usize>],
    cols: usize,
    cost: &impl Fn(usize, usize) -> f64,
) -> Result<Potentials, usize> {
    let rows = adj.len();
    let mut u: Vec<f64> = adj
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().map(|&j| cost(i, j)).fold(f64::INFINITY, f64::min))
        .collect();
    let mut v = vec![0.0; cols];
    let mut row_of = vec![NONE; cols];
    let mut col_of = vec![NONE; rows];
    let mut search = Search::new(cols);
    let mut tree: Vec<(usize, f64)> = Vec::new();
    for root in 0..rows {
        search.reset();
        tree.clear();
        tree.push((root, 0.0));
        search.relax(root, 0.0, &adj[root], |j| cost(root, j) - u[root] - v[j]);
        let mut end = NONE;
        while let Some(Dist(d, j)) = search.heap.pop() {
            if search.done[j] || d > search.dist[j] {
                continue;
            }
            search.done[j] = true;
            let i = row_of[j];
            if i == NONE {
                end = j;
                break;
            }
            tree.push((i, d));
            search.relax(i, d, &adj[i], |j| cost(i, j) - u[i] - v[j]);
        }
        if end == NONE {
            return Err(root);
        }
        let total = search.dist[end];
        for &(i, d) in &tree {
            u[i] += total - d;
        }
        for &j in &search.touched {
            if search.done[j] {
                v[j] -= total - search.dist[j];
            }
        }
        // flip the alternating path
        let mut j = end;
        loop {
            let i = search.pred[j];
            let prev = col_of[i];
            col_of[i] = j;
            row_of[j] = i;
            if i == root {
                break;
            }
            j = prev;
        }
    }
    Ok((col_of, u, v))
}

/// Minimum-cost assignment of every row to a distinct column
/// (`rows ≤ cols`); returns the column of each row.
pub fn hungarian(cost: &[Vec<f64>], cols: usize) -> Vec<usize> {
    let n = cost.len();
    let m = cols;
    assert!(n <= m, "more rows than columns");
    if n == 0 {
        return Vec::new();
    }
    // 1-based potentials formulation; column 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}
