//! Scalar fields on implicitly triangulated regular grids.
//!
//! Every grid cell is split with the Freudenthal (Kuhn) subdivision whose main
//! diagonal runs from `(i, j, k)` to `(i + 1, j + 1, k + 1)`; in 2D each quad is
//! cut along its `(+1, +1)` diagonal. Edges are never stored, they are derived
//! from a fixed stencil of grid displacements.

use std::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("invalid dimensions {0}x{1}x{2}: active axes need at least 2 samples")]
    InvalidDims(usize, usize, usize),
    #[error("length mismatch: dims require {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("non-finite value {value} at vertex {vertex}")]
    NonFinite { vertex: usize, value: f64 },
    #[error("offsets are not a permutation of 0..{0}")]
    InvalidOffsets(usize),
    #[error("vertex {vertex} out of range (field has {len} vertices)")]
    VertexOutOfRange { vertex: usize, len: usize },
}

/// Grid dimensions. `nz == 1` denotes a 2D grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Dims {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self, FieldError> {
        if nx < 2 || ny < 2 || nz == 0 {
            return Err(FieldError::InvalidDims(nx, ny, nz));
        }
        Ok(Self { nx, ny, nz })
    }

    pub fn planar(nx: usize, ny: usize) -> Result<Self, FieldError> {
        Self::new(nx, ny, 1)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_3d(&self) -> bool {
        self.nz > 1
    }

    /// Dimension of the triangulated domain (2 or 3).
    pub fn dimension(&self) -> usize {
        if self.is_3d() {
            3
        } else {
            2
        }
    }

    pub fn coords(&self, v: usize) -> (usize, usize, usize) {
        let x = v % self.nx;
        let y = (v / self.nx) % self.ny;
        let z = v / (self.nx * self.ny);
        (x, y, z)
    }

    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.nx * (y + self.ny * z)
    }
}

const STENCIL_2D: [[i64; 3]; 6] = [
    [1, 0, 0],
    [0, 1, 0],
    [1, 1, 0],
    [-1, 0, 0],
    [0, -1, 0],
    [-1, -1, 0],
];

const STENCIL_3D: [[i64; 3]; 14] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 1, 0],
    [1, 0, 1],
    [0, 1, 1],
    [1, 1, 1],
    [-1, 0, 0],
    [0, -1, 0],
    [0, 0, -1],
    [-1, -1, 0],
    [-1, 0, -1],
    [0, -1, -1],
    [-1, -1, -1],
];

/// Neighbor stencil of the Freudenthal triangulation, with the link edges
/// between stencil entries precomputed as bitmasks.
#[derive(Debug, Clone)]
pub struct Triangulation {
    dims: Dims,
    stencil: &'static [[i64; 3]],
    /// `link_adj[i]` has bit `j` set when stencil entries `i` and `j` span an
    /// edge of the triangulation (hence a triangle with the center vertex).
    link_adj: Vec<u16>,
}

impl Triangulation {
    pub fn new(dims: Dims) -> Self {
        let stencil: &'static [[i64; 3]] = if dims.is_3d() {
            &STENCIL_3D
        } else {
            &STENCIL_2D
        };
        let link_adj = stencil
            .iter()
            .map(|a| {
                let mut mask = 0u16;
                for (j, b) in stencil.iter().enumerate() {
                    let diff = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                    if stencil.contains(&diff) {
                        mask |= 1 << j;
                    }
                }
                mask
            })
            .collect();
        Self {
            dims,
            stencil,
            link_adj,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn stencil_len(&self) -> usize {
        self.stencil.len()
    }

    /// Vertex reached from `v` by stencil entry `slot`, if inside the grid.
    #[inline]
    pub fn neighbor(&self, v: usize, slot: usize) -> Option<usize> {
        let (x, y, z) = self.dims.coords(v);
        let d = self.stencil[slot];
        let nx = x as i64 + d[0];
        let ny = y as i64 + d[1];
        let nz = z as i64 + d[2];
        if nx < 0
            || ny < 0
            || nz < 0
            || nx >= self.dims.nx as i64
            || ny >= self.dims.ny as i64
            || nz >= self.dims.nz as i64
        {
            return None;
        }
        Some(self.dims.index(nx as usize, ny as usize, nz as usize))
    }

    /// Calls `f` for every neighbor of `v`.
    #[inline]
    pub fn for_each_neighbor(&self, v: usize, mut f: impl FnMut(usize)) {
        let (x, y, z) = self.dims.coords(v);
        let (x, y, z) = (x as i64, y as i64, z as i64);
        let (sx, sy) = (self.dims.nx as i64, self.dims.ny as i64);
        let sz = self.dims.nz as i64;
        for d in self.stencil {
            let (nx, ny, nz) = (x + d[0], y + d[1], z + d[2]);
            if nx >= 0 && ny >= 0 && nz >= 0 && nx < sx && ny < sy && nz < sz {
                f((nx + sx * (ny + sy * nz)) as usize);
            }
        }
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.stencil.len());
        self.for_each_neighbor(v, |u| out.push(u));
        out
    }

    /// Number of connected components of the link subgraph induced by the
    /// stencil slots in `mask`.
    pub fn link_components(&self, mut mask: u16) -> usize {
        let mut count = 0;
        while mask != 0 {
            let mut frontier = mask & mask.wrapping_neg();
            let mut comp = 0u16;
            while frontier != 0 {
                comp |= frontier;
                let mut grown = 0u16;
                let mut bits = frontier;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    grown |= self.link_adj[i];
                }
                frontier = grown & mask & !comp;
            }
            mask &= !comp;
            count += 1;
        }
        count
    }
}

/// Critical point classification of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CriticalType {
    Regular,
    Minimum,
    Saddle1,
    Saddle2,
    Maximum,
    Degenerate,
}

impl CriticalType {
    pub fn is_critical(self) -> bool {
        self != CriticalType::Regular
    }

    pub fn is_extremum(self) -> bool {
        matches!(self, CriticalType::Minimum | CriticalType::Maximum)
    }
}

/// Total order on vertices induced by `(value, offset)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexOrder {
    /// `rank[v]` is the position of `v` in ascending order.
    pub rank: Vec<usize>,
    /// Vertices sorted in ascending order.
    pub sorted: Vec<usize>,
}

impl VertexOrder {
    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }

    pub fn min_vertex(&self) -> usize {
        self.sorted[0]
    }

    pub fn max_vertex(&self) -> usize {
        self.sorted[self.sorted.len() - 1]
    }

    /// Turns a rank permutation back into an order.
    pub fn from_rank(rank: Vec<usize>) -> Self {
        let mut sorted = vec![0; rank.len()];
        for (v, &r) in rank.iter().enumerate() {
            sorted[r] = v;
        }
        Self { rank, sorted }
    }
}

/// Values on the vertices of a regular grid, disambiguated by an injective
/// integer offset per vertex (simulation of simplicity).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    dims: Dims,
    values: Vec<f64>,
    offsets: Vec<usize>,
}

impl ScalarField {
    /// Builds a field with offsets equal to memory positions.
    pub fn new(dims: Dims, values: Vec<f64>) -> Result<Self, FieldError> {
        build_field(dims, values, None)
    }

    pub fn with_offsets(
        dims: Dims,
        values: Vec<f64>,
        offsets: Vec<usize>,
    ) -> Result<Self, FieldError> {
        build_field(dims, values, Some(offsets))
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn value(&self, v: usize) -> f64 {
        self.values[v]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn triangulation(&self) -> Triangulation {
        Triangulation::new(self.dims)
    }

    /// `(min, max)` of the values.
    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            })
    }

    pub fn span(&self) -> f64 {
        let (lo, hi) = self.range();
        hi - lo
    }

    /// Lexicographic `(value, offset)` comparison of two vertices.
    #[inline]
    pub fn compare(&self, u: usize, v: usize) -> Ordering {
        compare_keys(self.values[u], self.offsets[u], self.values[v], self.offsets[v])
    }

    pub fn order(&self) -> VertexOrder {
        let mut sorted: Vec<usize> = (0..self.len()).collect();
        sorted.sort_unstable_by(|&a, &b| self.compare(a, b));
        let mut rank = vec![0; sorted.len()];
        for (r, &v) in sorted.iter().enumerate() {
            rank[v] = r;
        }
        VertexOrder { rank, sorted }
    }

    /// Replaces the offsets, keeping values.
    pub fn with_new_offsets(&self, offsets: Vec<usize>) -> Result<Self, FieldError> {
        Self::with_offsets(self.dims, self.values.clone(), offsets)
    }

    pub(crate) fn from_parts_unchecked(dims: Dims, values: Vec<f64>, offsets: Vec<usize>) -> Self {
        debug_assert_eq!(values.len(), dims.len());
        debug_assert_eq!(offsets.len(), dims.len());
        Self {
            dims,
            values,
            offsets,
        }
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), FieldError> {
        if v >= self.len() {
            Err(FieldError::VertexOutOfRange {
                vertex: v,
                len: self.len(),
            })
        } else {
            Ok(())
        }
    }
}

#[inline]
pub(crate) fn compare_keys(a: f64, oa: usize, b: f64, ob: usize) -> Ordering {
    a.partial_cmp(&b)
        .unwrap_or(Ordering::Equal)
        .then(oa.cmp(&ob))
}

/// Validates and assembles a field. Negative zeros are normalized to `+0.0`
/// so that equal values compare equal bitwise as well.
pub fn build_field(
    dims: Dims,
    mut values: Vec<f64>,
    offsets: Option<Vec<usize>>,
) -> Result<ScalarField, FieldError> {
    let dims = Dims::new(dims.nx, dims.ny, dims.nz)?;
    let n = dims.len();
    if values.len() != n {
        return Err(FieldError::LengthMismatch {
            expected: n,
            actual: values.len(),
        });
    }
    for (vertex, x) in values.iter_mut().enumerate() {
        if !x.is_finite() {
            return Err(FieldError::NonFinite { vertex, value: *x });
        }
        if *x == 0.0 {
            *x = 0.0;
        }
    }
    let offsets = match offsets {
        None => (0..n).collect(),
        Some(offsets) => {
            if offsets.len() != n {
                return Err(FieldError::InvalidOffsets(n));
            }
            let mut seen = vec![false; n];
            for &o in &offsets {
                if o >= n || std::mem::replace(&mut seen[o], true) {
                    return Err(FieldError::InvalidOffsets(n));
                }
            }
            offsets
        }
    };
    Ok(ScalarField {
        dims,
        values,
        offsets,
    })
}

/// 1-skeleton neighbors of `v`, truncated at the grid boundary.
pub fn link_neighbors(field: &ScalarField, v: usize) -> Result<Vec<usize>, FieldError> {
    field.check_vertex(v)?;
    Ok(field.triangulation().neighbors(v))
}

/// Counts of lower and upper link components of `v` under `order`.
pub fn link_betti(tri: &Triangulation, rank: &[usize], v: usize) -> (usize, usize) {
    let mut lower = 0u16;
    let mut upper = 0u16;
    let r = rank[v];
    for slot in 0..tri.stencil_len() {
        if let Some(u) = tri.neighbor(v, slot) {
            if rank[u] < r {
                lower |= 1 << slot;
            } else {
                upper |= 1 << slot;
            }
        }
    }
    (tri.link_components(lower), tri.link_components(upper))
}

fn classify_counts(lower: usize, upper: usize, is_3d: bool) -> CriticalType {
    if lower == 0 {
        CriticalType::Minimum
    } else if upper == 0 {
        CriticalType::Maximum
    } else if lower > 2 || upper > 2 {
        CriticalType::Degenerate
    } else if lower == 2 {
        CriticalType::Saddle1
    } else if upper == 2 {
        if is_3d {
            CriticalType::Saddle2
        } else {
            CriticalType::Saddle1
        }
    } else {
        CriticalType::Regular
    }
}

/// Classifies `v` from the connectivity of its lower and upper links.
pub fn classify_vertex(
    field: &ScalarField,
    order: &VertexOrder,
    v: usize,
) -> Result<CriticalType, FieldError> {
    field.check_vertex(v)?;
    let tri = field.triangulation();
    let (lower, upper) = link_betti(&tri, &order.rank, v);
    Ok(classify_counts(lower, upper, field.dims().is_3d()))
}

/// Classification of every vertex.
pub fn classify_all(field: &ScalarField, order: &VertexOrder) -> Vec<CriticalType> {
    let tri = field.triangulation();
    let is_3d = field.dims().is_3d();
    (0..field.len())
        .map(|v| {
            let (lower, upper) = link_betti(&tri, &order.rank, v);
            classify_counts(lower, upper, is_3d)
        })
        .collect()
}

/// Critical vertices with their type, in vertex id order.
pub fn critical_points(field: &ScalarField, order: &VertexOrder) -> Vec<(usize, CriticalType)> {
    classify_all(field, order)
        .into_iter()
        .enumerate()
        .filter(|(_, t)| t.is_critical())
        .collect()
}
