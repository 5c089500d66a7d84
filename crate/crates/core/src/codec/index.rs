//! The topological index: every vertex of the preserved diagram with its
//! type and exact value.

use crate::field::{link_betti, ScalarField};
use crate::persistence::PersistenceDiagram;
use crate::simplify::{ConstraintSet, SimplifyError};

/// 2-bit critical type code stored in the archive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexType {
    Minimum = 0,
    Saddle = 1,
    Saddle2 = 2,
    Maximum = 3,
}

impl IndexType {
    pub fn code(self) -> u64 {
        self as u64
    }

    pub fn from_code(code: u64) -> Self {
        match code & 3 {
            0 => IndexType::Minimum,
            1 => IndexType::Saddle,
            2 => IndexType::Saddle2,
            _ => IndexType::Maximum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexEntry {
    pub vertex: usize,
    pub kind: IndexType,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TopologicalIndex {
    /// Sorted by value, then by the order of the indexed field.
    pub entries: Vec<IndexEntry>,
}

impl TopologicalIndex {
    /// Index of the vertices of `diagram`, typed from their links in `field`.
    pub fn from_diagram(field: &ScalarField, diagram: &PersistenceDiagram) -> Self {
        let tri = field.triangulation();
        let order = field.order();
        let mut vertices = diagram.vertices();
        vertices.sort_by(|&a, &b| field.compare(a, b));
        let entries = vertices
            .into_iter()
            .map(|v| {
                let (lower, upper) = link_betti(&tri, &order.rank, v);
                let kind = if lower == 0 {
                    IndexType::Minimum
                } else if upper == 0 {
                    IndexType::Maximum
                } else if field.dims().is_3d() && upper >= 2 && lower < 2 {
                    IndexType::Saddle2
                } else {
                    IndexType::Saddle
                };
                IndexEntry {
                    vertex: v,
                    kind,
                    value: field.value(v),
                }
            })
            .collect();
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The extrema to enforce when rebuilding a field from this index.
    pub fn constraints(&self) -> Result<ConstraintSet, SimplifyError> {
        let pick = |kind| {
            self.entries
                .iter()
                .filter(|e| e.kind == kind)
                .map(|e| e.vertex)
                .collect()
        };
        ConstraintSet::new(pick(IndexType::Minimum), pick(IndexType::Maximum))
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }
}
