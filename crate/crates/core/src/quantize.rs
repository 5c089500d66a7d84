//! Topologically adaptive quantization of the range.
//!
//! The range is cut at the critical values of the simplified field, so every
//! interval is crossed by no critical value. Regular vertices are replaced by
//! their interval midpoint while critical vertices keep their exact values,
//! which leaves the relative order of every vertex against every critical
//! vertex untouched. Regular vertices sitting exactly on a critical value
//! (flooded plateaus end on a preserved saddle) keep that value too.

use thiserror::Error;

use crate::field::{Dims, ScalarField};
use crate::persistence::PersistenceDiagram;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantizeError {
    #[error("pointwise control needs a positive interval width, got {0}")]
    InvalidWidth(f64),
    #[error("interval bounds must be finite and strictly increasing")]
    InvalidBounds,
    #[error("no critical values to build a partition from")]
    EmptyDiagram,
    #[error("vertex {vertex} value {value} lies outside the partition [{lo}, {hi}]")]
    OutOfRange { vertex: usize, value: f64, lo: f64, hi: f64 },
    #[error("partition and field dimensions disagree")]
    Mismatch,
}

/// How the bounds of a partition were produced, enough to rebuild them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartitionScheme {
    /// Critical values, optionally with gaps wider than `width` subdivided.
    Adaptive { pointwise: bool, width: f64 },
    /// Constant step intervals starting at `origin`.
    FixedStep { origin: f64, step: f64 },
}

/// Where a slot sits relative to the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Exactly on a critical bound, ordered before the critical vertices
    /// holding that value.
    Before,
    /// Between two consecutive bounds.
    Open,
    /// Exactly on a critical bound, ordered after its critical vertices.
    After,
}

/// One quantization slot: a closed interval and its side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub lo: f64,
    pub hi: f64,
    pub side: Side,
}

/// Sorted bounds and the slots they induce. Every critical bound owns two
/// zero-width slots (regular vertices sitting exactly on it, before and
/// after its critical vertices), every gap between bounds one open slot.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPartition {
    bounds: Vec<f64>,
    /// Whether each bound is a critical value (as opposed to a subdivision).
    critical: Vec<bool>,
    scheme: PartitionScheme,
    slots: Vec<Slot>,
    /// First slot of each critical bound.
    bound_slot: Vec<usize>,
    gap_slot: Vec<usize>,
}

impl IntervalPartition {
    fn from_bounds(bounds: Vec<f64>, critical: Vec<bool>, scheme: PartitionScheme) -> Self {
        let mut slots = Vec::with_capacity(3 * bounds.len());
        let mut bound_slot = vec![usize::MAX; bounds.len()];
        let mut gap_slot = Vec::with_capacity(bounds.len());
        for (i, &b) in bounds.iter().enumerate() {
            if critical[i] {
                bound_slot[i] = slots.len();
                slots.push(Slot { lo: b, hi: b, side: Side::Before });
                slots.push(Slot { lo: b, hi: b, side: Side::After });
            }
            if let Some(&next) = bounds.get(i + 1) {
                gap_slot.push(slots.len());
                slots.push(Slot { lo: b, hi: next, side: Side::Open });
            }
        }
        Self {
            bounds,
            critical,
            scheme,
            slots,
            bound_slot,
            gap_slot,
        }
    }

    /// Partition delimited by `critical_values`, subdivided so that no
    /// interval is wider than `width` when `pointwise` is set.
    pub fn adaptive(critical_values: &[f64], pointwise: bool, width: f64) -> Result<Self, QuantizeError> {
        if pointwise && !(width > 0.0 && width.is_finite()) {
            return Err(QuantizeError::InvalidWidth(width));
        }
        let mut values = critical_values.to_vec();
        values.sort_by(f64::total_cmp);
        values.dedup();
        if values.is_empty() {
            return Err(QuantizeError::EmptyDiagram);
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(QuantizeError::InvalidBounds);
        }
        let mut bounds = vec![values[0]];
        let mut critical = vec![true];
        for w in values.windows(2) {
            let (a, b) = (w[0], w[1]);
            let gap = b - a;
            if pointwise && gap > width {
                let parts = (gap / width).ceil() as usize;
                for k in 1..parts {
                    let x = a + gap * k as f64 / parts as f64;
                    if x > *bounds.last().unwrap() && x < b {
                        bounds.push(x);
                        critical.push(false);
                    }
                }
            }
            bounds.push(b);
            critical.push(true);
        }
        Ok(Self::from_bounds(
            bounds,
            critical,
            PartitionScheme::Adaptive { pointwise, width },
        ))
    }

    /// `intervals` contiguous intervals of width `step` starting at `origin`.
    pub fn fixed_step(origin: f64, step: f64, intervals: usize) -> Result<Self, QuantizeError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(QuantizeError::InvalidWidth(step));
        }
        if !origin.is_finite() || intervals == 0 {
            return Err(QuantizeError::InvalidBounds);
        }
        let bounds: Vec<f64> = (0..=intervals).map(|k| origin + k as f64 * step).collect();
        if bounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(QuantizeError::InvalidBounds);
        }
        let critical = vec![false; bounds.len()];
        Ok(Self::from_bounds(
            bounds,
            critical,
            PartitionScheme::FixedStep { origin, step },
        ))
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn scheme(&self) -> PartitionScheme {
        self.scheme
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// Number of raw slots.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Closed bounds of raw slot `i`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        let s = self.slots[i];
        (s.lo, s.hi)
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        let s = self.slots[i];
        if s.lo == s.hi {
            s.lo
        } else {
            s.lo * 0.5 + s.hi * 0.5
        }
    }

    /// Width of the widest gap between consecutive bounds.
    pub fn widest(&self) -> f64 {
        self.bounds.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Raw slot for `value`; `below_critical` says the vertex precedes the
    /// first critical vertex sharing its value, which only matters when
    /// `value` is exactly a critical bound.
    fn locate(&self, value: f64, below_critical: bool) -> Option<usize> {
        let (lo, hi) = (self.bounds[0], *self.bounds.last().unwrap());
        if !(lo..=hi).contains(&value) {
            return None;
        }
        let i = self.bounds.partition_point(|&b| b <= value) - 1;
        if self.bounds[i] == value && self.critical[i] {
            return Some(self.bound_slot[i] + usize::from(!below_critical));
        }
        self.gap_slot.get(i.min(self.gap_slot.len().saturating_sub(1))).copied()
    }

    /// Raw slot of a value under the constant-step rule (no critical bounds,
    /// values on a bound go up).
    pub fn locate_value(&self, value: f64) -> Option<usize> {
        self.locate(value, false)
    }
}

/// Builds the adaptive partition from the critical values of `diagram`.
pub fn build_partition(
    diagram: &PersistenceDiagram,
    pointwise: bool,
    epsilon: f64,
) -> Result<IntervalPartition, QuantizeError> {
    IntervalPartition::adaptive(&diagram.critical_values(), pointwise, epsilon)
}

/// Quantized field: interval ids for regular vertices, exact values for the
/// critical ones.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedField {
    pub dims: Dims,
    pub partition: IntervalPartition,
    /// Non-empty flag per raw interval.
    pub nonempty: Vec<bool>,
    /// Compact interval id per vertex; 0 and meaningless for critical ones.
    pub interval_id: Vec<u32>,
    /// Critical vertices and their exact values, in ascending order of the
    /// quantized field.
    pub critical: Vec<(usize, f64)>,
}

impl QuantizedField {
    pub fn len(&self) -> usize {
        self.interval_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interval_id.is_empty()
    }

    /// Number of non-empty intervals.
    pub fn interval_count(&self) -> usize {
        self.nonempty.iter().filter(|&&b| b).count()
    }

    /// Raw interval index of each compact id.
    pub fn raw_intervals(&self) -> Vec<usize> {
        (0..self.nonempty.len()).filter(|&i| self.nonempty[i]).collect()
    }

    pub fn critical_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        for &(v, _) in &self.critical {
            mask[v] = true;
        }
        mask
    }

    /// Slot each vertex is assigned to; critical vertices get a zero-width
    /// open slot at their exact value.
    pub fn vertex_slots(&self) -> Vec<Slot> {
        let raw = self.raw_intervals();
        let missing = Slot {
            lo: f64::NAN,
            hi: f64::NAN,
            side: Side::Open,
        };
        let mut out: Vec<Slot> = self
            .interval_id
            .iter()
            .map(|&id| raw.get(id as usize).map_or(missing, |&i| self.partition.slots[i]))
            .collect();
        for &(v, x) in &self.critical {
            out[v] = Slot { lo: x, hi: x, side: Side::Open };
        }
        out
    }

    /// Closed bounds of the slot each vertex is assigned to.
    pub fn vertex_bounds(&self) -> Vec<(f64, f64)> {
        self.vertex_slots().iter().map(|s| (s.lo, s.hi)).collect()
    }

    /// The quantized values: midpoints for regular vertices, exact values
    /// for critical ones.
    pub fn values(&self) -> Vec<f64> {
        let mids: Vec<f64> = self
            .raw_intervals()
            .into_iter()
            .map(|i| self.partition.midpoint(i))
            .collect();
        let mut out: Vec<f64> = self
            .interval_id
            .iter()
            .map(|&id| mids.get(id as usize).copied().unwrap_or(f64::NAN))
            .collect();
        for &(v, x) in &self.critical {
            out[v] = x;
        }
        out
    }
}

/// Quantizes `field` against `partition`. The vertices of `diagram` are kept
/// exact; every other vertex goes to the interval containing its value. A
/// vertex lying exactly on a critical bound keeps that value, in the slot
/// before the bound's critical vertices when it precedes, in the field's
/// order, the first diagram vertex holding that value.
pub fn quantize(
    field: &ScalarField,
    diagram: &PersistenceDiagram,
    partition: &IntervalPartition,
) -> Result<QuantizedField, QuantizeError> {
    let n = field.len();
    let mut critical: Vec<usize> = diagram.vertices();
    if critical.iter().any(|&v| v >= n) {
        return Err(QuantizeError::Mismatch);
    }
    critical.sort_by(|&a, &b| field.compare(a, b));
    let mut is_critical = vec![false; n];
    for &v in &critical {
        is_critical[v] = true;
    }

    let (lo, hi) = (partition.bounds[0], *partition.bounds.last().unwrap());
    let mut raw = vec![0usize; n];
    for v in 0..n {
        if is_critical[v] {
            continue;
        }
        let x = field.value(v);
        // first critical vertex holding exactly this value, if any
        let first = critical.partition_point(|&c| field.value(c) < x);
        let below = critical
            .get(first)
            .is_some_and(|&c| field.value(c) == x && field.compare(v, c).is_lt());
        raw[v] = partition
            .locate(x, below)
            .ok_or(QuantizeError::OutOfRange { vertex: v, value: x, lo, hi })?;
    }

    let mut nonempty = vec![false; partition.len()];
    for v in (0..n).filter(|&v| !is_critical[v]) {
        nonempty[raw[v]] = true;
    }
    let mut compact = vec![0u32; partition.len()];
    let mut next = 0u32;
    for (i, &used) in nonempty.iter().enumerate() {
        if used {
            compact[i] = next;
            next += 1;
        }
    }
    let interval_id = (0..n)
        .map(|v| if is_critical[v] { 0 } else { compact[raw[v]] })
        .collect();
    Ok(QuantizedField {
        dims: field.dims(),
        partition: partition.clone(),
        nonempty,
        interval_id,
        critical: critical.iter().map(|&v| (v, field.value(v))).collect(),
    })
}
