//! End-to-end compression and decompression.
//!
//! Compression simplifies the field so that only pairs at least as
//! persistent as ε survive, quantizes the range between the surviving
//! critical values and encodes the result. Decompression rebuilds the
//! quantized field and floods it again from the indexed extrema, which
//! removes every oscillation the quantization (or an external codec) might
//! have introduced inside an interval.

use crate::codec::{self, Backend, Decoded, FieldCodec, TopologicalIndex, Uq8};
use crate::field::ScalarField;
use crate::persistence::{compute_diagram, filter_diagram, PersistenceDiagram, PersistencePair};
use crate::quantize::{build_partition, quantize, IntervalPartition, QuantizedField, Side};
use crate::simplify::{rebuild_offsets, simplify, SimplifyError};
use crate::Error;

/// Simplification threshold, absolute or relative to the value range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    /// Percent of `max f - min f`.
    Percent(f64),
    Absolute(f64),
}

impl Epsilon {
    pub fn resolve(self, field: &ScalarField) -> Result<f64, Error> {
        let eps = match self {
            Epsilon::Percent(p) => p / 100.0 * field.span(),
            Epsilon::Absolute(x) => x,
        };
        if eps >= 0.0 && eps.is_finite() {
            Ok(eps)
        } else {
            Err(Error::InvalidEpsilon(eps))
        }
    }
}

/// External lossy codec to store alongside the topological data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum External {
    Uq8,
}

impl External {
    pub fn codec(self) -> &'static dyn FieldCodec {
        match self {
            External::Uq8 => &Uq8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressOptions {
    pub epsilon: Epsilon,
    pub pointwise: bool,
    pub external: Option<External>,
    pub backend: Backend,
}

impl CompressOptions {
    pub fn new(epsilon: Epsilon) -> Self {
        Self {
            epsilon,
            pointwise: false,
            external: None,
            backend: Backend::default(),
        }
    }

    pub fn pointwise(mut self, on: bool) -> Self {
        self.pointwise = on;
        self
    }

    pub fn external(mut self, codec: Option<External>) -> Self {
        self.external = codec;
        self
    }

    pub fn backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }
}

/// An archive together with what went into it.
#[derive(Debug, Clone)]
pub struct Compressed {
    pub bytes: Vec<u8>,
    pub vertices: usize,
    pub epsilon: f64,
    /// Diagram of the input.
    pub diagram: PersistenceDiagram,
    /// Diagram of the field that was quantized.
    pub preserved: PersistenceDiagram,
    pub removed: Vec<PersistencePair>,
    pub critical_count: usize,
    pub interval_count: usize,
}

impl Compressed {
    /// Input bytes (64-bit values) per archive byte.
    pub fn rate(&self) -> f64 {
        compression_rate(self.vertices, self.bytes.len())
    }
}

/// Ratio of the raw 64-bit field size to the archive size.
pub fn compression_rate(vertices: usize, archive_bytes: usize) -> f64 {
    (vertices * 8) as f64 / archive_bytes as f64
}

fn finish(
    field: &ScalarField,
    quantized_field: &ScalarField,
    diagram: PersistenceDiagram,
    preserved: PersistenceDiagram,
    removed: Vec<PersistencePair>,
    epsilon: f64,
    options: &CompressOptions,
) -> Result<Compressed, Error> {
    let partition = build_partition(&preserved, options.pointwise, epsilon)?;
    let q = quantize(quantized_field, &preserved, &partition)?;
    let index = TopologicalIndex::from_diagram(quantized_field, &preserved);
    let ext = options.external.map(|e| e.codec().compress_field(field));
    let bytes = codec::encode(&q, &index, options.backend, ext.as_deref())?;
    Ok(Compressed {
        bytes,
        vertices: field.len(),
        epsilon,
        diagram,
        critical_count: q.critical.len(),
        interval_count: q.interval_count(),
        preserved,
        removed,
    })
}

/// Full compression with its intermediate results.
pub fn compress_detailed(field: &ScalarField, options: &CompressOptions) -> Result<Compressed, Error> {
    let epsilon = options.epsilon.resolve(field)?;
    let diagram = compute_diagram(field);
    let (kept, removed) = filter_diagram(&diagram, epsilon)?;
    let constraints = crate::simplify::ConstraintSet::from_diagram(&kept)?;
    let simplified = simplify(field, &constraints)?;
    let preserved = compute_diagram(&simplified);
    finish(field, &simplified, diagram, preserved, removed, epsilon, options)
}

pub fn compress(field: &ScalarField, options: &CompressOptions) -> Result<Vec<u8>, Error> {
    Ok(compress_detailed(field, options)?.bytes)
}

/// Compression without simplifying first: the input itself is quantized
/// against the critical values of the pairs that survive filtering, and all
/// topological cleanup is left to decompression.
pub fn compress_skip_simplification_detailed(
    field: &ScalarField,
    options: &CompressOptions,
) -> Result<Compressed, Error> {
    let epsilon = options.epsilon.resolve(field)?;
    let diagram = compute_diagram(field);
    let (kept, removed) = filter_diagram(&diagram, epsilon)?;
    finish(field, field, diagram, kept, removed, epsilon, options)
}

pub fn compress_skip_simplification(field: &ScalarField, options: &CompressOptions) -> Result<Vec<u8>, Error> {
    Ok(compress_skip_simplification_detailed(field, options)?.bytes)
}

/// Clamps every regular vertex into its interval and restores the exact
/// value of every critical vertex.
pub fn crop_to_intervals(values: &[f64], quantized: &QuantizedField) -> Vec<f64> {
    values
        .iter()
        .zip(quantized.vertex_bounds())
        .map(|(&x, (lo, hi))| x.clamp(lo, hi))
        .collect()
}

/// Initial total order of a decoded field. Critical vertices at equal values
/// keep their index order; a regular vertex sitting on a bound of its slot
/// stays inside the slot, i.e. after the critical vertices at its lower
/// bound and before those at its upper bound, and a vertex of a point slot
/// takes the slot's side.
fn decoded_offsets(values: &[f64], quantized: &QuantizedField) -> Vec<usize> {
    let n = values.len();
    let slots = quantized.vertex_slots();
    let mut key: Vec<(i8, usize)> = (0..n)
        .map(|v| {
            let s = slots[v];
            let tier = match s.side {
                Side::Before => -1,
                Side::After => 1,
                Side::Open if values[v] == s.hi => -1,
                Side::Open if values[v] == s.lo => 1,
                Side::Open => 0,
            };
            (tier, n + v)
        })
        .collect();
    for (pos, &(v, _)) in quantized.critical.iter().enumerate() {
        key[v] = (0, pos);
    }
    let mut sorted: Vec<usize> = (0..n).collect();
    sorted.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]).then(key[a].cmp(&key[b])));
    let mut offsets = vec![0; n];
    for (r, &v) in sorted.iter().enumerate() {
        offsets[v] = r;
    }
    offsets
}

fn reconstruct(decoded: &Decoded, external: Option<Vec<f64>>) -> Result<ScalarField, Error> {
    let q = &decoded.quantized;
    let cropped = external.is_some();
    let values = match external {
        Some(ext) => crop_to_intervals(&ext, q),
        None => q.values(),
    };
    if decoded.index.is_empty() {
        return Ok(ScalarField::new(q.dims, values)?);
    }
    let offsets = decoded_offsets(&values, q);
    let field = ScalarField::with_offsets(q.dims, values, offsets)?;
    let constraints = decoded.index.constraints()?;
    let rebuilt = if cropped {
        simplify(&field, &constraints)
    } else {
        // quantized values are already flooded; only plateaus need ordering,
        // but fall back to a full flood rather than fail on odd ties
        match rebuild_offsets(&field, &constraints) {
            Err(SimplifyError::ValuesChanged { .. }) => simplify(&field, &constraints),
            other => other,
        }
    };
    rebuilt.map_err(|e| Error::Reconstruction(e.to_string()))
}

/// Decompresses with the built-in external codec.
pub fn decompress(bytes: &[u8]) -> Result<ScalarField, Error> {
    decompress_with(bytes, &Uq8)
}

/// Decompresses, decoding an external stream (if any) with `codec`.
pub fn decompress_with(bytes: &[u8], external: &dyn FieldCodec) -> Result<ScalarField, Error> {
    let decoded = codec::decode(bytes)?;
    let ext = match &decoded.external {
        Some(stream) => Some(external.decompress_field(stream, decoded.quantized.dims)?),
        None => None,
    };
    reconstruct(&decoded, ext)
}

/// Constant-step baseline: the range is cut into intervals of width ε and
/// every vertex is replaced by its interval midpoint.
pub fn sq_r_compress(field: &ScalarField, epsilon: f64, backend: Backend) -> Result<Vec<u8>, Error> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let (lo, hi) = field.range();
    let count = (((hi - lo) / epsilon).ceil() as usize).max(1);
    let partition = IntervalPartition::fixed_step(lo, epsilon, count)?;
    let raw: Vec<usize> = field
        .values()
        .iter()
        .map(|&x| partition.locate_value(x).unwrap_or(count - 1))
        .collect();
    let mut nonempty = vec![false; partition.len()];
    for &i in &raw {
        nonempty[i] = true;
    }
    let mut compact = vec![0u32; partition.len()];
    let mut next = 0;
    for (i, &used) in nonempty.iter().enumerate() {
        if used {
            compact[i] = next;
            next += 1;
        }
    }
    let q = QuantizedField {
        dims: field.dims(),
        partition,
        nonempty,
        interval_id: raw.iter().map(|&i| compact[i]).collect(),
        critical: Vec::new(),
    };
    Ok(codec::encode(&q, &TopologicalIndex::default(), backend, None)?)
}

pub fn sq_r_decompress(bytes: &[u8]) -> Result<ScalarField, Error> {
    let decoded = codec::decode(bytes)?;
    if !decoded.header.flags.fixed_step {
        return Err(Error::Reconstruction("not a constant-step archive".into()));
    }
    reconstruct(&decoded, None)
}
