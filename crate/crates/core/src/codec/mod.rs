//! Archive serialization.
//!
//! An archive is a 16-byte header followed by a payload run through the
//! lossless backend:
//!
//! ```text
//! header   "TOPC" | version u8 | flags u8 | reserved u16 | payload length u64
//! payload  nx ny nz u32 | eps f64 | n_c u32 | n_i u32
//!          [fixed step: origin f64 | raw interval count u32]
//!          index: n_c × (vertex id, 2-bit type, 64-bit value), bit packed
//!          non-empty slot bitmap (one bit per raw slot)
//!          n_v interval ids of ceil(log2(max(n_i, 2))) bits
//!          [external: length u64 | bytes]
//!          crc32 of everything above
//! ```
//!
//! Integers are little-endian; each bit-packed block is padded to a byte.

pub mod backend;
pub mod bits;
pub mod external;
pub mod index;

use thiserror::Error;

use crate::field::Dims;
use crate::quantize::{IntervalPartition, PartitionScheme, QuantizedField};

pub use backend::{lossless_pass, Backend, Direction};
pub use bits::{width_for, BitReader, BitWriter};
pub use external::{FieldCodec, Uq8};
pub use index::{IndexEntry, IndexType, TopologicalIndex};

pub const MAGIC: &[u8; 4] = b"TOPC";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 16;

const FLAG_POINTWISE: u8 = 1;
const FLAG_EXTERNAL: u8 = 1 << 1;
const FLAG_BZIP2: u8 = 1 << 2;
const FLAG_FIXED_STEP: u8 = 1 << 3;
const KNOWN_FLAGS: u8 = FLAG_POINTWISE | FLAG_EXTERNAL | FLAG_BZIP2 | FLAG_FIXED_STEP;

/// Bytes of the fixed payload prefix: dims, eps, n_c, n_i.
const PREFIX_LEN: usize = 12 + 8 + 4 + 4;
/// Extra prefix bytes of fixed-step archives: origin and raw interval count.
const FIXED_STEP_LEN: usize = 8 + 4;
const CHECKSUM_LEN: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("not an archive (bad magic)")]
    BadMagic,
    #[error("unsupported archive version {0}")]
    UnsupportedVersion(u8),
    #[error("archive is truncated")]
    Truncated,
    #[error("checksum mismatch (stored {stored:08x}, computed {computed:08x})")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("lossless backend failed: {0}")]
    Backend(String),
    #[error("malformed archive: {0}")]
    Malformed(String),
    #[error("quantized field has regular vertices but no interval")]
    NoIntervals,
    #[error("index and quantized field disagree: {0}")]
    InconsistentIndex(String),
    #[error("external stream holds {actual} values, expected {expected}")]
    DimsMismatch { expected: usize, actual: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flags {
    pub pointwise: bool,
    pub external: bool,
    pub backend: Backend,
    pub fixed_step: bool,
}

impl Flags {
    pub fn to_byte(self) -> u8 {
        let mut b = 0;
        if self.pointwise {
            b |= FLAG_POINTWISE;
        }
        if self.external {
            b |= FLAG_EXTERNAL;
        }
        if self.backend == Backend::Bzip2 {
            b |= FLAG_BZIP2;
        }
        if self.fixed_step {
            b |= FLAG_FIXED_STEP;
        }
        b
    }

    pub fn from_byte(b: u8) -> Result<Self, CodecError> {
        if b & !KNOWN_FLAGS != 0 {
            return Err(CodecError::Malformed(format!("unknown flag bits {b:#04x}")));
        }
        Ok(Self {
            pointwise: b & FLAG_POINTWISE != 0,
            external: b & FLAG_EXTERNAL != 0,
            backend: if b & FLAG_BZIP2 != 0 {
                Backend::Bzip2
            } else {
                Backend::Deflate
            },
            fixed_step: b & FLAG_FIXED_STEP != 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub version: u8,
    pub flags: Flags,
    /// Length of the backend-compressed payload that follows the header.
    pub payload_len: u64,
}

/// Parses the fixed header; never looks past the first 16 bytes.
pub fn read_header(bytes: &[u8]) -> Result<Header, CodecError> {
    if bytes.len() < MAGIC.len() {
        return Err(CodecError::Truncated);
    }
    if &bytes[..4] != MAGIC {
        return Err(CodecError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(CodecError::Truncated);
    }
    let version = bytes[4];
    if version != VERSION {
        return Err(CodecError::UnsupportedVersion(version));
    }
    let flags = Flags::from_byte(bytes[5])?;
    if bytes[6] != 0 || bytes[7] != 0 {
        return Err(CodecError::Malformed("reserved header bytes are not zero".into()));
    }
    let payload_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    Ok(Header {
        version,
        flags,
        payload_len,
    })
}

/// Everything an archive carries.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub header: Header,
    pub quantized: QuantizedField,
    pub index: TopologicalIndex,
    pub epsilon: f64,
    pub external: Option<Vec<u8>>,
}

/// Counts that determine the payload size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PayloadShape {
    pub n_v: usize,
    pub n_c: usize,
    pub n_i: usize,
    pub raw_intervals: usize,
    pub fixed_step: bool,
    pub external_len: Option<usize>,
}

impl PayloadShape {
    pub fn of(q: &QuantizedField, external_len: Option<usize>) -> Self {
        Self {
            n_v: q.len(),
            n_c: q.critical.len(),
            n_i: q.interval_count(),
            raw_intervals: q.nonempty.len(),
            fixed_step: matches!(q.partition.scheme(), PartitionScheme::FixedStep { .. }),
            external_len,
        }
    }

    /// Bits of the interval-id block, before padding.
    pub fn interval_bits(&self) -> usize {
        self.n_v * width_for(self.n_i) as usize
    }

    /// Bits of the index block, before padding.
    pub fn index_bits(&self) -> usize {
        self.n_c * (width_for(self.n_v) as usize + 2 + 64)
    }

    /// Exact payload size in bytes before the lossless backend.
    pub fn payload_len(&self) -> usize {
        PREFIX_LEN
            + if self.fixed_step { FIXED_STEP_LEN } else { 0 }
            + self.index_bits().div_ceil(8)
            + self.raw_intervals.div_ceil(8)
            + self.interval_bits().div_ceil(8)
            + self.external_len.map_or(0, |n| 8 + n)
            + CHECKSUM_LEN
    }
}

fn check_consistency(q: &QuantizedField, index: &TopologicalIndex) -> Result<(), CodecError> {
    if q.critical.len() != index.len() {
        return Err(CodecError::InconsistentIndex(format!(
            "{} critical vertices, {} index entries",
            q.critical.len(),
            index.len()
        )));
    }
    for (&(v, x), e) in q.critical.iter().zip(&index.entries) {
        if v != e.vertex || x.to_bits() != e.value.to_bits() {
            return Err(CodecError::InconsistentIndex(format!(
                "entry for vertex {} does not match critical vertex {v}",
                e.vertex
            )));
        }
    }
    if q.interval_id.len() != q.dims.len() {
        return Err(CodecError::InconsistentIndex("interval ids do not cover the grid".into()));
    }
    if q.interval_count() == 0 && q.critical.len() < q.len() {
        return Err(CodecError::NoIntervals);
    }
    let n_i = q.interval_count() as u32;
    let mask = q.critical_mask();
    if let Some(v) = (0..q.len()).find(|&v| !mask[v] && q.interval_id[v] >= n_i) {
        return Err(CodecError::InconsistentIndex(format!("vertex {v} has no valid interval")));
    }
    if let PartitionScheme::Adaptive { pointwise, width } = q.partition.scheme() {
        if !index.is_empty() {
            let rebuilt = IntervalPartition::adaptive(&index.values(), pointwise, width)
                .map_err(|e| CodecError::InconsistentIndex(e.to_string()))?;
            if rebuilt.bounds() != q.partition.bounds() {
                return Err(CodecError::InconsistentIndex(
                    "partition bounds are not derived from the index".into(),
                ));
            }
        }
    }
    Ok(())
}

fn u32_of(x: usize, what: &str) -> Result<u32, CodecError> {
    u32::try_from(x).map_err(|_| CodecError::Malformed(format!("{what} {x} does not fit in 32 bits")))
}

/// Serializes the payload, before the lossless backend.
pub fn encode_payload(
    q: &QuantizedField,
    index: &TopologicalIndex,
    external: Option<&[u8]>,
) -> Result<Vec<u8>, CodecError> {
    check_consistency(q, index)?;
    let shape = PayloadShape::of(q, external.map(<[u8]>::len));
    let mut out = Vec::with_capacity(shape.payload_len());
    for n in [q.dims.nx, q.dims.ny, q.dims.nz] {
        out.extend_from_slice(&u32_of(n, "dimension")?.to_le_bytes());
    }
    let eps = match q.partition.scheme() {
        PartitionScheme::Adaptive { width, .. } => width,
        PartitionScheme::FixedStep { step, .. } => step,
    };
    out.extend_from_slice(&eps.to_le_bytes());
    out.extend_from_slice(&u32_of(shape.n_c, "critical count")?.to_le_bytes());
    out.extend_from_slice(&u32_of(shape.n_i, "interval count")?.to_le_bytes());
    if let PartitionScheme::FixedStep { origin, .. } = q.partition.scheme() {
        out.extend_from_slice(&origin.to_le_bytes());
        out.extend_from_slice(&u32_of(shape.raw_intervals, "interval count")?.to_le_bytes());
    }

    let id_width = width_for(shape.n_v);
    let mut w = BitWriter::new();
    for e in &index.entries {
        w.write(e.vertex as u64, id_width);
        w.write(e.kind.code(), 2);
        w.write(e.value.to_bits(), 64);
    }
    out.extend(w.into_bytes());

    let mut w = BitWriter::new();
    for &used in &q.nonempty {
        w.write(used as u64, 1);
    }
    out.extend(w.into_bytes());

    let word = width_for(shape.n_i);
    let mut w = BitWriter::new();
    for &id in &q.interval_id {
        w.write(id as u64, word);
    }
    out.extend(w.into_bytes());

    if let Some(ext) = external {
        out.extend_from_slice(&(ext.len() as u64).to_le_bytes());
        out.extend_from_slice(ext);
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    debug_assert_eq!(out.len(), shape.payload_len());
    Ok(out)
}

/// Builds a complete archive.
pub fn encode(
    q: &QuantizedField,
    index: &TopologicalIndex,
    backend: Backend,
    external: Option<&[u8]>,
) -> Result<Vec<u8>, CodecError> {
    let payload = encode_payload(q, index, external)?;
    let packed = lossless_pass(&payload, Direction::Compress, backend)?;
    let flags = Flags {
        pointwise: matches!(q.partition.scheme(), PartitionScheme::Adaptive { pointwise: true, .. }),
        external: external.is_some(),
        backend,
        fixed_step: matches!(q.partition.scheme(), PartitionScheme::FixedStep { .. }),
    };
    let mut out = Vec::with_capacity(HEADER_LEN + packed.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(flags.to_byte());
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&(packed.len() as u64).to_le_bytes());
    out.extend(packed);
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(n).ok_or(CodecError::Truncated)?;
        let s = self.bytes.get(self.pos..end).ok_or(CodecError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CodecError> {
        Ok(f64::from_bits(self.u64()?))
    }

    /// Bit-packed block of `bits` bits, padded to a byte.
    fn block(&mut self, bits: usize) -> Result<BitReader<'a>, CodecError> {
        Ok(BitReader::new(self.take(bits.div_ceil(8))?))
    }
}

fn malformed(msg: impl Into<String>) -> CodecError {
    CodecError::Malformed(msg.into())
}

/// Parses a payload that already went through the lossless backend.
pub fn decode_payload(payload: &[u8], header: Header) -> Result<Decoded, CodecError> {
    if payload.len() < CHECKSUM_LEN {
        return Err(CodecError::Truncated);
    }
    let (body, tail) = payload.split_at(payload.len() - CHECKSUM_LEN);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(CodecError::ChecksumMismatch { stored, computed });
    }

    let mut c = Cursor { bytes: body, pos: 0 };
    let (nx, ny, nz) = (c.u32()? as usize, c.u32()? as usize, c.u32()? as usize);
    let dims = Dims::new(nx, ny, nz).map_err(|e| malformed(e.to_string()))?;
    let n_v = dims.len();
    let eps = c.f64()?;
    let n_c = c.u32()? as usize;
    let n_i = c.u32()? as usize;
    if n_c > n_v {
        return Err(malformed(format!("{n_c} critical vertices in a grid of {n_v}")));
    }
    let fixed = if header.flags.fixed_step {
        Some((c.f64()?, c.u32()? as usize))
    } else {
        None
    };

    let id_width = width_for(n_v);
    let mut r = c.block(n_c * (id_width as usize + 66))?;
    let mut entries = Vec::with_capacity(n_c);
    for _ in 0..n_c {
        let vertex = r.read(id_width)? as usize;
        let kind = IndexType::from_code(r.read(2)?);
        let value = f64::from_bits(r.read(64)?);
        if vertex >= n_v {
            return Err(malformed(format!("index vertex {vertex} out of range")));
        }
        if !value.is_finite() {
            return Err(malformed(format!("non-finite critical value at vertex {vertex}")));
        }
        entries.push(IndexEntry { vertex, kind, value });
    }
    let index = TopologicalIndex { entries };
    let mut seen = vec![false; n_v];
    for e in &index.entries {
        if std::mem::replace(&mut seen[e.vertex], true) {
            return Err(malformed(format!("vertex {} indexed twice", e.vertex)));
        }
    }

    let partition = match fixed {
        Some((origin, raw)) => IntervalPartition::fixed_step(origin, eps, raw),
        None => {
            let values = index.values();
            if values.is_empty() {
                return Err(malformed("adaptive archive without critical values"));
            }
            IntervalPartition::adaptive(&values, header.flags.pointwise, eps)
        }
    }
    .map_err(|e| malformed(e.to_string()))?;

    let raw = partition.len();
    let mut r = c.block(raw)?;
    let mut nonempty = Vec::with_capacity(raw);
    for _ in 0..raw {
        nonempty.push(r.read(1)? == 1);
    }
    let used = nonempty.iter().filter(|&&b| b).count();
    if used != n_i {
        return Err(malformed(format!("bitmap marks {used} intervals, header says {n_i}")));
    }

    let word = width_for(n_i);
    let mut r = c.block(n_v * word as usize)?;
    let mut interval_id = Vec::with_capacity(n_v);
    for v in 0..n_v {
        let id = r.read(word)? as u32;
        if seen[v] {
            if id != 0 {
                return Err(malformed(format!("critical vertex {v} carries interval {id}")));
            }
        } else if id as usize >= n_i {
            return Err(malformed(format!("vertex {v} refers to interval {id} of {n_i}")));
        }
        interval_id.push(id);
    }

    let external = if header.flags.external {
        let len = usize::try_from(c.u64()?).map_err(|_| CodecError::Truncated)?;
        Some(c.take(len)?.to_vec())
    } else {
        None
    };
    if c.pos != body.len() {
        return Err(malformed(format!("{} trailing payload bytes", body.len() - c.pos)));
    }

    let critical = index.entries.iter().map(|e| (e.vertex, e.value)).collect();
    Ok(Decoded {
        header,
        quantized: QuantizedField {
            dims,
            partition,
            nonempty,
            interval_id,
            critical,
        },
        index,
        epsilon: eps,
        external,
    })
}

/// Parses a complete archive.
pub fn decode(bytes: &[u8]) -> Result<Decoded, CodecError> {
    let header = read_header(bytes)?;
    let len = usize::try_from(header.payload_len).map_err(|_| CodecError::Truncated)?;
    let end = HEADER_LEN.checked_add(len).ok_or(CodecError::Truncated)?;
    if bytes.len() < end {
        return Err(CodecError::Truncated);
    }
    if bytes.len() > end {
        return Err(malformed(format!("{} bytes after the payload", bytes.len() - end)));
    }
    let payload = lossless_pass(&bytes[HEADER_LEN..end], Direction::Decompress, header.flags.backend)?;
    decode_payload(&payload, header)
}
