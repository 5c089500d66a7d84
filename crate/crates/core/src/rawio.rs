//! Raw binary grids with a `key=value` text sidecar.
//!
//! Values are little-endian `f32` or `f64`, x varying fastest
//! (`id = x + nx * (y + ny * z)`). The sidecar `<file>.hdr` reads
//!
//! ```text
//! dims=NX,NY,NZ
//! dtype=f32
//! order=row-major
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::field::{Dims, FieldError, ScalarField};

#[derive(Debug, Error)]
pub enum RawError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("bad header: {0}")]
    Header(String),
    #[error("file holds {actual} bytes, dims and dtype need {expected}")]
    Size { expected: usize, actual: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dtype {
    F32,
    #[default]
    F64,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

impl FromStr for Dtype {
    type Err = RawError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "f32" | "float32" => Ok(Dtype::F32),
            "f64" | "float64" => Ok(Dtype::F64),
            other => Err(RawError::Header(format!("unknown dtype {other:?}"))),
        }
    }
}

impl fmt::Display for Dtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dtype::F32 => "f32",
            Dtype::F64 => "f64",
        })
    }
}

/// Parses `NX,NY[,NZ]`.
pub fn parse_dims(s: &str) -> Result<Dims, RawError> {
    let parts: Result<Vec<usize>, _> = s.split(',').map(|p| p.trim().parse::<usize>()).collect();
    let parts = parts.map_err(|_| RawError::Header(format!("bad dims {s:?}")))?;
    match parts[..] {
        [nx, ny] => Ok(Dims::new(nx, ny, 1)?),
        [nx, ny, nz] => Ok(Dims::new(nx, ny, nz)?),
        _ => Err(RawError::Header(format!("dims need 2 or 3 values, got {s:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawHeader {
    pub dims: Dims,
    pub dtype: Dtype,
}

impl RawHeader {
    pub fn parse(text: &str) -> Result<Self, RawError> {
        let mut dims = None;
        let mut dtype = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| RawError::Header(format!("expected key=value, got {line:?}")))?;
            match key.trim() {
                "dims" => dims = Some(parse_dims(value)?),
                "dtype" => dtype = Some(value.parse()?),
                "order" if value.trim() == "row-major" => {}
                "order" => return Err(RawError::Header(format!("unsupported order {:?}", value.trim()))),
                other => return Err(RawError::Header(format!("unknown key {other:?}"))),
            }
        }
        Ok(Self {
            dims: dims.ok_or_else(|| RawError::Header("missing dims".into()))?,
            dtype: dtype.unwrap_or_default(),
        })
    }

    pub fn render(&self) -> String {
        let d = self.dims;
        format!("dims={},{},{}\ndtype={}\norder=row-major\n", d.nx, d.ny, d.nz, self.dtype)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".hdr");
    PathBuf::from(s)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RawError + '_ {
    move |source| RawError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_sidecar(path: &Path) -> Result<RawHeader, RawError> {
    let hdr = sidecar_path(path);
    let text = fs::read_to_string(&hdr).map_err(io_err(&hdr))?;
    RawHeader::parse(&text)
}

/// Decodes little-endian values.
pub fn decode_values(bytes: &[u8], dtype: Dtype) -> Vec<f64> {
    match dtype {
        Dtype::F32 => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
        Dtype::F64 => bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    }
}

pub fn encode_values(values: &[f64], dtype: Dtype) -> Vec<u8> {
    match dtype {
        Dtype::F32 => values.iter().flat_map(|&x| (x as f32).to_le_bytes()).collect(),
        Dtype::F64 => values.iter().flat_map(|&x| x.to_le_bytes()).collect(),
    }
}

/// Reads a raw grid. Without explicit dims the sidecar is required.
pub fn read_raw(path: &Path, dims: Option<Dims>, dtype: Option<Dtype>) -> Result<ScalarField, RawError> {
    let (dims, dtype) = match (dims, dtype) {
        (Some(d), Some(t)) => (d, t),
        (d, t) => {
            let h = read_sidecar(path)?;
            (d.unwrap_or(h.dims), t.unwrap_or(h.dtype))
        }
    };
    let bytes = fs::read(path).map_err(io_err(path))?;
    let expected = dims.len() * dtype.size();
    if bytes.len() != expected {
        return Err(RawError::Size {
            expected,
            actual: bytes.len(),
        });
    }
    Ok(ScalarField::new(dims, decode_values(&bytes, dtype))?)
}

/// Writes a raw grid and its sidecar.
pub fn write_raw(path: &Path, field: &ScalarField, dtype: Dtype) -> Result<(), RawError> {
    fs::write(path, encode_values(field.values(), dtype)).map_err(io_err(path))?;
    let hdr = sidecar_path(path);
    let header = RawHeader {
        dims: field.dims(),
        dtype,
    };
    fs::write(&hdr, header.render()).map_err(io_err(&hdr))
}
