//! General-purpose lossless stream codecs applied to the archive payload.

use std::io::{Read, Write};

use super::CodecError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    Deflate,
    #[default]
    Bzip2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Compress,
    Decompress,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Deflate => "deflate",
            Backend::Bzip2 => "bzip2",
        }
    }
}

fn backend_err(backend: Backend, e: std::io::Error) -> CodecError {
    CodecError::Backend(format!("{}: {e}", backend.name()))
}

/// Runs `bytes` through `backend` in the given direction.
pub fn lossless_pass(bytes: &[u8], direction: Direction, backend: Backend) -> Result<Vec<u8>, CodecError> {
    let err = |e| backend_err(backend, e);
    match (backend, direction) {
        (Backend::Bzip2, Direction::Compress) => {
            let mut enc = bzip2::write::BzEncoder::new(Vec::new(), bzip2::Compression::best());
            enc.write_all(bytes).map_err(err)?;
            enc.finish().map_err(err)
        }
        (Backend::Bzip2, Direction::Decompress) => {
            let mut out = Vec::new();
            bzip2::read::BzDecoder::new(bytes)
                .read_to_end(&mut out)
                .map_err(err)?;
            Ok(out)
        }
        (Backend::Deflate, Direction::Compress) => {
            let mut enc = flate2::write::DeflateEncoder::new(Vec::new(), flate2::Compression::best());
            enc.write_all(bytes).map_err(err)?;
            enc.finish().map_err(err)
        }
        (Backend::Deflate, Direction::Decompress) => {
            let mut out = Vec::new();
            flate2::read::DeflateDecoder::new(bytes)
                .read_to_end(&mut out)
                .map_err(err)?;
            Ok(out)
        }
    }
}
