//! LSB-first bit packing.

use super::CodecError;

#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    filled: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `width` bits of `value` (`width` ≤ 64).
    pub fn write(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value >> width == 0);
        let mut value = value;
        let mut width = width;
        while width > 0 {
            let take = width.min(64 - self.filled).min(32);
            let chunk = value & ((1u64 << take) - 1);
            self.acc |= chunk << self.filled;
            self.filled += take;
            value >>= take;
            width -= take;
            while self.filled >= 8 {
                self.bytes.push(self.acc as u8);
                self.acc >>= 8;
                self.filled -= 8;
            }
        }
    }

    /// Flushes a partial byte with zero padding.
    pub fn pad(&mut self) {
        if self.filled > 0 {
            self.bytes.push(self.acc as u8);
            self.acc = 0;
            self.filled = 0;
        }
    }

    pub fn into_bytes(mut self) -> Vec<u8> {
        self.pad();
        self.bytes
    }
}

#[derive(Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    bit: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, bit: 0 }
    }

    pub fn read(&mut self, width: u32) -> Result<u64, CodecError> {
        let width = width as usize;
        if self.bit + width > self.bytes.len() * 8 {
            return Err(CodecError::Truncated);
        }
        let mut out = 0u64;
        let mut got = 0;
        while got < width {
            let byte = self.bytes[(self.bit) / 8] as u64;
            let shift = self.bit % 8;
            let take = (8 - shift).min(width - got);
            let chunk = (byte >> shift) & ((1u64 << take) - 1);
            out |= chunk << got;
            got += take;
            self.bit += take;
        }
        Ok(out)
    }

    /// Skips to the next byte boundary; returns the number of bytes consumed.
    pub fn align(&mut self) -> usize {
        self.bit = self.bit.div_ceil(8) * 8;
        self.bit / 8
    }
}

/// Bits needed to tell `count` symbols apart, at least 1.
pub fn width_for(count: usize) -> u32 {
    if count <= 2 {
        1
    } else {
        usize::BITS - (count - 1).leading_zeros()
    }
}
