use crate::error::{Error, Result};

/// MSB-first bit packer.
#[derive(Default)]
pub(crate) struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    pending: u32,
    bits: u64,
}

impl BitWriter {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub(crate) fn write(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 32);
        debug_assert!(width == 32 || value < (1u64 << width));
        if width == 0 {
            return;
        }
        self.acc = (self.acc << width) | value;
        self.pending += width;
        self.bits += width as u64;
        while self.pending >= 8 {
            self.pending -= 8;
            self.bytes.push((self.acc >> self.pending) as u8);
        }
        self.acc &= (1u64 << self.pending) - 1;
    }

    pub(crate) fn bit_len(&self) -> u64 {
        self.bits
    }

    /// Pads the final byte with zeros.
    pub(crate) fn finish(mut self) -> Vec<u8> {
        if self.pending > 0 {
            self.bytes.push((self.acc << (8 - self.pending)) as u8);
        }
        self.bytes
    }
}

pub(crate) struct BitReader<'a> {
    data: &'a [u8],
    /// Offset of `data` within the whole stream, for error reporting.
    base: usize,
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub(crate) fn new(data: &'a [u8], base: usize) -> Self {
        BitReader { data, base, pos: 0 }
    }

    #[inline]
    pub(crate) fn read(&mut self, width: u32) -> Result<u64> {
        let end = self.pos + width as u64;
        if end > self.data.len() as u64 * 8 {
            return Err(Error::Decode {
                offset: self.base + self.data.len(),
                reason: "stream truncated".into(),
            });
        }
        let mut v = 0u64;
        let mut pos = self.pos;
        while pos < end {
            let byte = self.data[(pos / 8) as usize];
            let in_byte = (pos % 8) as u32;
            let take = (8 - in_byte).min((end - pos) as u32);
            let chunk = (byte >> (8 - in_byte - take)) & ((1u16 << take) - 1) as u8;
            v = (v << take) | chunk as u64;
            pos += take as u64;
        }
        self.pos = end;
        Ok(v)
    }

    pub(crate) fn byte_offset(&self) -> usize {
        self.base + (self.pos / 8) as usize
    }

    /// Accepts only zero padding up to the byte boundary and no extra bytes.
    pub(crate) fn finish(self) -> Result<()> {
        let used = self.pos.div_ceil(8) as usize;
        if used != self.data.len() {
            return Err(Error::Decode {
                offset: self.base + used,
                reason: format!("{} trailing bytes", self.data.len() - used),
            });
        }
        let rem = (self.pos % 8) as u32;
        if rem != 0 && self.data[used - 1] & ((1u8 << (8 - rem)) - 1) != 0 {
            return Err(Error::Decode {
                offset: self.base + used - 1,
                reason: "nonzero padding bits".into(),
            });
        }
        Ok(())
    }
}

/// `ceil(log2(k))` for `k >= 1`.
#[inline]
pub(crate) fn ceil_log2(k: u64) -> u32 {
    if k <= 1 {
        0
    } else {
        64 - (k - 1).leading_zeros()
    }
}
