//! Fixed 16-byte little-endian stream header:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "EPSZ"
//! 4       1     format version (1)
//! 5       2     alphabet size N
//! 7       8     input length in symbols
//! 15      1     algorithm id (1 = lz78, 2 = castore, 3 = ctw)
//! ```

use super::Algorithm;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"EPSZ";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 16;
pub const HEADER_BITS: u64 = HEADER_LEN as u64 * 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub alphabet_size: u16,
    pub input_len: u64,
    pub algorithm: Algorithm,
}

impl Header {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4] = VERSION;
        b[5..7].copy_from_slice(&self.alphabet_size.to_le_bytes());
        b[7..15].copy_from_slice(&self.input_len.to_le_bytes());
        b[15] = self.algorithm.id();
        b
    }

    pub fn parse(stream: &[u8]) -> Result<Header> {
        if stream.len() < HEADER_LEN {
            return Err(Error::Decode {
                offset: stream.len(),
                reason: format!("header needs {HEADER_LEN} bytes"),
            });
        }
        if stream[0..4] != MAGIC {
            return Err(Error::Decode {
                offset: 0,
                reason: "bad magic".into(),
            });
        }
        if stream[4] != VERSION {
            return Err(Error::Decode {
                offset: 4,
                reason: format!("unsupported version {}", stream[4]),
            });
        }
        let alphabet_size = u16::from_le_bytes([stream[5], stream[6]]);
        if alphabet_size < 2 {
            return Err(Error::Decode {
                offset: 5,
                reason: format!("alphabet size {alphabet_size} below 2"),
            });
        }
        let input_len = u64::from_le_bytes(stream[7..15].try_into().expect("8 bytes"));
        let algorithm = Algorithm::from_id(stream[15]).ok_or_else(|| Error::Decode {
            offset: 15,
            reason: format!("unknown algorithm id {}", stream[15]),
        })?;
        Ok(Header {
            alphabet_size,
            input_len,
            algorithm,
        })
    }
}
