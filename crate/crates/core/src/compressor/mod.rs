//! Reversible symbol-stream coders used as computable stand-ins for
//! algorithmic information content: the compressed length in bits of a
//! symbolic orbit, divided by its length, estimates its complexity rate.
//!
//! Three coders share one stream format (see [`header`]):
//!
//! * `lz78`: incremental parsing with fixed-width phrase codes.
//! * `castore`: a pair-concatenation dictionary coder.
//! * `ctw`: context-tree weighting with arithmetic coding. It is the
//!   default estimator because its finite-length redundancy is far below the
//!   two dictionary coders' at the alphabet sizes and lengths of interest.

mod bits;
mod castore;
mod ctw;
pub mod header;
mod lz78;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::SymbolicSequence;
use header::{Header, HEADER_BITS, HEADER_LEN};

/// Default dictionary / context-tree node cap.
pub const DEFAULT_NODE_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lz78,
    Castore,
    Ctw,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Lz78, Algorithm::Castore, Algorithm::Ctw];

    pub fn id(self) -> u8 {
        match self {
            Algorithm::Lz78 => 1,
            Algorithm::Castore => 2,
            Algorithm::Ctw => 3,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Algorithm::ALL.into_iter().find(|a| a.id() == id)
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lz78" => Ok(Algorithm::Lz78),
            "castore" => Ok(Algorithm::Castore),
            "ctw" => Ok(Algorithm::Ctw),
            other => Err(Error::domain(format!("unknown algorithm `{other}`"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Lz78 => "lz78",
            Algorithm::Castore => "castore",
            Algorithm::Ctw => "ctw",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionReport {
    pub input_len: u64,
    /// Dictionary phrases emitted, including a trailing partial phrase.
    /// Always 0 for `ctw`, which has no phrases.
    pub phrase_count: u64,
    /// Header plus payload. The dictionary coders count payload bits
    /// exactly; `ctw` payloads are whole bytes.
    pub encoded_bits: u64,
    /// `encoded_bits / input_len`, or 0 for empty input.
    pub rate: f64,
    pub algorithm: Algorithm,
}

/// Encodes with the chosen algorithm. Returns the full stream (header
/// included) and its report.
pub fn compress(
    seq: &SymbolicSequence,
    algorithm: Algorithm,
    node_cap: u64,
) -> Result<(Vec<u8>, CompressionReport)> {
    let alphabet = seq.alphabet_size;
    let header = Header {
        alphabet_size: u16::try_from(alphabet)
            .map_err(|_| Error::domain(format!("alphabet size {alphabet} exceeds 65535")))?,
        input_len: seq.len() as u64,
        algorithm,
    };
    let (payload, payload_bits, phrases) = match algorithm {
        Algorithm::Lz78 => {
            let e = lz78::encode(&seq.symbols, alphabet, node_cap)?;
            (e.payload, e.bits, e.phrases)
        }
        Algorithm::Castore => {
            let e = castore::encode(&seq.symbols, alphabet, node_cap)?;
            (e.payload, e.bits, e.phrases)
        }
        Algorithm::Ctw => {
            let p = ctw::encode(&seq.symbols, alphabet, node_cap)?;
            let bits = p.len() as u64 * 8;
            (p, bits, 0)
        }
    };
    let mut stream = Vec::with_capacity(HEADER_LEN + payload.len());
    stream.extend_from_slice(&header.to_bytes());
    stream.extend_from_slice(&payload);
    let encoded_bits = HEADER_BITS + payload_bits;
    let report = CompressionReport {
        input_len: seq.len() as u64,
        phrase_count: phrases,
        encoded_bits,
        rate: if seq.is_empty() {
            0.0
        } else {
            encoded_bits as f64 / seq.len() as f64
        },
        algorithm,
    };
    Ok((stream, report))
}

/// Decodes any stream produced by [`compress`].
pub fn decompress(stream: &[u8]) -> Result<SymbolicSequence> {
    decompress_with_cap(stream, DEFAULT_NODE_CAP)
}

pub fn decompress_with_cap(stream: &[u8], node_cap: u64) -> Result<SymbolicSequence> {
    let h = Header::parse(stream)?;
    let payload = &stream[HEADER_LEN..];
    let n = h.alphabet_size as usize;
    let symbols = match h.algorithm {
        Algorithm::Lz78 => lz78::decode(payload, HEADER_LEN, n, h.input_len)?,
        Algorithm::Castore => castore::decode(payload, HEADER_LEN, n, h.input_len)?,
        Algorithm::Ctw => ctw::decode(payload, HEADER_LEN, n, h.input_len, node_cap)?,
    };
    Ok(SymbolicSequence {
        symbols,
        alphabet_size: n,
        source: None,
    })
}

pub fn lz78_encode(seq: &SymbolicSequence) -> Result<(Vec<u8>, CompressionReport)> {
    compress(seq, Algorithm::Lz78, DEFAULT_NODE_CAP)
}

pub fn castore_encode(seq: &SymbolicSequence) -> Result<(Vec<u8>, CompressionReport)> {
    compress(seq, Algorithm::Castore, DEFAULT_NODE_CAP)
}

pub fn ctw_encode(seq: &SymbolicSequence) -> Result<(Vec<u8>, CompressionReport)> {
    compress(seq, Algorithm::Ctw, DEFAULT_NODE_CAP)
}

/// Decodes an `lz78` stream; other algorithms are rejected.
pub fn lz78_decode(stream: &[u8]) -> Result<SymbolicSequence> {
    let h = Header::parse(stream)?;
    if h.algorithm != Algorithm::Lz78 {
        return Err(Error::Decode {
            offset: 15,
            reason: format!("expected an lz78 stream, found {}", h.algorithm),
        });
    }
    decompress(stream)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefixRate {
    pub len: usize,
    pub rate: f64,
}

#[derive(Debug, Clone)]
pub struct ComplexityRate {
    pub rate: f64,
    pub report: CompressionReport,
    /// Rates of prefixes of length 2^10, 2^11, ... and the full length.
    pub prefix_curve: Vec<PrefixRate>,
}

/// Bits per symbol of the full sequence.
pub fn compression_rate(seq: &SymbolicSequence, algorithm: Algorithm) -> Result<CompressionReport> {
    if seq.is_empty() {
        return Err(Error::domain("complexity rate of an empty sequence"));
    }
    compress(seq, algorithm, DEFAULT_NODE_CAP).map(|(_, r)| r)
}

/// [`compression_rate`] plus the rate of logarithmically spaced prefixes.
pub fn complexity_rate(seq: &SymbolicSequence, algorithm: Algorithm) -> Result<ComplexityRate> {
    let report = compression_rate(seq, algorithm)?;
    let mut prefix_curve = Vec::new();
    let mut len = 1usize << 10;
    while len < seq.len() {
        let prefix = SymbolicSequence {
            symbols: seq.symbols[..len].to_vec(),
            alphabet_size: seq.alphabet_size,
            source: None,
        };
        let r = compression_rate(&prefix, algorithm)?;
        prefix_curve.push(PrefixRate { len, rate: r.rate });
        len <<= 1;
    }
    prefix_curve.push(PrefixRate {
        len: seq.len(),
        rate: report.rate,
    });
    Ok(ComplexityRate {
        rate: report.rate,
        report,
        prefix_curve,
    })
}
