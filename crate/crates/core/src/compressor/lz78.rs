//! LZ78 incremental parsing with fixed-width phrase codes.
//!
//! Phrase `k` (1-based) is written as the index of its parent phrase in
//! `ceil(log2 k)` bits followed by the extension symbol in `ceil(log2 N)`
//! bits. If the input ends inside the dictionary, the last phrase is written
//! as an index alone; the decoder recognizes it because the header's input
//! length is reached before a symbol would be read.

use rustc_hash::FxHashMap;

use super::bits::{ceil_log2, BitReader, BitWriter};
use crate::error::{Error, Result};

pub(crate) struct Encoded {
    pub payload: Vec<u8>,
    pub bits: u64,
    pub phrases: u64,
}

pub(crate) fn encode(symbols: &[u16], alphabet: usize, node_cap: u64) -> Result<Encoded> {
    let sym_bits = ceil_log2(alphabet as u64);
    let mut trie: FxHashMap<u64, u32> = FxHashMap::default();
    let mut out = BitWriter::new();
    let mut node = 0u32;
    let mut k = 0u64;
    for &s in symbols {
        let key = (node as u64) << 16 | s as u64;
        if let Some(&child) = trie.get(&key) {
            node = child;
            continue;
        }
        k += 1;
        if k > node_cap {
            return Err(Error::Resource {
                cap: "dictionary_nodes",
                needed: k,
                limit: node_cap,
            });
        }
        out.write(node as u64, ceil_log2(k));
        out.write(s as u64, sym_bits);
        trie.insert(key, k as u32);
        node = 0;
    }
    if node != 0 {
        k += 1;
        out.write(node as u64, ceil_log2(k));
    }
    let bits = out.bit_len();
    Ok(Encoded {
        payload: out.finish(),
        bits,
        phrases: k,
    })
}

pub(crate) fn decode(
    payload: &[u8],
    base: usize,
    alphabet: usize,
    input_len: u64,
) -> Result<Vec<u16>> {
    let sym_bits = ceil_log2(alphabet as u64);
    let mut r = BitReader::new(payload, base);
    let mut out: Vec<u16> = Vec::with_capacity(input_len.min(1 << 24) as usize);
    // (start, len) of each phrase's word within `out`; index 0 is the empty root.
    let mut words: Vec<(usize, usize)> = vec![(0, 0)];
    let target = input_len as usize;
    let mut k = 0u64;
    while out.len() < target {
        k += 1;
        let at = r.byte_offset();
        let parent = r.read(ceil_log2(k))? as usize;
        if parent >= words.len() {
            return Err(Error::Decode {
                offset: at,
                reason: format!("phrase {k} references unknown parent {parent}"),
            });
        }
        let (start, len) = words[parent];
        if out.len() + len > target {
            return Err(Error::Decode {
                offset: at,
                reason: "phrase overruns declared length".into(),
            });
        }
        let phrase_start = out.len();
        out.extend_from_within(start..start + len);
        if out.len() == target {
            break;
        }
        let at = r.byte_offset();
        let s = r.read(sym_bits)?;
        if s as usize >= alphabet {
            return Err(Error::Decode {
                offset: at,
                reason: format!("symbol {s} outside alphabet of size {alphabet}"),
            });
        }
        out.push(s as u16);
        words.push((phrase_start, len + 1));
    }
    r.finish()?;
    Ok(out)
}
