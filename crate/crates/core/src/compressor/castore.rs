//! Pair-concatenation dictionary coder in the style of CASToRe.
//!
//! The dictionary starts with the `N` single symbols. Each step takes the
//! longest dictionary word at the cursor, then the longest dictionary word
//! right after it, writes both indices in `ceil(log2 |D|)` bits each and adds
//! their concatenation to the dictionary. The concatenation is always new:
//! had it been in the dictionary it would have been the first match. If the
//! input ends after the first word, that word is written alone.

use rustc_hash::FxHashMap;

use super::bits::{ceil_log2, BitReader, BitWriter};
use super::lz78::Encoded;
use crate::error::{Error, Result};

const NOT_A_WORD: u32 = u32::MAX;

struct Dictionary {
    children: FxHashMap<u64, u32>,
    word_of: Vec<u32>,
    size: u64,
    node_cap: u64,
}

impl Dictionary {
    fn new(alphabet: usize, node_cap: u64) -> Self {
        let mut d = Dictionary {
            children: FxHashMap::default(),
            word_of: vec![NOT_A_WORD],
            size: alphabet as u64,
            node_cap,
        };
        for s in 0..alphabet {
            let node = d.word_of.len() as u32;
            d.word_of.push(s as u32);
            d.children.insert(s as u64, node);
        }
        d
    }

    /// Longest word at `symbols[pos..]` as (word index, length, trie node).
    fn longest(&self, symbols: &[u16], pos: usize) -> (u32, usize, u32) {
        let mut node = 0u32;
        let mut best = (NOT_A_WORD, 0, 0);
        for (i, &s) in symbols[pos..].iter().enumerate() {
            match self.children.get(&((node as u64) << 16 | s as u64)) {
                Some(&child) => {
                    node = child;
                    if self.word_of[node as usize] != NOT_A_WORD {
                        best = (self.word_of[node as usize], i + 1, node);
                    }
                }
                None => break,
            }
        }
        best
    }

    fn insert(&mut self, from: u32, tail: &[u16]) -> Result<()> {
        let mut node = from;
        for &s in tail {
            let key = (node as u64) << 16 | s as u64;
            node = match self.children.get(&key) {
                Some(&c) => c,
                None => {
                    let c = self.word_of.len() as u64;
                    if c >= self.node_cap {
                        return Err(Error::Resource {
                            cap: "dictionary_nodes",
                            needed: c + 1,
                            limit: self.node_cap,
                        });
                    }
                    self.word_of.push(NOT_A_WORD);
                    self.children.insert(key, c as u32);
                    c as u32
                }
            };
        }
        debug_assert_eq!(self.word_of[node as usize], NOT_A_WORD);
        self.word_of[node as usize] = self.size as u32;
        self.size += 1;
        Ok(())
    }
}

pub(crate) fn encode(symbols: &[u16], alphabet: usize, node_cap: u64) -> Result<Encoded> {
    let mut dict = Dictionary::new(alphabet, node_cap);
    let mut out = BitWriter::new();
    let mut pos = 0usize;
    let mut phrases = 0u64;
    while pos < symbols.len() {
        let width = ceil_log2(dict.size);
        let (w1, l1, node1) = dict.longest(symbols, pos);
        phrases += 1;
        out.write(w1 as u64, width);
        if pos + l1 == symbols.len() {
            break;
        }
        let (w2, l2, _) = dict.longest(symbols, pos + l1);
        out.write(w2 as u64, width);
        dict.insert(node1, &symbols[pos + l1..pos + l1 + l2])?;
        pos += l1 + l2;
    }
    let bits = out.bit_len();
    Ok(Encoded {
        payload: out.finish(),
        bits,
        phrases,
    })
}

pub(crate) fn decode(
    payload: &[u8],
    base: usize,
    alphabet: usize,
    input_len: u64,
) -> Result<Vec<u16>> {
    let mut r = BitReader::new(payload, base);
    let target = input_len as usize;
    let mut out: Vec<u16> = Vec::with_capacity(input_len.min(1 << 24) as usize);
    // Spans of learned words (index >= N) within `out`.
    let mut spans: Vec<(usize, usize)> = Vec::new();

    let emit = |out: &mut Vec<u16>, spans: &[(usize, usize)], idx: u64, at: usize| -> Result<()> {
        let len = if (idx as usize) < alphabet {
            1
        } else {
            spans[idx as usize - alphabet].1
        };
        if out.len() + len > target {
            return Err(Error::Decode {
                offset: at,
                reason: "word overruns declared length".into(),
            });
        }
        if (idx as usize) < alphabet {
            out.push(idx as u16);
        } else {
            let (start, len) = spans[idx as usize - alphabet];
            out.extend_from_within(start..start + len);
        }
        Ok(())
    };

    while out.len() < target {
        let size = (alphabet + spans.len()) as u64;
        let width = ceil_log2(size);
        let phrase_start = out.len();

        let at = r.byte_offset();
        let w1 = r.read(width)?;
        if w1 >= size {
            return Err(Error::Decode {
                offset: at,
                reason: format!("word index {w1} outside dictionary of size {size}"),
            });
        }
        emit(&mut out, &spans, w1, at)?;
        if out.len() == target {
            break;
        }
        let at = r.byte_offset();
        let w2 = r.read(width)?;
        if w2 >= size {
            return Err(Error::Decode {
                offset: at,
                reason: format!("word index {w2} outside dictionary of size {size}"),
            });
        }
        emit(&mut out, &spans, w2, at)?;
        spans.push((phrase_start, out.len() - phrase_start));
    }
    r.finish()?;
    Ok(out)
}
