//! Context-tree weighting over the preceding symbols, driving a binary
//! arithmetic coder.
//!
//! Each symbol is split into `B = ceil(log2 N)` binary decisions, MSB first.
//! Decision `j` of a symbol is predicted by a context tree whose depth-`d`
//! node is identified by the last `d` symbols together with the decisions
//! already taken for the current symbol. Nodes hold Krichevsky-Trofimov
//! counts and the ratio `beta = P_e / prod(P_w children)`, so that the
//! weighted conditional probability along the active path is
//!
//! ```text
//! pw_d(x) = (beta_d * pe_d(x) + pw_{d+1}(x)) / (beta_d + 1),  pw_D = pe_D
//! ```
//!
//! The tree depth is `floor(log_N len)` clamped to `[1, 40 / B]`, a function
//! of the header fields only. Encoder and decoder evaluate the model with the
//! same sequence of floating-point operations (no transcendental calls), so
//! a stream decodes on any IEEE-754 platform.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::partition::bits_per_symbol;

const PROB_BITS: u32 = 24;
const PROB_ONE: u64 = 1 << PROB_BITS;
const BETA_MAX: f64 = 1e250;
const BETA_MIN: f64 = 1e-250;
const CONTEXT_BITS: usize = 40;
const COUNT_LIMIT: u32 = 1 << 30;

pub(crate) fn tree_depth(alphabet: usize, len: u64) -> usize {
    let b = bits_per_symbol(alphabet);
    let cap = (CONTEXT_BITS / b).max(1);
    let mut d = 0usize;
    let mut reach = 1u128;
    while d < cap {
        reach = reach.saturating_mul(alphabet as u128);
        if reach > len as u128 {
            break;
        }
        d += 1;
    }
    d.clamp(1, cap)
}

#[derive(Clone, Copy)]
struct Node {
    zeros: u32,
    ones: u32,
    beta: f64,
}

impl Node {
    const FRESH: Node = Node {
        zeros: 0,
        ones: 0,
        beta: 1.0,
    };

    #[inline]
    fn kt_one(&self) -> f64 {
        (self.ones as f64 + 0.5) / ((self.zeros + self.ones) as f64 + 1.0)
    }
}

struct Model {
    depth: usize,
    sym_bits: u32,
    history: u64,
    index: FxHashMap<u64, u32>,
    nodes: Vec<Node>,
    node_cap: u64,
    path: Vec<u32>,
    pe: Vec<f64>,
    pw: Vec<f64>,
}

impl Model {
    fn new(alphabet: usize, len: u64, node_cap: u64) -> Self {
        let depth = tree_depth(alphabet, len);
        Model {
            depth,
            sym_bits: bits_per_symbol(alphabet) as u32,
            history: 0,
            index: FxHashMap::default(),
            nodes: Vec::new(),
            node_cap,
            path: vec![0; depth + 1],
            pe: vec![0.0; depth + 1],
            pw: vec![0.0; depth + 1],
        }
    }

    /// Probability that the next decision is 1, given the decisions
    /// `prefix` (with a leading 1 marker) taken so far for this symbol.
    fn predict(&mut self, prefix: u64) -> Result<f64> {
        let b = self.sym_bits as usize;
        for d in 0..=self.depth {
            let ctx = if d == 0 {
                0
            } else {
                self.history & ((1u64 << (d * b)) - 1)
            };
            let key = (d as u64) << 58 | ctx << 17 | prefix;
            let next = self.nodes.len() as u32;
            let idx = *self.index.entry(key).or_insert(next);
            if idx == next {
                if next as u64 >= self.node_cap {
                    return Err(Error::Resource {
                        cap: "context_nodes",
                        needed: next as u64 + 1,
                        limit: self.node_cap,
                    });
                }
                self.nodes.push(Node::FRESH);
            }
            self.path[d] = idx;
        }
        let leaf = &self.nodes[self.path[self.depth] as usize];
        self.pe[self.depth] = leaf.kt_one();
        self.pw[self.depth] = self.pe[self.depth];
        for d in (0..self.depth).rev() {
            let node = &self.nodes[self.path[d] as usize];
            let pe = node.kt_one();
            self.pe[d] = pe;
            self.pw[d] = (node.beta * pe + self.pw[d + 1]) / (node.beta + 1.0);
        }
        Ok(self.pw[0])
    }

    fn update(&mut self, bit: bool) {
        for d in 0..=self.depth {
            let pe = self.pe[d];
            let node = &mut self.nodes[self.path[d] as usize];
            if d < self.depth {
                let pw_child = self.pw[d + 1];
                let (e, w) = if bit {
                    (pe, pw_child)
                } else {
                    (1.0 - pe, 1.0 - pw_child)
                };
                node.beta = (node.beta * e / w).clamp(BETA_MIN, BETA_MAX);
            }
            if bit {
                node.ones += 1;
            } else {
                node.zeros += 1;
            }
            if node.zeros + node.ones >= COUNT_LIMIT {
                node.zeros = node.zeros.div_ceil(2);
                node.ones = node.ones.div_ceil(2);
            }
        }
    }

    fn push_symbol(&mut self, s: u16) {
        let b = self.sym_bits as usize;
        let keep = self.depth * b;
        let mask = if keep >= 64 {
            u64::MAX
        } else {
            (1u64 << keep) - 1
        };
        self.history = ((self.history << b) | s as u64) & mask;
    }
}

#[inline]
fn quantize(p_one: f64) -> u64 {
    ((p_one * PROB_ONE as f64) as u64).clamp(1, PROB_ONE - 1)
}

/// Carry-less binary arithmetic coder on a 32-bit interval.
struct Encoder {
    lo: u32,
    hi: u32,
    out: Vec<u8>,
}

impl Encoder {
    fn new() -> Self {
        Encoder {
            lo: 0,
            hi: u32::MAX,
            out: Vec::new(),
        }
    }

    #[inline]
    fn code(&mut self, bit: bool, p_one: u64) {
        let mid = self.lo + (((self.hi - self.lo) as u64 * p_one) >> PROB_BITS) as u32;
        if bit {
            self.hi = mid;
        } else {
            self.lo = mid + 1;
        }
        while (self.lo ^ self.hi) & 0xff00_0000 == 0 {
            self.out.push((self.hi >> 24) as u8);
            self.lo <<= 8;
            self.hi = (self.hi << 8) | 0xff;
        }
    }

    fn finish(mut self) -> Vec<u8> {
        self.out.extend_from_slice(&self.lo.to_be_bytes());
        self.out
    }
}

struct Decoder<'a> {
    lo: u32,
    hi: u32,
    x: u32,
    data: &'a [u8],
    pos: usize,
    base: usize,
}

impl<'a> Decoder<'a> {
    fn new(data: &'a [u8], base: usize) -> Result<Self> {
        let mut d = Decoder {
            lo: 0,
            hi: u32::MAX,
            x: 0,
            data,
            pos: 0,
            base,
        };
        for _ in 0..4 {
            d.x = (d.x << 8) | d.next_byte()? as u32;
        }
        Ok(d)
    }

    #[inline]
    fn next_byte(&mut self) -> Result<u8> {
        let b = *self.data.get(self.pos).ok_or_else(|| Error::Decode {
            offset: self.base + self.pos,
            reason: "stream truncated".into(),
        })?;
        self.pos += 1;
        Ok(b)
    }

    #[inline]
    fn code(&mut self, p_one: u64) -> Result<bool> {
        let mid = self.lo + (((self.hi - self.lo) as u64 * p_one) >> PROB_BITS) as u32;
        let bit = self.x <= mid;
        if bit {
            self.hi = mid;
        } else {
            self.lo = mid + 1;
        }
        while (self.lo ^ self.hi) & 0xff00_0000 == 0 {
            self.lo <<= 8;
            self.hi = (self.hi << 8) | 0xff;
            self.x = (self.x << 8) | self.next_byte()? as u32;
        }
        Ok(bit)
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(Error::Decode {
                offset: self.base + self.pos,
                reason: format!("{} trailing bytes", self.data.len() - self.pos),
            });
        }
        Ok(())
    }
}

pub(crate) fn encode(symbols: &[u16], alphabet: usize, node_cap: u64) -> Result<Vec<u8>> {
    if symbols.is_empty() {
        return Ok(Vec::new());
    }
    let mut model = Model::new(alphabet, symbols.len() as u64, node_cap);
    let mut enc = Encoder::new();
    let b = model.sym_bits;
    for &s in symbols {
        let mut prefix = 1u64;
        for j in (0..b).rev() {
            let bit = (s >> j) & 1 == 1;
            let p = model.predict(prefix)?;
            enc.code(bit, quantize(p));
            model.update(bit);
            prefix = (prefix << 1) | bit as u64;
        }
        model.push_symbol(s);
    }
    Ok(enc.finish())
}

pub(crate) fn decode(
    payload: &[u8],
    base: usize,
    alphabet: usize,
    input_len: u64,
    node_cap: u64,
) -> Result<Vec<u16>> {
    if input_len == 0 {
        if !payload.is_empty() {
            return Err(Error::Decode {
                offset: base,
                reason: "payload present for empty input".into(),
            });
        }
        return Ok(Vec::new());
    }
    let mut model = Model::new(alphabet, input_len, node_cap);
    let mut dec = Decoder::new(payload, base)?;
    let b = model.sym_bits;
    let mut out = Vec::with_capacity(input_len.min(1 << 24) as usize);
    for _ in 0..input_len {
        let mut prefix = 1u64;
        for _ in 0..b {
            let p = model.predict(prefix)?;
            let bit = dec.code(quantize(p))?;
            model.update(bit);
            prefix = (prefix << 1) | bit as u64;
        }
        let s = prefix ^ (1u64 << b);
        if s as usize >= alphabet {
            return Err(Error::Decode {
                offset: base + dec.pos,
                reason: format!("symbol {s} outside alphabet of size {alphabet}"),
            });
        }
        model.push_symbol(s as u16);
        out.push(s as u16);
    }
    dec.finish()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_selection() {
        assert_eq!(tree_depth(2, 1_000_000), 19);
        assert_eq!(tree_depth(16, 1_000_000), 4);
        assert_eq!(tree_depth(250, 1_000_000), 2);
        assert_eq!(tree_depth(2, 1), 1);
        assert_eq!(tree_depth(300, 1_000_000_000_000), 4);
    }

    #[test]
    fn coder_round_trip_with_skewed_probabilities() {
        let probs = [1u64, 7, PROB_ONE / 2, PROB_ONE - 1, PROB_ONE / 3];
        let mut enc = Encoder::new();
        let mut bits = Vec::new();
        for i in 0..20_000u64 {
            let p = probs[(i % 5) as usize];
            let bit = ((i * 2654435761) >> 7) % 3 == 0;
            bits.push((bit, p));
            enc.code(bit, p);
        }
        let bytes = enc.finish();
        let mut dec = Decoder::new(&bytes, 0).unwrap();
        for &(bit, p) in &bits {
            assert_eq!(dec.code(p).unwrap(), bit);
        }
        dec.finish().unwrap();
    }

    #[test]
    fn deterministic_input_costs_almost_nothing() {
        let s = vec![3u16; 100_000];
        let out = encode(&s, 4, u64::MAX).unwrap();
        assert!(out.len() < 64, "{} bytes", out.len());
        assert_eq!(decode(&out, 0, 4, 100_000, u64::MAX).unwrap(), s);
    }

    #[test]
    fn node_cap_is_reported() {
        let s: Vec<u16> = (0..1000).map(|i| (i * 7 % 5) as u16).collect();
        assert!(matches!(
            encode(&s, 5, 10),
            Err(Error::Resource {
                cap: "context_nodes",
                ..
            })
        ));
    }
}
