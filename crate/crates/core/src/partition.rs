//! Uniform partitions of [0, 1], the symbolic coding of orbits, and the exact
//! interval geometry of refined partitions.

use std::collections::HashMap;
use std::io::Write;

use rustc_hash::FxHashMap;

use crate::dynamics::{MapSpec, NoiseSpec, RealOrbit};
use crate::error::{Error, Result};

/// Default cap on the number of intervals `refine_cylinders` may produce.
pub const DEFAULT_CYLINDER_CAP: u64 = 1_000_000;

/// `N` cells of width `1/N`: `[i/N, (i+1)/N)` except the last, which is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    cells: u16,
}

impl Partition {
    pub fn new(cells: usize) -> Result<Self> {
        if !(2..=u16::MAX as usize).contains(&cells) {
            return Err(Error::domain(format!(
                "partition needs between 2 and {} cells, got {cells}",
                u16::MAX
            )));
        }
        Ok(Partition {
            cells: cells as u16,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.cells as usize
    }

    pub fn diameter(&self) -> f64 {
        1.0 / self.cells as f64
    }

    #[inline]
    pub fn cell(&self, x: f64) -> u16 {
        let n = self.cells as f64;
        ((x * n) as u16).min(self.cells - 1)
    }

    /// Closed hull `[i/N, (i+1)/N]` of cell `i`.
    pub fn bounds(&self, i: u16) -> (f64, f64) {
        let n = self.cells as f64;
        (i as f64 / n, (i as f64 + 1.0) / n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceMeta {
    pub map: MapSpec,
    pub noise: NoiseSpec,
    pub eps: f64,
}

/// A finite word over `{0, .., N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicSequence {
    pub symbols: Vec<u16>,
    pub alphabet_size: usize,
    pub source: Option<SourceMeta>,
}

impl SymbolicSequence {
    pub fn new(symbols: Vec<u16>, alphabet_size: usize) -> Result<Self> {
        if !(2..=u16::MAX as usize).contains(&alphabet_size) {
            return Err(Error::domain(format!(
                "alphabet size must lie in [2, 65535], got {alphabet_size}"
            )));
        }
        if let Some(bad) = symbols.iter().find(|&&s| s as usize >= alphabet_size) {
            return Err(Error::domain(format!(
                "symbol {bad} outside alphabet of size {alphabet_size}"
            )));
        }
        Ok(SymbolicSequence {
            symbols,
            alphabet_size,
            source: None,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Symbolic orbit: `symbol_j = min(floor(x_j N), N - 1)`.
pub fn encode(orbit: &RealOrbit, partition: &Partition) -> SymbolicSequence {
    SymbolicSequence {
        symbols: orbit.points.iter().map(|&x| partition.cell(x)).collect(),
        alphabet_size: partition.cell_count(),
        source: Some(SourceMeta {
            map: orbit.map,
            noise: orbit.noise,
            eps: partition.diameter(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub left: f64,
    pub right: f64,
    pub word: Vec<u16>,
}

impl Cylinder {
    pub fn diameter(&self) -> f64 {
        self.right - self.left
    }
}

/// Interval decomposition of the refined partition `Z v f^-1 Z v ... v f^-(n-1) Z`.
#[derive(Debug, Clone)]
pub struct CylinderSet {
    pub depth: usize,
    /// Sorted by left endpoint.
    pub intervals: Vec<Cylinder>,
    pub min_diameter: f64,
}

impl CylinderSet {
    /// CSV with columns `left,right,word`; the word is written as
    /// dash-separated cell indices.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "left,right,word")?;
        for c in &self.intervals {
            let word: Vec<String> = c.word.iter().map(|s| s.to_string()).collect();
            writeln!(out, "{:.17e},{:.17e},{}", c.left, c.right, word.join("-"))?;
        }
        out.flush()
    }
}

// Pieces narrower than this, relative to their position, are rounding
// artifacts of an endpoint that lands exactly on a cell boundary.
const SLIVER: f64 = 64.0 * f64::EPSILON;

/// Exact cylinders of depth `n` for a piecewise-monotone map, built by pulling
/// interval endpoints back through each monotone branch.
pub fn refine_cylinders(
    map: &MapSpec,
    partition: &Partition,
    n: usize,
    cap: u64,
) -> Result<CylinderSet> {
    if n == 0 {
        return Err(Error::domain("cylinder depth must be at least 1"));
    }
    let cells = partition.cell_count() as u64;
    let branches = map.branch_count() as u64;
    let needed = (1..n).fold(cells, |acc, _| acc.saturating_mul(branches));
    if needed > cap {
        return Err(Error::Resource {
            cap: "cylinder_cap",
            needed,
            limit: cap,
        });
    }

    let mut level: Vec<Cylinder> = (0..partition.cell_count() as u16)
        .map(|i| {
            let (left, right) = partition.bounds(i);
            Cylinder {
                left,
                right,
                word: vec![i],
            }
        })
        .collect();

    let mut domains = Vec::with_capacity(map.branch_count());
    let mut lo = 0.0;
    for &b in map.branch_points() {
        domains.push((lo, b));
        lo = b;
    }
    domains.push((lo, 1.0));

    for _ in 1..n {
        let mut next = Vec::with_capacity(level.len() * 2);
        for cyl in &level {
            for (branch, &(dlo, dhi)) in domains.iter().enumerate() {
                let (ilo, ihi) = map.branch_image(branch);
                let a = cyl.left.max(ilo);
                let b = cyl.right.min(ihi);
                if a >= b {
                    continue;
                }
                let (Some(pa), Some(pb)) = (
                    map.branch_preimage(branch, a),
                    map.branch_preimage(branch, b),
                ) else {
                    continue;
                };
                let (mut l, mut r) = if map.branch_increasing(branch) {
                    (pa, pb)
                } else {
                    (pb, pa)
                };
                l = l.max(dlo);
                r = r.min(dhi);
                if l >= r {
                    continue;
                }
                let first = partition.cell(l);
                let last = partition.cell(r);
                for j in first..=last {
                    let (cl, cr) = partition.bounds(j);
                    let pl = l.max(cl);
                    let pr = r.min(cr);
                    if pr - pl > SLIVER * pr {
                        let mut word = Vec::with_capacity(cyl.word.len() + 1);
                        word.push(j);
                        word.extend_from_slice(&cyl.word);
                        next.push(Cylinder {
                            left: pl,
                            right: pr,
                            word,
                        });
                    }
                }
            }
        }
        next.sort_by(|a, b| a.left.total_cmp(&b.left));
        level = merge_adjacent(next);
    }

    let min_diameter = level
        .iter()
        .map(Cylinder::diameter)
        .fold(f64::INFINITY, f64::min);
    Ok(CylinderSet {
        depth: n,
        intervals: level,
        min_diameter,
    })
}

// Pieces of one cylinder that meet at a branch point are a single interval.
fn merge_adjacent(sorted: Vec<Cylinder>) -> Vec<Cylinder> {
    let mut out: Vec<Cylinder> = Vec::with_capacity(sorted.len());
    for c in sorted {
        if let Some(prev) = out.last_mut() {
            if prev.word == c.word && (prev.right - c.left).abs() <= 1e-15 {
                prev.right = c.right;
                continue;
            }
        }
        out.push(c);
    }
    out
}

/// Data-driven stand-in for the minimal cylinder diameter: the smallest spread
/// of orbit points sharing a forward word of length `n`, over words seen at
/// least twice. Meant for maps without an exact branch inverse.
pub fn empirical_min_diameter(orbit: &RealOrbit, partition: &Partition, n: usize) -> Result<f64> {
    if n == 0 || orbit.len() < n {
        return Err(Error::domain("orbit shorter than the requested depth"));
    }
    let symbols: Vec<u16> = orbit.points.iter().map(|&x| partition.cell(x)).collect();
    let mut spans: HashMap<&[u16], (f64, f64, u32)> = HashMap::new();
    for i in 0..=symbols.len() - n {
        let x = orbit.points[i];
        let e = spans.entry(&symbols[i..i + n]).or_insert((x, x, 0));
        e.0 = e.0.min(x);
        e.1 = e.1.max(x);
        e.2 += 1;
    }
    spans
        .values()
        .filter(|s| s.2 >= 2 && s.1 > s.0)
        .map(|s| s.1 - s.0)
        .reduce(f64::min)
        .ok_or_else(|| Error::domain("no word observed twice"))
}

/// Sliding-window word counts with packed keys.
pub(crate) fn word_counts(symbols: &[u16], alphabet: usize, block_len: usize) -> Vec<u64> {
    if block_len == 0 || symbols.len() < block_len {
        return Vec::new();
    }
    let bits = bits_per_symbol(alphabet);
    if bits * block_len <= 64 {
        let mask = if bits * block_len == 64 {
            u64::MAX
        } else {
            (1u64 << (bits * block_len)) - 1
        };
        let mut key = 0u64;
        for &s in &symbols[..block_len - 1] {
            key = (key << bits) | s as u64;
        }
        let mut map: FxHashMap<u64, u64> = FxHashMap::default();
        for &s in &symbols[block_len - 1..] {
            key = ((key << bits) | s as u64) & mask;
            *map.entry(key).or_insert(0) += 1;
        }
        map.into_values().collect()
    } else {
        let mut map: FxHashMap<&[u16], u64> = FxHashMap::default();
        for w in symbols.windows(block_len) {
            *map.entry(w).or_insert(0) += 1;
        }
        map.into_values().collect()
    }
}

pub(crate) fn bits_per_symbol(alphabet: usize) -> usize {
    (usize::BITS - (alphabet.max(2) - 1).leading_zeros()) as usize
}

/// Normalized sliding-window word frequencies.
#[derive(Debug, Clone)]
pub struct FrequencyTable {
    pub block_len: usize,
    pub windows: u64,
    /// Observed words with their counts, sorted lexicographically.
    pub words: Vec<(Vec<u16>, u64)>,
}

impl FrequencyTable {
    pub fn frequency(&self, word: &[u16]) -> f64 {
        self.words
            .binary_search_by(|(w, _)| w.as_slice().cmp(word))
            .map(|i| self.words[i].1 as f64 / self.windows as f64)
            .unwrap_or(0.0)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.words
            .iter()
            .map(|(_, c)| *c as f64 / self.windows as f64)
            .collect()
    }
}

pub fn empirical_cell_frequencies(
    seq: &SymbolicSequence,
    block_len: usize,
) -> Result<FrequencyTable> {
    if block_len == 0 {
        return Err(Error::domain("block length must be at least 1"));
    }
    if seq.len() < block_len {
        return Err(Error::domain(format!(
            "sequence of length {} is shorter than block length {block_len}",
            seq.len()
        )));
    }
    let mut map: HashMap<&[u16], u64> = HashMap::new();
    for w in seq.symbols.windows(block_len) {
        *map.entry(w).or_insert(0) += 1;
    }
    let mut words: Vec<(Vec<u16>, u64)> = map.into_iter().map(|(w, c)| (w.to_vec(), c)).collect();
    words.sort_unstable();
    Ok(FrequencyTable {
        block_len,
        windows: (seq.len() - block_len + 1) as u64,
        words,
    })
}
