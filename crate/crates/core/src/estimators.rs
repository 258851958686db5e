//! Plug-in entropy estimators over sliding-window word statistics, the
//! Bernoulli entropy, the one-step noise mismatch probability, and the
//! selector for the depth at which conditional entropy has settled.
//!
//! Everything is in bits.

use rustc_hash::FxHashMap;

use crate::dynamics::{MapSpec, NoiseMode, NoiseSpec, Stepper};
use crate::error::{Error, Result};
use crate::partition::{bits_per_symbol, word_counts, Partition, SymbolicSequence};
use crate::rng::Stream;

const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    PluginBlock,
    Conditional,
    Compression,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    pub value: f64,
    pub block_len: usize,
    pub sample_count: usize,
    pub kind: EstimatorKind,
    /// Fewer than ten samples per possible word.
    pub undersampled: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EstimatorOptions {
    /// Add the Miller-Madow term `(K - 1) / (2 M ln 2)` to each block entropy.
    pub miller_madow: bool,
}

/// `-sum p log2 p` with `0 log 0 = 0`.
pub fn partition_entropy(freqs: &[f64]) -> Result<f64> {
    if let Some(bad) = freqs.iter().find(|p| p.is_nan() || **p < 0.0) {
        return Err(Error::domain(format!("negative or NaN frequency {bad}")));
    }
    let total: f64 = freqs.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::domain(format!("frequencies sum to {total}, not 1")));
    }
    Ok(freqs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0))
}

fn entropy_of_counts(counts: impl Iterator<Item = u64>, total: u64) -> f64 {
    let m = total as f64;
    let s: f64 = counts
        .filter(|&c| c > 0)
        .map(|c| {
            let c = c as f64;
            c * c.log2()
        })
        .sum();
    (m.log2() - s / m).max(0.0)
}

fn miller_madow(observed: usize, total: u64) -> f64 {
    if observed <= 1 || total == 0 {
        0.0
    } else {
        (observed - 1) as f64 / (2.0 * total as f64 * std::f64::consts::LN_2)
    }
}

/// Plug-in entropy `H_n` of the sliding-window length-`n` words.
pub fn block_entropy(seq: &SymbolicSequence, n: usize, opts: EstimatorOptions) -> Result<f64> {
    check_block(seq, n)?;
    let counts = word_counts(&seq.symbols, seq.alphabet_size, n);
    let total = (seq.len() - n + 1) as u64;
    let mut h = entropy_of_counts(counts.iter().copied(), total);
    if opts.miller_madow {
        h += miller_madow(counts.len(), total);
    }
    Ok(h)
}

fn check_block(seq: &SymbolicSequence, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("block length must be at least 1"));
    }
    if seq.len() < n {
        return Err(Error::domain(format!(
            "sequence of length {} is shorter than block length {n}",
            seq.len()
        )));
    }
    Ok(())
}

fn undersampled(seq: &SymbolicSequence, n: usize) -> bool {
    let needed = (seq.alphabet_size as f64).powi(n as i32) * 10.0;
    (seq.len() as f64) < needed
}

/// `H_n / n`.
pub fn block_entropy_rate(
    seq: &SymbolicSequence,
    n: usize,
    opts: EstimatorOptions,
) -> Result<EntropyEstimate> {
    let h = block_entropy(seq, n, opts)?;
    Ok(EntropyEstimate {
        value: h / n as f64,
        block_len: n,
        sample_count: seq.len() - n + 1,
        kind: EstimatorKind::PluginBlock,
        undersampled: undersampled(seq, n),
    })
}

/// `H(next symbol | preceding n symbols) = H_{n+1} - H_n`.
///
/// Both block entropies come from the same set of `(n+1)`-windows, with `H_n`
/// taken over the prefix marginal, so the difference is the conditional
/// entropy of an actual joint distribution and lies in `[0, log2 N]`.
pub fn conditional_entropy(
    seq: &SymbolicSequence,
    n: usize,
    opts: EstimatorOptions,
) -> Result<EntropyEstimate> {
    if n == 0 {
        return Err(Error::domain("conditioning depth must be at least 1"));
    }
    check_block(seq, n + 1)?;
    let (joint, prefix, total) = joint_and_prefix_counts(&seq.symbols, seq.alphabet_size, n);
    let mut hj = entropy_of_counts(joint.iter().copied(), total);
    let mut hp = entropy_of_counts(prefix.iter().copied(), total);
    if opts.miller_madow {
        hj += miller_madow(joint.len(), total);
        hp += miller_madow(prefix.len(), total);
    }
    let cap = (seq.alphabet_size as f64).log2();
    Ok(EntropyEstimate {
        value: (hj - hp).clamp(0.0, cap),
        block_len: n,
        sample_count: total as usize,
        kind: EstimatorKind::Conditional,
        undersampled: undersampled(seq, n + 1),
    })
}

fn joint_and_prefix_counts(
    symbols: &[u16],
    alphabet: usize,
    n: usize,
) -> (Vec<u64>, Vec<u64>, u64) {
    let total = (symbols.len() - n) as u64;
    let bits = bits_per_symbol(alphabet);
    if bits * (n + 1) <= 64 {
        let mask = if bits * (n + 1) == 64 {
            u64::MAX
        } else {
            (1u64 << (bits * (n + 1))) - 1
        };
        let mut joint: FxHashMap<u64, u64> = FxHashMap::default();
        let mut key = 0u64;
        for &s in &symbols[..n] {
            key = (key << bits) | s as u64;
        }
        for &s in &symbols[n..] {
            key = ((key << bits) | s as u64) & mask;
            *joint.entry(key).or_insert(0) += 1;
        }
        let mut prefix: FxHashMap<u64, u64> = FxHashMap::default();
        for (k, c) in &joint {
            *prefix.entry(k >> bits).or_insert(0) += c;
        }
        (
            joint.into_values().collect(),
            prefix.into_values().collect(),
            total,
        )
    } else {
        let mut joint: FxHashMap<&[u16], u64> = FxHashMap::default();
        for w in symbols.windows(n + 1) {
            *joint.entry(w).or_insert(0) += 1;
        }
        let mut prefix: FxHashMap<&[u16], u64> = FxHashMap::default();
        for (w, c) in &joint {
            *prefix.entry(&w[..n]).or_insert(0) += c;
        }
        (
            joint.into_values().collect(),
            prefix.into_values().collect(),
            total,
        )
    }
}

/// `-p log2 p - (1-p) log2 (1-p)`.
pub fn bernoulli_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!(
            "probability must lie in [0, 1], got {p}"
        )));
    }
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

pub const MIN_MISMATCH_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchEstimate {
    pub p: f64,
    /// 95% normal-approximation binomial half-width.
    pub half_width: f64,
    pub samples: usize,
}

/// Monte-Carlo estimate of the probability that one noise draw moves the
/// image point `f(x)` into a different cell.
///
/// `x` runs along the chain itself after `burn_in` steps, and the draw is the
/// chain's own next noise value, so for dynamical noise the event is exactly
/// "the next orbit point is not in the cell of the clean image". For output
/// noise the clean orbit point is compared with its noisy observation.
pub fn estimate_p(
    map: &MapSpec,
    partition: &Partition,
    noise: &NoiseSpec,
    samples: usize,
    burn_in: usize,
) -> Result<MismatchEstimate> {
    noise.validate()?;
    if samples < MIN_MISMATCH_SAMPLES {
        return Err(Error::domain(format!(
            "mismatch estimate needs at least {MIN_MISMATCH_SAMPLES} samples, got {samples}"
        )));
    }
    let mode = noise.effective_mode();
    if mode == NoiseMode::None {
        return Ok(MismatchEstimate {
            p: 0.0,
            half_width: 0.0,
            samples,
        });
    }
    let mut st = Stepper::new(map, noise);
    let mut x = Stream::new(noise.seed, crate::rng::stream::MISMATCH).unit();
    let mut hits = 0usize;
    for i in 0..burn_in + samples {
        match mode {
            NoiseMode::Dynamical => {
                let y = st.clean(x);
                let w = st.draw();
                let z = st.perturb(y, w);
                if i >= burn_in && partition.cell(z) != partition.cell(y) {
                    hits += 1;
                }
                x = z;
            }
            NoiseMode::Output => {
                let w = st.draw();
                let z = st.perturb(x, w);
                if i >= burn_in && partition.cell(z) != partition.cell(x) {
                    hits += 1;
                }
                x = st.clean(x);
            }
            NoiseMode::None => unreachable!(),
        }
    }
    let p = hits as f64 / samples as f64;
    Ok(MismatchEstimate {
        p,
        half_width: 1.96 * (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    })
}

/// Deepest block length with about fifty expected samples per word:
/// `floor(log_N(len / 50))`, at least 1.
pub fn default_max_depth(len: usize, alphabet: usize) -> usize {
    let ratio = len as f64 / 50.0;
    if ratio <= alphabet as f64 {
        return 1;
    }
    let mut d = (ratio.ln() / (alphabet as f64).ln()).floor() as usize;
    // Guard against ln rounding at exact powers.
    while (alphabet as f64).powi(d as i32 + 1) <= ratio {
        d += 1;
    }
    while d > 1 && (alphabet as f64).powi(d as i32) > ratio {
        d -= 1;
    }
    d.max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthChoice {
    pub n0: usize,
    pub max_depth: usize,
    /// `|H(n0) - H(max_depth)|` for the conditional entropies.
    pub gap: f64,
    /// No depth short of `max_depth` came within tolerance.
    pub flagged: bool,
    /// Conditional entropies for depths `1..=max_depth`.
    pub profile: Vec<f64>,
}

impl DepthChoice {
    /// Conditional entropy at the deepest depth, the proxy for the limit.
    pub fn tail(&self) -> f64 {
        *self.profile.last().expect("profile is never empty")
    }
}

/// Smallest depth whose conditional entropy is within `delta` of the value at
/// `max_depth` (default [`default_max_depth`]).
pub fn choose_n0(
    seq: &SymbolicSequence,
    delta: f64,
    max_depth: Option<usize>,
    opts: EstimatorOptions,
) -> Result<DepthChoice> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let max_depth = max_depth.unwrap_or_else(|| default_max_depth(seq.len(), seq.alphabet_size));
    if max_depth == 0 {
        return Err(Error::domain("max depth must be at least 1"));
    }
    let profile = (1..=max_depth)
        .map(|n| conditional_entropy(seq, n, opts).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    let tail = profile[max_depth - 1];
    let n0 = profile
        .iter()
        .position(|h| (h - tail).abs() <= delta)
        .map(|i| i + 1)
        .unwrap_or(max_depth);
    Ok(DepthChoice {
        n0,
        max_depth,
        gap: (profile[n0 - 1] - tail).abs(),
        flagged: n0 == max_depth && max_depth > 1,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{generate_orbit_from_seed, Boundary};
    use crate::partition::encode;

    fn fair_bits(n: usize, seed: u64) -> SymbolicSequence {
        let mut s = Stream::new(seed, 1234);
        SymbolicSequence::new((0..n).map(|_| s.bit() as u16).collect(), 2).unwrap()
    }

    fn periodic(n: usize) -> SymbolicSequence {
        SymbolicSequence::new((0..n).map(|i| (i % 2) as u16).collect(), 2).unwrap()
    }

    fn constant(n: usize) -> SymbolicSequence {
        SymbolicSequence::new(vec![1; n], 3).unwrap()
    }

    const OPTS: EstimatorOptions = EstimatorOptions {
        miller_madow: false,
    };

    #[test]
    fn partition_entropy_examples() {
        assert_eq!(partition_entropy(&[0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(partition_entropy(&[1.0]).unwrap(), 0.0);
        assert_eq!(partition_entropy(&[0.25; 4]).unwrap(), 2.0);
        assert_eq!(partition_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!(partition_entropy(&[0.5, 0.4]).is_err());
        assert!(partition_entropy(&[1.5, -0.5]).is_err());
    }

    #[test]
    fn block_rate_examples() {
        let r = block_entropy_rate(&fair_bits(1_000_000, 1), 8, OPTS).unwrap();
        assert!((r.value - 1.0).abs() < 0.02, "{}", r.value);
        assert!(!r.undersampled);

        for n in 1..6 {
            assert_eq!(
                block_entropy_rate(&constant(1000), n, OPTS).unwrap().value,
                0.0
            );
        }
        // 998 windows split evenly between 0101 and 1010.
        let r = block_entropy_rate(&periodic(1001), 4, OPTS).unwrap();
        assert!((r.value - 0.25).abs() < 1e-12);
        assert!(block_entropy_rate(&periodic(10), 0, OPTS).is_err());
    }

    #[test]
    fn conditional_examples() {
        let c = conditional_entropy(&fair_bits(1_000_000, 2), 4, OPTS).unwrap();
        assert!((c.value - 1.0).abs() < 0.03);
        let c = conditional_entropy(&periodic(1000), 2, OPTS).unwrap();
        assert!(c.value.abs() < 1e-9);
        for n in 1..4 {
            assert_eq!(
                conditional_entropy(&constant(100), n, OPTS).unwrap().value,
                0.0
            );
        }
        assert!(conditional_entropy(&periodic(3), 3, OPTS).is_err());
    }

    #[test]
    fn block_entropy_is_monotone_on_fully_sampled_inputs() {
        for seq in [periodic(10_000), fair_bits(200_000, 3)] {
            let mut prev = 0.0;
            for n in 1..=8 {
                let h = block_entropy(&seq, n, OPTS).unwrap();
                assert!(h >= prev - 1e-6, "H_{n} = {h} < {prev}");
                prev = h;
            }
        }
    }

    #[test]
    fn slice_path_agrees_with_packed_path() {
        // 17-ary symbols need 5 bits, so depth 13 (70 bits) forces slice keys.
        let mut s = Stream::new(5, 5);
        let seq =
            SymbolicSequence::new((0..3000).map(|_| (s.unit() * 3.0) as u16 * 8).collect(), 17)
                .unwrap();
        let a = conditional_entropy(&seq, 12, OPTS).unwrap().value;
        let b = conditional_entropy(&seq, 13, OPTS).unwrap().value;
        assert!((0.0..=17f64.log2()).contains(&a));
        assert!((0.0..=17f64.log2()).contains(&b));
        assert!(b <= a + 1e-9);
    }

    #[test]
    fn bernoulli_examples() {
        assert_eq!(bernoulli_entropy(0.5).unwrap(), 1.0);
        assert_eq!(bernoulli_entropy(0.0).unwrap(), 0.0);
        assert_eq!(bernoulli_entropy(1.0).unwrap(), 0.0);
        assert!((bernoulli_entropy(0.1).unwrap() - 0.4690).abs() < 1e-4);
        assert!(bernoulli_entropy(-0.1).is_err());
        assert!(bernoulli_entropy(1.1).is_err());
    }

    #[test]
    fn estimate_p_examples() {
        let logistic = MapSpec::logistic(4.0).unwrap();
        let p2 = Partition::new(2).unwrap();
        let none = NoiseSpec::dynamical(0.0, Boundary::Clamp, 1);
        assert_eq!(
            estimate_p(&logistic, &p2, &none, 10_000, 100).unwrap().p,
            0.0
        );

        let wide = NoiseSpec::dynamical(1.0, Boundary::Clamp, 1);
        let e = estimate_p(&logistic, &p2, &wide, 1_000_000, 1000).unwrap();
        assert!(e.p >= 0.25, "{e:?}");

        let small = NoiseSpec::dynamical(0.01, Boundary::Clamp, 1);
        let e = estimate_p(&MapSpec::doubling(), &p2, &small, 1_000_000, 1000).unwrap();
        assert!((0.002..=0.02).contains(&e.p), "{e:?}");

        assert!(estimate_p(&logistic, &p2, &small, 100, 0).is_err());
        let neg = NoiseSpec::dynamical(-0.1, Boundary::Clamp, 1);
        assert!(estimate_p(&logistic, &p2, &neg, 10_000, 0).is_err());
    }

    #[test]
    fn estimate_p_is_seeded_and_tightens() {
        let map = MapSpec::logistic(4.0).unwrap();
        let p = Partition::new(8).unwrap();
        let noise = NoiseSpec::dynamical(0.05, Boundary::Wrap, 21);
        let a = estimate_p(&map, &p, &noise, 40_000, 100).unwrap();
        let b = estimate_p(&map, &p, &noise, 40_000, 100).unwrap();
        assert_eq!(a, b);
        let c = estimate_p(&map, &p, &noise, 160_000, 100).unwrap();
        let ratio = a.half_width / c.half_width;
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn default_depth() {
        assert_eq!(default_max_depth(1_000_000, 2), 14);
        assert_eq!(default_max_depth(1_000_000, 250), 1);
        assert_eq!(default_max_depth(1_000_000, 16), 3);
        assert_eq!(default_max_depth(100, 2), 1);
    }

    #[test]
    fn choose_n0_examples() {
        let c = choose_n0(&fair_bits(1_000_000, 7), 0.05, None, OPTS).unwrap();
        assert_eq!(c.n0, 1);

        let map = MapSpec::doubling();
        let o = generate_orbit_from_seed(&map, 1000, 1_000_000, &NoiseSpec::none(3)).unwrap();
        let seq = encode(&o, &Partition::new(2).unwrap());
        let c = choose_n0(&seq, 0.05, None, OPTS).unwrap();
        assert_eq!(c.n0, 1);
        assert!(!c.flagged);

        // Direct count: H1 = H2 = H3 = 1 bit, so H2 - H1 = 0 = H3 - H2.
        let c = choose_n0(&periodic(1000), 0.05, Some(4), OPTS).unwrap();
        assert_eq!(c.n0, 1);
        assert!(c.gap < 1e-9);
    }

    #[test]
    fn choose_n0_flags_a_sloping_tail() {
        // Period-7 word: conditional entropy drops to 0 only at depth 3.
        let pat = [0u16, 0, 1, 0, 1, 1, 1];
        let seq = SymbolicSequence::new((0..7000).map(|i| pat[i % 7]).collect(), 2).unwrap();
        let c = choose_n0(&seq, 0.01, Some(3), OPTS).unwrap();
        assert_eq!(c.n0, 3);
        assert!(c.flagged);
        assert!(choose_n0(&seq, 0.0, None, OPTS).is_err());
    }
}
