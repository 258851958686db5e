use epsent_core::compressor::*;
use epsent_core::estimators::bernoulli_entropy;
use epsent_core::partition::SymbolicSequence;
use epsent_core::rng::Stream;
use epsent_core::Error;
use proptest::prelude::*;

fn uniform(len: usize, n: usize, seed: u64) -> SymbolicSequence {
    let mut s = Stream::new(seed, 11);
    let symbols = (0..len)
        .map(|_| ((s.unit() * n as f64) as u16).min(n as u16 - 1))
        .collect();
    SymbolicSequence::new(symbols, n).unwrap()
}

fn biased_bits(len: usize, p: f64, seed: u64) -> SymbolicSequence {
    let mut s = Stream::new(seed, 12);
    SymbolicSequence::new((0..len).map(|_| (s.unit() < p) as u16).collect(), 2).unwrap()
}

fn round_trip(seq: &SymbolicSequence, algo: Algorithm) {
    let (stream, report) = compress(seq, algo, DEFAULT_NODE_CAP).unwrap();
    assert_eq!(report.input_len, seq.len() as u64);
    let back = decompress(&stream).unwrap();
    assert_eq!(back.alphabet_size, seq.alphabet_size);
    assert_eq!(back.symbols, seq.symbols, "{algo}");
}

#[test]
fn lz78_universality_on_iid_sources() {
    for n in [2usize, 4, 16] {
        let r = compression_rate(&uniform(1_000_000, n, n as u64), Algorithm::Lz78)
            .unwrap()
            .rate;
        let h = (n as f64).log2();
        assert!((0.95 * h..=1.3 * h).contains(&r), "N={n} rate {r}");
    }
    let h = bernoulli_entropy(0.2).unwrap();
    let r = compression_rate(&biased_bits(1_000_000, 0.2, 1), Algorithm::Lz78)
        .unwrap()
        .rate;
    assert!((0.95 * h..=1.3 * h).contains(&r), "rate {r} entropy {h}");
}

#[test]
fn ctw_is_close_to_the_source_entropy() {
    for n in [2usize, 4, 16, 64] {
        let r = compression_rate(&uniform(1_000_000, n, 20 + n as u64), Algorithm::Ctw)
            .unwrap()
            .rate;
        let h = (n as f64).log2();
        assert!((r - h).abs() < 0.02 * h, "N={n} rate {r}");
    }
    let h = bernoulli_entropy(0.2).unwrap();
    let r = compression_rate(&biased_bits(1_000_000, 0.2, 2), Algorithm::Ctw)
        .unwrap()
        .rate;
    assert!((r - h).abs() < 0.01, "rate {r} entropy {h}");
}

#[test]
fn rate_stays_near_log2_n() {
    for n in [2usize, 3, 5, 16] {
        let seq = uniform(100_000, n, 30 + n as u64);
        let r = compression_rate(&seq, Algorithm::Lz78).unwrap().rate;
        assert!(r <= (n as f64).log2() + 0.5, "lz78 N={n} rate {r}");
    }
    for n in [2usize, 3, 16, 64, 250] {
        let seq = uniform(100_000, n, 40 + n as u64);
        let r = compression_rate(&seq, Algorithm::Ctw).unwrap().rate;
        assert!(r <= (n as f64).log2() + 0.5, "ctw N={n} rate {r}");
    }
}

#[test]
fn castore_on_fair_bits() {
    let r = compression_rate(&uniform(1_000_000, 2, 50), Algorithm::Castore)
        .unwrap()
        .rate;
    assert!((r - 1.0).abs() <= 0.15, "castore rate on fair bits {r}");
}

#[test]
fn constant_sequence_compresses_to_almost_nothing() {
    let seq = SymbolicSequence::new(vec![0; 1_000_000], 2).unwrap();
    for algo in [Algorithm::Ctw, Algorithm::Castore] {
        let c = complexity_rate(&seq, algo).unwrap();
        assert!(c.rate <= 0.01, "{algo} {}", c.rate);
    }
    // About sqrt(2 n) phrases of about 12 bits each.
    let c = complexity_rate(&seq, Algorithm::Lz78).unwrap();
    let phrases = c.report.phrase_count as f64;
    assert!((phrases / (2e6f64).sqrt() - 1.0).abs() < 0.01, "{phrases}");
    assert!((0.01..0.02).contains(&c.rate), "{}", c.rate);
}

#[test]
fn lz78_examples() {
    let s = SymbolicSequence::new(vec![0, 0, 0, 0], 2).unwrap();
    let (_, r) = lz78_encode(&s).unwrap();
    assert_eq!(r.phrase_count, 3);
    let s = SymbolicSequence::new(vec![0, 1, 0, 1, 0, 1, 0, 1], 2).unwrap();
    let (stream, r) = lz78_encode(&s).unwrap();
    assert_eq!(r.phrase_count, 5);
    assert_eq!(lz78_decode(&stream).unwrap().symbols, s.symbols);
    let (ctw, _) = ctw_encode(&s).unwrap();
    assert!(lz78_decode(&ctw).is_err());
}

#[test]
fn prefix_curve_ends_at_full_length() {
    let seq = uniform(10_000, 4, 60);
    let c = complexity_rate(&seq, Algorithm::Ctw).unwrap();
    let lens: Vec<usize> = c.prefix_curve.iter().map(|p| p.len).collect();
    assert_eq!(lens, vec![1024, 2048, 4096, 8192, 10_000]);
    assert_eq!(c.prefix_curve.last().unwrap().rate, c.rate);
}

#[test]
fn empty_input() {
    let seq = SymbolicSequence::new(vec![], 3).unwrap();
    assert!(complexity_rate(&seq, Algorithm::Ctw).is_err());
    for algo in Algorithm::ALL {
        let (stream, r) = compress(&seq, algo, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(stream.len(), 16);
        assert_eq!(r.rate, 0.0);
        assert!(decompress(&stream).unwrap().is_empty());
    }
}

#[test]
fn header_layout() {
    let seq = uniform(1234, 5, 70);
    for algo in Algorithm::ALL {
        let (stream, _) = compress(&seq, algo, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(&stream[..4], b"EPSZ");
        assert_eq!(stream[4], 1);
        assert_eq!(u16::from_le_bytes([stream[5], stream[6]]), 5);
        assert_eq!(u64::from_le_bytes(stream[7..15].try_into().unwrap()), 1234);
        assert_eq!(stream[15], algo.id());
    }
}

#[test]
fn corrupt_streams_are_decode_errors() {
    let seq = uniform(5000, 6, 80);
    for algo in Algorithm::ALL {
        let (stream, _) = compress(&seq, algo, DEFAULT_NODE_CAP).unwrap();
        for cut in [0, 3, 15, 16, stream.len() / 2] {
            assert!(
                matches!(decompress(&stream[..cut]), Err(Error::Decode { .. })),
                "{algo} cut {cut}"
            );
        }
        let mut bad = stream.clone();
        bad[0] = b'X';
        assert!(matches!(decompress(&bad), Err(Error::Decode { .. })));
        let mut bad = stream.clone();
        bad[15] = 9;
        assert!(matches!(decompress(&bad), Err(Error::Decode { .. })));
    }
}

#[test]
fn node_cap_is_enforced() {
    let seq = uniform(100_000, 16, 90);
    for algo in Algorithm::ALL {
        assert!(
            matches!(compress(&seq, algo, 100), Err(Error::Resource { .. })),
            "{algo}"
        );
    }
}

#[test]
fn large_alphabet_round_trip() {
    let seq = uniform(100_000, 16, 100);
    for algo in Algorithm::ALL {
        round_trip(&seq, algo);
    }
    let seq = uniform(20_000, 250, 101);
    for algo in Algorithm::ALL {
        round_trip(&seq, algo);
    }
}

#[test]
fn adversarial_round_trips() {
    let mut runs = Vec::new();
    for k in 0..200u16 {
        runs.extend(std::iter::repeat_n(k % 3, k as usize));
    }
    let inputs = [
        SymbolicSequence::new(runs, 3).unwrap(),
        SymbolicSequence::new(vec![1], 2).unwrap(),
        SymbolicSequence::new(vec![63; 5000], 64).unwrap(),
        SymbolicSequence::new((0..5000).map(|i| (i % 64) as u16).collect(), 64).unwrap(),
        SymbolicSequence::new(
            (0..4096u32).map(|i| (i.count_ones() % 2) as u16).collect(),
            2,
        )
        .unwrap(),
    ];
    for seq in &inputs {
        for algo in Algorithm::ALL {
            round_trip(seq, algo);
        }
    }
}

proptest! {
    #[test]
    fn every_algorithm_round_trips(
        n in 2usize..40,
        raw in prop::collection::vec(any::<u16>(), 0..2000),
    ) {
        let seq = SymbolicSequence::new(raw.iter().map(|s| s % n as u16).collect(), n).unwrap();
        for algo in Algorithm::ALL {
            let (stream, report) = compress(&seq, algo, DEFAULT_NODE_CAP).unwrap();
            // Payload bits are counted exactly; the stream pads to a byte.
            let bits = report.encoded_bits as usize;
            prop_assert!(bits <= stream.len() * 8 && bits + 8 > stream.len() * 8);
            prop_assert_eq!(decompress(&stream).unwrap().symbols, seq.symbols.clone());
        }
    }
}
