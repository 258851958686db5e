use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use epsent_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(epsent_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn new_sequence(symbols: &[u16], alphabet: u32) -> *mut EpsentSequence {
    let mut seq = ptr::null_mut();
    let st = unsafe { epsent_sequence_new(symbols.as_ptr(), symbols.len(), alphabet, &mut seq) };
    assert_eq!(st, EpsentStatus::Ok, "{}", last_error());
    seq
}

#[test]
fn sequence_handles() {
    let seq = new_sequence(&[0, 1, 2, 1, 0], 3);
    unsafe {
        assert_eq!(epsent_sequence_len(seq), 5);
        assert_eq!(epsent_sequence_alphabet(seq), 3);
        let mut dst = [9u16; 5];
        assert_eq!(
            epsent_sequence_copy(seq, dst.as_mut_ptr(), 5),
            EpsentStatus::Ok
        );
        assert_eq!(dst, [0, 1, 2, 1, 0]);
        assert_eq!(
            epsent_sequence_copy(seq, dst.as_mut_ptr(), 4),
            EpsentStatus::Domain
        );
        epsent_sequence_free(seq);
        epsent_sequence_free(ptr::null_mut());
        assert_eq!(epsent_sequence_len(ptr::null()), 0);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut seq = ptr::null_mut();
    unsafe {
        let st = epsent_sequence_new([5u16].as_ptr(), 1, 3, &mut seq);
        assert_eq!(st, EpsentStatus::Domain);
        assert!(!last_error().is_empty());
        assert!(seq.is_null());
        assert_eq!(
            epsent_sequence_new(ptr::null(), 3, 2, &mut seq),
            EpsentStatus::NullPointer
        );
        assert_eq!(
            epsent_sequence_new([0u16].as_ptr(), 1, 2, ptr::null_mut()),
            EpsentStatus::NullPointer
        );
        let mut v = 0.0;
        assert_eq!(epsent_bernoulli_entropy(0.5, &mut v), EpsentStatus::Ok);
        assert_eq!(v, 1.0);
        assert!(last_error().is_empty());
        assert_eq!(epsent_bernoulli_entropy(2.0, &mut v), EpsentStatus::Domain);
        assert_eq!(
            epsent_output_noise_upper(1.0, 0.1, 0.0, 0.5, &mut v),
            EpsentStatus::Consistency
        );
        assert_eq!(
            epsent_simulate(7, 4.0, 0, 2, 0.0, 1, 10, 10, 2, &mut seq),
            EpsentStatus::Domain
        );
        assert_eq!(
            epsent_decompress(b"EPSZ".as_ptr(), 4, &mut seq),
            EpsentStatus::Decode
        );
        assert!(last_error().contains("decode"));
    }
}

#[test]
fn simulate_compress_decompress() {
    let mut seq = ptr::null_mut();
    unsafe {
        let st = epsent_simulate(
            EpsentMap::Logistic as u32,
            4.0,
            EpsentNoiseMode::Dynamical as u32,
            EpsentBoundary::Wrap as u32,
            0.01,
            3,
            1000,
            50_000,
            8,
            &mut seq,
        );
        assert_eq!(st, EpsentStatus::Ok, "{}", last_error());
        assert_eq!(epsent_sequence_len(seq), 50_000);
        for algo in [
            EpsentAlgorithm::Lz78,
            EpsentAlgorithm::Castore,
            EpsentAlgorithm::Ctw,
        ] {
            let mut buf = ptr::null_mut();
            let mut rate = 0.0;
            assert_eq!(
                epsent_compress(seq, algo as u32, &mut buf, &mut rate),
                EpsentStatus::Ok
            );
            assert!(rate > 0.0 && rate < 3.5, "{rate}");
            let data = epsent_buffer_data(buf);
            assert_eq!(*data.add(15), algo as u8);
            let mut back = ptr::null_mut();
            assert_eq!(
                epsent_decompress(data, epsent_buffer_len(buf), &mut back),
                EpsentStatus::Ok
            );
            let mut a = vec![0u16; 50_000];
            let mut b = vec![0u16; 50_000];
            epsent_sequence_copy(seq, a.as_mut_ptr(), a.len());
            epsent_sequence_copy(back, b.as_mut_ptr(), b.len());
            assert_eq!(a, b);
            epsent_sequence_free(back);
            epsent_buffer_free(buf);
        }
        let mut buf = ptr::null_mut();
        assert_eq!(
            epsent_compress(seq, 0, &mut buf, ptr::null_mut()),
            EpsentStatus::Domain
        );
        epsent_sequence_free(seq);
    }
}

#[test]
fn estimators_and_bounds() {
    let symbols: Vec<u16> = (0..1000).map(|i| (i % 2) as u16).collect();
    let seq = new_sequence(&symbols, 2);
    let mut v = -1.0;
    unsafe {
        assert_eq!(
            epsent_conditional_entropy(seq, 2, false, &mut v),
            EpsentStatus::Ok
        );
        assert!(v.abs() < 1e-9);
        assert_eq!(
            epsent_block_entropy_rate(seq, 1, false, &mut v),
            EpsentStatus::Ok
        );
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(
            epsent_block_entropy_rate(seq, 0, false, &mut v),
            EpsentStatus::Domain
        );
        epsent_sequence_free(seq);

        assert_eq!(
            epsent_output_noise_upper(1.0, 0.1, 0.1, 0.5, &mut v),
            EpsentStatus::Ok
        );
        assert!((v - 1.5690).abs() < 1e-3);
        assert_eq!(
            epsent_dynamical_noise_upper(1.0, 0.05, 0.1, 0.02, 0.125, &mut v),
            EpsentStatus::Ok
        );
        assert!((v - 1.6190).abs() < 1e-3);
        assert_eq!(
            epsent_kifer_lower(1.0 / 250.0, 1.0, &mut v),
            EpsentStatus::Ok
        );
        assert!((v - 250f64.log2()).abs() < 1e-9);
    }
}

#[test]
fn detect_knee() {
    let eps: Vec<f64> = (0..=64).map(|k| 2f64.powf(-(k as f64) / 8.0)).collect();
    let rate: Vec<f64> = eps.iter().map(|e| (-e.log2()).max(1.0)).collect();
    let mut d = EpsentDetection {
        status: EpsentDetectionStatus::Undetermined,
        eps1: 0.0,
        eps2: 0.0,
        estimate: 0.0,
    };
    unsafe {
        let st = epsent_detect_sigma(eps.as_ptr(), rate.as_ptr(), eps.len(), 0.15, 0.85, &mut d);
        assert_eq!(st, EpsentStatus::Ok);
        assert_eq!(d.status, EpsentDetectionStatus::Detected);
        assert!((d.estimate / 0.5 - 1.0).abs() < 0.1);
        let flat = vec![1.0; eps.len()];
        epsent_detect_sigma(eps.as_ptr(), flat.as_ptr(), eps.len(), 0.15, 0.85, &mut d);
        assert_eq!(d.status, EpsentDetectionStatus::PlateauOnly);
        assert!(d.eps2.is_nan() && d.estimate.is_nan());
        let st = epsent_detect_sigma(eps.as_ptr(), rate.as_ptr(), eps.len(), 0.9, 0.1, &mut d);
        assert_eq!(st, EpsentStatus::Domain);
    }
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps/
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_header() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = root.join("include/epsent.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "epsent_simulate",
        "epsent_compress",
        "epsent_detect_sigma",
        "EPSENT_STATUS_DECODE",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let lib = target_dir().join("libepsent_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("t.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "epsent.h"
int main(void) {
    EpsentSequence *seq = NULL;
    if (epsent_simulate(EPSENT_MAP_DOUBLING, 0.0, EPSENT_NOISE_MODE_NONE, EPSENT_BOUNDARY_WRAP,
                        0.0, 1, 100, 20000, 2, &seq) != EPSENT_STATUS_OK) return 1;
    EpsentBuffer *buf = NULL;
    double rate = 0.0;
    if (epsent_compress(seq, EPSENT_ALGORITHM_CTW, &buf, &rate) != EPSENT_STATUS_OK) return 2;
    EpsentSequence *back = NULL;
    if (epsent_decompress(epsent_buffer_data(buf), epsent_buffer_len(buf), &back) != EPSENT_STATUS_OK) return 3;
    if (epsent_sequence_len(back) != 20000) return 4;
    if (epsent_decompress(NULL, 5, &back) != EPSENT_STATUS_NULL_POINTER) return 5;
    if (strlen(epsent_last_error()) == 0) return 6;
    printf("%.3f\n", rate);
    epsent_sequence_free(back);
    epsent_buffer_free(buf);
    epsent_sequence_free(seq);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("t");
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("a C compiler is installed");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    assert_eq!(run.status.code(), Some(0));
    let rate: f64 = String::from_utf8(run.stdout)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((rate - 1.0).abs() < 0.05, "{rate}");
}
