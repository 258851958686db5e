//! C ABI over `epsent-core`.
//!
//! Every fallible function returns an [`EpsentStatus`]; on failure the
//! message is available from [`epsent_last_error`] on the same thread.
//! Sequences and byte buffers are opaque handles owned by the caller and
//! released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use epsent_core::bounds;
use epsent_core::compressor::{self, Algorithm, DEFAULT_NODE_CAP};
use epsent_core::dynamics::{
    generate_orbit_from_seed, Boundary, MapKind, MapSpec, NoiseMode, NoiseSpec,
};
use epsent_core::estimators::{self, EstimatorOptions};
use epsent_core::partition::{encode, Partition, SymbolicSequence};
use epsent_core::sweep::{detect_sigma_points, DetectionStatus};
use epsent_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsentStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Resource = 3,
    Decode = 4,
    Consistency = 5,
    Config = 6,
    Io = 7,
    Panic = 8,
}

/// Values accepted by the `map` argument of [`epsent_simulate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsentMap {
    Logistic = 0,
    Doubling = 1,
    Tent = 2,
}

/// Values accepted by the `noise_mode` argument of [`epsent_simulate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsentNoiseMode {
    None = 0,
    Output = 1,
    Dynamical = 2,
}

/// Values accepted by the `boundary` argument of [`epsent_simulate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsentBoundary {
    Clamp = 0,
    Reflect = 1,
    Wrap = 2,
}

/// Values accepted by the `algorithm` argument of [`epsent_compress`]; they
/// match the algorithm byte of the stream header.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsentAlgorithm {
    Lz78 = 1,
    Castore = 2,
    Ctw = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsentDetectionStatus {
    Detected = 0,
    PlateauOnly = 1,
    NoiseOnly = 2,
    Undetermined = 3,
}

/// Result of [`epsent_detect_sigma`]. Missing edges are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EpsentDetection {
    pub status: EpsentDetectionStatus,
    pub eps1: f64,
    pub eps2: f64,
    pub estimate: f64,
}

/// Opaque symbolic sequence.
pub struct EpsentSequence(SymbolicSequence);

/// Opaque byte buffer holding a compressed stream.
pub struct EpsentBuffer(Vec<u8>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> EpsentStatus {
    match e {
        Error::Domain(_) => EpsentStatus::Domain,
        Error::Resource { .. } => EpsentStatus::Resource,
        Error::Decode { .. } => EpsentStatus::Decode,
        Error::Consistency(_) => EpsentStatus::Consistency,
        Error::Config { .. } => EpsentStatus::Config,
        Error::Io { .. } => EpsentStatus::Io,
    }
}

type Outcome = Result<(), (EpsentStatus, String)>;

fn core(e: Error) -> (EpsentStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (EpsentStatus, String) {
    (EpsentStatus::NullPointer, format!("`{what}` is null"))
}

fn domain(msg: String) -> (EpsentStatus, String) {
    (EpsentStatus::Domain, msg)
}

fn guard(f: impl FnOnce() -> Outcome) -> EpsentStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        Err((EpsentStatus::Panic, msg))
    });
    match outcome {
        Ok(()) => {
            set_last_error(String::new());
            EpsentStatus::Ok
        }
        Err((status, msg)) => {
            set_last_error(msg);
            status
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Outcome {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn give<T>(out: *mut *mut T, value: T) -> Outcome {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn sequence<'a>(
    seq: *const EpsentSequence,
) -> Result<&'a SymbolicSequence, (EpsentStatus, String)> {
    seq.as_ref().map(|s| &s.0).ok_or_else(|| null("seq"))
}

unsafe fn slice<'a, T>(
    data: *const T,
    len: usize,
    what: &str,
) -> Result<&'a [T], (EpsentStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

fn parse_map_kind(v: u32) -> Result<MapKind, (EpsentStatus, String)> {
    match v {
        0 => Ok(MapKind::Logistic),
        1 => Ok(MapKind::Doubling),
        2 => Ok(MapKind::Tent),
        _ => Err(domain(format!("unknown map {v}"))),
    }
}

fn parse_noise_mode(v: u32) -> Result<NoiseMode, (EpsentStatus, String)> {
    match v {
        0 => Ok(NoiseMode::None),
        1 => Ok(NoiseMode::Output),
        2 => Ok(NoiseMode::Dynamical),
        _ => Err(domain(format!("unknown noise mode {v}"))),
    }
}

fn parse_boundary(v: u32) -> Result<Boundary, (EpsentStatus, String)> {
    match v {
        0 => Ok(Boundary::Clamp),
        1 => Ok(Boundary::Reflect),
        2 => Ok(Boundary::Wrap),
        _ => Err(domain(format!("unknown boundary policy {v}"))),
    }
}

fn parse_algorithm(v: u32) -> Result<Algorithm, (EpsentStatus, String)> {
    u8::try_from(v)
        .ok()
        .and_then(Algorithm::from_id)
        .ok_or_else(|| domain(format!("unknown algorithm {v}")))
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn epsent_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn epsent_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `len` symbols, each below `alphabet`, into a new sequence.
///
/// # Safety
/// `symbols` must point to `len` readable values (it may be null when `len`
/// is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epsent_sequence_new(
    symbols: *const u16,
    len: usize,
    alphabet: u32,
    out: *mut *mut EpsentSequence,
) -> EpsentStatus {
    guard(|| {
        let data = slice(symbols, len, "symbols")?;
        let seq = SymbolicSequence::new(data.to_vec(), alphabet as usize).map_err(core)?;
        give(out, EpsentSequence(seq))
    })
}

/// Simulates `len` points of a map after `burn_in` steps and codes them on
/// `cells` equal cells. `map`, `noise_mode` and `boundary` take the values of
/// [`EpsentMap`], [`EpsentNoiseMode`] and [`EpsentBoundary`]; `lambda` is
/// ignored except for the logistic map.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epsent_simulate(
    map: u32,
    lambda: f64,
    noise_mode: u32,
    boundary: u32,
    sigma: f64,
    seed: u64,
    burn_in: usize,
    len: usize,
    cells: u32,
    out: *mut *mut EpsentSequence,
) -> EpsentStatus {
    guard(|| {
        let spec = MapSpec::new(parse_map_kind(map)?, lambda).map_err(core)?;
        let noise = NoiseSpec {
            sigma,
            mode: parse_noise_mode(noise_mode)?,
            boundary: parse_boundary(boundary)?,
            seed,
        };
        let partition = Partition::new(cells as usize).map_err(core)?;
        let orbit = generate_orbit_from_seed(&spec, burn_in, len, &noise).map_err(core)?;
        let seq = encode(&orbit, &partition);
        give(out, EpsentSequence(seq))
    })
}

/// Number of symbols, or 0 for a null handle.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn epsent_sequence_len(seq: *const EpsentSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.0.len())
}

/// Alphabet size, or 0 for a null handle.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn epsent_sequence_alphabet(seq: *const EpsentSequence) -> u32 {
    seq.as_ref().map_or(0, |s| s.0.alphabet_size as u32)
}

/// Copies the symbols into `dst`, which must hold at least
/// `epsent_sequence_len(seq)` values.
///
/// # Safety
/// `seq` must be a live handle and `dst` must point to `capacity` writable
/// values.
#[no_mangle]
pub unsafe extern "C" fn epsent_sequence_copy(
    seq: *const EpsentSequence,
    dst: *mut u16,
    capacity: usize,
) -> EpsentStatus {
    guard(|| {
        let s = sequence(seq)?;
        if capacity < s.len() {
            return Err(domain(format!(
                "capacity {capacity} is below length {}",
                s.len()
            )));
        }
        if s.is_empty() {
            return Ok(());
        }
        if dst.is_null() {
            return Err(null("dst"));
        }
        ptr::copy_nonoverlapping(s.symbols.as_ptr(), dst, s.len());
        Ok(())
    })
}

/// # Safety
/// `seq` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epsent_sequence_free(seq: *mut EpsentSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Compresses a sequence with the [`EpsentAlgorithm`] value `algorithm`.
/// Writes the stream to `out` and, if `rate` is not null, the compressed
/// length in bits per symbol.
///
/// # Safety
/// `seq` must be a live handle, `out` writable and `rate` null or writable.
#[no_mangle]
pub unsafe extern "C" fn epsent_compress(
    seq: *const EpsentSequence,
    algorithm: u32,
    out: *mut *mut EpsentBuffer,
    rate: *mut f64,
) -> EpsentStatus {
    guard(|| {
        let s = sequence(seq)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (stream, report) =
            compressor::compress(s, parse_algorithm(algorithm)?, DEFAULT_NODE_CAP).map_err(core)?;
        if !rate.is_null() {
            rate.write(report.rate);
        }
        give(out, EpsentBuffer(stream))
    })
}

/// Decodes a stream produced by [`epsent_compress`].
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epsent_decompress(
    data: *const u8,
    len: usize,
    out: *mut *mut EpsentSequence,
) -> EpsentStatus {
    guard(|| {
        let bytes = slice(data, len, "data")?;
        let seq = compressor::decompress(bytes).map_err(core)?;
        give(out, EpsentSequence(seq))
    })
}

/// Start of the buffer's bytes, or null for a null handle.
///
/// # Safety
/// `buf` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn epsent_buffer_data(buf: *const EpsentBuffer) -> *const u8 {
    buf.as_ref().map_or(ptr::null(), |b| b.0.as_ptr())
}

/// # Safety
/// `buf` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn epsent_buffer_len(buf: *const EpsentBuffer) -> usize {
    buf.as_ref().map_or(0, |b| b.0.len())
}

/// # Safety
/// `buf` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epsent_buffer_free(buf: *mut EpsentBuffer) {
    if !buf.is_null() {
        drop(Box::from_raw(buf));
    }
}

/// Plug-in block entropy per symbol at block length `n`, in bits.
///
/// # Safety
/// `seq` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn epsent_block_entropy_rate(
    seq: *const EpsentSequence,
    n: usize,
    miller_madow: bool,
    out: *mut f64,
) -> EpsentStatus {
    guard(|| {
        let e =
            estimators::block_entropy_rate(sequence(seq)?, n, EstimatorOptions { miller_madow })
                .map_err(core)?;
        write(out, e.value, "out")
    })
}

/// Entropy of the next symbol given the preceding `n`, in bits.
///
/// # Safety
/// `seq` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn epsent_conditional_entropy(
    seq: *const EpsentSequence,
    n: usize,
    miller_madow: bool,
    out: *mut f64,
) -> EpsentStatus {
    guard(|| {
        let e =
            estimators::conditional_entropy(sequence(seq)?, n, EstimatorOptions { miller_madow })
                .map_err(core)?;
        write(out, e.value, "out")
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epsent_bernoulli_entropy(p: f64, out: *mut f64) -> EpsentStatus {
    guard(|| write(out, estimators::bernoulli_entropy(p).map_err(core)?, "out"))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epsent_output_noise_upper(
    h_eps: f64,
    p: f64,
    sigma: f64,
    eps: f64,
    out: *mut f64,
) -> EpsentStatus {
    guard(|| {
        write(
            out,
            bounds::output_noise_upper(h_eps, p, sigma, eps).map_err(core)?,
            "out",
        )
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epsent_dynamical_noise_upper(
    h_eps: f64,
    delta: f64,
    p: f64,
    sigma: f64,
    eps_n0: f64,
    out: *mut f64,
) -> EpsentStatus {
    guard(|| {
        let v = bounds::dynamical_noise_upper(h_eps, delta, p, sigma, eps_n0).map_err(core)?;
        write(out, v, "out")
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epsent_kifer_lower(
    eps: f64,
    density_bound: f64,
    out: *mut f64,
) -> EpsentStatus {
    guard(|| {
        write(
            out,
            bounds::kifer_lower(eps, density_bound).map_err(core)?,
            "out",
        )
    })
}

/// Locates the knee of a rate curve given as `len` pairs `(eps[i], rate[i])`
/// sorted by decreasing eps.
///
/// # Safety
/// `eps` and `rate` must each point to `len` readable values and `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn epsent_detect_sigma(
    eps: *const f64,
    rate: *const f64,
    len: usize,
    flat_slope: f64,
    noise_slope: f64,
    out: *mut EpsentDetection,
) -> EpsentStatus {
    guard(|| {
        let e = slice(eps, len, "eps")?;
        let r = slice(rate, len, "rate")?;
        if !(flat_slope.is_finite() && noise_slope.is_finite() && noise_slope > flat_slope) {
            return Err(domain(
                "noise_slope must be finite and exceed flat_slope".into(),
            ));
        }
        let points: Vec<(f64, f64)> = e.iter().copied().zip(r.iter().copied()).collect();
        let d = detect_sigma_points(&points, flat_slope, noise_slope);
        let status = match d.status {
            DetectionStatus::Detected => EpsentDetectionStatus::Detected,
            DetectionStatus::PlateauOnly => EpsentDetectionStatus::PlateauOnly,
            DetectionStatus::NoiseOnly => EpsentDetectionStatus::NoiseOnly,
            DetectionStatus::Undetermined => EpsentDetectionStatus::Undetermined,
        };
        let detection = EpsentDetection {
            status,
            eps1: d.eps1.unwrap_or(f64::NAN),
            eps2: d.eps2.unwrap_or(f64::NAN),
            estimate: d.estimate().unwrap_or(f64::NAN),
        };
        write(out, detection, "out")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enum_values_match_the_parsers() {
        assert_eq!(
            parse_map_kind(EpsentMap::Tent as u32).unwrap(),
            MapKind::Tent
        );
        assert_eq!(
            parse_noise_mode(EpsentNoiseMode::Output as u32).unwrap(),
            NoiseMode::Output
        );
        assert_eq!(
            parse_boundary(EpsentBoundary::Reflect as u32).unwrap(),
            Boundary::Reflect
        );
        for a in Algorithm::ALL {
            assert_eq!(parse_algorithm(a.id() as u32).unwrap(), a);
        }
        assert!(parse_map_kind(3).is_err());
        assert!(parse_algorithm(256 + 3).is_err());
    }

    #[test]
    fn panics_become_a_status() {
        let st = guard(|| panic!("boom"));
        assert_eq!(st, EpsentStatus::Panic);
        let msg = unsafe { std::ffi::CStr::from_ptr(epsent_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "boom");
        assert_eq!(guard(|| Ok(())), EpsentStatus::Ok);
        assert!(unsafe { std::ffi::CStr::from_ptr(epsent_last_error()) }.is_empty());
    }

    #[test]
    fn version_is_the_package_version() {
        let v = unsafe { std::ffi::CStr::from_ptr(epsent_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
