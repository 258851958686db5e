//! The (sigma, eps) grid experiment: per-cell simulation and estimation,
//! noise-amplitude detection from the knee of each curve, and CSV / plot
//! output.
//!
//! Cell `(i, j)` (sigma index `i`, cell-count index `j`, both positions in
//! the configured lists) draws all of its randomness from
//! `derive_seed(master_seed, [i, j])`, so results do not depend on worker
//! count or scheduling. The unperturbed companion orbit for cell count `j`
//! uses `derive_seed(master_seed, [COMPANION_TAG, j])`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::bounds::{envelope, BoundSet};
use crate::compressor::{compress, Algorithm, DEFAULT_NODE_CAP};
use crate::dynamics::{generate_orbit_from_seed, Boundary, MapSpec, NoiseMode, NoiseSpec};
use crate::error::{Error, Result};
use crate::estimators::{
    block_entropy_rate, choose_n0, conditional_entropy, default_max_depth, estimate_p,
    EstimatorOptions,
};
use crate::partition::{encode, refine_cylinders, Partition, DEFAULT_CYLINDER_CAP};
use crate::rng::derive_seed;

pub const DEFAULT_SIGMAS: [f64; 5] = [0.5, 0.1, 0.02, 0.01, 0.001];
pub const DEFAULT_CELLS: [usize; 12] = [2, 3, 4, 6, 8, 12, 16, 24, 32, 64, 125, 250];
pub const DEFAULT_FLAT_SLOPE: f64 = 0.15;
pub const DEFAULT_NOISE_SLOPE: f64 = 0.85;
pub const COMPANION_TAG: u64 = u64::MAX;

pub const CSV_HEADER: &str = "sigma,eps,n_cells,orbit_len,compression_rate_bits,block_rate_bits,\
cond_entropy_bits,n0,p_hat,p_halfwidth,pure_noise_line,kifer_lower,upper_bound,envelope_low,\
envelope_high,cell_seed";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub map: MapSpec,
    pub noise_mode: NoiseMode,
    pub boundary: Boundary,
    pub sigmas: Vec<f64>,
    pub cells: Vec<usize>,
    pub orbit_len: usize,
    pub burn_in: usize,
    pub master_seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub algorithm: Algorithm,
    /// Flatness tolerance for the depth selection.
    pub delta: f64,
    /// Deepest block length; `None` uses [`default_max_depth`].
    pub max_depth: Option<usize>,
    pub miller_madow: bool,
    pub p_samples: usize,
    pub cylinder_cap: u64,
    pub node_cap: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            map: MapSpec::logistic(4.0).expect("4 is a valid parameter"),
            noise_mode: NoiseMode::Dynamical,
            boundary: Boundary::Wrap,
            sigmas: DEFAULT_SIGMAS.to_vec(),
            cells: DEFAULT_CELLS.to_vec(),
            orbit_len: 1_000_000,
            burn_in: 1000,
            master_seed: 1,
            workers: 0,
            algorithm: Algorithm::Ctw,
            delta: 0.05,
            max_depth: None,
            miller_madow: false,
            p_samples: 100_000,
            cylinder_cap: DEFAULT_CYLINDER_CAP,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(Error::config(
                "sigma",
                format!("must be finite and >= 0, got {s}"),
            ));
        }
        if let Some(n) = self.cells.iter().find(|n| !(2..=65535).contains(*n)) {
            return Err(Error::config(
                "n_list",
                format!("cell counts must lie in [2, 65535], got {n}"),
            ));
        }
        if self.orbit_len < 1000 {
            return Err(Error::config(
                "length",
                format!("must be at least 1000, got {}", self.orbit_len),
            ));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::config(
                "delta",
                format!("must be positive, got {}", self.delta),
            ));
        }
        if self.max_depth == Some(0) {
            return Err(Error::config("max_depth", "must be at least 1"));
        }
        if self.p_samples < crate::estimators::MIN_MISMATCH_SAMPLES {
            return Err(Error::config(
                "p_samples",
                format!(
                    "must be at least {}, got {}",
                    crate::estimators::MIN_MISMATCH_SAMPLES,
                    self.p_samples
                ),
            ));
        }
        Ok(())
    }

    fn estimator_options(&self) -> EstimatorOptions {
        EstimatorOptions {
            miller_madow: self.miller_madow,
        }
    }
}

/// Seed of grid cell `(sigma_index, cells_index)`.
pub fn cell_seed(master_seed: u64, sigma_index: usize, cells_index: usize) -> u64 {
    derive_seed(master_seed, &[sigma_index as u64, cells_index as u64])
}

/// Seed of the unperturbed companion orbit for `cells_index`.
pub fn companion_seed(master_seed: u64, cells_index: usize) -> u64 {
    derive_seed(master_seed, &[COMPANION_TAG, cells_index as u64])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub eps: f64,
    pub n_cells: usize,
    pub compression_rate: f64,
    pub block_rate: f64,
    pub cond_entropy: f64,
    pub n0: usize,
    /// The companion's conditional entropy had not settled short of the
    /// deepest depth.
    pub n0_flagged: bool,
    pub p_hat: f64,
    pub p_halfwidth: f64,
    pub bounds: Option<BoundSet>,
    pub cell_seed: u64,
    /// Set when the cell failed; the numeric fields are then NaN.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve {
    pub sigma: f64,
    /// Sorted by decreasing eps.
    pub points: Vec<CurvePoint>,
    pub orbit_len: usize,
    pub map: MapSpec,
    pub master_seed: u64,
}

/// Unperturbed statistics shared by every sigma at one cell count.
#[derive(Debug, Clone, Copy)]
struct Companion {
    h_eps: f64,
    delta: f64,
    n0: usize,
    flagged: bool,
    eps_n0: f64,
}

fn companion(cfg: &SweepConfig, cells_index: usize) -> Result<Companion> {
    let n = cfg.cells[cells_index];
    let partition = Partition::new(n)?;
    let noise = NoiseSpec::none(companion_seed(cfg.master_seed, cells_index));
    let orbit = generate_orbit_from_seed(&cfg.map, cfg.burn_in, cfg.orbit_len, &noise)?;
    let seq = encode(&orbit, &partition);
    let choice = choose_n0(&seq, cfg.delta, cfg.max_depth, cfg.estimator_options())?;
    let cylinders = refine_cylinders(&cfg.map, &partition, choice.n0, cfg.cylinder_cap)?;
    Ok(Companion {
        h_eps: choice.tail(),
        delta: choice.gap,
        n0: choice.n0,
        flagged: choice.flagged,
        eps_n0: cylinders.min_diameter,
    })
}

fn failed_point(n: usize, seed: u64, err: &Error) -> CurvePoint {
    CurvePoint {
        eps: 1.0 / n as f64,
        n_cells: n,
        compression_rate: f64::NAN,
        block_rate: f64::NAN,
        cond_entropy: f64::NAN,
        n0: 0,
        n0_flagged: false,
        p_hat: f64::NAN,
        p_halfwidth: f64::NAN,
        bounds: None,
        cell_seed: seed,
        error: Some(err.to_string()),
    }
}

fn run_cell(
    cfg: &SweepConfig,
    sigma: f64,
    n: usize,
    seed: u64,
    comp: &Companion,
) -> Result<CurvePoint> {
    let partition = Partition::new(n)?;
    let eps = partition.diameter();
    let noise = NoiseSpec {
        sigma,
        mode: cfg.noise_mode,
        boundary: cfg.boundary,
        seed,
    };
    noise.validate()?;
    let orbit = generate_orbit_from_seed(&cfg.map, cfg.burn_in, cfg.orbit_len, &noise)?;
    let seq = encode(&orbit, &partition);
    drop(orbit);
    let opts = cfg.estimator_options();
    let depth = cfg
        .max_depth
        .unwrap_or_else(|| default_max_depth(seq.len(), n));
    let block_rate = block_entropy_rate(&seq, depth, opts)?.value;
    let cond = conditional_entropy(&seq, comp.n0, opts)?.value;
    let (_, report) = compress(&seq, cfg.algorithm, cfg.node_cap)?;
    drop(seq);
    let mismatch = estimate_p(&cfg.map, &partition, &noise, cfg.p_samples, cfg.burn_in)?;
    // Output noise leaves the orbit itself unperturbed, so no depth slack
    // is needed and the relevant diameter is eps.
    let (delta, eps_n0) = match noise.effective_mode() {
        NoiseMode::Output => (0.0, eps),
        _ => (comp.delta, comp.eps_n0),
    };
    let bounds = envelope(
        comp.h_eps,
        delta,
        mismatch.p,
        sigma,
        eps,
        eps_n0,
        noise.density_bound(),
    )?;
    Ok(CurvePoint {
        eps,
        n_cells: n,
        compression_rate: report.rate,
        block_rate,
        cond_entropy: cond,
        n0: comp.n0,
        n0_flagged: comp.flagged,
        p_hat: mismatch.p,
        p_halfwidth: mismatch.half_width,
        bounds: Some(bounds),
        cell_seed: seed,
        error: None,
    })
}

impl CurvePoint {
    /// The upper bound matching the noise mode of the run.
    pub fn upper_bound(&self, mode: NoiseMode) -> f64 {
        match (&self.bounds, mode) {
            (None, _) => f64::NAN,
            (Some(b), NoiseMode::Output) => b.output_upper,
            (Some(b), _) => b.dynamical_upper,
        }
    }
}

/// Runs every (sigma, eps) cell of the grid and returns one curve per sigma
/// in configuration order. Failed cells are kept with their error message.
pub fn run_grid(cfg: &SweepConfig) -> Result<Vec<EntropyCurve>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    pool.install(|| {
        let companions: Vec<Result<Companion>> = (0..cfg.cells.len())
            .into_par_iter()
            .map(|j| companion(cfg, j))
            .collect();
        let tasks: Vec<(usize, usize)> = (0..cfg.sigmas.len())
            .flat_map(|i| (0..cfg.cells.len()).map(move |j| (i, j)))
            .collect();
        let points: Vec<CurvePoint> = tasks
            .par_iter()
            .map(|&(i, j)| {
                let n = cfg.cells[j];
                let seed = cell_seed(cfg.master_seed, i, j);
                let result = match &companions[j] {
                    Ok(c) => run_cell(cfg, cfg.sigmas[i], n, seed, c),
                    Err(e) => Err(Error::Consistency(format!("companion run failed: {e}"))),
                };
                result.unwrap_or_else(|e| failed_point(n, seed, &e))
            })
            .collect();
        let mut curves: Vec<EntropyCurve> = cfg
            .sigmas
            .iter()
            .map(|&sigma| EntropyCurve {
                sigma,
                points: Vec::with_capacity(cfg.cells.len()),
                orbit_len: cfg.orbit_len,
                map: cfg.map,
                master_seed: cfg.master_seed,
            })
            .collect();
        for (&(i, _), p) in tasks.iter().zip(points) {
            curves[i].points.push(p);
        }
        for c in &mut curves {
            c.points.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        }
        Ok(curves)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionStatus {
    Detected,
    PlateauOnly,
    NoiseOnly,
    Undetermined,
}

impl std::fmt::Display for DetectionStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DetectionStatus::Detected => "detected",
            DetectionStatus::PlateauOnly => "plateau_only",
            DetectionStatus::NoiseOnly => "noise_only",
            DetectionStatus::Undetermined => "undetermined",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaDetection {
    /// Finest eps of the flat region, if one was found.
    pub eps1: Option<f64>,
    /// Coarsest eps of the noise-dominated region, if one was found.
    pub eps2: Option<f64>,
    pub status: DetectionStatus,
}

impl SigmaDetection {
    /// Geometric mean of the two edges, the point estimate of sigma.
    pub fn estimate(&self) -> Option<f64> {
        match (self.eps1, self.eps2) {
            (Some(a), Some(b)) => Some((a * b).sqrt()),
            _ => None,
        }
    }
}

/// Local slopes `d rate / d log2(1/eps)` of points sorted by decreasing
/// eps: central differences inside, one-sided differences at the ends.
pub fn local_slopes(points: &[(f64, f64)]) -> Vec<f64> {
    let x: Vec<f64> = points.iter().map(|(e, _)| -e.log2()).collect();
    let y: Vec<f64> = points.iter().map(|(_, r)| *r).collect();
    let n = points.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            if hi == lo {
                f64::NAN
            } else {
                (y[hi] - y[lo]) / (x[hi] - x[lo])
            }
        })
        .collect()
}

/// Finds the edges of the two regimes of a rate-versus-eps curve.
///
/// `points` are `(eps, rate)` pairs in any order. With local slopes taken
/// along `log2(1/eps)`, `eps1` is the finest eps such that every point from
/// the coarse end up to it has slope below `flat_slope`, and `eps2` is the
/// coarsest eps such that every point from it to the fine end has slope
/// above `noise_slope`. Fewer than four points, or any non-finite value,
/// give `undetermined`.
pub fn detect_sigma_points(
    points: &[(f64, f64)],
    flat_slope: f64,
    noise_slope: f64,
) -> SigmaDetection {
    let undetermined = SigmaDetection {
        eps1: None,
        eps2: None,
        status: DetectionStatus::Undetermined,
    };
    if points.len() < 4
        || points
            .iter()
            .any(|(e, r)| !(e.is_finite() && *e > 0.0 && r.is_finite()))
    {
        return undetermined;
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let slopes = local_slopes(&sorted);
    let flat = slopes.iter().take_while(|s| **s < flat_slope).count();
    let noisy = slopes
        .iter()
        .rev()
        .take_while(|s| **s > noise_slope)
        .count();
    let eps1 = (flat > 0).then(|| sorted[flat - 1].0);
    let eps2 = (noisy > 0).then(|| sorted[sorted.len() - noisy].0);
    let status = match (eps1, eps2) {
        (Some(_), Some(_)) => DetectionStatus::Detected,
        (Some(_), None) => DetectionStatus::PlateauOnly,
        (None, Some(_)) => DetectionStatus::NoiseOnly,
        (None, None) => DetectionStatus::Undetermined,
    };
    SigmaDetection { eps1, eps2, status }
}

/// [`detect_sigma_points`] on the compression-rate curve.
pub fn detect_sigma(curve: &EntropyCurve, flat_slope: f64, noise_slope: f64) -> SigmaDetection {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .map(|p| (p.eps, p.compression_rate))
        .collect();
    detect_sigma_points(&pts, flat_slope, noise_slope)
}

/// Formats a float with nine significant digits, `%g` style: plain decimal
/// for exponents in `[-4, 9)`, scientific otherwise, trailing zeros removed.
pub fn fmt_sig9(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..9).contains(&exp) {
        trim(&format!("{:.*}", (8 - exp) as usize, v))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

/// The CSV document for `curves`: header plus one row per cell, rows
/// ordered by sigma then eps, both descending.
pub fn csv_string(curves: &[EntropyCurve], mode: NoiseMode) -> String {
    let mut rows: Vec<(&EntropyCurve, &CurvePoint)> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(move |p| (c, p)))
        .collect();
    rows.sort_by(|a, b| {
        b.0.sigma
            .total_cmp(&a.0.sigma)
            .then(b.1.eps.total_cmp(&a.1.eps))
    });
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(','))
        .expect("writing to memory");
    for (c, p) in rows {
        let bound = |f: fn(&BoundSet) -> f64| p.bounds.as_ref().map_or(f64::NAN, f);
        let record = [
            fmt_sig9(c.sigma),
            fmt_sig9(p.eps),
            p.n_cells.to_string(),
            c.orbit_len.to_string(),
            fmt_sig9(p.compression_rate),
            fmt_sig9(p.block_rate),
            fmt_sig9(p.cond_entropy),
            p.n0.to_string(),
            fmt_sig9(p.p_hat),
            fmt_sig9(p.p_halfwidth),
            fmt_sig9(bound(|b| b.pure_noise_line)),
            fmt_sig9(bound(|b| b.kifer_lower)),
            fmt_sig9(p.upper_bound(mode)),
            fmt_sig9(bound(|b| b.envelope_low)),
            fmt_sig9(bound(|b| b.envelope_high)),
            p.cell_seed.to_string(),
        ];
        w.write_record(&record).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("ASCII output")
}

pub fn emit_csv(curves: &[EntropyCurve], mode: NoiseMode, path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(curves, mode)).map_err(|e| Error::io(path, e))
}

/// Gnuplot data: one block per sigma (blocks separated by two blank lines,
/// addressable with `index`), columns `eps rate pure_noise_line`.
pub fn emit_plot(curves: &[EntropyCurve], path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let mut ordered: Vec<&EntropyCurve> = curves.iter().collect();
    ordered.sort_by(|a, b| b.sigma.total_cmp(&a.sigma));
    for (k, c) in ordered.iter().enumerate() {
        if k > 0 {
            write!(w, "\n\n").map_err(io)?;
        }
        writeln!(w, "# sigma = {}", fmt_sig9(c.sigma)).map_err(io)?;
        writeln!(w, "# eps rate pure_noise_line").map_err(io)?;
        for p in &c.points {
            writeln!(
                w,
                "{} {} {}",
                fmt_sig9(p.eps),
                fmt_sig9(p.compression_rate),
                fmt_sig9(-p.eps.log2())
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// A sigma and its `(eps, rate)` points.
pub type CurveRates = (f64, Vec<(f64, f64)>);

/// `(eps, rate)` points per sigma, read back from a CSV written by
/// [`emit_csv`]. Curves come out in file order.
pub fn read_csv_curves(text: &str) -> Result<Vec<CurveRates>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let bad = |e: csv::Error| Error::domain(format!("malformed CSV: {e}"));
    let headers = r.headers().map_err(bad)?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::domain(format!("CSV has no `{name}` column")))
    };
    let cols = [find("sigma")?, find("eps")?, find("compression_rate_bits")?];
    let mut curves: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for (k, record) in r.records().enumerate() {
        let record = record.map_err(bad)?;
        let mut v = [0.0; 3];
        for (slot, &i) in v.iter_mut().zip(&cols) {
            *slot = record.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| {
                Error::domain(format!(
                    "CSV record {}: bad or missing `{}`",
                    k + 1,
                    &headers[i]
                ))
            })?;
        }
        let [sigma, eps, rate] = v;
        match curves.iter_mut().find(|(s, _)| *s == sigma) {
            Some((_, pts)) => pts.push((eps, rate)),
            None => curves.push((sigma, vec![(eps, rate)])),
        }
    }
    Ok(curves)
}
