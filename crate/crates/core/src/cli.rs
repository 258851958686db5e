//! The `epsent` command line.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or
//! arguments. Data goes to the configured files; progress and warnings go
//! to standard error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::compressor::{compress, decompress, Algorithm, DEFAULT_NODE_CAP};
use crate::config::{parse_config, ConfigFields};
use crate::dynamics::{generate_orbit_from_seed, Boundary, MapKind, MapSpec, NoiseMode, NoiseSpec};
use crate::error::{Error, Result};
use crate::partition::{encode, Partition, SymbolicSequence};
use crate::selftest::{format_table, run_selftest};
use crate::sweep::{
    detect_sigma_points, emit_csv, emit_plot, fmt_sig9, read_csv_curves, run_grid,
    DEFAULT_FLAT_SLOPE, DEFAULT_NOISE_SLOPE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "epsent",
    version,
    about = "Epsilon-entropy of randomly perturbed 1-D maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the (sigma, eps) grid and write CSV and plot data.
    Sweep(GridArgs),
    /// Write one orbit, or its symbolic coding, to a file.
    Simulate(SimulateArgs),
    /// Compress a file of byte or text symbols.
    Compress(CompressArgs),
    /// Invert `compress`.
    Decompress(DecompressArgs),
    /// Locate the noise amplitude on each curve of a sweep CSV.
    Detect(DetectArgs),
    /// Run the analytic oracles and print a pass/fail table.
    Selftest,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// logistic, doubling or tent.
    #[arg(long)]
    pub map: Option<MapKind>,
    /// Logistic parameter in (0, 4].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// none, output or dynamical.
    #[arg(long)]
    pub noise_mode: Option<NoiseMode>,
    /// clamp, reflect or wrap.
    #[arg(long)]
    pub boundary: Option<Boundary>,
    /// Noise amplitude; repeat for several.
    #[arg(long)]
    pub sigma: Vec<f64>,
    /// Partition cell count N (eps = 1/N); repeat for several.
    #[arg(long)]
    pub cells: Vec<usize>,
    /// Orbit length in symbols.
    #[arg(long)]
    pub length: Option<usize>,
    /// Master seed of the grid.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Steps discarded before recording.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// ctw, lz78 or castore.
    #[arg(long)]
    pub compressor: Option<Algorithm>,
    /// Flatness tolerance of the depth selector, in bits.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Deepest conditioning depth (default floor(log_N(len/50))).
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Add the Miller-Madow correction to block entropies.
    #[arg(long)]
    pub miller_madow: bool,
    /// Monte-Carlo samples for the mismatch probability.
    #[arg(long)]
    pub p_samples: Option<usize>,
    /// Slope below which a curve counts as flat.
    #[arg(long)]
    pub flat_slope: Option<f64>,
    /// Slope above which a curve counts as noise-dominated.
    #[arg(long)]
    pub noise_slope: Option<f64>,
    /// CSV output path.
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    /// Gnuplot data output path.
    #[arg(long)]
    pub out_plot: Option<PathBuf>,
}

impl GridArgs {
    pub fn to_fields(&self) -> ConfigFields {
        ConfigFields {
            map: self.map,
            lambda: self.lambda,
            noise_mode: self.noise_mode,
            boundary: self.boundary,
            sigma: (!self.sigma.is_empty()).then(|| self.sigma.clone()),
            n_list: (!self.cells.is_empty()).then(|| self.cells.clone()),
            length: self.length,
            burn_in: self.burn_in,
            seed: self.seed,
            workers: self.workers,
            out_csv: self.out_csv.clone(),
            out_plot: self.out_plot.clone(),
            compressor: self.compressor,
            delta: self.delta,
            max_depth: self.max_depth,
            miller_madow: self.miller_madow.then_some(true),
            flat_slope: self.flat_slope,
            noise_slope: self.noise_slope,
            p_samples: self.p_samples,
            cylinder_cap: None,
            node_cap: None,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value = "logistic")]
    pub map: MapKind,
    #[arg(long, default_value_t = 4.0)]
    pub lambda: f64,
    #[arg(long, default_value = "dynamical")]
    pub noise_mode: NoiseMode,
    #[arg(long, default_value = "wrap")]
    pub boundary: Boundary,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 10_000)]
    pub length: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub burn_in: usize,
    /// Write the symbolic coding with this many cells instead of points.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Output file, one value per line.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, default_value = "ctw")]
    pub algorithm: Algorithm,
    /// Read whitespace-separated integer symbols over this alphabet instead
    /// of raw bytes (alphabet 256).
    #[arg(long)]
    pub alphabet: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DecompressArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Write whitespace-separated integer symbols instead of raw bytes.
    #[arg(long)]
    pub text: bool,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// CSV written by `sweep`.
    #[arg(long)]
    pub csv: PathBuf,
    /// Only report this sigma.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_FLAT_SLOPE)]
    pub flat_slope: f64,
    #[arg(long, default_value_t = DEFAULT_NOISE_SLOPE)]
    pub noise_slope: f64,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    dispatch(cli.command)
}

pub fn dispatch(command: Command) -> i32 {
    let result = match command {
        Command::Sweep(a) => sweep(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Compress(a) => compress_file(&a),
        Command::Decompress(a) => decompress_file(&a),
        Command::Detect(a) => detect(&a),
        Command::Selftest => selftest(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

fn sweep(a: &GridArgs) -> Result<i32> {
    let cfg = parse_config(a.config.as_deref(), a.to_fields())?;
    let s = &cfg.sweep;
    eprintln!(
        "sweep: {} sigma x {} eps cells, length {}, {}",
        s.sigmas.len(),
        s.cells.len(),
        s.orbit_len,
        s.algorithm
    );
    let curves = run_grid(s)?;
    for c in &curves {
        for p in &c.points {
            if let Some(err) = &p.error {
                eprintln!("warning: sigma={} N={}: {err}", c.sigma, p.n_cells);
            } else if p.bounds.is_some_and(|b| !b.is_ordered()) {
                eprintln!(
                    "warning: sigma={} N={}: lower bound exceeds upper bound",
                    c.sigma, p.n_cells
                );
            }
        }
    }
    emit_csv(&curves, s.noise_mode, &cfg.out_csv)?;
    if let Some(plot) = &cfg.out_plot {
        emit_plot(&curves, plot)?;
    }
    Ok(EXIT_OK)
}

fn simulate(a: &SimulateArgs) -> Result<i32> {
    let map = MapSpec::new(a.map, a.lambda).map_err(|e| Error::config("lambda", e.to_string()))?;
    let noise = NoiseSpec {
        sigma: a.sigma,
        mode: a.noise_mode,
        boundary: a.boundary,
        seed: a.seed,
    };
    noise
        .validate()
        .map_err(|e| Error::config("sigma", e.to_string()))?;
    if a.length == 0 {
        return Err(Error::config("length", "must be positive"));
    }
    let orbit = generate_orbit_from_seed(&map, a.burn_in, a.length, &noise)?;
    let file = std::fs::File::create(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let mut w = std::io::BufWriter::new(file);
    match a.cells {
        Some(n) => {
            let p = Partition::new(n).map_err(|e| Error::config("cells", e.to_string()))?;
            for s in encode(&orbit, &p).symbols {
                writeln!(w, "{s}").map_err(|e| Error::io(&a.out, e))?;
            }
        }
        None => orbit.write_dump(&mut w).map_err(|e| Error::io(&a.out, e))?,
    }
    w.flush().map_err(|e| Error::io(&a.out, e))?;
    Ok(EXIT_OK)
}

fn read_symbols(a: &CompressArgs) -> Result<SymbolicSequence> {
    let bytes = std::fs::read(&a.input).map_err(|e| Error::io(&a.input, e))?;
    match a.alphabet {
        None => SymbolicSequence::new(bytes.into_iter().map(u16::from).collect(), 256),
        Some(n) => {
            if !(2..=65535).contains(&n) {
                return Err(Error::config(
                    "alphabet",
                    format!("must lie in [2, 65535], got {n}"),
                ));
            }
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::domain(format!("{}: not UTF-8 text", a.input.display())))?;
            let symbols = text
                .split_whitespace()
                .map(|t| {
                    t.parse::<u16>().map_err(|_| {
                        Error::domain(format!("{}: bad symbol `{t}`", a.input.display()))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            SymbolicSequence::new(symbols, n)
        }
    }
}

fn compress_file(a: &CompressArgs) -> Result<i32> {
    let seq = read_symbols(a)?;
    let (stream, report) = compress(&seq, a.algorithm, DEFAULT_NODE_CAP)?;
    std::fs::write(&a.output, stream).map_err(|e| Error::io(&a.output, e))?;
    eprintln!(
        "{}: {} symbols -> {} bits ({} bits/symbol)",
        a.algorithm,
        report.input_len,
        report.encoded_bits,
        fmt_sig9(report.rate)
    );
    Ok(EXIT_OK)
}

fn decompress_file(a: &DecompressArgs) -> Result<i32> {
    let stream = std::fs::read(&a.input).map_err(|e| Error::io(&a.input, e))?;
    let seq = decompress(&stream)?;
    let out = if a.text {
        let mut s = String::with_capacity(seq.len() * 4);
        for sym in &seq.symbols {
            s.push_str(&sym.to_string());
            s.push('\n');
        }
        s.into_bytes()
    } else {
        if seq.alphabet_size > 256 {
            return Err(Error::domain(format!(
                "alphabet size {} does not fit in bytes; use --text",
                seq.alphabet_size
            )));
        }
        seq.symbols.iter().map(|&s| s as u8).collect()
    };
    std::fs::write(&a.output, out).map_err(|e| Error::io(&a.output, e))?;
    Ok(EXIT_OK)
}

fn detect(a: &DetectArgs) -> Result<i32> {
    if !(a.flat_slope.is_finite() && a.noise_slope.is_finite() && a.noise_slope > a.flat_slope) {
        return Err(Error::config(
            "noise_slope",
            "must be finite and exceed flat_slope",
        ));
    }
    let text = std::fs::read_to_string(&a.csv).map_err(|e| Error::io(&a.csv, e))?;
    let curves = read_csv_curves(&text)?;
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), fmt_sig9);
    println!("sigma eps2 eps1 estimate status");
    let mut shown = 0;
    for (sigma, pts) in curves {
        if a.sigma.is_some_and(|s| s != sigma) {
            continue;
        }
        shown += 1;
        let d = detect_sigma_points(&pts, a.flat_slope, a.noise_slope);
        println!(
            "{} {} {} {} {}",
            fmt_sig9(sigma),
            opt(d.eps2),
            opt(d.eps1),
            opt(d.estimate()),
            d.status
        );
    }
    if shown == 0 {
        return Err(Error::domain("no matching curve in the CSV"));
    }
    Ok(EXIT_OK)
}

fn selftest() -> Result<i32> {
    let checks = run_selftest();
    print!("{}", format_table(&checks));
    Ok(if checks.iter().all(|c| c.pass) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}
