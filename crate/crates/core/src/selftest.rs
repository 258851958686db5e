//! Analytic oracles with known answers, run by `epsent selftest`.

use crate::bounds::{dynamical_noise_upper, envelope, kifer_lower, output_noise_upper};
use crate::compressor::{compress, compression_rate, decompress, Algorithm, DEFAULT_NODE_CAP};
use crate::dynamics::{
    generate_orbit, generate_orbit_from_seed, iterate_map, Boundary, MapSpec, NoiseSpec,
};
use crate::error::Result;
use crate::estimators::{
    bernoulli_entropy, block_entropy_rate, conditional_entropy, estimate_p, partition_entropy,
    EstimatorOptions,
};
use crate::partition::{encode, refine_cylinders, Partition, SymbolicSequence};
use crate::rng::Stream;
use crate::sweep::{detect_sigma_points, DetectionStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub expected: String,
    pub got: String,
    pub pass: bool,
}

struct Checks(Vec<Check>);

impl Checks {
    fn near(
        &mut self,
        module: &'static str,
        name: &'static str,
        got: Result<f64>,
        want: f64,
        tol: f64,
    ) {
        let (got, pass) = match got {
            Ok(v) => (format!("{v:.6}"), (v - want).abs() <= tol),
            Err(e) => (format!("error: {e}"), false),
        };
        self.0.push(Check {
            module,
            name,
            expected: format!("{want:.6} ± {tol:e}"),
            got,
            pass,
        });
    }

    fn within(
        &mut self,
        module: &'static str,
        name: &'static str,
        got: Result<f64>,
        lo: f64,
        hi: f64,
    ) {
        let (got, pass) = match got {
            Ok(v) => (format!("{v:.6}"), (lo..=hi).contains(&v)),
            Err(e) => (format!("error: {e}"), false),
        };
        self.0.push(Check {
            module,
            name,
            expected: format!("[{lo}, {hi}]"),
            got,
            pass,
        });
    }

    fn holds(&mut self, module: &'static str, name: &'static str, got: Result<bool>) {
        let (got, pass) = match got {
            Ok(b) => (b.to_string(), b),
            Err(e) => (format!("error: {e}"), false),
        };
        self.0.push(Check {
            module,
            name,
            expected: "true".into(),
            got,
            pass,
        });
    }
}

fn uniform_symbols(len: usize, n: usize, seed: u64) -> SymbolicSequence {
    let mut s = Stream::new(seed, 0x5e1f);
    let symbols = (0..len)
        .map(|_| ((s.unit() * n as f64) as u16).min(n as u16 - 1))
        .collect();
    SymbolicSequence::new(symbols, n).expect("symbols are in range")
}

fn periodic(len: usize) -> SymbolicSequence {
    SymbolicSequence::new((0..len).map(|i| (i % 2) as u16).collect(), 2).expect("binary")
}

/// Runs every oracle. Takes a few seconds.
pub fn run_selftest() -> Vec<Check> {
    let mut c = Checks(Vec::new());
    let opts = EstimatorOptions::default();
    let logistic = MapSpec::logistic(4.0).expect("valid");
    let doubling = MapSpec::doubling();

    c.near(
        "dynamics",
        "logistic f(0.5)",
        iterate_map(&logistic, 0.5),
        1.0,
        0.0,
    );
    c.near(
        "dynamics",
        "doubling f(0.3)",
        iterate_map(&doubling, 0.3),
        0.6,
        1e-15,
    );
    c.holds(
        "dynamics",
        "zero-noise dynamical orbit equals clean orbit",
        (|| {
            let a = generate_orbit(&logistic, 0.2, 1000, &NoiseSpec::none(3))?;
            let b = generate_orbit(
                &logistic,
                0.2,
                1000,
                &NoiseSpec::dynamical(0.0, Boundary::Wrap, 3),
            )?;
            Ok(a.points == b.points)
        })(),
    );

    c.holds(
        "partition",
        "coding of a doubling orbit and of the right endpoint",
        (|| {
            let o = generate_orbit(&doubling, 0.3, 3, &NoiseSpec::none(0))?;
            let s = encode(&o, &Partition::new(2)?);
            Ok(s.symbols == [0, 1, 0] && Partition::new(4)?.cell(1.0) == 3)
        })(),
    );
    c.near(
        "partition",
        "logistic depth-2 cylinder lengths sum",
        refine_cylinders(&logistic, &Partition::new(2).expect("valid"), 2, 1000)
            .map(|s| s.intervals.iter().map(|i| i.diameter()).sum()),
        1.0,
        1e-9,
    );
    c.near(
        "partition",
        "logistic depth-2 minimum cylinder",
        refine_cylinders(&logistic, &Partition::new(2).expect("valid"), 2, 1000)
            .map(|s| s.min_diameter),
        (1.0 - 0.5f64.sqrt()) / 2.0,
        1e-12,
    );

    c.near("estimators", "H(0.5)", bernoulli_entropy(0.5), 1.0, 0.0);
    c.near("estimators", "H(0)", bernoulli_entropy(0.0), 0.0, 0.0);
    c.near("estimators", "H(1)", bernoulli_entropy(1.0), 0.0, 0.0);
    c.near("estimators", "H(0.1)", bernoulli_entropy(0.1), 0.4690, 1e-4);
    c.near(
        "estimators",
        "entropy of four equal cells",
        partition_entropy(&[0.25; 4]),
        2.0,
        0.0,
    );
    c.near(
        "estimators",
        "period-2 block rate, n=4",
        block_entropy_rate(&periodic(1001), 4, opts).map(|e| e.value),
        0.25,
        1e-12,
    );
    c.near(
        "estimators",
        "period-2 conditional entropy, n=2",
        conditional_entropy(&periodic(1000), 2, opts).map(|e| e.value),
        0.0,
        1e-9,
    );
    c.near(
        "estimators",
        "fair-bit conditional entropy, n=4",
        conditional_entropy(&uniform_symbols(1_000_000, 2, 1), 4, opts).map(|e| e.value),
        1.0,
        0.03,
    );
    c.near(
        "estimators",
        "mismatch probability at zero noise",
        estimate_p(
            &logistic,
            &Partition::new(2).expect("valid"),
            &NoiseSpec::none(1),
            10_000,
            100,
        )
        .map(|m| m.p),
        0.0,
        0.0,
    );

    let dbl = generate_orbit_from_seed(&doubling, 1000, 1_000_000, &NoiseSpec::none(11))
        .map(|o| encode(&o, &Partition::new(2).expect("valid")));
    c.within(
        "compressor",
        "doubling map N=2 compression rate",
        dbl.as_ref()
            .map_err(clone_err)
            .and_then(|s| compression_rate(s, Algorithm::Ctw).map(|r| r.rate)),
        0.9,
        1.1,
    );
    c.within(
        "estimators",
        "doubling map N=2 block rate, n=14",
        dbl.as_ref()
            .map_err(clone_err)
            .and_then(|s| block_entropy_rate(s, 14, opts).map(|e| e.value)),
        0.9,
        1.1,
    );
    c.within(
        "compressor",
        "i.i.d. N=16 compression rate",
        compression_rate(&uniform_symbols(1_000_000, 16, 2), Algorithm::Ctw).map(|r| r.rate),
        0.9 * 4.0,
        1.3 * 4.0,
    );
    for algo in Algorithm::ALL {
        c.holds(
            "compressor",
            match algo {
                Algorithm::Lz78 => "lz78 round trip",
                Algorithm::Castore => "castore round trip",
                Algorithm::Ctw => "ctw round trip",
            },
            (|| {
                let s = uniform_symbols(50_000, 7, 3);
                let (stream, _) = compress(&s, algo, DEFAULT_NODE_CAP)?;
                Ok(decompress(&stream)?.symbols == s.symbols)
            })(),
        );
    }

    c.near(
        "bounds",
        "output upper (1, 0.1, 0.1, 0.5)",
        output_noise_upper(1.0, 0.1, 0.1, 0.5),
        1.5690,
        1e-3,
    );
    c.near(
        "bounds",
        "output upper (1, 0.5, 0.02, 0.004)",
        output_noise_upper(1.0, 0.5, 0.02, 0.004),
        3.6610,
        1e-3,
    );
    c.near(
        "bounds",
        "dynamical upper (1, 0.05, 0.1, 0.02, 0.125)",
        dynamical_noise_upper(1.0, 0.05, 0.1, 0.02, 0.125),
        1.6190,
        1e-3,
    );
    c.near(
        "bounds",
        "dynamical upper (1, 0.05, 0.9, 0.1, 0.01)",
        dynamical_noise_upper(1.0, 0.05, 0.9, 0.1, 0.01),
        5.40873,
        1e-3,
    );
    c.near(
        "bounds",
        "kifer lower (1/250, 1)",
        kifer_lower(1.0 / 250.0, 1.0),
        250f64.log2(),
        1e-9,
    );
    c.near(
        "bounds",
        "kifer lower (0.01, 50)",
        kifer_lower(0.01, 50.0),
        1.0,
        1e-12,
    );
    c.near(
        "bounds",
        "envelope high, eps=0.004, sigma=0.5",
        envelope(1.0, 0.05, 0.95, 0.5, 0.004, 0.002, Some(1.0)).map(|b| b.envelope_high),
        250f64.log2(),
        1e-9,
    );

    c.holds(
        "sweep",
        "knee of max(1, -log2 eps) found near 0.5",
        Ok({
            let pts: Vec<(f64, f64)> = (0..=64)
                .map(|k| {
                    let e = 2f64.powf(-(k as f64) / 8.0);
                    (e, (-e.log2()).max(1.0))
                })
                .collect();
            let d = detect_sigma_points(&pts, 0.15, 0.85);
            d.status == DetectionStatus::Detected
                && d.estimate().is_some_and(|s| (s / 0.5 - 1.0).abs() < 0.1)
        }),
    );
    c.0
}

fn clone_err(e: &crate::error::Error) -> crate::error::Error {
    crate::error::Error::Consistency(e.to_string())
}

/// Renders checks as an aligned text table.
pub fn format_table(checks: &[Check]) -> String {
    let w = checks
        .iter()
        .map(|c| c.module.len() + c.name.len() + 2)
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        let label = format!("{}: {}", c.module, c.name);
        out.push_str(&format!(
            "{} {label:<w$}  got {}  expected {}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.got,
            c.expected
        ));
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    out.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_oracle_passes() {
        let checks = run_selftest();
        let table = format_table(&checks);
        assert!(checks.iter().all(|c| c.pass), "{table}");
        assert!(table.ends_with("0 failed\n"));
    }
}
