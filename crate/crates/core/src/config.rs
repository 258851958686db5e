//! Run configuration: a TOML file and command-line overrides merged into a
//! validated [`RunConfig`]. Flags take precedence over the file, and the
//! file over the built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::compressor::{Algorithm, DEFAULT_NODE_CAP};
use crate::dynamics::{Boundary, MapKind, MapSpec, NoiseMode};
use crate::error::{Error, Result};
use crate::partition::DEFAULT_CYLINDER_CAP;
use crate::sweep::{SweepConfig, DEFAULT_FLAT_SLOPE, DEFAULT_NOISE_SLOPE};

pub const DEFAULT_OUT_CSV: &str = "sweep.csv";

/// Every recognised key. Any field may be given in the file, on the
/// command line, or both; unknown file keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFields {
    pub map: Option<MapKind>,
    pub lambda: Option<f64>,
    pub noise_mode: Option<NoiseMode>,
    pub boundary: Option<Boundary>,
    pub sigma: Option<Vec<f64>>,
    pub n_list: Option<Vec<usize>>,
    pub length: Option<usize>,
    pub burn_in: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out_csv: Option<PathBuf>,
    pub out_plot: Option<PathBuf>,
    pub compressor: Option<Algorithm>,
    pub delta: Option<f64>,
    pub max_depth: Option<usize>,
    pub miller_madow: Option<bool>,
    pub flat_slope: Option<f64>,
    pub noise_slope: Option<f64>,
    pub p_samples: Option<usize>,
    pub cylinder_cap: Option<u64>,
    pub node_cap: Option<u64>,
}

impl ConfigFields {
    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: ConfigFields) -> ConfigFields {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigFields { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            map,
            lambda,
            noise_mode,
            boundary,
            sigma,
            n_list,
            length,
            burn_in,
            seed,
            workers,
            out_csv,
            out_plot,
            compressor,
            delta,
            max_depth,
            miller_madow,
            flat_slope,
            noise_slope,
            p_samples,
            cylinder_cap,
            node_cap
        )
    }

    pub fn from_toml(text: &str) -> Result<ConfigFields> {
        toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<ConfigFields> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config { message, .. } => {
                Error::config("config", format!("{}: {message}", path.display()))
            }
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sweep: SweepConfig,
    pub out_csv: PathBuf,
    pub out_plot: Option<PathBuf>,
    pub flat_slope: f64,
    pub noise_slope: f64,
}

impl RunConfig {
    /// Fills defaults and validates every field.
    pub fn resolve(fields: ConfigFields) -> Result<RunConfig> {
        let d = SweepConfig::default();
        let kind = fields.map.unwrap_or(MapKind::Logistic);
        let lambda = fields.lambda.unwrap_or(4.0);
        if !(lambda > 0.0 && lambda <= 4.0) {
            return Err(Error::config(
                "lambda",
                format!("must lie in (0, 4], got {lambda}"),
            ));
        }
        let map = MapSpec::new(kind, lambda).map_err(|e| Error::config("map", e.to_string()))?;
        let flat_slope = fields.flat_slope.unwrap_or(DEFAULT_FLAT_SLOPE);
        let noise_slope = fields.noise_slope.unwrap_or(DEFAULT_NOISE_SLOPE);
        if !flat_slope.is_finite() {
            return Err(Error::config("flat_slope", "must be finite"));
        }
        if !(noise_slope.is_finite() && noise_slope > flat_slope) {
            return Err(Error::config(
                "noise_slope",
                format!("must be finite and exceed flat_slope ({flat_slope}), got {noise_slope}"),
            ));
        }
        let sweep = SweepConfig {
            map,
            noise_mode: fields.noise_mode.unwrap_or(d.noise_mode),
            boundary: fields.boundary.unwrap_or(d.boundary),
            sigmas: fields.sigma.unwrap_or(d.sigmas),
            cells: fields.n_list.unwrap_or(d.cells),
            orbit_len: fields.length.unwrap_or(d.orbit_len),
            burn_in: fields.burn_in.unwrap_or(d.burn_in),
            master_seed: fields.seed.unwrap_or(d.master_seed),
            workers: fields.workers.unwrap_or(d.workers),
            algorithm: fields.compressor.unwrap_or(d.algorithm),
            delta: fields.delta.unwrap_or(d.delta),
            max_depth: fields.max_depth.or(d.max_depth),
            miller_madow: fields.miller_madow.unwrap_or(d.miller_madow),
            p_samples: fields.p_samples.unwrap_or(d.p_samples),
            cylinder_cap: fields.cylinder_cap.unwrap_or(DEFAULT_CYLINDER_CAP),
            node_cap: fields.node_cap.unwrap_or(DEFAULT_NODE_CAP),
        };
        if sweep.sigmas.is_empty() {
            return Err(Error::config("sigma", "list is empty"));
        }
        if sweep.cells.is_empty() {
            return Err(Error::config("n_list", "list is empty"));
        }
        sweep.validate()?;
        Ok(RunConfig {
            sweep,
            out_csv: fields
                .out_csv
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_CSV)),
            out_plot: fields.out_plot,
            flat_slope,
            noise_slope,
        })
    }
}

/// Reads the optional file, applies `flags` on top and validates.
pub fn parse_config(file: Option<&Path>, flags: ConfigFields) -> Result<RunConfig> {
    let base = match file {
        Some(p) => ConfigFields::from_file(p)?,
        None => ConfigFields::default(),
    };
    RunConfig::resolve(base.overlay(flags))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(r: Result<RunConfig>) -> String {
        match r {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let f = ConfigFields::from_toml(
            "map = \"logistic\"\nlambda = 4\nsigma = [0.01]\nn_list = [2]\nlength = 100000\n",
        )
        .unwrap();
        let c = RunConfig::resolve(f).unwrap();
        assert_eq!(c.sweep.sigmas, vec![0.01]);
        assert_eq!(c.sweep.cells, vec![2]);
        assert_eq!(c.sweep.orbit_len, 100_000);
        assert_eq!(c.sweep.burn_in, 1000);
        assert_eq!(c.sweep.algorithm, Algorithm::Ctw);
        assert_eq!(c.sweep.boundary, Boundary::Wrap);
        assert_eq!(c.sweep.noise_mode, NoiseMode::Dynamical);
        assert_eq!(c.flat_slope, 0.15);
        assert_eq!(c.noise_slope, 0.85);
        assert_eq!(c.out_csv, PathBuf::from("sweep.csv"));
    }

    #[test]
    fn bad_lambda_is_named() {
        let f = ConfigFields::from_toml("lambda = 5.0").unwrap();
        assert_eq!(field_of(RunConfig::resolve(f)), "lambda");
        let f = ConfigFields::from_toml("lambda = 0.0").unwrap();
        assert_eq!(field_of(RunConfig::resolve(f)), "lambda");
    }

    #[test]
    fn flags_win_over_file() {
        let file = ConfigFields::from_toml("sigma = [0.5]\nseed = 9").unwrap();
        let flags = ConfigFields {
            sigma: Some(vec![0.02]),
            ..ConfigFields::default()
        };
        let c = RunConfig::resolve(file.overlay(flags)).unwrap();
        assert_eq!(c.sweep.sigmas, vec![0.02]);
        assert_eq!(c.sweep.master_seed, 9);
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = ConfigFields::from_toml("sigmas = [0.1]").unwrap_err();
        assert!(e.to_string().contains("sigmas"), "{e}");
        let e = ConfigFields::from_toml("map = \"henon\"").unwrap_err();
        assert!(matches!(e, Error::Config { .. }));
    }

    #[test]
    fn other_invariants() {
        let r = |s: &str| RunConfig::resolve(ConfigFields::from_toml(s).unwrap());
        assert_eq!(field_of(r("sigma = [-0.1]")), "sigma");
        assert_eq!(field_of(r("sigma = []")), "sigma");
        assert_eq!(field_of(r("n_list = [1]")), "n_list");
        assert_eq!(field_of(r("length = 999")), "length");
        assert_eq!(field_of(r("flat_slope = 0.9")), "noise_slope");
        r("map = \"doubling\"\nlength = 1000").unwrap();
    }

    #[test]
    fn missing_file_is_config_error() {
        let r = parse_config(
            Some(Path::new("/nonexistent/epsent.toml")),
            ConfigFields::default(),
        );
        assert_eq!(field_of(r), "config");
    }
}
