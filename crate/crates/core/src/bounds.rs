//! Analytic upper and lower bounds on the epsilon-entropy of a perturbed
//! map, in bits, for comparison with the measured rates.

use crate::error::{Error, Result};
use crate::estimators::bernoulli_entropy;

/// Echo of the inputs a [`BoundSet`] was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub h_eps: f64,
    pub p: f64,
    pub sigma: f64,
    pub eps: f64,
    pub eps_n0: f64,
    pub delta: f64,
    /// Noise transition density bound, absent without noise.
    pub density_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSet {
    /// `-log2 eps`, the entropy of a uniformly random cell sequence.
    pub pure_noise_line: f64,
    /// `-inf` when there is no noise density to bound.
    pub kifer_lower: f64,
    pub output_upper: f64,
    pub dynamical_upper: f64,
    pub envelope_low: f64,
    pub envelope_high: f64,
    pub inputs: BoundInputs,
}

impl BoundSet {
    /// False when both envelope edges are finite and cross. Such cells are
    /// reported, not rejected.
    pub fn is_ordered(&self) -> bool {
        !(self.envelope_low.is_finite() && self.envelope_high.is_finite())
            || self.envelope_low <= self.envelope_high
    }
}

/// Smallest integer not below `r`, treating values within a relative
/// `1e-12` of an integer as that integer so that ratios such as
/// `0.02 / 0.004` are not pushed up a step by rounding.
fn upper_integer_part(r: f64) -> f64 {
    let k = r.round();
    if k >= 1.0 && (r - k).abs() <= 1e-12 * r {
        k
    } else {
        r.ceil()
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!(
            "probability must lie in [0, 1], got {p}"
        )));
    }
    Ok(())
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::domain(format!("{name} must be finite, got {v}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::domain(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// `p log2(2 ceil(sigma / diam)) + H(p)`, the cost of correcting symbols
/// moved by the noise.
fn correction(p: f64, sigma: f64, diam: f64) -> Result<f64> {
    check_probability(p)?;
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!(
            "sigma must be finite and nonnegative, got {sigma}"
        )));
    }
    check_positive("partition diameter", diam)?;
    if sigma == 0.0 {
        if p > 0.0 {
            return Err(Error::Consistency(format!(
                "mismatch probability {p} with zero noise amplitude"
            )));
        }
        return Ok(0.0);
    }
    let jumps = 2.0 * upper_integer_part(sigma / diam);
    let linear = if p > 0.0 { p * jumps.log2() } else { 0.0 };
    Ok(linear + bernoulli_entropy(p)?)
}

/// `h_eps + p log2(2 ceil(sigma/eps)) + H(p)`.
pub fn output_noise_upper(h_eps: f64, p: f64, sigma: f64, eps: f64) -> Result<f64> {
    check_finite("h_eps", h_eps)?;
    Ok(h_eps + correction(p, sigma, eps)?)
}

/// `h_eps + delta + p log2(2 ceil(sigma/eps_n0)) + H(p)`.
pub fn dynamical_noise_upper(
    h_eps: f64,
    delta: f64,
    p: f64,
    sigma: f64,
    eps_n0: f64,
) -> Result<f64> {
    check_finite("h_eps", h_eps)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!(
            "delta must be finite and nonnegative, got {delta}"
        )));
    }
    Ok(h_eps + delta + correction(p, sigma, eps_n0)?)
}

/// `-log2 eps - log2 K` for a chain whose transition densities are bounded
/// by `K`. For uniform noise on `[-sigma, sigma]`, `K = 1/(2 sigma)`.
pub fn kifer_lower(eps: f64, density_bound: f64) -> Result<f64> {
    check_positive("eps", eps)?;
    check_positive("density bound", density_bound)?;
    Ok(-eps.log2() - density_bound.log2())
}

/// All bounds for one grid cell.
///
/// When `eps >= sigma` and `eps_n0 > sigma` the noise moves a point by at
/// most one cell, and the upper edge is `h + delta + p + H(p)`. Otherwise it
/// is the smaller of `-log2 eps` and [`dynamical_noise_upper`]. The lower
/// edge is [`kifer_lower`], or `-inf` when `density_bound` is `None`.
pub fn envelope(
    h_eps: f64,
    delta: f64,
    p: f64,
    sigma: f64,
    eps: f64,
    eps_n0: f64,
    density_bound: Option<f64>,
) -> Result<BoundSet> {
    check_positive("eps", eps)?;
    let output_upper = output_noise_upper(h_eps, p, sigma, eps)?;
    let dynamical_upper = dynamical_noise_upper(h_eps, delta, p, sigma, eps_n0)?;
    let pure_noise_line = -eps.log2();
    let kifer = match density_bound {
        Some(k) => kifer_lower(eps, k)?,
        None => f64::NEG_INFINITY,
    };
    let envelope_high = if eps >= sigma && eps_n0 > sigma {
        h_eps + delta + p + bernoulli_entropy(p)?
    } else {
        pure_noise_line.min(dynamical_upper)
    };
    Ok(BoundSet {
        pure_noise_line,
        kifer_lower: kifer,
        output_upper,
        dynamical_upper,
        envelope_low: kifer,
        envelope_high,
        inputs: BoundInputs {
            h_eps,
            p,
            sigma,
            eps,
            eps_n0,
            delta,
            density_bound,
        },
    })
}
