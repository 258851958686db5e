//! One-dimensional maps on [0, 1] and their orbits under output or dynamical
//! uniform noise.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Logistic,
    Doubling,
    Tent,
}

impl FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(MapKind::Logistic),
            "doubling" => Ok(MapKind::Doubling),
            "tent" => Ok(MapKind::Tent),
            other => Err(Error::domain(format!("unknown map kind `{other}`"))),
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MapKind::Logistic => "logistic",
            MapKind::Doubling => "doubling",
            MapKind::Tent => "tent",
        })
    }
}

/// A piecewise-monotone map of [0, 1] into itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSpec {
    kind: MapKind,
    lambda: f64,
}

/// Monotone pieces of every built-in map split at the midpoint.
const BRANCH_POINTS: [f64; 1] = [0.5];

impl MapSpec {
    pub fn logistic(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 4.0) {
            return Err(Error::domain(format!(
                "logistic lambda must lie in (0, 4], got {lambda}"
            )));
        }
        Ok(MapSpec {
            kind: MapKind::Logistic,
            lambda,
        })
    }

    pub fn doubling() -> Self {
        MapSpec {
            kind: MapKind::Doubling,
            lambda: 0.0,
        }
    }

    pub fn tent() -> Self {
        MapSpec {
            kind: MapKind::Tent,
            lambda: 0.0,
        }
    }

    pub fn new(kind: MapKind, lambda: f64) -> Result<Self> {
        match kind {
            MapKind::Logistic => Self::logistic(lambda),
            MapKind::Doubling => Ok(Self::doubling()),
            MapKind::Tent => Ok(Self::tent()),
        }
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    /// Logistic parameter; `None` for the other kinds.
    pub fn lambda(&self) -> Option<f64> {
        (self.kind == MapKind::Logistic).then_some(self.lambda)
    }

    /// Sorted interior points where monotonicity changes (or, for the
    /// doubling map, where it jumps).
    pub fn branch_points(&self) -> &'static [f64] {
        &BRANCH_POINTS
    }

    /// Number of monotone branches.
    pub fn branch_count(&self) -> usize {
        self.branch_points().len() + 1
    }

    #[inline]
    pub(crate) fn apply(&self, x: f64) -> f64 {
        match self.kind {
            MapKind::Logistic => self.lambda * x * (1.0 - x),
            MapKind::Doubling => {
                let y = 2.0 * x;
                y - y.floor()
            }
            MapKind::Tent => 1.0 - (1.0 - 2.0 * x).abs(),
        }
    }

    /// Whether every arithmetic step of the map is exact in binary floating
    /// point. Such orbits lose one mantissa bit per step and collapse onto 0
    /// after about 53 iterations unless the lost bits are replenished.
    pub(crate) fn is_dyadic_exact(&self) -> bool {
        matches!(self.kind, MapKind::Doubling | MapKind::Tent)
    }

    /// Inverse of the map restricted to monotone branch `branch`, evaluated
    /// at `y`. Returns `None` when `y` is outside that branch's image.
    pub(crate) fn branch_preimage(&self, branch: usize, y: f64) -> Option<f64> {
        debug_assert!(branch < 2);
        match self.kind {
            MapKind::Logistic => {
                let top = self.lambda / 4.0;
                if y > top {
                    return None;
                }
                let disc = (1.0 - 4.0 * y / self.lambda).max(0.0).sqrt();
                Some(if branch == 0 {
                    (1.0 - disc) / 2.0
                } else {
                    (1.0 + disc) / 2.0
                })
            }
            MapKind::Doubling => Some(if branch == 0 {
                y / 2.0
            } else {
                (y + 1.0) / 2.0
            }),
            MapKind::Tent => Some(if branch == 0 { y / 2.0 } else { 1.0 - y / 2.0 }),
        }
    }

    /// Whether branch `branch` is increasing.
    pub(crate) fn branch_increasing(&self, branch: usize) -> bool {
        match self.kind {
            MapKind::Doubling => true,
            MapKind::Logistic | MapKind::Tent => branch == 0,
        }
    }

    /// Image of branch `branch` as a closed interval.
    pub(crate) fn branch_image(&self, branch: usize) -> (f64, f64) {
        let _ = branch;
        match self.kind {
            MapKind::Logistic => (0.0, self.lambda / 4.0),
            MapKind::Doubling | MapKind::Tent => (0.0, 1.0),
        }
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MapKind::Logistic => write!(f, "logistic(lambda={})", self.lambda),
            k => write!(f, "{k}"),
        }
    }
}

/// One step of the unperturbed map.
pub fn iterate_map(map: &MapSpec, x: f64) -> Result<f64> {
    check_unit(x, "x")?;
    Ok(map.apply(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    None,
    /// Observation noise: the orbit is unperturbed, emissions are `x + w`.
    Output,
    /// The noise enters the recurrence: `x' = f(x) + w`.
    Dynamical,
}

impl FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NoiseMode::None),
            "output" => Ok(NoiseMode::Output),
            "dynamical" => Ok(NoiseMode::Dynamical),
            other => Err(Error::domain(format!("unknown noise mode `{other}`"))),
        }
    }
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseMode::None => "none",
            NoiseMode::Output => "output",
            NoiseMode::Dynamical => "dynamical",
        })
    }
}

/// How a perturbed point that left [0, 1] is brought back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Project onto the nearest endpoint.
    Clamp,
    /// Mirror at 0 and 1.
    Reflect,
    /// Identify 0 with 1 (the interval as a circle).
    Wrap,
}

impl Boundary {
    #[inline]
    pub fn apply(self, y: f64) -> f64 {
        if (0.0..=1.0).contains(&y) {
            return y;
        }
        match self {
            Boundary::Clamp => y.clamp(0.0, 1.0),
            Boundary::Reflect => {
                let t = y.rem_euclid(2.0);
                if t > 1.0 {
                    2.0 - t
                } else {
                    t
                }
            }
            Boundary::Wrap => y.rem_euclid(1.0),
        }
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clamp" => Ok(Boundary::Clamp),
            "reflect" => Ok(Boundary::Reflect),
            "wrap" => Ok(Boundary::Wrap),
            other => Err(Error::domain(format!("unknown boundary policy `{other}`"))),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Clamp => "clamp",
            Boundary::Reflect => "reflect",
            Boundary::Wrap => "wrap",
        })
    }
}

/// I.i.d. uniform noise on [-sigma, sigma].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub mode: NoiseMode,
    pub boundary: Boundary,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none(seed: u64) -> Self {
        NoiseSpec {
            sigma: 0.0,
            mode: NoiseMode::None,
            boundary: Boundary::Wrap,
            seed,
        }
    }

    pub fn dynamical(sigma: f64, boundary: Boundary, seed: u64) -> Self {
        NoiseSpec {
            sigma,
            mode: NoiseMode::Dynamical,
            boundary,
            seed,
        }
    }

    pub fn output(sigma: f64, boundary: Boundary, seed: u64) -> Self {
        NoiseSpec {
            sigma,
            mode: NoiseMode::Output,
            boundary,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::domain(format!(
                "sigma must be finite and nonnegative, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// The mode actually in effect: zero amplitude is no noise at all.
    pub fn effective_mode(&self) -> NoiseMode {
        if self.sigma == 0.0 {
            NoiseMode::None
        } else {
            self.mode
        }
    }

    /// Upper bound on the transition density of the perturbed chain, i.e.
    /// the uniform density `1/(2 sigma)`. `None` when there is no noise.
    pub fn density_bound(&self) -> Option<f64> {
        (self.sigma > 0.0).then(|| 1.0 / (2.0 * self.sigma))
    }
}

/// Draws `count` i.i.d. values uniform on [-sigma, sigma].
pub fn sample_noise(noise: &NoiseSpec, count: usize) -> Vec<f64> {
    if noise.sigma == 0.0 {
        return vec![0.0; count];
    }
    let mut s = Stream::new(noise.seed, stream::NOISE);
    (0..count).map(|_| s.symmetric(noise.sigma)).collect()
}

#[derive(Debug, Clone)]
pub struct RealOrbit {
    pub points: Vec<f64>,
    pub map: MapSpec,
    pub noise: NoiseSpec,
    pub x0: f64,
}

impl RealOrbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Plain text, one point per line, 17 significant digits.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for x in &self.points {
            writeln!(out, "{x:.16e}")?;
        }
        out.flush()
    }
}

/// Stateful one-step generator shared by the orbit builders and the
/// mismatch estimator.
pub(crate) struct Stepper {
    map: MapSpec,
    sigma: f64,
    boundary: Boundary,
    noise: Option<Stream>,
    refresh: Option<Stream>,
}

impl Stepper {
    pub(crate) fn new(map: &MapSpec, noise: &NoiseSpec) -> Self {
        let noisy = noise.sigma > 0.0 && noise.mode != NoiseMode::None;
        Stepper {
            map: *map,
            sigma: noise.sigma,
            boundary: noise.boundary,
            noise: noisy.then(|| Stream::new(noise.seed, stream::NOISE)),
            refresh: map
                .is_dyadic_exact()
                .then(|| Stream::new(noise.seed, stream::REFRESH)),
        }
    }

    /// Unperturbed step. For dyadic-exact maps the mantissa bit shifted out
    /// is replaced by a fresh random bit at 2^-53, which turns the collapse
    /// onto 0 into a pseudo-orbit with jitter below one ulp of 1.0.
    #[inline]
    pub(crate) fn clean(&mut self, x: f64) -> f64 {
        let y = self.map.apply(x);
        let flip = self.refresh.as_mut().is_some_and(|r| r.bit());
        if flip {
            let z = y + f64::EPSILON / 2.0;
            if z < 1.0 {
                return z;
            }
        }
        y
    }

    #[inline]
    pub(crate) fn draw(&mut self) -> f64 {
        match &mut self.noise {
            Some(s) => s.symmetric(self.sigma),
            None => 0.0,
        }
    }

    #[inline]
    pub(crate) fn perturb(&self, y: f64, w: f64) -> f64 {
        self.boundary.apply(y + w)
    }
}

/// Generates `length` points starting at `x0`.
///
/// * `none`: emits `x_n` with `x_{n+1} = f(x_n)`.
/// * `output`: the internal orbit is unperturbed; emits `b(x_n + w_n)`.
/// * `dynamical`: emits `x_n` with `x_{n+1} = b(f(x_n) + w_{n+1})`.
///
/// `b` is the boundary policy. Zero amplitude behaves exactly like `none`.
pub fn generate_orbit(
    map: &MapSpec,
    x0: f64,
    length: usize,
    noise: &NoiseSpec,
) -> Result<RealOrbit> {
    check_unit(x0, "x0")?;
    if length == 0 {
        return Err(Error::domain("orbit length must be at least 1"));
    }
    noise.validate()?;
    let points = run(map, x0, 0, length, noise);
    Ok(RealOrbit {
        points,
        map: *map,
        noise: *noise,
        x0,
    })
}

/// Orbit of `length` points started from a seeded random initial condition
/// after `burn_in` discarded iterates of the same (perturbed) dynamics.
pub fn generate_orbit_from_seed(
    map: &MapSpec,
    burn_in: usize,
    length: usize,
    noise: &NoiseSpec,
) -> Result<RealOrbit> {
    if length == 0 {
        return Err(Error::domain("orbit length must be at least 1"));
    }
    noise.validate()?;
    let x0 = Stream::new(noise.seed, stream::INITIAL).unit();
    let points = run(map, x0, burn_in, length, noise);
    Ok(RealOrbit {
        points,
        map: *map,
        noise: *noise,
        x0,
    })
}

fn run(map: &MapSpec, x0: f64, skip: usize, length: usize, noise: &NoiseSpec) -> Vec<f64> {
    let mut st = Stepper::new(map, noise);
    let mut points = Vec::with_capacity(length);
    let mut x = x0;
    match noise.effective_mode() {
        NoiseMode::None => {
            for i in 0..skip + length {
                if i >= skip {
                    points.push(x);
                }
                x = st.clean(x);
            }
        }
        NoiseMode::Output => {
            for i in 0..skip + length {
                let w = st.draw();
                if i >= skip {
                    points.push(st.perturb(x, w));
                }
                x = st.clean(x);
            }
        }
        NoiseMode::Dynamical => {
            for i in 0..skip + length {
                if i >= skip {
                    points.push(x);
                }
                let y = st.clean(x);
                let w = st.draw();
                x = st.perturb(y, w);
            }
        }
    }
    points
}

fn check_unit(x: f64, name: &str) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in [0, 1], got {x}")))
    }
}
