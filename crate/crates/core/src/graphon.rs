//! Graphon limit of the joint distance:
//!
//! ```text
//! d_W(g, h) = 1 - E_x[ exp( E_y[ log(1 - d(g(y), h(y))) / W(x, y) ] ) ]
//! ```
//!
//! with `x` and `y` uniform on `[0, 1]`. The kernel is used as given; there
//! is no per-row normalization of `W`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digraph::WeightedDigraph;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

pub const DEFAULT_FLOOR: f64 = 1e-6;
pub const DEFAULT_INNER_BATCH: usize = 256;
pub const DEFAULT_SATURATION_CLAMP: f64 = 1e-12;

#[derive(Clone)]
enum Kernel<T> {
    Constant(T),
    /// `n x n` cell values, row-major.
    Step { n: usize, cells: Vec<T> },
    Custom(Arc<dyn Fn(T, T) -> T + Send + Sync>),
}

/// Symmetric kernel `W: [0,1]^2 -> [floor, 1]`.
#[derive(Clone)]
pub struct Graphon<T> {
    kernel: Kernel<T>,
    floor: T,
}

impl<T: Scalar> fmt::Debug for Graphon<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kernel {
            Kernel::Constant(c) => format!("Constant({c})"),
            Kernel::Step { n, .. } => format!("Step(n = {n})"),
            Kernel::Custom(_) => "Custom".to_string(),
        };
        f.debug_struct("Graphon").field("kernel", &kind).field("floor", &self.floor).finish()
    }
}

fn cell_index<T: Scalar>(t: T, n: usize) -> usize {
    (t * T::from_usize_lossy(n)).floor().to_usize().unwrap_or(0).min(n - 1)
}

impl<T: Scalar> Graphon<T> {
    pub fn constant(c: T) -> Result<Self> {
        if !(c > T::zero() && c <= T::one()) {
            return Err(Error::invalid(format!("constant graphon value {c} is outside (0, 1]")));
        }
        Ok(Graphon {
            kernel: Kernel::Constant(c),
            floor: c.min(T::lit(DEFAULT_FLOOR)),
        })
    }

    /// A user kernel; it is assumed symmetric and clamped into `[floor, 1]`.
    pub fn custom(f: impl Fn(T, T) -> T + Send + Sync + 'static, floor: T) -> Result<Self> {
        if !(floor > T::zero() && floor <= T::one()) {
            return Err(Error::invalid(format!("floor {floor} is outside (0, 1]")));
        }
        Ok(Graphon {
            kernel: Kernel::Custom(Arc::new(f)),
            floor,
        })
    }

    pub fn floor(&self) -> T {
        self.floor
    }

    /// Number of cells per side for step graphons.
    pub fn step_count(&self) -> Option<usize> {
        match self.kernel {
            Kernel::Step { n, .. } => Some(n),
            _ => None,
        }
    }

    pub fn evaluate(&self, x: T, y: T) -> T {
        let raw = match &self.kernel {
            Kernel::Constant(c) => *c,
            Kernel::Step { n, cells } => cells[cell_index(x, *n) * n + cell_index(y, *n)],
            Kernel::Custom(f) => f(x, y),
        };
        raw.max(self.floor).min(T::one())
    }
}

/// Step graphon of a symmetric graph: the cell `I_j x I_i` holds `p_ji`,
/// self-loops included, and cells of absent edges hold `floor`.
pub fn step_graphon<T: Scalar>(g: &WeightedDigraph<T>, floor: T) -> Result<Graphon<T>> {
    if !(floor > T::zero() && floor <= T::one()) {
        return Err(Error::invalid(format!("floor {floor} is outside (0, 1]")));
    }
    if let Some((j, i)) = g.first_asymmetry() {
        return Err(Error::Asymmetric { j, i });
    }
    let n = g.n();
    let cells = g.weight_matrix().into_iter().flatten().map(|p| if p > T::zero() { p } else { floor }).collect();
    Ok(Graphon {
        kernel: Kernel::Step { n, cells },
        floor,
    })
}

/// `g: [0, 1] -> C`.
#[derive(Clone)]
pub enum PathFunction<T> {
    Constant(Complex<T>),
    /// `values[k]` on `[breakpoints[k-1], breakpoints[k])`, with the outer
    /// pieces extending to 0 and 1.
    Piecewise { breakpoints: Vec<T>, values: Vec<Complex<T>> },
    Custom(Arc<dyn Fn(T) -> Complex<T> + Send + Sync>),
}

impl<T: Scalar> fmt::Debug for PathFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathFunction::Constant(c) => write!(f, "Constant({c})"),
            PathFunction::Piecewise { breakpoints, values } => f
                .debug_struct("Piecewise")
                .field("breakpoints", breakpoints)
                .field("values", values)
                .finish(),
            PathFunction::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl<T: Scalar> PathFunction<T> {
    pub fn real(v: T) -> Self {
        PathFunction::Constant(Complex::new(v, T::zero()))
    }

    pub fn piecewise(breakpoints: Vec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::invalid(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        let inside = breakpoints.iter().all(|&b| b > T::zero() && b < T::one());
        let ascending = breakpoints.windows(2).all(|w| w[0] < w[1]);
        if !inside || !ascending {
            return Err(Error::invalid("breakpoints must be strictly ascending inside (0, 1)"));
        }
        Ok(PathFunction::Piecewise { breakpoints, values })
    }

    /// Equal-width pieces, one per value.
    pub fn uniform_steps(values: Vec<Complex<T>>) -> Result<Self> {
        let k = values.len();
        if k == 0 {
            return Err(Error::invalid("need at least one value"));
        }
        let breakpoints = (1..k).map(|i| T::from_usize_lossy(i) / T::from_usize_lossy(k)).collect();
        Self::piecewise(breakpoints, values)
    }

    pub fn evaluate(&self, t: T) -> Complex<T> {
        match self {
            PathFunction::Constant(c) => *c,
            PathFunction::Piecewise { breakpoints, values } => values[breakpoints.partition_point(|&b| b <= t)],
            PathFunction::Custom(f) => f(t),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ValueRepr {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PiecewiseFile {
    #[serde(default)]
    breakpoints: Vec<f64>,
    values: Vec<ValueRepr>,
}

impl PathFunction<f64> {
    /// Parses `{"breakpoints": [..], "values": [..]}` where each value is a
    /// real number or a `[re, im]` pair.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: PiecewiseFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let values = file
            .values
            .into_iter()
            .map(|v| match v {
                ValueRepr::Real(r) => Complex::new(r, 0.0),
                ValueRepr::Complex([re, im]) => Complex::new(re, im),
            })
            .collect();
        Self::piecewise(file.breakpoints, values)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }
}

/// Elemental metric on complex values, codomain `[0, 1]`.
#[derive(Clone)]
pub enum ComplexMetric<T> {
    /// `min(1, |a - b| / 2)`.
    HalfModulus,
    Custom(Arc<dyn Fn(Complex<T>, Complex<T>) -> T + Send + Sync>),
}

impl<T: Scalar> ComplexMetric<T> {
    pub fn evaluate(&self, a: Complex<T>, b: Complex<T>) -> T {
        match self {
            ComplexMetric::HalfModulus => ((a - b).norm() * T::lit(0.5)).min(T::one()),
            ComplexMetric::Custom(f) => f(a, b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum EstimatorMode {
    /// Nested sampling: `outer` uniform `x` samples, each with its own batch
    /// of `inner` uniform `y` samples.
    MonteCarlo { outer: usize, inner: usize },
    /// Midpoint rule on a `resolution x resolution` grid.
    Grid { resolution: usize },
}

#[derive(Clone)]
pub struct EstimatorConfig<T> {
    pub mode: EstimatorMode,
    pub seed: u64,
    pub elemental: ComplexMetric<T>,
    /// Elemental distances are capped at `1 - clamp` before the log. With
    /// `None`, a distance of 1 is an error.
    pub saturation_clamp: Option<T>,
}

impl<T: Scalar> EstimatorConfig<T> {
    pub fn monte_carlo(outer: usize, seed: u64) -> Self {
        EstimatorConfig {
            mode: EstimatorMode::MonteCarlo {
                outer,
                inner: DEFAULT_INNER_BATCH,
            },
            seed,
            elemental: ComplexMetric::HalfModulus,
            saturation_clamp: Some(T::lit(DEFAULT_SATURATION_CLAMP)),
        }
    }

    pub fn grid(resolution: usize) -> Self {
        EstimatorConfig {
            mode: EstimatorMode::Grid { resolution },
            seed: 0,
            elemental: ComplexMetric::HalfModulus,
            saturation_clamp: Some(T::lit(DEFAULT_SATURATION_CLAMP)),
        }
    }

    fn validate(&self) -> Result<()> {
        match self.mode {
            EstimatorMode::MonteCarlo { outer, inner } if outer == 0 || inner == 0 => {
                Err(Error::invalid("Monte Carlo sample counts must be at least 1"))
            }
            EstimatorMode::Grid { resolution } if resolution < 2 => Err(Error::invalid("grid resolution must be at least 2")),
            _ => match self.saturation_clamp {
                Some(c) if !(c > T::zero() && c < T::one()) => Err(Error::invalid("saturation clamp must lie in (0, 1)")),
                _ => Ok(()),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphonEstimate<T> {
    pub estimate: T,
    /// Standard error over outer samples (Monte Carlo only).
    pub std_error: Option<T>,
    /// Jackknife estimate of the bias that exponentiating a finite inner
    /// average adds to `estimate` (Monte Carlo only, needs `inner >= 2`).
    pub jackknife_bias: Option<T>,
    #[serde(flatten)]
    pub mode: EstimatorMode,
    /// Total number of `(x, y)` evaluations.
    pub samples: usize,
}

/// `log(1 - d(g(y), h(y)))`, checked for saturation.
fn log_complement<T: Scalar>(g: &PathFunction<T>, h: &PathFunction<T>, cfg: &EstimatorConfig<T>, y: T) -> Result<T> {
    let mut d = cfg.elemental.evaluate(g.evaluate(y), h.evaluate(y));
    match cfg.saturation_clamp {
        Some(c) => d = d.min(T::one() - c),
        None if d >= T::one() => return Err(Error::SaturatedLog { y: y.as_f64() }),
        None => {}
    }
    Ok((-d).ln_1p())
}

/// Running mean and sum of squared deviations. A constant stream keeps its
/// mean exact and its spread at zero.
#[derive(Clone, Copy, Default)]
struct Welford<T> {
    count: usize,
    mean: T,
    m2: T,
}

impl<T: Scalar> Welford<T> {
    fn push(&mut self, v: T) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean = self.mean + delta / T::from_usize_lossy(self.count);
        self.m2 = self.m2 + delta * (v - self.mean);
    }
}

/// Estimates the graphon distance between `g` and `h`.
pub fn graphon_distance<T: Scalar>(
    w: &Graphon<T>,
    g: &PathFunction<T>,
    h: &PathFunction<T>,
    cfg: &EstimatorConfig<T>,
) -> Result<GraphonEstimate<T>> {
    cfg.validate()?;
    match cfg.mode {
        EstimatorMode::Grid { resolution } => grid_estimate(w, g, h, cfg, resolution),
        EstimatorMode::MonteCarlo { outer, inner } => monte_carlo_estimate(w, g, h, cfg, outer, inner),
    }
}

fn grid_estimate<T: Scalar>(
    w: &Graphon<T>,
    g: &PathFunction<T>,
    h: &PathFunction<T>,
    cfg: &EstimatorConfig<T>,
    r: usize,
) -> Result<GraphonEstimate<T>> {
    let rf = T::from_usize_lossy(r);
    let node = |k: usize| (T::from_usize_lossy(k) + T::lit(0.5)) / rf;
    let logs: Vec<T> = (0..r).map(|b| log_complement(g, h, cfg, node(b))).collect::<Result<_>>()?;
    let outer: Vec<T> = (0..r)
        .into_par_iter()
        .map(|a| {
            let x = node(a);
            let inner = logs.iter().enumerate().fold(T::zero(), |acc, (b, &l)| acc + l / w.evaluate(x, node(b)));
            (inner / rf).exp()
        })
        .collect();
    let mean = outer.iter().fold(T::zero(), |acc, &v| acc + v) / rf;
    Ok(GraphonEstimate {
        estimate: T::one() - mean,
        std_error: None,
        jackknife_bias: None,
        mode: cfg.mode,
        samples: r * r,
    })
}

struct OuterSample<T> {
    value: T,
    bias: Option<T>,
}

fn monte_carlo_estimate<T: Scalar>(
    w: &Graphon<T>,
    g: &PathFunction<T>,
    h: &PathFunction<T>,
    cfg: &EstimatorConfig<T>,
    outer: usize,
    inner: usize,
) -> Result<GraphonEstimate<T>> {
    let samples: Vec<OuterSample<T>> = (0..outer)
        .into_par_iter()
        .map(|k| {
            let mut stream = rng::stream(cfg.seed, k as u64);
            let x = T::lit(stream.gen::<f64>());
            let mut terms = Vec::with_capacity(inner);
            let mut acc = Welford::default();
            for _ in 0..inner {
                let y = T::lit(stream.gen::<f64>());
                let v = log_complement(g, h, cfg, y)? / w.evaluate(x, y);
                acc.push(v);
                terms.push(v);
            }
            let value = acc.mean.exp();
            let bias = (inner >= 2).then(|| {
                let m = T::from_usize_lossy(inner);
                let total = acc.mean * m;
                let loo = terms.iter().fold(T::zero(), |s, &v| s + ((total - v) / (m - T::one())).exp()) / m;
                (m - T::one()) * (loo - value)
            });
            Ok(OuterSample { value, bias })
        })
        .collect::<Result<_>>()?;

    let mut stats = Welford::default();
    for s in &samples {
        stats.push(s.value);
    }
    let std_error = if outer >= 2 {
        (stats.m2 / T::from_usize_lossy(outer - 1) / T::from_usize_lossy(outer)).sqrt()
    } else {
        T::infinity()
    };
    let jackknife_bias = if inner >= 2 {
        let total = samples.iter().fold(T::zero(), |acc, s| acc + s.bias.unwrap_or_else(T::zero));
        // bias of the mean of exp(..) is positive; the distance is 1 minus it
        Some(-(total / T::from_usize_lossy(outer)))
    } else {
        None
    };
    Ok(GraphonEstimate {
        estimate: T::one() - stats.mean,
        std_error: Some(std_error),
        jackknife_bias,
        mode: cfg.mode,
        samples: outer * inner,
    })
}
