//! Single-factor metrics, normalization, and the exponent-weighted product
//! metric `1 - prod_i (1 - d_i)^(a_i)`.
//!
//! The product metric is evaluated in the log domain by default:
//! `-log(1 - d)` turns every normalized metric below 1 into an additive
//! metric, the weighted sum of those is again a metric, and `1 - e^(-t)` maps
//! it back. The direct product of powers is kept for cross-checking.

use std::fmt;
use std::ops::Deref;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A raw (not necessarily normalized) distance on real coordinates.
#[derive(Clone)]
pub enum RawDistance<T> {
    /// `|x - y|`, the Euclidean metric on the line.
    AbsoluteDifference,
    Custom(Arc<dyn Fn(T, T) -> T + Send + Sync>),
}

impl<T: Scalar> RawDistance<T> {
    pub fn custom(f: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        RawDistance::Custom(Arc::new(f))
    }

    pub fn evaluate(&self, x: T, y: T) -> T {
        match self {
            RawDistance::AbsoluteDifference => (x - y).abs(),
            RawDistance::Custom(f) => f(x, y),
        }
    }
}

impl<T> fmt::Debug for RawDistance<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawDistance::AbsoluteDifference => f.write_str("AbsoluteDifference"),
            RawDistance::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// How a raw metric is squeezed into `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Normalization<T> {
    /// Divide by the supremum of the raw metric (finite or bounded spaces).
    Bounded { sup: T },
    /// `t -> t / (1 + t)`.
    Unbounded,
}

/// Square distance matrix over a finite space `{0, .., n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceTable<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Scalar> DistanceTable<T> {
    /// Builds a table from row-major entries, rejecting anything that is not a
    /// normalized metric: wrong shape, nonzero diagonal, asymmetry, values
    /// outside `[0, 1]`, or a triangle violation beyond `1e-12`.
    pub fn new(n: usize, entries: Vec<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("distance table must have n >= 1"));
        }
        if entries.len() != n * n {
            return Err(Error::invalid(format!(
                "distance table needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        let at = |a: usize, b: usize| entries[a * n + b];
        for a in 0..n {
            if at(a, a) != T::zero() {
                return Err(Error::invalid(format!("diagonal entry ({a}, {a}) is nonzero")));
            }
            for b in 0..n {
                let v = at(a, b);
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(Error::invalid(format!("entry ({a}, {b}) = {v} is outside [0, 1]")));
                }
                if v != at(b, a) {
                    return Err(Error::invalid(format!("table is asymmetric at ({a}, {b})")));
                }
            }
        }
        let tol = T::lit(1e-12);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if at(a, c) > at(a, b) + at(b, c) + tol {
                        return Err(Error::invalid(format!(
                            "triangle inequality fails for ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(DistanceTable { n, entries })
    }

    /// The discrete 0/1 metric on `n` points.
    pub fn discrete(n: usize) -> Result<Self> {
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { T::zero() } else { T::one() })
            .collect();
        Self::new(n, entries)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> T {
        self.entries[a * self.n + b]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    /// True when every entry is 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.entries.iter().all(|&v| v == T::zero() || v == T::one())
    }

    /// Parses the CSV table format: a first line holding `n`, followed by `n`
    /// rows of `n` comma-separated values.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty distance table".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::Parse(format!("expected header `n`, found `{header}`")))?;
        let mut entries = Vec::with_capacity(n * n);
        let mut rows = 0;
        for line in lines {
            rows += 1;
            let row: Vec<&str> = line.split(',').map(str::trim).collect();
            if row.len() != n {
                return Err(Error::Parse(format!("row {rows} has {} values, expected {n}", row.len())));
            }
            for cell in row {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number `{cell}` in row {rows}")))?;
                entries.push(T::lit(v));
            }
        }
        if rows != n {
            return Err(Error::Parse(format!("expected {n} rows, found {rows}")));
        }
        Self::new(n, entries)
    }

    pub fn from_csv_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for a in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|b| self.get(a, b).to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// A normalized metric on one factor space.
#[derive(Clone, Debug)]
pub enum ElementalMetric<T> {
    /// `|x - y| / 2` on `[0, 1]`.
    HalfAbsolute,
    /// 0 when the coordinates are equal, 1 otherwise.
    Discrete,
    BoundedRescaled { raw: RawDistance<T>, sup: T },
    UnboundedRescaled { raw: RawDistance<T> },
    /// Finite space; coordinates are point indices into the table.
    Table(DistanceTable<T>),
}

impl<T: Scalar> ElementalMetric<T> {
    pub fn evaluate(&self, x: T, y: T) -> T {
        match self {
            ElementalMetric::HalfAbsolute => (x - y).abs() * T::lit(0.5),
            ElementalMetric::Discrete => {
                if x == y {
                    T::zero()
                } else {
                    T::one()
                }
            }
            ElementalMetric::BoundedRescaled { raw, sup } => (raw.evaluate(x, y) / *sup).min(T::one()),
            ElementalMetric::UnboundedRescaled { raw } => {
                let t = raw.evaluate(x, y);
                t / (T::one() + t)
            }
            ElementalMetric::Table(table) => {
                table.get(x.to_usize().unwrap_or(0), y.to_usize().unwrap_or(0))
            }
        }
    }

    /// Whether `x` is a valid coordinate for this factor space.
    pub fn accepts(&self, x: T) -> bool {
        match self {
            ElementalMetric::HalfAbsolute => x >= T::zero() && x <= T::one(),
            ElementalMetric::Table(table) => {
                x >= T::zero() && x.fract() == T::zero() && x < T::from_usize_lossy(table.size())
            }
            _ => x.is_finite(),
        }
    }

    /// True for metrics that only take the values 0 and 1.
    pub fn is_binary(&self) -> bool {
        match self {
            ElementalMetric::Discrete => true,
            ElementalMetric::Table(table) => table.is_binary(),
            _ => false,
        }
    }
}

/// Rescales a raw metric into `[0, 1]`.
pub fn normalize_metric<T: Scalar>(
    raw: RawDistance<T>,
    mode: Normalization<T>,
) -> Result<ElementalMetric<T>> {
    match mode {
        Normalization::Bounded { sup } => {
            if sup <= T::zero() || !sup.is_finite() {
                return Err(Error::invalid(format!("supremum must be positive and finite, got {sup}")));
            }
            Ok(ElementalMetric::BoundedRescaled { raw, sup })
        }
        Normalization::Unbounded => Ok(ElementalMetric::UnboundedRescaled { raw }),
    }
}

/// Per-factor exponents `a_i >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentVector<T>(Vec<T>);

impl<T: Scalar> ExponentVector<T> {
    pub fn new(a: Vec<T>) -> Result<Self> {
        if let Some((i, v)) = a.iter().enumerate().find(|(_, v)| **v < T::one() || !v.is_finite()) {
            return Err(Error::invalid(format!("exponent a[{i}] = {v} must be finite and >= 1")));
        }
        Ok(ExponentVector(a))
    }

    pub fn ones(n: usize) -> Self {
        ExponentVector(vec![T::one(); n])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }
}

/// A point of the product space `X_1 x .. x X_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPoint<T>(Vec<T>);

impl<T> ProductPoint<T> {
    pub fn new(coords: Vec<T>) -> Self {
        ProductPoint(coords)
    }

    pub fn coords(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> From<Vec<T>> for ProductPoint<T> {
    fn from(v: Vec<T>) -> Self {
        ProductPoint(v)
    }
}

impl<T> Deref for ProductPoint<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

/// `-log(1 - v)`, the map taking a normalized metric below 1 to an additive one.
pub fn log_domain_transform<T: Scalar>(v: T) -> Result<T> {
    if v == T::one() {
        return Err(Error::SaturatedDistance);
    }
    if !(v >= T::zero() && v <= T::one()) {
        return Err(Error::invalid(format!("log-domain transform needs v in [0, 1), got {v}")));
    }
    Ok(-(-v).ln_1p())
}

/// `1 - e^(-t)`: increasing and subadditive on `[0, inf)`.
pub fn exp_complement<T: Scalar>(t: T) -> T {
    -(-t).exp_m1()
}

/// How a product of powers `prod_i (1 - d_i)^(a_i)` is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Evaluation {
    /// Sum `a_i * log(1 - d_i)`, then exponentiate once.
    #[default]
    LogDomain,
    /// Multiply the powers directly.
    Direct,
}

/// `1 - prod (1 - d_k)^(a_k)` over `(d_k, a_k)` terms.
///
/// A term with `d_k = 1` saturates the product; it is handled before the log.
pub(crate) fn complement_of_powers<T: Scalar>(
    terms: impl Iterator<Item = (T, T)>,
    evaluation: Evaluation,
) -> T {
    match evaluation {
        Evaluation::LogDomain => {
            let mut acc = T::zero();
            for (d, a) in terms {
                if d >= T::one() {
                    return T::one();
                }
                acc = acc + (-d).ln_1p() * a;
            }
            exp_complement(-acc)
        }
        Evaluation::Direct => {
            let mut prod = T::one();
            for (d, a) in terms {
                prod = prod * (T::one() - d).powf(a);
            }
            T::one() - prod
        }
    }
}

fn check_product_inputs<T: Scalar>(
    x: &[T],
    y: &[T],
    metrics: &[ElementalMetric<T>],
    a: &ExponentVector<T>,
) -> Result<()> {
    let n = metrics.len();
    if x.len() != n || y.len() != n || a.as_slice().len() != n {
        return Err(Error::invalid(format!(
            "length mismatch: {} metrics, points of length {} and {}, {} exponents",
            n,
            x.len(),
            y.len(),
            a.as_slice().len()
        )));
    }
    Ok(())
}

/// Exponent-weighted product metric, evaluated in the log domain.
pub fn weighted_product_distance<T: Scalar>(
    x: &[T],
    y: &[T],
    metrics: &[ElementalMetric<T>],
    a: &ExponentVector<T>,
) -> Result<T> {
    weighted_product_distance_with(x, y, metrics, a, Evaluation::LogDomain)
}

pub fn weighted_product_distance_with<T: Scalar>(
    x: &[T],
    y: &[T],
    metrics: &[ElementalMetric<T>],
    a: &ExponentVector<T>,
    evaluation: Evaluation,
) -> Result<T> {
    check_product_inputs(x, y, metrics, a)?;
    let terms = metrics
        .iter()
        .zip(x.iter().zip(y))
        .zip(a.as_slice())
        .map(|((m, (&xi, &yi)), &ai)| (m.evaluate(xi, yi), ai));
    Ok(complement_of_powers(terms, evaluation))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_normalization_divides_by_supremum() {
        let m = normalize_metric(RawDistance::AbsoluteDifference, Normalization::Bounded { sup: 2.0 }).unwrap();
        assert_eq!(m.evaluate(0.0, 2.0), 1.0);
        assert_eq!(m.evaluate(0.5, 0.5), 0.0);
    }

    #[test]
    fn unbounded_normalization_maps_through_t_over_one_plus_t() {
        let m = normalize_metric(RawDistance::AbsoluteDifference, Normalization::<f64>::Unbounded).unwrap();
        assert_eq!(m.evaluate(0.0, 3.0), 0.75);
        assert_eq!(m.evaluate(-4.0, -4.0), 0.0);
    }

    #[test]
    fn non_positive_supremum_is_rejected() {
        for sup in [0.0, -1.0, f64::NAN] {
            let r = normalize_metric(RawDistance::AbsoluteDifference, Normalization::Bounded { sup });
            assert!(matches!(r, Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn product_examples() {
        let metrics = vec![ElementalMetric::HalfAbsolute; 2];
        let a = ExponentVector::ones(2);
        let d = weighted_product_distance(&[0.0f64, 0.0], &[1.0, 1.0], &metrics, &a).unwrap();
        assert!((d - 0.75).abs() < 1e-15);
        assert_eq!(weighted_product_distance(&[0.3, 0.6], &[0.3, 0.6], &metrics, &a).unwrap(), 0.0);

        let metrics = vec![ElementalMetric::Discrete, ElementalMetric::HalfAbsolute];
        let a = ExponentVector::new(vec![3.0, 1.5]).unwrap();
        for ev in [Evaluation::LogDomain, Evaluation::Direct] {
            let d = weighted_product_distance_with(&[0.0, 0.1], &[1.0, 0.4], &metrics, &a, ev).unwrap();
            assert_eq!(d, 1.0);
        }
    }

    #[test]
    fn product_rejects_length_mismatch() {
        let metrics = vec![ElementalMetric::<f64>::HalfAbsolute; 2];
        let a = ExponentVector::ones(2);
        assert!(weighted_product_distance(&[0.0], &[1.0, 1.0], &metrics, &a).is_err());
        assert!(weighted_product_distance(&[0.0, 0.0], &[1.0, 1.0], &metrics, &ExponentVector::ones(3)).is_err());
    }

    #[test]
    fn exponents_below_one_are_rejected() {
        assert!(ExponentVector::new(vec![1.0, 0.5]).is_err());
        assert!(ExponentVector::new(vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn log_transform_values_and_boundary() {
        assert_eq!(log_domain_transform(0.0).unwrap(), 0.0);
        assert!((log_domain_transform(0.5f64).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(matches!(log_domain_transform(1.0), Err(Error::SaturatedDistance)));
        assert!(matches!(log_domain_transform(1.5), Err(Error::InvalidParameter(_))));
        assert!(matches!(log_domain_transform(-0.1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn generic_over_f32() {
        let metrics = vec![ElementalMetric::<f32>::HalfAbsolute; 2];
        let d = weighted_product_distance(&[0.0f32, 0.0], &[1.0, 1.0], &metrics, &ExponentVector::ones(2)).unwrap();
        assert!((d - 0.75).abs() < 1e-6);
    }

    #[test]
    fn table_validation() {
        assert!(DistanceTable::new(2, vec![0.0, 0.5, 0.4, 0.0]).is_err());
        assert!(DistanceTable::new(2, vec![0.1, 0.5, 0.5, 0.0]).is_err());
        assert!(DistanceTable::new(2, vec![0.0, 1.5, 1.5, 0.0]).is_err());
        // 0-2 is longer than 0-1-2
        assert!(DistanceTable::new(3, vec![0.0, 0.1, 0.9, 0.1, 0.0, 0.1, 0.9, 0.1, 0.0]).is_err());
        let t = DistanceTable::<f64>::discrete(3).unwrap();
        assert!(t.is_binary());
    }

    #[test]
    fn table_csv_round_trip() {
        let t = DistanceTable::new(3, vec![0.0, 0.5, 1.0, 0.5, 0.0, 0.5, 1.0, 0.5, 0.0]).unwrap();
        let back = DistanceTable::<f64>::from_csv_str(&t.to_csv_string()).unwrap();
        assert_eq!(t, back);
        assert!(DistanceTable::<f64>::from_csv_str("2\n0,1\n").is_err());
        assert!(DistanceTable::<f64>::from_csv_str("2\n0,1\n0.5,0\n").is_err());
    }

    #[test]
    fn table_metric_accepts_indices_only() {
        let m = ElementalMetric::Table(DistanceTable::<f64>::discrete(3).unwrap());
        assert!(m.accepts(2.0));
        assert!(!m.accepts(3.0));
        assert!(!m.accepts(1.5));
        assert_eq!(m.evaluate(0.0, 2.0), 1.0);
        assert!(m.is_binary());
    }
}
