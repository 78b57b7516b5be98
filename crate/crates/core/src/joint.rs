//! The joint metric `d_{X,G,P}` and its decompositions.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::digraph::{VertexSet, WeightedDigraph};
use crate::error::{Error, Result};
pub use crate::metric::Evaluation;
use crate::metric::{complement_of_powers, DistanceTable, ElementalMetric};
use crate::scalar::Scalar;

/// A weighted digraph on `N` vertices together with `N` elemental metrics.
#[derive(Clone, Debug)]
pub struct JointMetricSpace<T> {
    graph: WeightedDigraph<T>,
    metrics: Vec<ElementalMetric<T>>,
}

/// The same point pair on the self-loops-only and the completed graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistancePair<T> {
    pub d_null: T,
    pub d_full: T,
}

/// `|<supp(x, y)>| / N`, kept exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryDistance {
    pub closure: VertexSet,
    pub n: usize,
}

impl BinaryDistance {
    pub fn ratio(&self) -> Ratio<usize> {
        Ratio::new(self.closure.len(), self.n)
    }

    pub fn value<T: Scalar>(&self) -> T {
        T::from_usize_lossy(self.closure.len()) / T::from_usize_lossy(self.n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnionDecomposition<T> {
    /// Joint distance on the disjoint union.
    pub lhs: T,
    /// `sum_k (N_k / N) d_k`.
    pub rhs: T,
    /// The per-part distances `d_k`.
    pub parts: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductLawReport<T> {
    /// Joint distance over the product graph, normalized by `1 / (N1 N2)`.
    pub lhs: T,
    /// `1 - (N1^2/N - d_F1)(N2^2/N - d_F2)` with `N = N1 + N2`, as printed.
    pub rhs_as_printed: T,
    pub d_f1: T,
    pub d_f2: T,
    pub normalization_used: String,
}

impl<T: Scalar> JointMetricSpace<T> {
    pub fn new(graph: WeightedDigraph<T>, metrics: Vec<ElementalMetric<T>>) -> Result<Self> {
        if metrics.len() != graph.n() {
            return Err(Error::invalid(format!(
                "{} metrics supplied for a graph on {} vertices",
                metrics.len(),
                graph.n()
            )));
        }
        Ok(JointMetricSpace { graph, metrics })
    }

    /// Every factor uses the same metric.
    pub fn uniform(graph: WeightedDigraph<T>, metric: ElementalMetric<T>) -> Self {
        let metrics = vec![metric; graph.n()];
        JointMetricSpace { graph, metrics }
    }

    pub fn graph(&self) -> &WeightedDigraph<T> {
        &self.graph
    }

    pub fn metrics(&self) -> &[ElementalMetric<T>] {
        &self.metrics
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Same metrics over a different graph on the same vertex count.
    pub fn with_graph(&self, graph: WeightedDigraph<T>) -> Result<Self> {
        Self::new(graph, self.metrics.clone())
    }

    pub fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::invalid(format!("point has {} coordinates, space has {}", x.len(), self.n())));
        }
        if let Some((i, v)) = x.iter().zip(&self.metrics).enumerate().find(|(_, (v, m))| !m.accepts(**v)).map(|(i, (v, _))| (i, v)) {
            return Err(Error::invalid(format!("coordinate {i} = {v} is outside its factor space")));
        }
        Ok(())
    }

    fn check_pair(&self, x: &[T], y: &[T]) -> Result<()> {
        self.check_point(x)?;
        self.check_point(y)
    }

    pub fn elemental_distances(&self, x: &[T], y: &[T]) -> Vec<T> {
        self.metrics
            .iter()
            .zip(x.iter().zip(y))
            .map(|(m, (&a, &b))| m.evaluate(a, b))
            .collect()
    }

    fn row_from(&self, j: usize, d: &[T], evaluation: Evaluation) -> T {
        let terms = self.graph.row(j).iter().map(|&(i, p)| (d[i], p.recip()));
        complement_of_powers(terms, evaluation)
    }

    fn mean_of_rows(&self, d: &[T], evaluation: Evaluation) -> T {
        let sum = (0..self.n()).fold(T::zero(), |acc, j| acc + self.row_from(j, d, evaluation));
        sum / T::from_usize_lossy(self.n())
    }

    /// `1 - prod_{(j,i) in E} (1 - d_i)^(1/p_ji)` for vertex `j`.
    pub fn row_factor(&self, j: usize, x: &[T], y: &[T]) -> Result<T> {
        if j >= self.n() {
            return Err(Error::invalid(format!("vertex {j} is out of range for n = {}", self.n())));
        }
        self.check_pair(x, y)?;
        Ok(self.row_from(j, &self.elemental_distances(x, y), Evaluation::LogDomain))
    }

    /// The joint distance, evaluated in the log domain.
    pub fn joint_distance(&self, x: &[T], y: &[T]) -> Result<T> {
        self.joint_distance_with(x, y, Evaluation::LogDomain)
    }

    pub fn joint_distance_with(&self, x: &[T], y: &[T], evaluation: Evaluation) -> Result<T> {
        self.check_pair(x, y)?;
        Ok(self.mean_of_rows(&self.elemental_distances(x, y), evaluation))
    }

    /// Joint distance without conformance checks, for inner loops over points
    /// already known to fit the space.
    pub(crate) fn distance_unchecked(&self, x: &[T], y: &[T]) -> T {
        self.mean_of_rows(&self.elemental_distances(x, y), Evaluation::LogDomain)
    }

    /// Evaluates many pairs in parallel; results come back in input order.
    pub fn joint_distances<P: AsRef<[T]> + Sync>(&self, pairs: &[(P, P)]) -> Result<Vec<T>> {
        pairs
            .par_iter()
            .map(|(x, y)| self.joint_distance(x.as_ref(), y.as_ref()))
            .collect()
    }

    pub fn support(&self, x: &[T], y: &[T]) -> Result<VertexSet> {
        self.check_pair(x, y)?;
        Ok(support(x, y, &self.metrics))
    }

    /// `|<supp(x, y)>| / N` for {0,1}-valued factor metrics.
    ///
    /// This agrees with [`Self::joint_distance`] evaluated on
    /// `graph().transitive_closure()`; on a graph that is not transitively
    /// closed the one-hop row products only see direct successors, so the
    /// joint distance can be smaller.
    pub fn binary_joint_distance(&self, x: &[T], y: &[T]) -> Result<BinaryDistance> {
        if let Some(i) = self.metrics.iter().position(|m| !m.is_binary()) {
            return Err(Error::Precondition(format!("factor metric {i} is not {{0,1}}-valued")));
        }
        let supp = self.support(x, y)?;
        Ok(BinaryDistance {
            closure: self.graph.hereditary_closure(&supp)?,
            n: self.n(),
        })
    }

    /// The spaces `d_null` and `d_full` are evaluated on: this graph
    /// restricted to its self-loops, and this graph completed with weight-1
    /// edges. For graphs with all weights 1 these are the null and complete
    /// graphs.
    pub fn reference_spaces(&self) -> (Self, Self) {
        let null = JointMetricSpace {
            graph: self.graph.self_loops_only(),
            metrics: self.metrics.clone(),
        };
        let full = JointMetricSpace {
            graph: self.graph.completed(),
            metrics: self.metrics.clone(),
        };
        (null, full)
    }

    pub fn reference_distances(&self, x: &[T], y: &[T]) -> Result<DistancePair<T>> {
        self.check_pair(x, y)?;
        let (null, full) = self.reference_spaces();
        Ok(DistancePair {
            d_null: null.distance_unchecked(x, y),
            d_full: full.distance_unchecked(x, y),
        })
    }

    /// Concatenates factor spaces over the disjoint union of their graphs.
    pub fn disjoint_union(parts: &[&Self]) -> Result<Self> {
        let (first, rest) = parts
            .split_first()
            .ok_or_else(|| Error::invalid("disjoint union needs at least one space"))?;
        let mut graph = first.graph.clone();
        let mut metrics = first.metrics.clone();
        for s in rest {
            graph = graph.disjoint_union(&s.graph);
            metrics.extend(s.metrics.iter().cloned());
        }
        Self::new(graph, metrics)
    }

    /// Space over `G1 □ G2` whose vertex `(u1, u2)` is the function space
    /// `F(X_u1, Y_u2)` with the uniform metric; both factor spaces must be
    /// table-backed. A coordinate encodes a function `f` as
    /// `sum_k f(k) * m^k` where `m` is the codomain size.
    pub fn cartesian_function_space(s1: &Self, s2: &Self) -> Result<Self> {
        let table = |s: &Self, k: usize| match &s.metrics[k] {
            ElementalMetric::Table(t) => Ok(t.clone()),
            _ => Err(Error::Precondition(format!("factor {k} is not table-backed"))),
        };
        let mut metrics = Vec::with_capacity(s1.n() * s2.n());
        for u1 in 0..s1.n() {
            let domain = table(s1, u1)?;
            for u2 in 0..s2.n() {
                let codomain = table(s2, u2)?;
                metrics.push(ElementalMetric::Table(uniform_function_metric(domain.size(), &codomain)?));
            }
        }
        Self::new(s1.graph.cartesian_product(&s2.graph), metrics)
    }
}

/// Indices where the elemental distance is positive.
pub fn support<T: Scalar>(x: &[T], y: &[T], metrics: &[ElementalMetric<T>]) -> VertexSet {
    metrics
        .iter()
        .zip(x.iter().zip(y))
        .enumerate()
        .filter(|(_, (m, (&a, &b)))| m.evaluate(a, b) > T::zero())
        .map(|(i, _)| i)
        .collect()
}

/// Digraph weight `|<supp(v)>|`, where `supp(v)` holds the non-identity
/// entries. On the self-loops-only graph this is the Hamming weight; on a
/// poset's Hasse digraph it is the poset weight.
pub fn digraph_weight<T: Scalar, A: PartialEq>(g: &WeightedDigraph<T>, v: &[A], identity: &A) -> Result<usize> {
    if v.len() != g.n() {
        return Err(Error::invalid(format!("vector has {} entries, graph has {} vertices", v.len(), g.n())));
    }
    let supp: VertexSet = v.iter().enumerate().filter(|(_, a)| *a != identity).map(|(i, _)| i).collect();
    Ok(g.hereditary_closure(&supp)?.len())
}

/// Checks the disjoint-union law on points over the concatenated space.
pub fn union_decomposition<T: Scalar>(
    parts: &[&JointMetricSpace<T>],
    x: &[T],
    y: &[T],
) -> Result<UnionDecomposition<T>> {
    let whole = JointMetricSpace::disjoint_union(parts)?;
    let lhs = whole.joint_distance(x, y)?;
    let n = T::from_usize_lossy(whole.n());
    let mut offset = 0;
    let mut rhs = T::zero();
    let mut distances = Vec::with_capacity(parts.len());
    for s in parts {
        let range = offset..offset + s.n();
        let d = s.joint_distance(&x[range.clone()], &y[range])?;
        rhs = rhs + T::from_usize_lossy(s.n()) / n * d;
        distances.push(d);
        offset += s.n();
    }
    Ok(UnionDecomposition {
        lhs,
        rhs,
        parts: distances,
    })
}

/// Evaluates both sides of the Cartesian-product formula. Diagnostic only:
/// the two numbers are reported, not asserted equal.
///
/// `d_F1` is the joint distance on the disjoint union of the `N1` row blocks
/// `{(u1, *)}`, each carrying a copy of `G2`; `d_F2` likewise on the `N2`
/// column blocks `{(*, u2)}` carrying copies of `G1`.
pub fn product_law_report<T: Scalar>(
    s1: &JointMetricSpace<T>,
    s2: &JointMetricSpace<T>,
    x: &[T],
    y: &[T],
) -> Result<ProductLawReport<T>> {
    let product = JointMetricSpace::cartesian_function_space(s1, s2)?;
    let lhs = product.joint_distance(x, y)?;
    let (n1, n2) = (s1.n(), s2.n());
    let metric = |u1: usize, u2: usize| product.metrics[u1 * n2 + u2].clone();

    let rows: Vec<JointMetricSpace<T>> = (0..n1)
        .map(|u1| JointMetricSpace::new(s2.graph.clone(), (0..n2).map(|u2| metric(u1, u2)).collect()))
        .collect::<Result<_>>()?;
    let cols: Vec<JointMetricSpace<T>> = (0..n2)
        .map(|u2| JointMetricSpace::new(s1.graph.clone(), (0..n1).map(|u1| metric(u1, u2)).collect()))
        .collect::<Result<_>>()?;
    let row_refs: Vec<&JointMetricSpace<T>> = rows.iter().collect();
    let col_refs: Vec<&JointMetricSpace<T>> = cols.iter().collect();
    let transpose = |p: &[T]| -> Vec<T> { (0..n2).flat_map(|u2| (0..n1).map(move |u1| p[u1 * n2 + u2])).collect() };
    let d_f1 = JointMetricSpace::disjoint_union(&row_refs)?.joint_distance(x, y)?;
    let d_f2 = JointMetricSpace::disjoint_union(&col_refs)?.joint_distance(&transpose(x), &transpose(y))?;

    let n = T::from_usize_lossy(n1 + n2);
    let sq = |k: usize| T::from_usize_lossy(k * k);
    let rhs_as_printed = T::one() - (sq(n1) / n - d_f1) * (sq(n2) / n - d_f2);
    Ok(ProductLawReport {
        lhs,
        rhs_as_printed,
        d_f1,
        d_f2,
        normalization_used: format!("lhs: 1/(N1*N2) = 1/{}; rhs: N = N1+N2 = {}", n1 * n2, n1 + n2),
    })
}

/// Uniform metric `sup_k d(f(k), g(k))` on all functions from a domain of
/// `domain_size` points into the codomain table.
pub fn uniform_function_metric<T: Scalar>(domain_size: usize, codomain: &DistanceTable<T>) -> Result<DistanceTable<T>> {
    let m = codomain.size();
    let count = u32::try_from(domain_size)
        .ok()
        .and_then(|e| m.checked_pow(e))
        .filter(|&c| c <= 4096)
        .ok_or_else(|| Error::invalid(format!("function space {m}^{domain_size} is too large to tabulate")))?;
    let digits = |mut f: usize| -> Vec<usize> {
        (0..domain_size)
            .map(|_| {
                let d = f % m;
                f /= m;
                d
            })
            .collect()
    };
    let all: Vec<Vec<usize>> = (0..count).map(digits).collect();
    let mut entries = Vec::with_capacity(count * count);
    for f in &all {
        for g in &all {
            let sup = f.iter().zip(g).fold(T::zero(), |acc, (&a, &b)| acc.max(codomain.get(a, b)));
            entries.push(sup);
        }
    }
    DistanceTable::new(count, entries)
}
