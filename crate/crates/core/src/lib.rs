//! Graph-parameterized joint metrics on products of normalized metric spaces.
//!
//! A [`JointMetricSpace`] pairs a [`WeightedDigraph`] on `N` vertices with `N`
//! elemental metrics `d_i` taking values in `[0, 1]`. The joint distance is
//!
//! ```text
//! d(g, h) = 1 - (1/N) * sum_j prod_{(j,i) in E} (1 - d_i(g_i, h_i))^(1 / p_ji)
//! ```
//!
//! where every vertex carries a self-edge with `p = 1` unless told otherwise.
//!
//! ```
//! use graphmetric::{generate, GraphKind, Metric, Space};
//!
//! let g = generate(&GraphKind::Complete { n: 2 }, 1.0).unwrap();
//! let s = Space::uniform(g, Metric::HalfAbsolute);
//! let d = s.joint_distance(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
//! assert!((d - 0.75).abs() < 1e-15);
//! ```
//! The crate also covers the binary-alphabet closure formula, classical
//! Hamming/poset/digraph weights, disjoint-union and Cartesian-product
//! decompositions, the graphon limit of the distance, and the sampling
//! experiments used to study its distribution.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the bottom of this file fix it to `f64`, which is what the file formats
//! and the experiment layer use.

pub mod digraph;
pub mod error;
pub mod experiment;
pub mod graphon;
pub mod joint;
pub mod laws;
pub mod metric;
pub mod rng;
mod scalar;

pub use digraph::generate::{generate, GraphKind};
pub use digraph::{Edit, VertexSet, WeightedDigraph};
pub use error::{Error, Result};
pub use experiment::{
    distance_distribution, log_distance_ratio_distribution, DistributionSummary, ExportFormat,
    SampleMode, SampleSource, SampleSpec,
};
pub use graphon::{
    graphon_distance, step_graphon, ComplexMetric, EstimatorConfig, EstimatorMode,
    GraphonEstimate, PathFunction,
};
pub use joint::{
    digraph_weight, support, union_decomposition, BinaryDistance, DistancePair, Evaluation,
    JointMetricSpace, ProductLawReport, UnionDecomposition,
};
pub use metric::{
    exp_complement, log_domain_transform, normalize_metric, weighted_product_distance,
    weighted_product_distance_with, DistanceTable, ElementalMetric, ExponentVector,
    Normalization, ProductPoint, RawDistance,
};
pub use scalar::Scalar;

pub type Digraph = WeightedDigraph<f64>;
pub type Space = JointMetricSpace<f64>;
pub type Metric = ElementalMetric<f64>;
pub type Point = ProductPoint<f64>;
pub type Graphon = graphon::Graphon<f64>;
pub type Path = PathFunction<f64>;
