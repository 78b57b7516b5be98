//! Randomized checks of the structural laws, run over seeded random instances.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::digraph::{Edit, WeightedDigraph};
use crate::error::{Error, Result};
use crate::joint::{union_decomposition, JointMetricSpace};
use crate::metric::ElementalMetric;
use crate::rng;

const TOL: f64 = 1e-12;
/// Failures recorded verbatim in a report; later ones are only counted.
const KEPT_FAILURES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    /// Zero on the diagonal, symmetry, range `[0, 1]`, triangle inequality.
    Axioms,
    /// Adding an edge never decreases the distance.
    MonotoneEdge,
    /// Raising an edge weight never increases the distance.
    MonotoneWeight,
    /// On binary alphabets over a transitively closed graph the distance is `|<supp>| / N`.
    BinaryOracle,
    /// The distance on a disjoint union is the size-weighted mean of the parts.
    Union,
    /// `d_null <= d <= d_full`.
    Sandwich,
}

impl Law {
    pub const ALL: [Law; 6] = [
        Law::Axioms,
        Law::MonotoneEdge,
        Law::MonotoneWeight,
        Law::BinaryOracle,
        Law::Union,
        Law::Sandwich,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Law::Axioms => "axioms",
            Law::MonotoneEdge => "monotone-edge",
            Law::MonotoneWeight => "monotone-weight",
            Law::BinaryOracle => "binary-oracle",
            Law::Union => "union",
            Law::Sandwich => "sandwich",
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Law::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown law `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawReport {
    pub law: Law,
    pub trials: usize,
    pub seed: u64,
    pub failed: usize,
    /// Largest amount by which an inequality or equality was missed.
    pub max_violation: f64,
    pub failures: Vec<String>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

struct Tally {
    failed: usize,
    max_violation: f64,
    failures: Vec<String>,
}

impl Tally {
    /// Records a failure when `violation > TOL`.
    fn check(&mut self, trial: usize, violation: f64, what: impl FnOnce() -> String) -> bool {
        self.max_violation = self.max_violation.max(violation);
        if violation > TOL || violation.is_nan() {
            self.failed += 1;
            if self.failures.len() < KEPT_FAILURES {
                self.failures.push(format!("trial {trial}: {}", what()));
            }
            return false;
        }
        true
    }
}

/// Runs `trials` random instances of `law`. Trial `t` draws from stream `(seed, t)`.
pub fn verify(law: Law, trials: usize, seed: u64) -> Result<LawReport> {
    let mut tally = Tally {
        failed: 0,
        max_violation: 0.0,
        failures: Vec::new(),
    };
    for t in 0..trials {
        let mut r = rng::stream(seed, t as u64);
        match law {
            Law::Axioms => axioms(&mut r, t, &mut tally)?,
            Law::MonotoneEdge => monotone_edge(&mut r, t, &mut tally)?,
            Law::MonotoneWeight => monotone_weight(&mut r, t, &mut tally)?,
            Law::BinaryOracle => binary_oracle(&mut r, t, &mut tally)?,
            Law::Union => union(&mut r, t, &mut tally)?,
            Law::Sandwich => sandwich(&mut r, t, &mut tally)?,
        }
    }
    Ok(LawReport {
        law,
        trials,
        seed,
        failed: tally.failed,
        max_violation: tally.max_violation,
        failures: tally.failures,
    })
}

/// Random graph on `2..=max_n` vertices; each ordered pair (loops included)
/// is an edge with probability 0.4 and weight in `[lo, hi)`.
fn random_graph(r: &mut ChaCha8Rng, max_n: usize, lo: f64, hi: f64) -> Result<WeightedDigraph<f64>> {
    let n = r.gen_range(2..=max_n);
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if r.gen_bool(0.4) {
                edges.push((j, i, r.gen_range(lo..hi)));
            }
        }
    }
    WeightedDigraph::from_edges(n, r.gen_bool(0.8), edges)
}

fn cube_point(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.gen::<f64>()).collect()
}

fn half_abs(g: WeightedDigraph<f64>) -> JointMetricSpace<f64> {
    JointMetricSpace::uniform(g, ElementalMetric::HalfAbsolute)
}

fn axioms(r: &mut ChaCha8Rng, t: usize, tally: &mut Tally) -> Result<()> {
    let s = half_abs(random_graph(r, 7, 0.05, 1.0)?);
    let (x, y, z) = (cube_point(r, s.n()), cube_point(r, s.n()), cube_point(r, s.n()));
    let dxy = s.joint_distance(&x, &y)?;
    let dyx = s.joint_distance(&y, &x)?;
    let dyz = s.joint_distance(&y, &z)?;
    let dxz = s.joint_distance(&x, &z)?;
    let dxx = s.joint_distance(&x, &x)?;
    tally.check(t, dxx.abs(), || format!("d(x, x) = {dxx}"));
    tally.check(t, (dxy - dyx).abs(), || format!("d(x, y) = {dxy} but d(y, x) = {dyx}"));
    tally.check(t, (-dxy).max(dxy - 1.0), || format!("d(x, y) = {dxy} outside [0, 1]"));
    tally.check(t, dxz - dxy - dyz, || format!("triangle: {dxz} > {dxy} + {dyz}"));
    Ok(())
}

fn monotone_edge(r: &mut ChaCha8Rng, t: usize, tally: &mut Tally) -> Result<()> {
    let g = random_graph(r, 7, 0.05, 1.0)?;
    let n = g.n();
    let missing: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (j, i)))
        .filter(|&(j, i)| !g.has_explicit_edge(j, i) && !(j == i && g.implicit_self_loops()))
        .collect();
    if missing.is_empty() {
        return Ok(());
    }
    let (j, i) = missing[r.gen_range(0..missing.len())];
    let p = r.gen_range(0.05..1.0);
    let bigger = g.apply_edit(Edit::AddEdge { j, i, p })?;
    let (x, y) = (cube_point(r, n), cube_point(r, n));
    let before = half_abs(g).joint_distance(&x, &y)?;
    let after = half_abs(bigger).joint_distance(&x, &y)?;
    tally.check(t, before - after, || format!("adding ({j}, {i}, {p}) lowered {before} to {after}"));
    Ok(())
}

fn monotone_weight(r: &mut ChaCha8Rng, t: usize, tally: &mut Tally) -> Result<()> {
    let g = random_graph(r, 7, 0.05, 0.9)?;
    let edges: Vec<(usize, usize, f64)> = g.edges().collect();
    if edges.is_empty() {
        return Ok(());
    }
    let (j, i, p) = edges[r.gen_range(0..edges.len())];
    let delta = r.gen_range(0.0..(1.0 - p)) * 0.999;
    if delta <= 0.0 {
        return Ok(());
    }
    let raised = g.apply_edit(Edit::PerturbWeight { j, i, delta })?;
    let (x, y) = (cube_point(r, g.n()), cube_point(r, g.n()));
    let before = half_abs(g).joint_distance(&x, &y)?;
    let after = half_abs(raised).joint_distance(&x, &y)?;
    tally.check(t, after - before, || {
        format!("raising p({j}, {i}) from {p} by {delta} raised {before} to {after}")
    });
    Ok(())
}

fn binary_oracle(r: &mut ChaCha8Rng, t: usize, tally: &mut Tally) -> Result<()> {
    let n = r.gen_range(2..=8);
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if j != i && r.gen_bool(0.25) {
                edges.push((j, i, 1.0));
            }
        }
    }
    let g = WeightedDigraph::from_edges(n, true, edges)?.transitive_closure();
    let s = JointMetricSpace::uniform(g, ElementalMetric::Discrete);
    let bits = |r: &mut ChaCha8Rng| (0..n).map(|_| f64::from(u8::from(r.gen_bool(0.5)))).collect::<Vec<_>>();
    let (x, y) = (bits(r), bits(r));
    let exact = s.binary_joint_distance(&x, &y)?;
    let d = s.joint_distance(&x, &y)?;
    let v: f64 = exact.value();
    tally.check(t, (d - v).abs(), || format!("joint distance {d} vs closure ratio {}", exact.ratio()));
    Ok(())
}

fn union(r: &mut ChaCha8Rng, t: usize, tally: &mut Tally) -> Result<()> {
    let k = r.gen_range(2..=3);
    let parts: Vec<JointMetricSpace<f64>> = (0..k)
        .map(|_| random_graph(r, 5, 0.05, 1.0).map(half_abs))
        .collect::<Result<_>>()?;
    let total: usize = parts.iter().map(JointMetricSpace::n).sum();
    let (x, y) = (cube_point(r, total), cube_point(r, total));
    let refs: Vec<&JointMetricSpace<f64>> = parts.iter().collect();
    let u = union_decomposition(&refs, &x, &y)?;
    tally.check(t, (u.lhs - u.rhs).abs(), || format!("union {} vs weighted parts {}", u.lhs, u.rhs));
    Ok(())
}

fn sandwich(r: &mut ChaCha8Rng, t: usize, tally: &mut Tally) -> Result<()> {
    let s = half_abs(random_graph(r, 7, 0.05, 1.0)?);
    let (x, y) = (cube_point(r, s.n()), cube_point(r, s.n()));
    let d = s.joint_distance(&x, &y)?;
    let refs = s.reference_distances(&x, &y)?;
    tally.check(t, refs.d_null - d, || format!("d_null = {} above d = {d}", refs.d_null));
    tally.check(t, d - refs.d_full, || format!("d = {d} above d_full = {}", refs.d_full));
    Ok(())
}
