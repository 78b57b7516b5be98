//! Weighted directed graphs.
//!
//! A stored edge `(j, i)` with weight `p_ji` means that the row product of
//! vertex `j` includes factor `i` with exponent `1 / p_ji`. Reachability for
//! hereditary closures follows the same stored direction: `v` belongs to
//! `<A>` when a directed path leads from `v` into `A`.
//!
//! By default every vertex carries an implicit self-edge of weight 1; an
//! explicit self-edge overrides its weight.

pub mod generate;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A subset of the vertex range `0..n`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VertexSet(BTreeSet<usize>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(BTreeSet::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }

    pub fn insert(&mut self, v: usize) -> bool {
        self.0.insert(v)
    }

    /// Ascending members.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet(iter.into_iter().collect())
    }
}

/// A single-edge modification.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Edit<T> {
    AddEdge { j: usize, i: usize, p: T },
    RemoveEdge { j: usize, i: usize },
    PerturbWeight { j: usize, i: usize, delta: T },
}

#[derive(Clone, Debug)]
pub struct WeightedDigraph<T> {
    n: usize,
    implicit_self_loops: bool,
    edges: BTreeMap<(usize, usize), T>,
    /// Row `j`: the factors `(i, p_ji)` of its product, ascending `i`,
    /// implicit self-loop included.
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: PartialEq> PartialEq for WeightedDigraph<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.implicit_self_loops == other.implicit_self_loops && self.edges == other.edges
    }
}

fn valid_weight<T: Scalar>(p: T) -> bool {
    p > T::zero() && p <= T::one()
}

impl<T: Scalar> WeightedDigraph<T> {
    /// Builds a graph from explicit edges `(j, i, p_ji)`.
    pub fn from_edges(
        n: usize,
        implicit_self_loops: bool,
        edges: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        let mut map = BTreeMap::new();
        for (j, i, p) in edges {
            if j >= n || i >= n {
                return Err(Error::invalid(format!("edge ({j}, {i}) is out of range for n = {n}")));
            }
            if !valid_weight(p) {
                return Err(Error::invalid(format!("edge ({j}, {i}) weight {p} is outside (0, 1]")));
            }
            if map.insert((j, i), p).is_some() {
                return Err(Error::invalid(format!("duplicate edge ({j}, {i})")));
            }
        }
        Ok(Self::from_map(n, implicit_self_loops, map))
    }

    fn from_map(n: usize, implicit_self_loops: bool, edges: BTreeMap<(usize, usize), T>) -> Self {
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for (&(j, i), &p) in &edges {
            rows[j].push((i, p));
        }
        if implicit_self_loops {
            for (j, row) in rows.iter_mut().enumerate() {
                if let Err(pos) = row.binary_search_by_key(&j, |&(i, _)| i) {
                    row.insert(pos, (j, T::one()));
                }
            }
        }
        WeightedDigraph {
            n,
            implicit_self_loops,
            edges,
            rows,
        }
    }

    /// Self-loops only.
    pub fn null(n: usize) -> Result<Self> {
        Self::from_edges(n, true, std::iter::empty())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn implicit_self_loops(&self) -> bool {
        self.implicit_self_loops
    }

    /// Explicit edges sorted by `(j, i)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.edges.iter().map(|(&(j, i), &p)| (j, i, p))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn non_self_edge_count(&self) -> usize {
        self.edges.keys().filter(|(j, i)| j != i).count()
    }

    pub fn has_explicit_edge(&self, j: usize, i: usize) -> bool {
        self.edges.contains_key(&(j, i))
    }

    /// Effective weight of `(j, i)`, counting the implicit self-loop.
    pub fn weight(&self, j: usize, i: usize) -> Option<T> {
        if j >= self.n {
            return None;
        }
        self.rows[j]
            .binary_search_by_key(&i, |&(k, _)| k)
            .ok()
            .map(|pos| self.rows[j][pos].1)
    }

    /// Factors `(i, p_ji)` in the row product of `j`, ascending `i`.
    pub fn row(&self, j: usize) -> &[(usize, T)] {
        &self.rows[j]
    }

    pub fn check_vertex_set(&self, a: &VertexSet) -> Result<()> {
        match a.max() {
            Some(v) if v >= self.n => Err(Error::invalid(format!("vertex {v} is out of range for n = {}", self.n))),
            _ => Ok(()),
        }
    }

    /// Smallest hereditary superset of `a`: every vertex with a directed path
    /// into `a`. Computed by breadth-first search over reversed edges.
    pub fn hereditary_closure(&self, a: &VertexSet) -> Result<VertexSet> {
        self.check_vertex_set(a)?;
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for &(j, i) in self.edges.keys() {
            if j != i {
                preds[i].push(j);
            }
        }
        let mut seen = vec![false; self.n];
        let mut queue: VecDeque<usize> = a.iter().collect();
        for v in a.iter() {
            seen[v] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &u in &preds[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        Ok((0..self.n).filter(|&v| seen[v]).collect())
    }

    /// Vertices reachable from `j` by a path of length >= 1, excluding `j`.
    fn descendants(&self, j: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        seen[j] = true;
        let mut stack = vec![j];
        let mut out = Vec::new();
        while let Some(v) = stack.pop() {
            for &(i, _) in &self.rows[v] {
                if !seen[i] {
                    seen[i] = true;
                    out.push(i);
                    stack.push(i);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Reachability completion: an edge `(j, i)` for every `i != j` reachable
    /// from `j`. Existing edges keep their weights, added edges get weight 1.
    /// For a DAG this is the order relation of the induced poset.
    pub fn transitive_closure(&self) -> Self {
        let mut edges = self.edges.clone();
        for j in 0..self.n {
            for i in self.descendants(j) {
                edges.entry((j, i)).or_insert(T::one());
            }
        }
        Self::from_map(self.n, self.implicit_self_loops, edges)
    }

    /// The graph with every non-self edge removed (self-loop weights kept).
    pub fn self_loops_only(&self) -> Self {
        let edges = self.edges.iter().filter(|(&(j, i), _)| j == i).map(|(&k, &p)| (k, p)).collect();
        Self::from_map(self.n, self.implicit_self_loops, edges)
    }

    /// Adds every missing ordered pair `(j, i)`, `j != i`, with weight 1.
    pub fn completed(&self) -> Self {
        let mut edges = self.edges.clone();
        for j in 0..self.n {
            for i in 0..self.n {
                if i != j {
                    edges.entry((j, i)).or_insert(T::one());
                }
            }
        }
        Self::from_map(self.n, self.implicit_self_loops, edges)
    }

    /// Keeps self-loops and the edges `(j, i)` with `j < i`.
    pub fn upper(&self) -> Self {
        let edges = self.edges.iter().filter(|(&(j, i), _)| j <= i).map(|(&k, &p)| (k, p)).collect();
        Self::from_map(self.n, self.implicit_self_loops, edges)
    }

    /// Adds the mirror `(i, j)` of every edge that lacks one, copying its weight.
    pub fn symmetrized(&self) -> Self {
        let mut edges = self.edges.clone();
        for (&(j, i), &p) in &self.edges {
            edges.entry((i, j)).or_insert(p);
        }
        Self::from_map(self.n, self.implicit_self_loops, edges)
    }

    /// True when every edge has a mirror of equal weight.
    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetry().is_none()
    }

    pub(crate) fn first_asymmetry(&self) -> Option<(usize, usize)> {
        self.edges
            .iter()
            .find(|(&(j, i), &p)| self.edges.get(&(i, j)) != Some(&p))
            .map(|(&k, _)| k)
    }

    /// Returns the edited graph; `self` is unchanged.
    pub fn apply_edit(&self, edit: Edit<T>) -> Result<Self> {
        let reject = |j, i, reason: &str| Error::EditRejected {
            j,
            i,
            reason: reason.to_string(),
        };
        let mut edges = self.edges.clone();
        match edit {
            Edit::AddEdge { j, i, p } => {
                if j >= self.n || i >= self.n {
                    return Err(reject(j, i, "vertex out of range"));
                }
                if edges.contains_key(&(j, i)) {
                    return Err(reject(j, i, "edge already present"));
                }
                if !valid_weight(p) {
                    return Err(reject(j, i, "weight outside (0, 1]"));
                }
                edges.insert((j, i), p);
            }
            Edit::RemoveEdge { j, i } => {
                if edges.remove(&(j, i)).is_none() {
                    return Err(reject(j, i, "edge not present"));
                }
            }
            Edit::PerturbWeight { j, i, delta } => {
                let p = edges.get_mut(&(j, i)).ok_or_else(|| reject(j, i, "edge not present"))?;
                let q = *p + delta;
                if !(q > T::zero() && q < T::one()) {
                    return Err(reject(j, i, "perturbed weight must stay strictly inside (0, 1)"));
                }
                *p = q;
            }
        }
        Ok(Self::from_map(self.n, self.implicit_self_loops, edges))
    }

    /// Writes explicit self-loops of weight 1 where the implicit ones would be.
    fn materialized_self_loops(&self) -> BTreeMap<(usize, usize), T> {
        let mut edges = self.edges.clone();
        if self.implicit_self_loops {
            for v in 0..self.n {
                edges.entry((v, v)).or_insert(T::one());
            }
        }
        edges
    }

    /// Vertex-disjoint union; `other`'s vertices are shifted by `self.n()`.
    /// The weight matrix of the result is block diagonal.
    pub fn disjoint_union(&self, other: &Self) -> Self {
        let same_flag = self.implicit_self_loops == other.implicit_self_loops;
        let (left, right) = if same_flag {
            (self.edges.clone(), other.edges.clone())
        } else {
            (self.materialized_self_loops(), other.materialized_self_loops())
        };
        let mut edges = left;
        let shift = self.n;
        edges.extend(right.into_iter().map(|((j, i), p)| ((j + shift, i + shift), p)));
        let flag = same_flag && self.implicit_self_loops;
        Self::from_map(self.n + other.n, flag, edges)
    }

    /// Cartesian product `self □ other`; vertex `(u1, u2)` is `u1 * n2 + u2`.
    ///
    /// `((u1,u2),(v1,v2))` is an edge when `u1 = v1` and `(u2,v2)` is an edge
    /// of `other` (weight `p_{u2 v2}`), or `u2 = v2` and `(u1,v1)` is an edge
    /// of `self` (weight `p_{u1 v1}`). Both rules apply to self-loops; the
    /// smaller weight wins there.
    pub fn cartesian_product(&self, other: &Self) -> Self {
        let n2 = other.n;
        let flat = |a: usize, b: usize| a * n2 + b;
        let mut edges = BTreeMap::new();
        for u1 in 0..self.n {
            for (&(u2, v2), &p) in &other.edges {
                if u2 != v2 {
                    edges.insert((flat(u1, u2), flat(u1, v2)), p);
                }
            }
        }
        for u2 in 0..n2 {
            for (&(u1, v1), &p) in &self.edges {
                if u1 != v1 {
                    edges.insert((flat(u1, u2), flat(v1, u2)), p);
                }
            }
        }
        let implicit = self.implicit_self_loops || other.implicit_self_loops;
        for u1 in 0..self.n {
            for u2 in 0..n2 {
                let loop_weight = match (self.weight(u1, u1), other.weight(u2, u2)) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
                if let Some(p) = loop_weight {
                    if !(implicit && p == T::one()) {
                        edges.insert((flat(u1, u2), flat(u1, u2)), p);
                    }
                }
            }
        }
        Self::from_map(self.n * n2, implicit, edges)
    }

    /// Dense `n x n` weight matrix, row `j` column `i` holding `p_ji` (0 when
    /// absent, implicit self-loops included).
    pub fn weight_matrix(&self) -> Vec<Vec<T>> {
        let mut m = vec![vec![T::zero(); self.n]; self.n];
        for (j, row) in self.rows.iter().enumerate() {
            for &(i, p) in row {
                m[j][i] = p;
            }
        }
        m
    }

    pub fn to_json_string(&self) -> String {
        let file = GraphFile {
            n: self.n,
            implicit_self_loops: self.implicit_self_loops,
            edges: self.edges().map(|(j, i, p)| (j, i, p.as_f64())).collect(),
        };
        let mut s = serde_json::to_string(&file).expect("graph serializes");
        s.push('\n');
        s
    }

    /// Parses the graph file format; rejects weights outside `(0, 1]` and
    /// duplicate edges.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_edges(
            file.n,
            file.implicit_self_loops,
            file.edges.into_iter().map(|(j, i, p)| (j, i, T::lit(p))),
        )
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    n: usize,
    #[serde(default = "default_true")]
    implicit_self_loops: bool,
    edges: Vec<(usize, usize, f64)>,
}

fn default_true() -> bool {
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> WeightedDigraph<f64> {
        WeightedDigraph::from_edges(3, true, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn set(v: &[usize]) -> VertexSet {
        v.iter().copied().collect()
    }

    #[test]
    fn closure_examples() {
        let g = chain3();
        assert_eq!(g.hereditary_closure(&VertexSet::new()).unwrap(), VertexSet::new());
        assert_eq!(g.hereditary_closure(&set(&[2])).unwrap(), set(&[0, 1, 2]));
        assert_eq!(g.hereditary_closure(&set(&[0])).unwrap(), set(&[0]));
        assert!(matches!(g.hereditary_closure(&set(&[3])), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(WeightedDigraph::<f64>::from_edges(0, true, []).is_err());
        assert!(WeightedDigraph::from_edges(2, true, [(0, 1, 0.0)]).is_err());
        assert!(WeightedDigraph::from_edges(2, true, [(0, 1, 1.5)]).is_err());
        assert!(WeightedDigraph::from_edges(2, true, [(0, 1, 0.5), (0, 1, 0.7)]).is_err());
        assert!(WeightedDigraph::from_edges(2, true, [(0, 2, 0.5)]).is_err());
    }

    #[test]
    fn implicit_self_loop_and_override() {
        let g = WeightedDigraph::from_edges(2, true, [(0, 0, 0.5), (0, 1, 0.25)]).unwrap();
        assert_eq!(g.row(0), &[(0, 0.5), (1, 0.25)]);
        assert_eq!(g.row(1), &[(1, 1.0)]);
        let h = WeightedDigraph::from_edges(2, false, [(0, 1, 0.25)]).unwrap();
        assert_eq!(h.row(1), &[]);
        assert_eq!(h.weight(0, 0), None);
    }

    #[test]
    fn edit_examples() {
        let g = WeightedDigraph::<f64>::null(2).unwrap();
        let g1 = g.apply_edit(Edit::AddEdge { j: 0, i: 1, p: 0.5 }).unwrap();
        assert_eq!(g1.edge_count(), 1);
        assert_eq!(g.edge_count(), 0);

        let removed = g1.apply_edit(Edit::RemoveEdge { j: 0, i: 1 }).unwrap();
        let restored = removed.apply_edit(Edit::AddEdge { j: 0, i: 1, p: 0.5 }).unwrap();
        assert_eq!(restored, g1);

        let pushed = g1.apply_edit(Edit::PerturbWeight { j: 0, i: 1, delta: 0.5 });
        assert!(matches!(pushed, Err(Error::EditRejected { j: 0, i: 1, .. })));
        assert!(g1.apply_edit(Edit::AddEdge { j: 0, i: 1, p: 0.3 }).is_err());
        assert!(g.apply_edit(Edit::RemoveEdge { j: 0, i: 1 }).is_err());
        let down = g1.apply_edit(Edit::PerturbWeight { j: 0, i: 1, delta: -0.25 }).unwrap();
        assert_eq!(down.weight(0, 1), Some(0.25));
    }

    #[test]
    fn union_relabels_second_graph() {
        let k2 = WeightedDigraph::from_edges(2, true, [(0, 1, 0.5), (1, 0, 0.5)]).unwrap();
        let u = k2.disjoint_union(&k2);
        assert_eq!(u.n(), 4);
        assert_eq!(u.edge_count(), 4);
        assert!(u.has_explicit_edge(2, 3) && u.has_explicit_edge(3, 2));
        let one = WeightedDigraph::<f64>::null(1).unwrap();
        let two = one.disjoint_union(&one);
        assert_eq!((two.n(), two.edge_count()), (2, 0));
    }

    #[test]
    fn union_with_mixed_self_loop_flags_materializes_loops() {
        let a = WeightedDigraph::<f64>::null(1).unwrap();
        let b = WeightedDigraph::from_edges(1, false, []).unwrap();
        let u = a.disjoint_union(&b);
        assert!(!u.implicit_self_loops());
        assert_eq!(u.weight(0, 0), Some(1.0));
        assert_eq!(u.weight(1, 1), None);
    }

    #[test]
    fn product_with_single_vertex_is_isomorphic() {
        let p2 = WeightedDigraph::from_edges(2, true, [(0, 1, 0.4)]).unwrap();
        let one = WeightedDigraph::null(1).unwrap();
        assert_eq!(p2.cartesian_product(&one), p2);
        assert_eq!(one.cartesian_product(&p2), p2);
    }

    #[test]
    fn product_self_loop_takes_smaller_weight() {
        let a = WeightedDigraph::from_edges(1, true, [(0, 0, 0.5)]).unwrap();
        let b = WeightedDigraph::from_edges(1, true, [(0, 0, 0.25)]).unwrap();
        assert_eq!(a.cartesian_product(&b).weight(0, 0), Some(0.25));
    }

    #[test]
    fn transitive_closure_of_chain() {
        let c = chain3().transitive_closure();
        assert!(c.has_explicit_edge(0, 2));
        assert_eq!(c.non_self_edge_count(), 3);
        assert_eq!(c.transitive_closure(), c);
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let g = WeightedDigraph::from_edges(3, true, [(2, 0, 0.5), (0, 1, 1.0)]).unwrap();
        let text = g.to_json_string();
        assert_eq!(text, "{\"n\":3,\"implicit_self_loops\":true,\"edges\":[[0,1,1.0],[2,0,0.5]]}\n");
        assert_eq!(WeightedDigraph::<f64>::from_json_str(&text).unwrap(), g);
        let dup = r#"{"n":2,"implicit_self_loops":true,"edges":[[0,1,0.5],[0,1,0.5]]}"#;
        assert!(WeightedDigraph::<f64>::from_json_str(dup).is_err());
        let bad = r#"{"n":2,"implicit_self_loops":true,"edges":[[0,1,0.0]]}"#;
        assert!(WeightedDigraph::<f64>::from_json_str(bad).is_err());
    }

    #[test]
    fn derived_graphs() {
        let g = chain3();
        assert_eq!(g.self_loops_only().edge_count(), 0);
        assert_eq!(g.completed().non_self_edge_count(), 6);
        let s = g.symmetrized();
        assert!(s.is_symmetric());
        assert_eq!(s.upper(), g);
        assert!(!g.is_symmetric());
    }
}
