//! Synthetic graph families. All explicit edges carry one common weight and
//! every generator leaves self-loops implicit.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::WeightedDigraph;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    Null { n: usize },
    /// Every ordered pair `(j, i)`, `j != i`.
    Complete { n: usize },
    /// Center 0 with edges `0 -> leaf`.
    StarOut { n: usize },
    /// Edges `leaf -> 0`.
    StarIn { n: usize },
    /// Edges `i -> i + 1`.
    Chain { n: usize },
    /// Edges `i -> (i + 1) mod n`.
    Cycle { n: usize },
    /// Bidirectional 4-neighbour lattice, vertex `(r, c)` is `r * cols + c`.
    Grid2d { rows: usize, cols: usize },
    /// Ring lattice of even degree `k`, rewired with probability `beta`, then
    /// made bidirectional.
    WattsStrogatz { n: usize, k: usize, beta: f64, seed: u64 },
    /// `m` distinct undirected pairs drawn uniformly, made bidirectional.
    RandomSparse { n: usize, m: usize, seed: u64 },
    /// The 60-vertex truncated icosahedron, bidirectional.
    Buckyball,
}

fn need(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

/// Generates a graph of the given family with every explicit edge weighted `weight`.
pub fn generate<T: Scalar>(kind: &GraphKind, weight: T) -> Result<WeightedDigraph<T>> {
    let (n, pairs) = edge_list(kind)?;
    WeightedDigraph::from_edges(n, true, pairs.into_iter().map(|(j, i)| (j, i, weight)))
}

fn bidirectional(undirected: impl IntoIterator<Item = (usize, usize)>) -> Vec<(usize, usize)> {
    let mut set = BTreeSet::new();
    for (a, b) in undirected {
        set.insert((a, b));
        set.insert((b, a));
    }
    set.into_iter().collect()
}

fn edge_list(kind: &GraphKind) -> Result<(usize, Vec<(usize, usize)>)> {
    use GraphKind::*;
    let positive = |n: usize| need(n >= 1, || "n must be at least 1".into());
    Ok(match *kind {
        Null { n } => {
            positive(n)?;
            (n, Vec::new())
        }
        Complete { n } => {
            positive(n)?;
            let e = (0..n).flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (j, i)));
            (n, e.collect())
        }
        StarOut { n } => {
            positive(n)?;
            (n, (1..n).map(|leaf| (0, leaf)).collect())
        }
        StarIn { n } => {
            positive(n)?;
            (n, (1..n).map(|leaf| (leaf, 0)).collect())
        }
        Chain { n } => {
            positive(n)?;
            (n, (1..n).map(|i| (i - 1, i)).collect())
        }
        Cycle { n } => {
            positive(n)?;
            let e: BTreeSet<_> = (0..n).map(|i| (i, (i + 1) % n)).filter(|(a, b)| a != b).collect();
            (n, e.into_iter().collect())
        }
        Grid2d { rows, cols } => {
            need(rows >= 1 && cols >= 1, || "grid needs rows, cols >= 1".into())?;
            let mut und = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        und.push((v, v + 1));
                    }
                    if r + 1 < rows {
                        und.push((v, v + cols));
                    }
                }
            }
            (rows * cols, bidirectional(und))
        }
        WattsStrogatz { n, k, beta, seed } => (n, bidirectional(watts_strogatz(n, k, beta, seed)?)),
        RandomSparse { n, m, seed } => (n, bidirectional(random_sparse(n, m, seed)?)),
        Buckyball => (60, bidirectional(buckyball_edges())),
    })
}

/// Undirected Watts-Strogatz edges.
///
/// Ring lattice: `u -- u + j` for `j = 1..=k/2`. Rewiring visits lattice
/// edges in the order `(j, u)`; edge number `(j - 1) * n + u` draws from its
/// own counter-based stream, and with probability `beta` its far endpoint is
/// moved to a uniformly chosen vertex that is neither `u` nor a current
/// neighbour of `u`.
fn watts_strogatz(n: usize, k: usize, beta: f64, seed: u64) -> Result<Vec<(usize, usize)>> {
    need(n >= 1, || "n must be at least 1".into())?;
    need(k.is_multiple_of(2) && k < n, || format!("k = {k} must be even and below n = {n}"))?;
    need((0.0..=1.0).contains(&beta), || format!("beta = {beta} must lie in [0, 1]"))?;
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            let mut stream = rng::stream(seed, ((j - 1) * n + u) as u64);
            if stream.gen::<f64>() >= beta {
                continue;
            }
            let v = (u + j) % n;
            if !adj[u].contains(&v) || adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = stream.gen_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    Ok((0..n)
        .flat_map(|u| adj[u].iter().filter(move |&&v| u < v).map(move |&v| (u, v)).collect::<Vec<_>>())
        .collect())
}

fn random_sparse(n: usize, m: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    need(n >= 1, || "n must be at least 1".into())?;
    let max = n * (n - 1) / 2;
    need(m <= max, || format!("m = {m} exceeds the {max} available pairs"))?;
    let mut chosen = BTreeSet::new();
    let mut index = 0u64;
    while chosen.len() < m {
        let mut stream = rng::stream(seed, index);
        index += 1;
        let a = stream.gen_range(0..n);
        let b = stream.gen_range(0..n);
        if a != b {
            chosen.insert((a.min(b), a.max(b)));
        }
    }
    Ok(chosen.into_iter().collect())
}

/// Truncated icosahedron: the cyclic permutations of `(0, ±1, ±3φ)`,
/// `(±1, ±(2+φ), ±2φ)` and `(±φ, ±2, ±(2φ+1))`, joined when at distance 2.
fn buckyball_edges() -> Vec<(usize, usize)> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let bases = [[0.0, 1.0, 3.0 * phi], [1.0, 2.0 + phi, 2.0 * phi], [phi, 2.0, 2.0 * phi + 1.0]];
    let mut verts: Vec<[f64; 3]> = Vec::with_capacity(60);
    for base in bases {
        for signs in 0..8u32 {
            let mut v = base;
            let mut skip = false;
            for (axis, c) in v.iter_mut().enumerate() {
                if signs & (1 << axis) != 0 {
                    if *c == 0.0 {
                        skip = true;
                    }
                    *c = -*c;
                }
            }
            if skip {
                continue;
            }
            for shift in 0..3 {
                verts.push([v[shift % 3], v[(shift + 1) % 3], v[(shift + 2) % 3]]);
            }
        }
    }
    let mut edges = Vec::new();
    for a in 0..verts.len() {
        for b in a + 1..verts.len() {
            let d2: f64 = (0..3).map(|k| (verts[a][k] - verts[b][k]).powi(2)).sum();
            if (d2 - 4.0).abs() < 1e-9 {
                edges.push((a, b));
            }
        }
    }
    edges
}
