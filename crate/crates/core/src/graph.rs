//! Symmetrized K-NN graphs, geodesic distances and connectivity.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::DMatrix;

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::linalg::sq_dist;

/// Undirected weighted graph; weights are Euclidean distances.
///
/// Besides the symmetric adjacency, each node keeps its own directed
/// neighborhood (its `k` nearest samples), which is what the LLE and LTSA
/// local fits are computed on.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    n: usize,
    k: usize,
    neighborhoods: Vec<Vec<usize>>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

/// Brute-force K-NN graph symmetrized by union. Distance ties are broken by
/// the lower node index.
pub fn knn_graph(ds: &Dataset, k: usize) -> Result<NeighborGraph> {
    let n = ds.len();
    if k == 0 || k >= n {
        return Err(invalid(format!(
            "k must lie in [1, N-1] = [1, {}], got {k}",
            n.saturating_sub(1)
        )));
    }
    let x = ds.samples();
    let mut neighborhoods = Vec::with_capacity(n);
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        cand.clear();
        cand.extend((0..n).filter(|&j| j != i).map(|j| (sq_dist(x, i, j), j)));
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < cand.len() {
            cand.select_nth_unstable_by(k - 1, by_dist);
            cand.truncate(k);
        }
        cand.sort_by(by_dist);
        neighborhoods.push(cand.iter().map(|&(_, j)| j).collect::<Vec<_>>());
        for &(d2, j) in cand.iter() {
            let w = libm::sqrt(d2);
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
    }
    for row in adjacency.iter_mut() {
        row.sort_by_key(|&(j, _)| j);
        row.dedup_by_key(|&mut (j, _)| j);
    }
    Ok(NeighborGraph {
        n,
        k,
        neighborhoods,
        adjacency,
    })
}

impl NeighborGraph {
    /// Build from an undirected edge list. With `k = Some(k)` each node's
    /// neighborhood is its `k` closest adjacent nodes (ties to the lower
    /// index), which reproduces the neighborhoods of a graph built by
    /// [`knn_graph`]; with `None` the whole adjacency is used.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], k: Option<usize>) -> Result<Self> {
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(invalid(format!(
                    "edge ({i},{j}) out of range for {n} nodes"
                )));
            }
            if i == j {
                return Err(invalid(format!("self-loop at node {i}")));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(invalid(format!("edge ({i},{j}) has invalid weight {w}")));
            }
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        for (i, row) in adjacency.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(invalid(format!("duplicate edge ({i},{})", w[0].0)));
            }
        }
        let min_degree = adjacency.iter().map(Vec::len).min().unwrap_or(0);
        let k_eff = match k {
            Some(k) if k > min_degree => {
                return Err(invalid(format!(
                    "k = {k} exceeds the minimum degree {min_degree} of the edge list"
                )))
            }
            Some(k) => k,
            None => min_degree,
        };
        let neighborhoods = adjacency
            .iter()
            .map(|row| {
                let mut c: Vec<(f64, usize)> = row.iter().map(|&(j, w)| (w, j)).collect();
                c.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let take = if k.is_some() { k_eff } else { c.len() };
                c.into_iter().take(take).map(|(_, j)| j).collect()
            })
            .collect();
        Ok(NeighborGraph {
            n,
            k: k_eff,
            neighborhoods,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Adjacent nodes of `i` with edge lengths, sorted by node index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    /// The directed neighborhood of `i`, nearest first.
    pub fn neighborhood(&self, i: usize) -> &[usize] {
        &self.neighborhoods[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .is_ok()
    }

    /// Each undirected edge once as `(i, j, w)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.adjacency.iter().enumerate() {
            out.extend(row.iter().filter(|&&(j, _)| j > i).map(|&(j, w)| (i, j, w)));
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Shortest weighted path lengths from one source; `+inf` if unreachable.
    pub fn shortest_paths(&self, source: usize) -> Result<Vec<f64>> {
        if source >= self.n {
            return Err(invalid(format!(
                "source {source} out of range for {} nodes",
                self.n
            )));
        }
        let mut dist = vec![f64::INFINITY; self.n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapEntry {
            dist: 0.0,
            node: source,
        });
        while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(HeapEntry { dist: nd, node: v });
                }
            }
        }
        Ok(dist)
    }

    /// `|sources| × n` matrix of geodesic distances (`+inf` when unreachable).
    pub fn geodesic_distances(&self, sources: &[usize]) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(sources.len(), self.n);
        for (r, &s) in sources.iter().enumerate() {
            let d = self.shortest_paths(s)?;
            for (t, v) in d.into_iter().enumerate() {
                out[(r, t)] = v;
            }
        }
        Ok(out)
    }

    pub fn connected_components(&self) -> Components {
        let mut labels = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if labels[start] != usize::MAX {
                continue;
            }
            labels[start] = count;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if labels[v] == usize::MAX {
                        labels[v] = count;
                        stack.push(v);
                    }
                }
            }
            count += 1;
        }
        Components { labels, count }
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().count <= 1
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        let c = self.connected_components();
        if c.count > 1 {
            return Err(Error::DisconnectedGraph {
                components: c.count,
            });
        }
        Ok(())
    }
}

/// Component label per node, numbered in order of each component's lowest
/// node index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub labels: Vec<usize>,
    pub count: usize,
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // min-heap on distance
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}
