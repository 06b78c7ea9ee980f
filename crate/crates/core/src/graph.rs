// SPDX-License-Identifier: Apache-2.0

//! Thresholded, symmetrized kNN graph and its connected components.

use crate::error::Result;
use crate::geometry::{KdTree2, Neighbor, Point2};

/// Decides the longest admissible edge between two nodes.
pub trait EdgeThreshold {
    /// Maximum distance at which `u` and `v` may be connected.
    fn max_distance(&self, u: usize, v: usize) -> f64;

    /// An upper bound over all pairs, used to prune neighbor searches.
    fn bound(&self) -> Option<f64> {
        None
    }
}

/// Same threshold for every pair.
#[derive(Debug, Clone, Copy)]
pub struct ConstantThreshold(pub f64);

impl EdgeThreshold for ConstantThreshold {
    fn max_distance(&self, _: usize, _: usize) -> f64 {
        self.0
    }

    fn bound(&self) -> Option<f64> {
        Some(self.0)
    }
}

impl<F: Fn(usize, usize) -> f64> EdgeThreshold for F {
    fn max_distance(&self, u: usize, v: usize) -> f64 {
        self(u, v)
    }
}

/// Undirected graph stored as a sorted, deduplicated edge list with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyGraph {
    pub node_count: usize,
    pub edges: Vec<(usize, usize)>,
}

impl AdjacencyGraph {
    /// Builds a graph from arbitrary pairs: self-loops are dropped, pairs are
    /// normalized to `u < v` and deduplicated.
    pub fn from_pairs(node_count: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut edges: Vec<(usize, usize)> = pairs
            .into_iter()
            .filter(|&(u, v)| u != v)
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        debug_assert!(edges.iter().all(|&(_, v)| v < node_count));
        edges.sort_unstable();
        edges.dedup();
        AdjacencyGraph { node_count, edges }
    }
}

/// Per-node component labels, dense in `0..component_count` and numbered by
/// first appearance in node order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub labels: Vec<u32>,
    pub component_count: usize,
}

impl ComponentLabeling {
    /// Relabels arbitrary per-node keys densely by first appearance.
    pub fn from_keys<K: Copy + Eq + std::hash::Hash>(keys: impl IntoIterator<Item = K>) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels: Vec<u32> = keys
            .into_iter()
            .map(|key| {
                let next = map.len() as u32;
                *map.entry(key).or_insert(next)
            })
            .collect();
        ComponentLabeling {
            component_count: map.len(),
            labels,
        }
    }

    /// Node indices grouped by component, each group in ascending order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.component_count];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l as usize].push(i);
        }
        groups
    }
}

/// Disjoint-set forest with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        while self.parent[x] as usize != root {
            let next = self.parent[x] as usize;
            self.parent[x] = root as u32;
            x = next;
        }
        root
    }

    /// Merges the sets of `a` and `b`; returns false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
        true
    }

    pub fn into_labeling(mut self) -> ComponentLabeling {
        let n = self.parent.len();
        let mut remap = vec![u32::MAX; n];
        let mut count = 0u32;
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let root = self.find(i);
            if remap[root] == u32::MAX {
                remap[root] = count;
                count += 1;
            }
            labels.push(remap[root]);
        }
        ComponentLabeling {
            labels,
            component_count: count as usize,
        }
    }
}

/// Calls `visit(u, v, distance)` for every directed kNN edge `u -> v` that
/// survives the threshold. This is the single edge enumeration used by both
/// [`build_threshold_graph`] and [`threshold_components`].
pub fn for_each_threshold_edge<T: EdgeThreshold + ?Sized>(
    tree: &KdTree2<'_>,
    k: usize,
    threshold: &T,
    mut visit: impl FnMut(usize, usize, f64),
) -> Result<()> {
    let bound = threshold.bound().unwrap_or(f64::INFINITY);
    let mut scratch = Vec::with_capacity(k + 1);
    let mut neighbors: Vec<Neighbor> = Vec::with_capacity(k + 1);
    for u in 0..tree.len() {
        tree.knn_within_into(u, k, bound, &mut scratch, &mut neighbors)?;
        for n in &neighbors {
            if n.distance <= threshold.max_distance(u, n.index) {
                visit(u, n.index, n.distance);
            }
        }
    }
    Ok(())
}

/// Connects each point to its `k` nearest BEV neighbors, drops every edge
/// longer than the pair's threshold (equality is kept) and symmetrizes.
pub fn build_threshold_graph<T: EdgeThreshold + ?Sized>(
    points: &[Point2],
    k: usize,
    threshold: &T,
) -> Result<AdjacencyGraph> {
    let tree = KdTree2::build(points)?;
    let mut pairs = Vec::new();
    for_each_threshold_edge(&tree, k, threshold, |u, v, _| pairs.push((u, v)))?;
    Ok(AdjacencyGraph::from_pairs(points.len(), pairs))
}

pub fn connected_components(graph: &AdjacencyGraph) -> ComponentLabeling {
    let mut uf = UnionFind::new(graph.node_count);
    for &(u, v) in &graph.edges {
        uf.union(u, v);
    }
    uf.into_labeling()
}

/// Components of the thresholded kNN graph without materializing the edge
/// list. Equal to `connected_components(&build_threshold_graph(..))`.
pub fn threshold_components<T: EdgeThreshold + ?Sized>(
    tree: &KdTree2<'_>,
    k: usize,
    threshold: &T,
) -> Result<ComponentLabeling> {
    let mut uf = UnionFind::new(tree.len());
    for_each_threshold_edge(tree, k, threshold, |u, v, _| {
        uf.union(u, v);
    })?;
    Ok(uf.into_labeling())
}

/// Precomputed kNN lists of a point set, for re-clustering the same points
/// at many constant thresholds. `components_at(t)` equals
/// `threshold_components(tree, k, &ConstantThreshold(t))`.
#[derive(Debug, Clone)]
pub struct KnnGraph {
    offsets: Vec<usize>,
    neighbors: Vec<(u32, f64)>,
}

impl KnnGraph {
    pub fn build(tree: &KdTree2<'_>, k: usize) -> Result<Self> {
        let mut offsets = Vec::with_capacity(tree.len() + 1);
        let mut neighbors = Vec::with_capacity(tree.len() * k.min(tree.len()));
        let mut scratch = Vec::with_capacity(k + 1);
        let mut found = Vec::with_capacity(k + 1);
        offsets.push(0);
        for u in 0..tree.len() {
            tree.knn_within_into(u, k, f64::INFINITY, &mut scratch, &mut found)?;
            neighbors.extend(found.iter().map(|n| (n.index as u32, n.distance)));
            offsets.push(neighbors.len());
        }
        Ok(KnnGraph { offsets, neighbors })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn components_at(&self, threshold: f64) -> ComponentLabeling {
        let mut uf = UnionFind::new(self.node_count());
        for u in 0..self.node_count() {
            // Lists are sorted by distance, so stop at the first edge too long.
            for &(v, d) in &self.neighbors[self.offsets[u]..self.offsets[u + 1]] {
                if d > threshold {
                    break;
                }
                uf.union(u, v as usize);
            }
        }
        uf.into_labeling()
    }
}
