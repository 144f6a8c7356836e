use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::conet::CoNetwork;

/// How an edge's co-occurrence weight becomes a path length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum EdgeLength {
    /// `1 / c`: heavier co-occurrence means closer.
    #[default]
    InverseWeight,
    /// Every edge has length 1 (hop distance).
    Unit,
}

impl EdgeLength {
    pub fn of(self, weight: u32) -> f64 {
        match self {
            EdgeLength::InverseWeight => 1.0 / f64::from(weight),
            EdgeLength::Unit => 1.0,
        }
    }
}

/// All-pairs shortest path lengths inside one connected component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentDistances {
    /// Network vertex indices, ascending; local index `k` is `vertices[k]`.
    pub vertices: Vec<usize>,
    dist: Vec<f64>,
}

impl ComponentDistances {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Distance between local indices `a` and `b`.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.vertices.len() + b]
    }

    /// Distance between network vertices, `None` across components.
    pub fn between(&self, u: usize, v: usize) -> Option<f64> {
        let a = self.vertices.binary_search(&u).ok()?;
        let b = self.vertices.binary_search(&v).ok()?;
        Some(self.get(a, b))
    }

    pub fn max(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest path lengths per component (Dijkstra from every vertex).
/// Vertices in different components have no entry.
pub fn graph_distances(net: &CoNetwork, length: EdgeLength) -> Vec<ComponentDistances> {
    let adj = net.adjacency();
    let mut local = vec![usize::MAX; net.vertex_count()];
    net.components()
        .into_iter()
        .map(|vertices| {
            let n = vertices.len();
            for (k, &v) in vertices.iter().enumerate() {
                local[v] = k;
            }
            let mut dist = vec![f64::INFINITY; n * n];
            for (s, &source) in vertices.iter().enumerate() {
                let row = &mut dist[s * n..(s + 1) * n];
                row[s] = 0.0;
                let mut heap = BinaryHeap::from([Frontier(0.0, source)]);
                while let Some(Frontier(d, u)) = heap.pop() {
                    if d > row[local[u]] {
                        continue;
                    }
                    for &(v, w) in &adj[u] {
                        let nd = d + length.of(w);
                        if nd < row[local[v]] {
                            row[local[v]] = nd;
                            heap.push(Frontier(nd, v));
                        }
                    }
                }
            }
            ComponentDistances { vertices, dist }
        })
        .collect()
}
