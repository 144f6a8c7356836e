//! Weighted descriptor co-occurrence networks and the metrics read off them.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::vocabulary::OccurrenceIndex;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("unknown descriptor `{0}`")]
    UnknownDescriptor(String),
    #[error("descriptor `{0}` appears twice")]
    DuplicateLabel(String),
    #[error("edge endpoint {0} out of range for {1} vertices")]
    EndpointOutOfRange(usize, usize),
    #[error("self-edge on vertex {0}")]
    SelfEdge(usize),
    #[error("edge {0}-{1} listed twice")]
    DuplicateEdge(usize, usize),
    #[error("edge {0}-{1} has zero weight")]
    ZeroWeight(usize, usize),
    #[error("edge {0}-{1} weight {2} exceeds an endpoint's occurrences")]
    WeightExceedsOccurrence(usize, usize, u32),
    #[error("vertex occurrence weights are not available")]
    MissingOccurrences,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Vertex {
    pub label: String,
    /// Number of records containing the descriptor (0 when external).
    pub weight: u32,
}

/// Undirected edge stored with `source < target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: u32,
}

/// Descriptors as vertices, co-occurrence counts as edge weights.
///
/// Networks built from an [`OccurrenceIndex`] list vertices by occurrence
/// weight descending, ties by label. Edges are kept sorted by endpoint
/// pair.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoNetwork {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    external: bool,
}

impl CoNetwork {
    /// Builds a network from explicit parts, normalizing edge direction and
    /// order. Vertex order is kept as given.
    pub fn from_parts(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self, NetworkError> {
        Self::validated(vertices, edges, false)
    }

    /// Like [`CoNetwork::from_parts`] for networks read from files that do
    /// not carry occurrence weights. All vertex weights are 0.
    pub fn with_external_weights(
        labels: Vec<String>,
        edges: Vec<Edge>,
    ) -> Result<Self, NetworkError> {
        let vertices = labels
            .into_iter()
            .map(|label| Vertex { label, weight: 0 })
            .collect();
        Self::validated(vertices, edges, true)
    }

    fn validated(
        vertices: Vec<Vertex>,
        mut edges: Vec<Edge>,
        external: bool,
    ) -> Result<Self, NetworkError> {
        let n = vertices.len();
        let mut labels = HashMap::with_capacity(n);
        for v in &vertices {
            if labels.insert(v.label.as_str(), ()).is_some() {
                return Err(NetworkError::DuplicateLabel(v.label.clone()));
            }
        }
        for e in &mut edges {
            if e.source >= n || e.target >= n {
                return Err(NetworkError::EndpointOutOfRange(e.source.max(e.target), n));
            }
            if e.source == e.target {
                return Err(NetworkError::SelfEdge(e.source));
            }
            if e.source > e.target {
                std::mem::swap(&mut e.source, &mut e.target);
            }
            if e.weight == 0 {
                return Err(NetworkError::ZeroWeight(e.source, e.target));
            }
            if !external && e.weight > vertices[e.source].weight.min(vertices[e.target].weight) {
                return Err(NetworkError::WeightExceedsOccurrence(
                    e.source, e.target, e.weight,
                ));
            }
        }
        edges.sort();
        if let Some(w) = edges
            .windows(2)
            .find(|w| (w[0].source, w[0].target) == (w[1].source, w[1].target))
        {
            return Err(NetworkError::DuplicateEdge(w[0].source, w[0].target));
        }
        Ok(CoNetwork {
            vertices,
            edges,
            external,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// True when vertex weights were not known (e.g. read from a Pajek file).
    pub fn has_external_weights(&self) -> bool {
        self.external
    }

    pub fn label(&self, i: usize) -> &str {
        &self.vertices[i].label
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.label == label)
    }

    pub fn edge_weight(&self, i: usize, j: usize) -> u32 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.edges
            .binary_search_by(|e| (e.source, e.target).cmp(&(a, b)))
            .map_or(0, |k| self.edges[k].weight)
    }

    pub fn total_edge_weight(&self) -> u64 {
        self.edges.iter().map(|e| u64::from(e.weight)).sum()
    }

    /// Neighbor lists with edge weights, neighbors ascending.
    pub fn adjacency(&self) -> Vec<Vec<(usize, u32)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            adj[e.source].push((e.target, e.weight));
            adj[e.target].push((e.source, e.weight));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for e in &self.edges {
            deg[e.source] += 1;
            deg[e.target] += 1;
        }
        deg
    }

    /// Connected components, each sorted ascending, ordered by their
    /// smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; adj.len()];
        let mut out = Vec::new();
        for start in 0..adj.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Restriction to `keep` (indices ascending), preserving order.
    pub fn induced(&self, keep: &[usize]) -> CoNetwork {
        let mut remap = vec![usize::MAX; self.vertices.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let vertices = keep.iter().map(|&i| self.vertices[i].clone()).collect();
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| remap[e.source] != usize::MAX && remap[e.target] != usize::MAX)
            .map(|e| {
                let (a, b) = (remap[e.source], remap[e.target]);
                Edge {
                    source: a.min(b),
                    target: a.max(b),
                    weight: e.weight,
                }
            })
            .collect();
        edges.sort();
        CoNetwork {
            vertices,
            edges,
            external: self.external,
        }
    }

    /// Edge rows with the lexicographically smaller label first, sorted by
    /// (keyword1, keyword2).
    pub fn edge_rows(&self) -> Vec<EdgeRow> {
        let mut rows: Vec<EdgeRow> = self
            .edges
            .iter()
            .map(|e| {
                let (a, b) = (self.label(e.source), self.label(e.target));
                let (k1, k2) = if a <= b { (a, b) } else { (b, a) };
                EdgeRow {
                    keyword1: k1.to_owned(),
                    keyword2: k2.to_owned(),
                    weight: e.weight,
                }
            })
            .collect();
        rows.sort();
        rows
    }
}

/// One row of an edge listing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct EdgeRow {
    pub keyword1: String,
    pub keyword2: String,
    pub weight: u32,
}

impl fmt::Display for EdgeRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.keyword1, self.keyword2, self.weight)
    }
}

/// Renders rows as a tab-separated table with a `Keyword1 Keyword2 weight`
/// header.
pub fn format_edge_rows(rows: &[EdgeRow]) -> String {
    let mut out = String::from("Keyword1\tKeyword2\tweight\n");
    for row in rows {
        out.push_str(&row.to_string());
        out.push('\n');
    }
    out
}

/// Counts, for every pair of descriptors, the records containing both.
pub fn build_network(idx: &OccurrenceIndex) -> CoNetwork {
    let mut order: Vec<(&String, usize)> = idx
        .totals
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(d, &c)| (d, c))
        .collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let position: HashMap<&str, usize> = order
        .iter()
        .enumerate()
        .map(|(i, (d, _))| (d.as_str(), i))
        .collect();

    let mut pairs: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for (_, set) in &idx.per_record {
        let ids: Vec<usize> = set.iter().map(|d| position[d.as_str()]).collect();
        for (k, &a) in ids.iter().enumerate() {
            for &b in &ids[k + 1..] {
                *pairs.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
    }

    CoNetwork {
        vertices: order
            .into_iter()
            .map(|(d, c)| Vertex {
                label: d.clone(),
                weight: c as u32,
            })
            .collect(),
        edges: pairs
            .into_iter()
            .map(|((source, target), weight)| Edge {
                source,
                target,
                weight,
            })
            .collect(),
        external: false,
    }
}

/// Keeps vertices occurring at least `min_occ` times and the edges between
/// them.
pub fn threshold_filter(net: &CoNetwork, min_occ: u32) -> CoNetwork {
    let keep: Vec<usize> = (0..net.vertex_count())
        .filter(|&i| net.vertices[i].weight >= min_occ)
        .collect();
    net.induced(&keep)
}

/// Incident edges of `descriptor`, queried descriptor first, partners in
/// ascending order.
pub fn edge_query(net: &CoNetwork, descriptor: &str) -> Result<Vec<EdgeRow>, NetworkError> {
    let v = net
        .index_of(descriptor)
        .ok_or_else(|| NetworkError::UnknownDescriptor(descriptor.to_owned()))?;
    let mut rows: Vec<EdgeRow> = net
        .edges
        .iter()
        .filter(|e| e.source == v || e.target == v)
        .map(|e| {
            let other = if e.source == v { e.target } else { e.source };
            EdgeRow {
                keyword1: descriptor.to_owned(),
                keyword2: net.label(other).to_owned(),
                weight: e.weight,
            }
        })
        .collect();
    rows.sort();
    Ok(rows)
}

/// Dense symmetric similarity matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// Association strength `c_ij / (w_i * w_j)`.
pub fn association_strength(net: &CoNetwork) -> Result<SimilarityMatrix, NetworkError> {
    if net.external || net.vertices.iter().any(|v| v.weight == 0) {
        return Err(NetworkError::MissingOccurrences);
    }
    let n = net.vertex_count();
    let mut values = vec![0.0; n * n];
    for e in &net.edges {
        let s = f64::from(e.weight)
            / (f64::from(net.vertices[e.source].weight) * f64::from(net.vertices[e.target].weight));
        values[e.source * n + e.target] = s;
        values[e.target * n + e.source] = s;
    }
    Ok(SimilarityMatrix { n, values })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkMetrics {
    pub degree_centrality: Vec<f64>,
    /// Closeness within each vertex's own component; 0 for isolated vertices.
    pub closeness: Vec<f64>,
    pub density: f64,
    pub components: usize,
}

impl NetworkMetrics {
    pub fn mean_degree_centrality(&self) -> f64 {
        mean(&self.degree_centrality)
    }

    pub fn mean_closeness(&self) -> f64 {
        mean(&self.closeness)
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Degree centrality, within-component closeness (hop distances), density
/// and component count.
pub fn network_metrics(net: &CoNetwork) -> NetworkMetrics {
    let n = net.vertex_count();
    let adj = net.adjacency();
    let degree_centrality = if n > 1 {
        adj.iter()
            .map(|a| a.len() as f64 / (n - 1) as f64)
            .collect()
    } else {
        vec![0.0; n]
    };
    let density = if n > 1 {
        2.0 * net.edge_count() as f64 / (n as f64 * (n - 1) as f64)
    } else {
        0.0
    };

    let mut closeness = vec![0.0; n];
    let mut dist = vec![usize::MAX; n];
    for (source, c) in closeness.iter_mut().enumerate() {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        let (mut reached, mut sum) = (0usize, 0usize);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    reached += 1;
                    sum += dist[v];
                    queue.push_back(v);
                }
            }
        }
        if sum > 0 {
            *c = reached as f64 / sum as f64;
        }
    }

    NetworkMetrics {
        degree_centrality,
        closeness,
        density,
        components: net.components().len(),
    }
}
