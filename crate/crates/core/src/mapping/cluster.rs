use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::MappingError;
use crate::conet::{association_strength, CoNetwork};

/// Edge weights used by the clustering objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ClusterWeighting {
    /// Association strength `c_ij / (w_i * w_j)`.
    #[default]
    Similarity,
    /// Raw co-occurrence counts.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterOptions {
    pub resolution: f64,
    pub weighting: ClusterWeighting,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            resolution: 1.0,
            weighting: ClusterWeighting::Similarity,
        }
    }
}

/// Undirected graph with real edge weights, the input of the modularity
/// optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    /// Builds from `(i, j, w)` triples; each pair must appear once.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (i, j, w) in edges {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
        }
        WeightedGraph { adj }
    }

    pub fn from_network(
        net: &CoNetwork,
        weighting: ClusterWeighting,
    ) -> Result<Self, MappingError> {
        let n = net.vertex_count();
        Ok(match weighting {
            ClusterWeighting::Raw => Self::from_edges(
                n,
                net.edges()
                    .iter()
                    .map(|e| (e.source, e.target, f64::from(e.weight))),
            ),
            ClusterWeighting::Similarity => {
                let sim =
                    association_strength(net).map_err(|_| MappingError::MissingOccurrences)?;
                Self::from_edges(
                    n,
                    net.edges()
                        .iter()
                        .map(|e| (e.source, e.target, sim.get(e.source, e.target))),
                )
            }
        })
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn strength(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|&(_, w)| w).sum()
    }

    /// Sum of all edge weights (each edge once).
    pub fn total_weight(&self) -> f64 {
        self.adj.iter().flatten().map(|&(_, w)| w).sum::<f64>() / 2.0
    }

    /// Modularity of `assignment` (any integer labels) at resolution `gamma`;
    /// 0 when the graph has no weight.
    pub fn modularity(&self, assignment: &[usize], gamma: f64) -> f64 {
        let two_m = 2.0 * self.total_weight();
        if two_m <= 0.0 {
            return 0.0;
        }
        let mut inside: BTreeMap<usize, f64> = BTreeMap::new();
        let mut total: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, list) in self.adj.iter().enumerate() {
            let c = assignment[i];
            for &(j, w) in list {
                *total.entry(c).or_insert(0.0) += w;
                if assignment[j] == c {
                    *inside.entry(c).or_insert(0.0) += w;
                }
            }
        }
        total
            .iter()
            .map(|(c, &tot)| {
                let inn = inside.get(c).copied().unwrap_or(0.0);
                inn / two_m - gamma * (tot / two_m).powi(2)
            })
            .sum()
    }
}

/// Assignment of every vertex to a cluster numbered `1..=k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterPartition {
    assignment: Vec<usize>,
    /// Objective value under the weighting and resolution that produced it.
    pub modularity: f64,
}

impl ClusterPartition {
    /// Validates that ids are dense `1..=k`.
    pub fn from_assignment(assignment: Vec<usize>) -> Result<Self, MappingError> {
        let k = assignment.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; k + 1];
        for &c in &assignment {
            if c == 0 {
                return Err(MappingError::InvalidPartition(
                    "cluster ids start at 1".into(),
                ));
            }
            seen[c] = true;
        }
        if let Some(gap) = (1..=k).find(|&c| !seen[c]) {
            return Err(MappingError::InvalidPartition(format!(
                "cluster {gap} is empty"
            )));
        }
        Ok(ClusterPartition {
            assignment,
            modularity: 0.0,
        })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.assignment.iter().copied().max().unwrap_or(0)
    }

    /// Members of cluster `c`, ascending.
    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&v| self.assignment[v] == c)
            .collect()
    }
}

/// Renumbers labels to `1..=k` in order of first appearance.
fn relabel(labels: &[usize]) -> Vec<usize> {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len() + 1;
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Gains below this are treated as no improvement.
const MIN_GAIN: f64 = 1e-12;

/// Extra starts from shuffled visiting orders; the plain index order is
/// always tried first and wins ties.
const RESTARTS: u64 = 8;

/// Upper bound on improvement rounds after the multilevel phase.
const KICK_ROUNDS: usize = 10_000;

/// Kick moves cost a full polish each, so larger components skip them.
const KICK_MAX_NODES: usize = 100;

/// One level of the multilevel optimizer. Nodes carry self-loop weight
/// (links absorbed inside them) and their full strength, which may include
/// links to nodes outside this level.
struct Level {
    links: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    strength: Vec<f64>,
}

impl Level {
    fn len(&self) -> usize {
        self.links.len()
    }

    /// Repeated passes of single-node moves in `order`. Returns true if any
    /// node moved.
    fn local_moving(
        &self,
        community: &mut [usize],
        order: &[usize],
        two_m: f64,
        gamma: f64,
    ) -> bool {
        let n = self.len();
        let mut total = vec![0.0; n];
        for i in 0..n {
            total[community[i]] += self.strength[i];
        }
        let mut moved_any = false;
        let mut weight_to: BTreeMap<usize, f64> = BTreeMap::new();
        for _pass in 0..1000 {
            let mut moved = false;
            for &i in order {
                let own = community[i];
                let k = self.strength[i];
                weight_to.clear();
                weight_to.insert(own, 0.0);
                for &(j, w) in &self.links[i] {
                    *weight_to.entry(community[j]).or_insert(0.0) += w;
                }
                total[own] -= k;
                let gain = |c: usize, w: f64| w - gamma * total[c] * k / two_m;
                let own_gain = gain(own, weight_to[&own]);
                let mut best = (own, own_gain);
                for (&c, &w) in &weight_to {
                    let g = gain(c, w);
                    if c != own && g > own_gain + MIN_GAIN && g > best.1 + MIN_GAIN {
                        best = (c, g);
                    }
                }
                total[best.0] += k;
                if best.0 != own {
                    community[i] = best.0;
                    moved = true;
                    moved_any = true;
                }
            }
            if !moved {
                break;
            }
        }
        moved_any
    }

    fn aggregate(&self, community: &[usize]) -> (Level, Vec<usize>) {
        let dense = relabel(community);
        let k = dense.iter().copied().max().unwrap_or(0);
        let mut self_loops = vec![0.0; k];
        let mut strength = vec![0.0; k];
        let mut links: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k];
        for (i, list) in self.links.iter().enumerate() {
            let ci = dense[i] - 1;
            self_loops[ci] += self.self_loops[i];
            strength[ci] += self.strength[i];
            for &(j, w) in list {
                let cj = dense[j] - 1;
                if ci == cj {
                    self_loops[ci] += w;
                } else {
                    *links[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        let level = Level {
            links: links.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_loops,
            strength,
        };
        (level, dense.into_iter().map(|c| c - 1).collect())
    }

    /// The subgraph induced by `keep`, with full strengths retained.
    fn induced(&self, keep: &[usize]) -> Level {
        let mut local = vec![usize::MAX; self.len()];
        for (k, &v) in keep.iter().enumerate() {
            local[v] = k;
        }
        Level {
            links: keep
                .iter()
                .map(|&v| {
                    self.links[v]
                        .iter()
                        .filter(|&&(u, _)| local[u] != usize::MAX)
                        .map(|&(u, w)| (local[u], w))
                        .collect()
                })
                .collect(),
            self_loops: keep.iter().map(|&v| self.self_loops[v]).collect(),
            strength: keep.iter().map(|&v| self.strength[v]).collect(),
        }
    }

    /// Contribution of these nodes' communities to the modularity.
    fn quality(&self, community: &[usize], two_m: f64, gamma: f64) -> f64 {
        let mut inside: BTreeMap<usize, f64> = BTreeMap::new();
        let mut total: BTreeMap<usize, f64> = BTreeMap::new();
        for i in 0..self.len() {
            let c = community[i];
            *total.entry(c).or_insert(0.0) += self.strength[i];
            *inside.entry(c).or_insert(0.0) += self.self_loops[i];
            for &(j, w) in &self.links[i] {
                if community[j] == c {
                    *inside.entry(c).or_insert(0.0) += w;
                }
            }
        }
        total
            .iter()
            .map(|(c, &tot)| inside[c] / two_m - gamma * (tot / two_m).powi(2))
            .sum()
    }

    /// Multilevel moves from singletons; returns a community per node.
    fn louvain(&self, order: &[usize], two_m: f64, gamma: f64) -> Vec<usize> {
        let mut membership: Vec<usize> = (0..self.len()).collect();
        let mut community = membership.clone();
        if !self.local_moving(&mut community, order, two_m, gamma) {
            return membership;
        }
        let (mut level, node_map) = self.aggregate(&community);
        for m in &mut membership {
            *m = node_map[*m];
        }
        loop {
            let mut community: Vec<usize> = (0..level.len()).collect();
            let identity: Vec<usize> = (0..level.len()).collect();
            if !level.local_moving(&mut community, &identity, two_m, gamma) {
                break;
            }
            let (next, node_map) = level.aggregate(&community);
            for m in &mut membership {
                *m = node_map[*m];
            }
            level = next;
        }
        membership
    }

    /// Re-optimizes each community on its own subgraph and keeps strict
    /// improvements.
    fn split_pass(&self, membership: &mut [usize], two_m: f64, gamma: f64) {
        let k = membership.iter().copied().max().map_or(0, |m| m + 1);
        let mut next_id = k;
        for c in 0..k {
            let members: Vec<usize> = (0..self.len()).filter(|&v| membership[v] == c).collect();
            if members.len() < 2 {
                continue;
            }
            let sub = self.induced(&members);
            let order: Vec<usize> = (0..members.len()).collect();
            let parts = sub.louvain(&order, two_m, gamma);
            let before = sub.quality(&vec![0; members.len()], two_m, gamma);
            if sub.quality(&parts, two_m, gamma) > before + MIN_GAIN {
                for (&v, &p) in members.iter().zip(&parts) {
                    if p != parts[0] {
                        membership[v] = next_id + p;
                    }
                }
                next_id += members.len();
            }
        }
        let dense = relabel(membership);
        for (m, d) in membership.iter_mut().zip(dense) {
            *m = d - 1;
        }
    }

    /// Vertex moves followed by community merges.
    fn polish(&self, membership: &mut [usize], order: &[usize], two_m: f64, gamma: f64) {
        self.local_moving(membership, order, two_m, gamma);
        let (coarse, node_map) = self.aggregate(membership);
        let mut merged: Vec<usize> = (0..coarse.len()).collect();
        let identity = merged.clone();
        coarse.local_moving(&mut merged, &identity, two_m, gamma);
        for (m, &node) in membership.iter_mut().zip(&node_map) {
            *m = merged[node];
        }
    }

    /// Tries forcing one vertex into a neighboring or empty community and
    /// polishing from there; returns the first strict improvement.
    fn kick(
        &self,
        membership: &[usize],
        order: &[usize],
        q: f64,
        two_m: f64,
        gamma: f64,
    ) -> Option<(Vec<usize>, f64)> {
        let n = self.len();
        let mut used = vec![false; n];
        for &c in membership {
            used[c] = true;
        }
        let empty = used.iter().position(|&u| !u);
        for &v in order {
            let others: Vec<usize> = order.iter().copied().filter(|&u| u != v).collect();
            let mut targets: Vec<usize> =
                self.links[v].iter().map(|&(u, _)| membership[u]).collect();
            targets.extend(empty);
            targets.sort_unstable();
            targets.dedup();
            for c in targets.into_iter().filter(|&c| c != membership[v]) {
                let mut trial = membership.to_vec();
                trial[v] = c;
                // let the rest settle around the kicked vertex before it may move again
                self.local_moving(&mut trial, &others, two_m, gamma);
                self.polish(&mut trial, order, two_m, gamma);
                let tq = self.quality(&trial, two_m, gamma);
                if tq > q + MIN_GAIN {
                    return Some((trial, tq));
                }
            }
        }
        None
    }

    /// Louvain followed by split, vertex, community and kick moves until
    /// the objective stops improving.
    /// Multilevel pass followed by split and polish rounds.
    fn optimize(&self, order: &[usize], two_m: f64, gamma: f64) -> (Vec<usize>, f64) {
        let membership = self.louvain(order, two_m, gamma);
        self.refine(membership, order, two_m, gamma, false)
    }

    /// Repeats split and polish while they help; with `kicks`, falls back
    /// to single-vertex kicks before giving up.
    fn refine(
        &self,
        mut membership: Vec<usize>,
        order: &[usize],
        two_m: f64,
        gamma: f64,
        kicks: bool,
    ) -> (Vec<usize>, f64) {
        let mut q = self.quality(&membership, two_m, gamma);
        for _round in 0..KICK_ROUNDS {
            let mut trial = membership.clone();
            self.split_pass(&mut trial, two_m, gamma);
            self.polish(&mut trial, order, two_m, gamma);
            let tq = self.quality(&trial, two_m, gamma);
            if tq > q + MIN_GAIN {
                (membership, q) = (trial, tq);
                continue;
            }
            if !kicks || self.len() > KICK_MAX_NODES {
                break;
            }
            match self.kick(&membership, order, q, two_m, gamma) {
                Some((trial, tq)) => (membership, q) = (trial, tq),
                None => break,
            }
        }
        (membership, q)
    }
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

/// Optimization of one component, with `two_m` taken from the whole graph
/// so per-component results optimize the global objective.
fn optimize_component(
    graph: &WeightedGraph,
    vertices: &[usize],
    two_m: f64,
    gamma: f64,
) -> Vec<usize> {
    let mut local = vec![usize::MAX; graph.len()];
    for (k, &v) in vertices.iter().enumerate() {
        local[v] = k;
    }
    let base = Level {
        links: vertices
            .iter()
            .map(|&v| {
                graph
                    .neighbors(v)
                    .iter()
                    .map(|&(u, w)| (local[u], w))
                    .collect()
            })
            .collect(),
        self_loops: vec![0.0; vertices.len()],
        strength: vertices.iter().map(|&v| graph.strength(v)).collect(),
    };
    let n = vertices.len();
    let identity: Vec<usize> = (0..n).collect();
    let mut best = base.optimize(&identity, two_m, gamma);
    for seed in 1..=RESTARTS {
        let candidate = base.optimize(&shuffled(n, seed), two_m, gamma);
        if candidate.1 > best.1 + MIN_GAIN {
            best = candidate;
        }
    }
    let (membership, _) = base.refine(best.0, &identity, two_m, gamma, true);
    relabel(&membership)
}

/// Detects thematic clusters by modularity maximization.
///
/// Components are optimized independently, so no cluster spans two
/// components. Each component gets a multilevel local-moving pass
/// followed by cluster splits, vertex moves and cluster merges, repeated
/// while the objective strictly improves. This runs from the index order
/// and from a fixed set of shuffled orders; the best result wins, with
/// ties going to the earliest run, and on small components is then pushed
/// further by single-vertex kicks. The output is deterministic. Clusters
/// are numbered in order of their first vertex.
pub fn detect_clusters(
    net: &CoNetwork,
    opts: ClusterOptions,
) -> Result<ClusterPartition, MappingError> {
    let graph = WeightedGraph::from_network(net, opts.weighting)?;
    Ok(detect_clusters_weighted(
        &graph,
        &net.components(),
        opts.resolution,
    ))
}

pub(crate) fn detect_clusters_weighted(
    graph: &WeightedGraph,
    components: &[Vec<usize>],
    gamma: f64,
) -> ClusterPartition {
    let two_m = 2.0 * graph.total_weight();
    let mut labels = vec![0usize; graph.len()];
    let mut offset = 0;
    for comp in components {
        let local = if two_m > 0.0 && comp.len() > 1 {
            optimize_component(graph, comp, two_m, gamma)
        } else {
            (1..=comp.len()).collect()
        };
        for (k, &v) in comp.iter().enumerate() {
            labels[v] = offset + local[k];
        }
        offset += local.iter().copied().max().unwrap_or(0);
    }
    let assignment = relabel(&labels);
    let modularity = graph.modularity(&assignment, gamma);
    ClusterPartition {
        assignment,
        modularity,
    }
}

impl WeightedGraph {
    /// Runs the optimizer directly on this graph.
    pub fn detect_clusters(&self, gamma: f64) -> ClusterPartition {
        detect_clusters_weighted(self, &self.components(), gamma)
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut k = 0;
            while k < comp.len() {
                let u = comp[k];
                k += 1;
                for &(v, _) in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Weighted modularity of `p` on raw co-occurrence counts.
pub fn modularity(net: &CoNetwork, p: &ClusterPartition, resolution: f64) -> f64 {
    WeightedGraph::from_network(net, ClusterWeighting::Raw)
        .expect("raw weighting is always available")
        .modularity(p.assignment(), resolution)
}

/// One row of a cluster legend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub label: Option<String>,
    /// Member descriptors and occurrence weights, heaviest first.
    pub members: Vec<(String, u32)>,
}

impl ClusterSummary {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// Legend text such as `Cluster 2 (11 items)`.
    pub fn legend(&self) -> String {
        let name = self
            .label
            .clone()
            .unwrap_or_else(|| format!("Cluster {}", self.cluster));
        format!("{name} ({} items)", self.size())
    }
}

/// Per-cluster member lists ranked by occurrence weight. `labels[c - 1]`,
/// when present, names cluster `c`.
pub fn cluster_summary(
    p: &ClusterPartition,
    net: &CoNetwork,
    labels: &[String],
) -> Vec<ClusterSummary> {
    (1..=p.cluster_count())
        .map(|c| {
            let mut members: Vec<(String, u32)> = p
                .members(c)
                .into_iter()
                .map(|v| (net.label(v).to_owned(), net.vertices()[v].weight))
                .collect();
            members.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            ClusterSummary {
                cluster: c,
                label: labels.get(c - 1).cloned(),
                members,
            }
        })
        .collect()
}
