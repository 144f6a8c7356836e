use std::collections::BTreeMap;

use serde::Serialize;

use crate::conet::{network_metrics, CoNetwork};

/// Structural summary of one side of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideSummary {
    pub label: String,
    pub vertices: usize,
    pub edges: usize,
    pub density: f64,
    pub mean_degree_centrality: f64,
    pub mean_closeness: f64,
    pub components: usize,
}

impl SideSummary {
    pub fn of(label: &str, net: &CoNetwork) -> Self {
        let m = network_metrics(net);
        SideSummary {
            label: label.to_owned(),
            vertices: net.vertex_count(),
            edges: net.edge_count(),
            density: m.density,
            mean_degree_centrality: m.mean_degree_centrality(),
            mean_closeness: m.mean_closeness(),
            components: m.components,
        }
    }
}

/// Change in the number of links of a descriptor present on both sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkDelta {
    pub descriptor: String,
    pub links_a: usize,
    pub links_b: usize,
}

impl LinkDelta {
    pub fn delta(&self) -> i64 {
        self.links_b as i64 - self.links_a as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub a: SideSummary,
    pub b: SideSummary,
    /// Descriptors only in `b`, sorted.
    pub appeared: Vec<String>,
    /// Descriptors only in `a`, sorted.
    pub vanished: Vec<String>,
    /// Descriptors in both, sorted, with link counts on each side.
    pub persisted: Vec<LinkDelta>,
}

impl CompareReport {
    /// The report with sides exchanged.
    pub fn swapped(&self) -> CompareReport {
        CompareReport {
            a: self.b.clone(),
            b: self.a.clone(),
            appeared: self.vanished.clone(),
            vanished: self.appeared.clone(),
            persisted: self
                .persisted
                .iter()
                .map(|d| LinkDelta {
                    descriptor: d.descriptor.clone(),
                    links_a: d.links_b,
                    links_b: d.links_a,
                })
                .collect(),
        }
    }
}

fn link_counts(net: &CoNetwork) -> BTreeMap<&str, usize> {
    net.degrees()
        .into_iter()
        .enumerate()
        .map(|(i, d)| (net.label(i), d))
        .collect()
}

/// Compares two networks, e.g. two periods or two sources.
pub fn compare_networks(a: &CoNetwork, b: &CoNetwork, labels: (&str, &str)) -> CompareReport {
    let links_a = link_counts(a);
    let links_b = link_counts(b);
    let appeared = links_b
        .keys()
        .filter(|d| !links_a.contains_key(*d))
        .map(|d| d.to_string())
        .collect();
    let vanished = links_a
        .keys()
        .filter(|d| !links_b.contains_key(*d))
        .map(|d| d.to_string())
        .collect();
    let persisted = links_a
        .iter()
        .filter_map(|(d, &la)| {
            links_b.get(d).map(|&lb| LinkDelta {
                descriptor: d.to_string(),
                links_a: la,
                links_b: lb,
            })
        })
        .collect();
    CompareReport {
        a: SideSummary::of(labels.0, a),
        b: SideSummary::of(labels.1, b),
        appeared,
        vanished,
        persisted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conet::build_network;
    use crate::vocabulary::OccurrenceIndex;
    use std::collections::BTreeSet;

    fn net(records: &[&[&str]]) -> CoNetwork {
        build_network(&OccurrenceIndex::from_sets(records.iter().enumerate().map(
            |(i, r)| {
                (
                    format!("r{i}"),
                    r.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>(),
                )
            },
        )))
    }

    #[test]
    fn identical_networks() {
        let a = net(&[&["x", "y"], &["y", "z"]]);
        let r = compare_networks(&a, &a, ("a", "b"));
        assert!(r.appeared.is_empty() && r.vanished.is_empty());
        assert!(r.persisted.iter().all(|d| d.delta() == 0));
        assert_eq!(r.a.density, r.b.density);
    }

    #[test]
    fn new_vertex_with_one_edge() {
        let a = net(&[&["x", "y"]]);
        let b = net(&[&["x", "y"], &["y", "new"]]);
        let r = compare_networks(&a, &b, ("a", "b"));
        assert_eq!(r.appeared, vec!["new"]);
        assert!(r.vanished.is_empty());
        let y = r.persisted.iter().find(|d| d.descriptor == "y").unwrap();
        assert_eq!(y.delta(), 1);
        let x = r.persisted.iter().find(|d| d.descriptor == "x").unwrap();
        assert_eq!(x.delta(), 0);
    }

    #[test]
    fn swapping_sides_is_antisymmetric() {
        let a = net(&[&["x", "y"], &["p"]]);
        let b = net(&[&["x", "y", "z"]]);
        assert_eq!(
            compare_networks(&b, &a, ("b", "a")),
            compare_networks(&a, &b, ("a", "b")).swapped()
        );
    }
}
