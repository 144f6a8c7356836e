#![allow(dead_code)]

use std::collections::BTreeSet;

use coword::conet::{CoNetwork, Edge, Vertex};
use coword::corpus::{parse_records, ClassScheme, ParseOptions, RecordSet};
use coword::pipeline::RunConfig;
use coword::vocabulary::OccurrenceIndex;

use super::oracle::data;

/// Network whose vertex weights are the incident weight sums (at least 1).
pub fn network(n: usize, edges: &[(usize, usize, u32)]) -> CoNetwork {
    let mut w = vec![1u32; n];
    for &(a, b, c) in edges {
        w[a] += c;
        w[b] += c;
    }
    CoNetwork::from_parts(
        (0..n)
            .map(|i| Vertex {
                label: format!("v{i:02}"),
                weight: w[i],
            })
            .collect(),
        edges
            .iter()
            .map(|&(a, b, weight)| Edge {
                source: a.min(b),
                target: a.max(b),
                weight,
            })
            .collect(),
    )
    .unwrap()
}

pub fn index(sets: &[BTreeSet<String>]) -> OccurrenceIndex {
    OccurrenceIndex::from_sets(
        sets.iter()
            .enumerate()
            .map(|(i, s)| (format!("r{i}"), s.clone())),
    )
}

pub fn schemes() -> (ClassScheme, ClassScheme) {
    (
        ClassScheme::load("A", data("scheme_a.txt")).unwrap(),
        ClassScheme::load("B", data("scheme_b.txt")).unwrap(),
    )
}

pub fn fixture_records() -> RecordSet {
    let (a, b) = schemes();
    parse_records(data("records.csv"), (&a, &b), ParseOptions::default()).unwrap()
}

pub fn fixture_config(out: &std::path::Path) -> RunConfig {
    let mut cfg = RunConfig::from_file(data("coword.conf")).unwrap();
    cfg.out_dir = out.to_path_buf();
    cfg
}
