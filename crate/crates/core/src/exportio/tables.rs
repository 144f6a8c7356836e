//! CSV tables: reports for readers, and the intermediate files that let
//! each pipeline stage be rerun on its own.
//!
//! Floating-point values in intermediate files use Rust's shortest
//! round-trip formatting, so reading them back is exact. Report tables
//! round to six decimals.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use super::{read_file, write_file, CompareReport, ExportError};
use crate::conet::{CoNetwork, Edge, Vertex};
use crate::corpus::{CrossTab, Distribution, GroupedDistribution};
use crate::mapping::{ClusterPartition, ClusterSummary, LayoutMap};
use crate::vocabulary::{CoverageStats, OccurrenceIndex};

/// Builds a CSV document in memory. Fields are quoted only when needed.
fn csv_text<I, R, F>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = F>,
    F: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .flexible(true)
        .from_writer(Vec::new());
    // writing to a Vec cannot fail
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("fields are UTF-8")
}

/// Writes `text` to `path`.
pub fn save(path: impl AsRef<Path>, text: &str) -> Result<(), ExportError> {
    write_file(path.as_ref(), text.as_bytes())
}

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

pub fn frequencies_csv(freq: &[(String, usize)]) -> String {
    csv_text(
        &["descriptor", "occurrences"],
        freq.iter().map(|(d, c)| [d.clone(), c.to_string()]),
    )
}

pub fn unmapped_csv(idx: &OccurrenceIndex) -> String {
    csv_text(
        &["raw_keyword", "count"],
        idx.unmapped_ranked()
            .into_iter()
            .map(|(k, c)| [k, c.to_string()]),
    )
}

pub fn coverage_csv(stats: &CoverageStats, token_count: usize) -> String {
    let rows = [
        ("min_occurrences", stats.min_occurrences.to_string()),
        ("descriptors_total", stats.descriptors_total.to_string()),
        ("occurrences_total", stats.occurrences_total.to_string()),
        (
            "descriptors_retained",
            stats.descriptors_retained.to_string(),
        ),
        (
            "occurrences_retained",
            stats.occurrences_retained.to_string(),
        ),
        ("percent_retained", stats.percent_retained.to_string()),
        ("empty", stats.empty.to_string()),
        ("keyword_tokens", token_count.to_string()),
    ];
    csv_text(
        &["statistic", "value"],
        rows.iter().map(|(k, v)| [k.to_string(), v.clone()]),
    )
}

pub fn distribution_csv(d: &Distribution) -> String {
    csv_text(
        &["label", "count", "percent"],
        d.rows
            .iter()
            .map(|r| [r.label.clone(), r.count.to_string(), r.percent.to_string()]),
    )
}

/// One row per label, a count and a percent column per group.
pub fn grouped_distribution_csv(g: &GroupedDistribution) -> String {
    let mut header = vec!["label".to_string()];
    for name in &g.groups {
        header.push(format!("{name} count"));
        header.push(format!("{name} percent"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = g.labels().into_iter().map(|label| {
        let mut row = vec![label.clone()];
        for d in &g.columns {
            let cell = d.rows.iter().find(|r| r.label == label);
            row.push(cell.map_or(0, |r| r.count).to_string());
            row.push(cell.map_or(0, |r| r.percent).to_string());
        }
        row
    });
    csv_text(&header_refs, rows)
}

pub fn crosstab_csv(t: &CrossTab) -> String {
    let mut header = vec!["class_a \\ class_b".to_string()];
    header.extend(t.col_labels.iter().cloned());
    header.push("total".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows: Vec<Vec<String>> = t
        .row_labels
        .iter()
        .zip(&t.counts)
        .map(|(label, counts)| {
            let mut row = vec![label.clone()];
            row.extend(counts.iter().map(usize::to_string));
            row.push(counts.iter().sum::<usize>().to_string());
            row
        })
        .collect();
    let col_sums = t.col_sums();
    let mut total = vec!["total".to_string()];
    total.extend(col_sums.iter().map(usize::to_string));
    total.push(col_sums.iter().sum::<usize>().to_string());
    rows.push(total);
    csv_text(&header_refs, rows)
}

/// `keyword1,keyword2,weight` sorted by the keyword pair.
pub fn edges_csv(net: &CoNetwork) -> String {
    csv_text(
        &["keyword1", "keyword2", "weight"],
        net.edge_rows()
            .into_iter()
            .map(|r| [r.keyword1, r.keyword2, r.weight.to_string()]),
    )
}

/// Vertices in network order with their occurrence weights.
pub fn vertices_csv(net: &CoNetwork) -> String {
    csv_text(
        &["descriptor", "occurrences"],
        net.vertices()
            .iter()
            .map(|v| [v.label.clone(), v.weight.to_string()]),
    )
}

pub fn clusters_csv(net: &CoNetwork, p: &ClusterPartition) -> String {
    csv_text(
        &["descriptor", "cluster"],
        (0..net.vertex_count()).map(|i| [net.label(i).to_owned(), p.cluster_of(i).to_string()]),
    )
}

pub fn cluster_summary_csv(summary: &[ClusterSummary]) -> String {
    csv_text(
        &["cluster", "items", "legend", "members"],
        summary.iter().map(|s| {
            let members: Vec<String> = s
                .members
                .iter()
                .map(|(d, w)| format!("{d} ({w})"))
                .collect();
            [
                s.cluster.to_string(),
                s.size().to_string(),
                s.legend(),
                members.join("; "),
            ]
        }),
    )
}

pub fn layout_csv(net: &CoNetwork, layout: &LayoutMap) -> String {
    csv_text(
        &["descriptor", "x", "y"],
        (0..net.vertex_count()).map(|i| {
            let [x, y] = layout.coords[i];
            [net.label(i).to_owned(), x.to_string(), y.to_string()]
        }),
    )
}

/// Per-record descriptor sets, `;`-joined.
pub fn descriptor_sets_csv(idx: &OccurrenceIndex) -> String {
    csv_text(
        &["id", "descriptors"],
        idx.per_record.iter().map(|(id, set)| {
            let joined: Vec<&str> = set.iter().map(String::as_str).collect();
            [id.clone(), joined.join("; ")]
        }),
    )
}

pub fn compare_csv(r: &CompareReport) -> String {
    let header = [
        "kind",
        "item",
        r.a.label.as_str(),
        r.b.label.as_str(),
        "delta",
    ];
    let mut rows: Vec<[String; 5]> = Vec::new();
    let mut count = |name: &str, a: usize, b: usize| {
        rows.push([
            "summary".into(),
            name.into(),
            a.to_string(),
            b.to_string(),
            (b as i64 - a as i64).to_string(),
        ]);
    };
    count("vertices", r.a.vertices, r.b.vertices);
    count("edges", r.a.edges, r.b.edges);
    count("components", r.a.components, r.b.components);
    for (name, a, b) in [
        ("density", r.a.density, r.b.density),
        (
            "mean_degree_centrality",
            r.a.mean_degree_centrality,
            r.b.mean_degree_centrality,
        ),
        ("mean_closeness", r.a.mean_closeness, r.b.mean_closeness),
    ] {
        rows.push(["summary".into(), name.into(), f6(a), f6(b), f6(b - a)]);
    }
    for d in &r.appeared {
        rows.push([
            "appeared".into(),
            d.clone(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    for d in &r.vanished {
        rows.push([
            "vanished".into(),
            d.clone(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    for d in &r.persisted {
        rows.push([
            "links".into(),
            d.descriptor.clone(),
            d.links_a.to_string(),
            d.links_b.to_string(),
            d.delta().to_string(),
        ]);
    }
    csv_text(&header, rows)
}

fn read_table(path: &Path, header: &[&str]) -> Result<Vec<(usize, Vec<String>)>, ExportError> {
    let text = read_file(path)?;
    let csv_err = |source| ExportError::Csv {
        path: path.to_owned(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let found: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_owned)
        .collect();
    if found != header {
        return Err(ExportError::Parse {
            line: 1,
            reason: format!("{}: expected header `{}`", path.display(), header.join(",")),
        });
    }
    rdr.records()
        .map(|r| {
            let r = r.map_err(csv_err)?;
            let line = r.position().map_or(0, |p| p.line() as usize);
            Ok((line, r.iter().map(str::to_owned).collect()))
        })
        .collect()
}

fn number<T: std::str::FromStr>(line: usize, field: &str, value: &str) -> Result<T, ExportError> {
    value.parse().map_err(|_| ExportError::Parse {
        line,
        reason: format!("bad {field} `{value}`"),
    })
}

/// Reads a network written by [`vertices_csv`] and [`edges_csv`].
pub fn read_network_csv(
    vertices: impl AsRef<Path>,
    edges: impl AsRef<Path>,
) -> Result<CoNetwork, ExportError> {
    let mut verts = Vec::new();
    for (line, row) in read_table(vertices.as_ref(), &["descriptor", "occurrences"])? {
        verts.push(Vertex {
            weight: number(line, "occurrences", &row[1])?,
            label: row[0].clone(),
        });
    }
    let index: HashMap<&str, usize> = verts
        .iter()
        .enumerate()
        .map(|(i, v)| (v.label.as_str(), i))
        .collect();
    let mut edge_list = Vec::new();
    for (line, row) in read_table(edges.as_ref(), &["keyword1", "keyword2", "weight"])? {
        let end = |label: &str| {
            index.get(label).copied().ok_or_else(|| ExportError::Parse {
                line,
                reason: format!("unknown descriptor `{label}`"),
            })
        };
        edge_list.push(Edge {
            source: end(&row[0])?,
            target: end(&row[1])?,
            weight: number(line, "weight", &row[2])?,
        });
    }
    Ok(CoNetwork::from_parts(verts, edge_list)?)
}

/// Reads cluster ids written by [`clusters_csv`], checking they match the
/// network's vertex order.
pub fn read_clusters_csv(
    path: impl AsRef<Path>,
    net: &CoNetwork,
) -> Result<ClusterPartition, ExportError> {
    let rows = read_table(path.as_ref(), &["descriptor", "cluster"])?;
    if rows.len() != net.vertex_count() {
        return Err(ExportError::SizeMismatch {
            what: "cluster file",
            found: rows.len(),
            expected: net.vertex_count(),
        });
    }
    let mut assignment = Vec::with_capacity(rows.len());
    for (i, (line, row)) in rows.into_iter().enumerate() {
        if row[0] != net.label(i) {
            return Err(ExportError::Parse {
                line,
                reason: format!("expected descriptor `{}`, found `{}`", net.label(i), row[0]),
            });
        }
        assignment.push(number(line, "cluster", &row[1])?);
    }
    ClusterPartition::from_assignment(assignment).map_err(|e| ExportError::Parse {
        line: 1,
        reason: e.to_string(),
    })
}

/// Reads coordinates written by [`layout_csv`].
pub fn read_layout_csv(path: impl AsRef<Path>, net: &CoNetwork) -> Result<LayoutMap, ExportError> {
    let rows = read_table(path.as_ref(), &["descriptor", "x", "y"])?;
    if rows.len() != net.vertex_count() {
        return Err(ExportError::SizeMismatch {
            what: "layout file",
            found: rows.len(),
            expected: net.vertex_count(),
        });
    }
    let mut coords = Vec::with_capacity(rows.len());
    for (i, (line, row)) in rows.into_iter().enumerate() {
        if row[0] != net.label(i) {
            return Err(ExportError::Parse {
                line,
                reason: format!("expected descriptor `{}`, found `{}`", net.label(i), row[0]),
            });
        }
        coords.push([number(line, "x", &row[1])?, number(line, "y", &row[2])?]);
    }
    Ok(LayoutMap {
        coords,
        final_stress: 0.0,
        converged: true,
        iterations: 0,
    })
}

/// Reads per-record descriptor sets written by [`descriptor_sets_csv`].
pub fn read_descriptor_sets_csv(path: impl AsRef<Path>) -> Result<OccurrenceIndex, ExportError> {
    let rows = read_table(path.as_ref(), &["id", "descriptors"])?;
    Ok(OccurrenceIndex::from_sets(rows.into_iter().map(
        |(_, row)| {
            let set: BTreeSet<String> = row[1]
                .split(';')
                .map(str::trim)
                .filter(|d| !d.is_empty())
                .map(str::to_owned)
                .collect();
            (row[0].clone(), set)
        },
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conet::build_network;

    fn sample() -> CoNetwork {
        build_network(&OccurrenceIndex::from_sets([
            (
                "r1",
                BTreeSet::from(["b, with comma".to_string(), "a".to_string()]),
            ),
            ("r2", BTreeSet::from(["a".to_string()])),
        ]))
    }

    #[test]
    fn edge_list_is_sorted_and_quoted() {
        assert_eq!(
            edges_csv(&sample()),
            "keyword1,keyword2,weight\na,\"b, with comma\",1\n"
        );
    }

    #[test]
    fn network_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let net = sample();
        save(dir.path().join("v.csv"), &vertices_csv(&net)).unwrap();
        save(dir.path().join("e.csv"), &edges_csv(&net)).unwrap();
        let back = read_network_csv(dir.path().join("v.csv"), dir.path().join("e.csv")).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn layout_csv_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let net = sample();
        let layout = LayoutMap {
            coords: vec![[0.1 + 0.2, 1.0 / 3.0], [0.0, 1.0]],
            final_stress: 0.0,
            converged: true,
            iterations: 0,
        };
        save(dir.path().join("l.csv"), &layout_csv(&net, &layout)).unwrap();
        assert_eq!(
            read_layout_csv(dir.path().join("l.csv"), &net)
                .unwrap()
                .coords,
            layout.coords
        );
    }

    #[test]
    fn descriptor_sets_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let idx = OccurrenceIndex::from_sets([
            ("r1", BTreeSet::from(["x".to_string(), "y".to_string()])),
            ("r2", BTreeSet::new()),
        ]);
        save(dir.path().join("d.csv"), &descriptor_sets_csv(&idx)).unwrap();
        let back = read_descriptor_sets_csv(dir.path().join("d.csv")).unwrap();
        assert_eq!(back.per_record, idx.per_record);
        assert_eq!(back.totals, idx.totals);
    }
}
