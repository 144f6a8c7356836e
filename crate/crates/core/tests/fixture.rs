mod oracle;
mod support;

use std::collections::BTreeMap;

use coword::conet::{
    build_network, edge_query, format_edge_rows, network_metrics, threshold_filter,
};
use coword::corpus::{
    class_crosstab, class_distribution, filter_records, PeriodWindow, SchemeSlot, UNCLASSIFIED,
};
use coword::vocabulary::{coverage_stats, descriptor_frequencies, load_mapping, normalize};

use oracle::{
    data, descriptor_sets, fixture_rows, floyd_warshall, frequencies, pair_counts, scheme_labels,
    tally,
};
use support::{fixture_records, schemes};

#[test]
fn hand_counts() {
    let rows = fixture_rows();
    assert_eq!(rows.len(), 40);
    let by_source = tally(rows.iter().map(|r| r.source.as_str()));
    assert_eq!(by_source["BAD"], 29);
    assert_eq!(by_source["WOS"], 11);

    let rs = fixture_records();
    assert_eq!(rs.len(), 40);
    assert_eq!(filter_records(&rs, Some("bad"), None).len(), 29);
    assert_eq!(filter_records(&rs, Some("WOS"), None).len(), 11);
}

#[test]
fn frequencies_match_brute_force() {
    let rows = fixture_rows();
    let expected = frequencies(&descriptor_sets(&rows));
    let idx = normalize(
        &fixture_records(),
        &load_mapping(data("mapping.txt")).unwrap(),
        true,
    );
    let got: BTreeMap<String, usize> = descriptor_frequencies(&idx, None).into_iter().collect();
    assert_eq!(got, expected);
    assert_eq!(
        idx.token_count,
        rows.iter().map(|r| r.keywords.len()).sum::<usize>()
    );
}

#[test]
fn network_matches_brute_force() {
    let sets = descriptor_sets(&fixture_rows());
    let freq = frequencies(&sets);
    let pairs = pair_counts(&sets);

    let idx = normalize(
        &fixture_records(),
        &load_mapping(data("mapping.txt")).unwrap(),
        true,
    );
    let net = build_network(&idx);
    assert_eq!(net.vertex_count(), freq.len());
    for v in net.vertices() {
        assert_eq!(v.weight as usize, freq[&v.label], "{}", v.label);
    }
    let got: BTreeMap<(String, String), usize> = net
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = (net.label(e.source), net.label(e.target));
            (
                (a.min(b).to_owned(), a.max(b).to_owned()),
                e.weight as usize,
            )
        })
        .collect();
    assert_eq!(got, pairs);

    for min_occ in 1..=8 {
        let kept = threshold_filter(&net, min_occ);
        let labels: Vec<&str> = kept.vertices().iter().map(|v| v.label.as_str()).collect();
        let expected: Vec<&String> = freq
            .iter()
            .filter(|(_, &c)| c >= min_occ as usize)
            .map(|(d, _)| d)
            .collect();
        assert_eq!(labels.len(), expected.len());
        assert!(expected.iter().all(|d| labels.contains(&d.as_str())));
        let edges = pairs
            .iter()
            .filter(|((a, b), _)| freq[a] >= min_occ as usize && freq[b] >= min_occ as usize)
            .count();
        assert_eq!(kept.edge_count(), edges);
    }
}

#[test]
fn distributions_match_brute_force() {
    let rows = fixture_rows();
    let rs = fixture_records();
    let (a, b) = schemes();
    for (slot, scheme, labels, pick) in [
        (SchemeSlot::A, &a, scheme_labels("scheme_a.txt"), 0),
        (SchemeSlot::B, &b, scheme_labels("scheme_b.txt"), 1),
    ] {
        let counts = tally(rows.iter().map(|r| {
            if pick == 0 {
                r.class_a.as_str()
            } else {
                r.class_b.as_str()
            }
        }));
        let d = class_distribution(&rs, scheme, slot);
        assert_eq!(d.total, 40);
        for label in &labels {
            assert_eq!(
                d.count(label).unwrap(),
                counts.get(label).copied().unwrap_or(0),
                "{label}"
            );
        }
        let blank = counts.get("").copied().unwrap_or(0);
        assert_eq!(d.count(UNCLASSIFIED), (blank > 0).then_some(blank));
        for row in &d.rows {
            assert_eq!(row.percent as usize, (200 * row.count + 40) / 80);
        }
    }
}

#[test]
fn crosstab_matches_brute_force() {
    let rows = fixture_rows();
    let (a, b) = schemes();
    let t = class_crosstab(&fixture_records(), &a, &b);
    let cells = tally(rows.iter().map(|r| format!("{}|{}", r.class_a, r.class_b)));
    for (i, ra) in t.row_labels.iter().enumerate() {
        for (j, cb) in t.col_labels.iter().enumerate() {
            let ka = if ra == UNCLASSIFIED { "" } else { ra };
            let kb = if cb == UNCLASSIFIED { "" } else { cb };
            assert_eq!(
                t.counts[i][j],
                cells.get(&format!("{ka}|{kb}")).copied().unwrap_or(0)
            );
        }
    }
    assert_eq!(t.row_sums().iter().sum::<usize>(), 40);
}

#[test]
fn edge_query_table() {
    let idx = normalize(
        &fixture_records(),
        &load_mapping(data("mapping.txt")).unwrap(),
        true,
    );
    let rows = edge_query(&build_network(&idx), "academic libraries").unwrap();
    assert_eq!(
        format_edge_rows(&rows),
        "Keyword1\tKeyword2\tweight\n\
         academic libraries\tcitizenship\t1\n\
         academic libraries\tcollaboration\t3\n\
         academic libraries\tdigital libraries\t1\n\
         academic libraries\tevaluation\t2\n"
    );
}

#[test]
fn unmapped_keywords_reported() {
    let idx = normalize(
        &fixture_records(),
        &load_mapping(data("mapping.txt")).unwrap(),
        true,
    );
    let keys: Vec<&str> = idx.unmapped.keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        ["bibliometria", "e-learning", "gestão documental", "web 2.0"]
    );
}

#[test]
fn coverage_matches_frequencies() {
    let freq = frequencies(&descriptor_sets(&fixture_rows()));
    let idx = normalize(
        &fixture_records(),
        &load_mapping(data("mapping.txt")).unwrap(),
        true,
    );
    let total: usize = freq.values().sum();
    for min_occ in 1..=8 {
        let s = coverage_stats(&idx, min_occ);
        let kept: usize = freq.values().filter(|&&c| c >= min_occ).sum();
        assert_eq!(s.occurrences_total, total);
        assert_eq!(s.occurrences_retained, kept);
        assert_eq!(
            s.percent_retained as usize,
            (200 * kept + total) / (2 * total)
        );
    }
}

#[test]
fn metrics_match_floyd_warshall() {
    let idx = normalize(
        &fixture_records(),
        &load_mapping(data("mapping.txt")).unwrap(),
        true,
    );
    for min_occ in [1, 2, 3, 5] {
        let net = threshold_filter(&build_network(&idx), min_occ);
        let n = net.vertex_count();
        let edges: Vec<(usize, usize, f64)> = net
            .edges()
            .iter()
            .map(|e| (e.source, e.target, 1.0))
            .collect();
        let d = floyd_warshall(n, &edges);
        let m = network_metrics(&net);
        if n > 1 {
            assert!((m.density - 2.0 * edges.len() as f64 / (n * (n - 1)) as f64).abs() < 1e-12);
        }
        for (i, row) in d.iter().enumerate() {
            let reach: Vec<f64> = row
                .iter()
                .enumerate()
                .filter(|&(j, x)| j != i && x.is_finite())
                .map(|(_, &x)| x)
                .collect();
            let expected = if reach.is_empty() {
                0.0
            } else {
                reach.len() as f64 / reach.iter().sum::<f64>()
            };
            assert!((m.closeness[i] - expected).abs() < 1e-12, "closeness {i}");
            let deg = row.iter().filter(|&&x| x == 1.0).count();
            let expected = if n > 1 {
                deg as f64 / (n - 1) as f64
            } else {
                0.0
            };
            assert!((m.degree_centrality[i] - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn portugal_links_differ_by_period() {
    let idx_for = |w: PeriodWindow| {
        let rs = filter_records(&fixture_records(), None, Some(w));
        normalize(&rs, &load_mapping(data("mapping.txt")).unwrap(), true)
    };
    let early = build_network(&idx_for(PeriodWindow::new(2001, 2006).unwrap()));
    let rows = edge_query(&early, "Portugal").unwrap();
    let partners: Vec<&str> = rows.iter().map(|r| r.keyword2.as_str()).collect();
    assert_eq!(partners, ["public libraries"]);
    let late = build_network(&idx_for(PeriodWindow::new(2007, 2012).unwrap()));
    assert!(edge_query(&late, "Portugal").unwrap().len() > 1);
}
