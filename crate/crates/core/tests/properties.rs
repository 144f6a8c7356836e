mod oracle;
mod support;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use coword::conet::{association_strength, build_network, threshold_filter, CoNetwork};
use coword::corpus::{
    class_distribution, filter_records, split_periods, ClassScheme, PeriodWindow, Record,
    RecordSet, SchemeSlot,
};
use coword::exportio::tables::{layout_csv, read_layout_csv, save};
use coword::exportio::{
    compare_networks, format_pajek_clu, format_pajek_net, parse_pajek_clu, parse_pajek_net,
    render_label_map_svg, SvgOptions,
};
use coword::mapping::{detect_clusters, ClusterOptions, LayoutMap};
use coword::vocabulary::{coverage_stats, normalize, MappingTable};

use support::index;

const LABELS: [&str; 4] = ["Alpha", "Beta", "Gamma", "Delta"];

fn corpus(max_records: usize, vocab: usize) -> impl Strategy<Value = Vec<BTreeSet<String>>> {
    prop::collection::vec(
        prop::collection::btree_set((0..vocab).prop_map(|d| format!("d{d}")), 0..8),
        0..max_records,
    )
}

fn records() -> impl Strategy<Value = RecordSet> {
    prop::collection::vec(
        (
            prop::bool::ANY,
            2001..=2012i32,
            prop::option::of(0..LABELS.len()),
            prop::collection::vec("[a-c]{1,2}( [a-c])?", 0..5),
        ),
        0..40,
    )
    .prop_map(|rows| {
        RecordSet::new(
            rows.into_iter()
                .enumerate()
                .map(|(i, (bad, year, class, kws))| Record {
                    id: format!("r{i}"),
                    source: if bad { "BAD" } else { "WOS" }.into(),
                    year,
                    title: String::new(),
                    class_a: class.map(|c| LABELS[c].to_string()),
                    class_b: None,
                    raw_keywords: kws,
                })
                .collect(),
        )
    })
}

fn scheme() -> ClassScheme {
    ClassScheme::new("A", LABELS).unwrap()
}

fn layout_for(net: &CoNetwork, coords: &[(f64, f64)]) -> LayoutMap {
    LayoutMap {
        coords: (0..net.vertex_count())
            .map(|i| {
                let (x, y) = coords[i % coords.len().max(1)];
                [x, y]
            })
            .collect(),
        final_stress: 0.0,
        converged: true,
        iterations: 0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 96,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn filter_keeps_exactly_matching_records(rs in records(), a in 2001..=2012i32, len in 0..6i32, src in prop::option::of(prop::bool::ANY)) {
        let w = PeriodWindow::new(a, a + len).unwrap();
        let tag = src.map(|b| if b { "bad" } else { "wos" });
        let out = filter_records(&rs, tag, Some(w));
        let expected: Vec<&Record> = rs
            .iter()
            .filter(|r| w.contains(r.year) && tag.is_none_or(|t| r.source.eq_ignore_ascii_case(t)))
            .collect();
        prop_assert_eq!(out.iter().collect::<Vec<_>>(), expected);
    }

    #[test]
    fn split_partitions_covered_records(rs in records(), cut in 2002..=2012i32) {
        let windows = [PeriodWindow::new(2001, cut - 1).unwrap(), PeriodWindow::new(cut, 2012).unwrap()];
        let parts = split_periods(&rs, &windows).unwrap();
        prop_assert_eq!(parts.iter().map(RecordSet::len).sum::<usize>(), rs.len());
        let mut ids: Vec<&str> = parts.iter().flat_map(|p| p.iter().map(|r| r.id.as_str())).collect();
        ids.sort_unstable();
        ids.dedup();
        prop_assert_eq!(ids.len(), rs.len());
    }

    #[test]
    fn distribution_counts_sum_to_total(rs in records()) {
        let d = class_distribution(&rs, &scheme(), SchemeSlot::A);
        prop_assert_eq!(d.total, rs.len());
        prop_assert_eq!(d.rows.iter().map(|r| r.count).sum::<usize>(), rs.len());
    }

    #[test]
    fn normalization_is_idempotent(rs in records(), passthrough in prop::bool::ANY) {
        let mut table = MappingTable::new();
        table.insert("a", "Letter A", 1).unwrap();
        table.insert("b  c", "bc pair", 2).unwrap();
        table.insert("A A", "Letter A", 3).unwrap();
        let once = normalize(&rs, &table, passthrough);
        let again_input = RecordSet::new(
            rs.iter()
                .zip(&once.per_record)
                .map(|(r, (_, set))| Record { raw_keywords: set.iter().cloned().collect(), ..r.clone() })
                .collect(),
        );
        let twice = normalize(&again_input, &table, passthrough);
        prop_assert_eq!(&once.per_record, &twice.per_record);
        prop_assert_eq!(once.total_occurrences(), once.per_record.iter().map(|(_, s)| s.len()).sum::<usize>());
    }

    #[test]
    fn coverage_shrinks_with_threshold(sets in corpus(60, 20), a in 1usize..8, b in 1usize..8) {
        let idx = index(&sets);
        let (lo, hi) = (a.min(b), a.max(b));
        let (s_lo, s_hi) = (coverage_stats(&idx, lo), coverage_stats(&idx, hi));
        prop_assert!(s_hi.descriptors_retained <= s_lo.descriptors_retained);
        prop_assert!(s_hi.occurrences_retained <= s_lo.occurrences_retained);
        prop_assert!(s_hi.percent_retained <= s_lo.percent_retained);
    }

    #[test]
    fn pair_counts_match_brute_force(sets in corpus(50, 15)) {
        let net = build_network(&index(&sets));
        let lists: Vec<Vec<String>> = sets.iter().map(|s| s.iter().cloned().collect()).collect();
        let pairs = oracle::pair_counts(&lists);
        let got: BTreeMap<(String, String), usize> = net
            .edges()
            .iter()
            .map(|e| {
                let (a, b) = (net.label(e.source), net.label(e.target));
                ((a.min(b).to_string(), a.max(b).to_string()), e.weight as usize)
            })
            .collect();
        prop_assert_eq!(got, pairs);
        let k2: u64 = sets.iter().map(|s| (s.len() * s.len().saturating_sub(1) / 2) as u64).sum();
        prop_assert_eq!(net.total_edge_weight(), k2);
    }

    #[test]
    fn threshold_composes(sets in corpus(50, 15), a in 1u32..6, b in 1u32..6) {
        let net = build_network(&index(&sets));
        prop_assert_eq!(threshold_filter(&threshold_filter(&net, a), b), threshold_filter(&net, a.max(b)));
    }

    #[test]
    fn record_order_does_not_matter(sets in corpus(30, 12), seed in any::<u64>()) {
        let mut shuffled = sets.clone();
        let mut rng = oracle::SplitMix(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.below(i as u64 + 1) as usize);
        }
        prop_assert_eq!(build_network(&index(&sets)), build_network(&index(&shuffled)));
    }

    #[test]
    fn similarity_is_symmetric_and_bounded(sets in corpus(40, 12)) {
        let net = build_network(&index(&sets));
        let s = association_strength(&net).unwrap();
        for i in 0..net.vertex_count() {
            prop_assert_eq!(s.get(i, i), 0.0);
            for j in 0..net.vertex_count() {
                prop_assert_eq!(s.get(i, j), s.get(j, i));
                prop_assert!((0.0..=1.0).contains(&s.get(i, j)));
                prop_assert_eq!(s.get(i, j) > 0.0, net.edge_weight(i, j) > 0);
            }
        }
    }

    #[test]
    fn pajek_write_read_write_is_fixed(sets in corpus(40, 14), coords in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..20), with_layout in prop::bool::ANY) {
        let net = build_network(&index(&sets));
        let layout = layout_for(&net, &coords);
        let first = format_pajek_net(&net, with_layout.then_some(&layout)).unwrap();
        let back = parse_pajek_net(&first).unwrap();
        prop_assert_eq!(back.layout.is_some(), with_layout && net.vertex_count() > 0);
        let second = format_pajek_net(&back.network, back.layout.as_ref()).unwrap();
        prop_assert_eq!(&first, &second);

        let p = detect_clusters(&net, ClusterOptions::default()).unwrap();
        let clu = format_pajek_clu(&p);
        prop_assert_eq!(clu.lines().count(), net.vertex_count() + 1);
        let parsed = parse_pajek_clu(&clu).unwrap();
        prop_assert_eq!(parsed.assignment(), p.assignment());
    }

    #[test]
    fn layout_csv_round_trips_exactly(sets in corpus(30, 10), coords in prop::collection::vec((-1e3..1e3f64, -1e-3..1e-3f64), 1..10)) {
        let net = build_network(&index(&sets));
        let layout = layout_for(&net, &coords);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("layout.csv");
        save(&path, &layout_csv(&net, &layout)).unwrap();
        prop_assert_eq!(read_layout_csv(&path, &net).unwrap().coords, layout.coords);
    }

    #[test]
    fn svg_is_finite_and_complete(sets in corpus(40, 14), floor in 1u32..4) {
        let net = build_network(&index(&sets));
        let layout = coword::mapping::kamada_kawai(&net, &Default::default());
        let p = detect_clusters(&net, ClusterOptions::default()).unwrap();
        let opts = SvgOptions { edge_floor: floor, ..Default::default() };
        let svg = render_label_map_svg(&net, &layout, &p, &opts).unwrap();
        prop_assert_eq!(svg.matches("<circle").count(), net.vertex_count());
        prop_assert_eq!(svg.matches("<text").count(), net.vertex_count());
        let drawn = net.edges().iter().filter(|e| e.weight >= floor).count();
        prop_assert_eq!(svg.matches("<line").count(), drawn);
        prop_assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn compare_is_antisymmetric(a in corpus(25, 10), b in corpus(25, 10)) {
        let (na, nb) = (build_network(&index(&a)), build_network(&index(&b)));
        let ab = compare_networks(&na, &nb, ("a", "b"));
        let ba = compare_networks(&nb, &na, ("b", "a"));
        prop_assert_eq!(&ba, &ab.swapped());
        for d in &ab.persisted {
            let other = ba.persisted.iter().find(|x| x.descriptor == d.descriptor).unwrap();
            prop_assert_eq!(d.delta(), -other.delta());
        }
    }
}
