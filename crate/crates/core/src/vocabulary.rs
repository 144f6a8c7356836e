//! Keyword canonicalization and descriptor statistics.
//!
//! Raw author keywords are reduced to a *match key* (Unicode NFC,
//! lowercase, trimmed, internal whitespace collapsed to one space) and
//! looked up in a [`MappingTable`]. Each record ends up with a set of
//! canonical descriptors; a descriptor's occurrence count is the number of
//! records whose set contains it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{percent_half_up, RecordSet};

#[derive(Debug, Error)]
pub enum VocabularyError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: expected `raw -> canonical`")]
    MissingArrow { line: usize },
    #[error("line {line}: empty raw keyword")]
    EmptyKey { line: usize },
    #[error("line {line}: empty canonical descriptor")]
    EmptyCanonical { line: usize },
    #[error("line {line}: canonical descriptor `{text}` contains `;`")]
    SeparatorInCanonical { line: usize, text: String },
    #[error(
        "`{key}` maps to `{first}` on line {first_line} and to `{second}` on line {second_line}"
    )]
    Conflict {
        key: String,
        first: String,
        first_line: usize,
        second: String,
        second_line: usize,
    },
}

/// Reduces a keyword to its match key.
pub fn match_key(raw: &str) -> String {
    let composed: String = raw.nfc().collect();
    composed
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Human-authored table from match keys to canonical descriptors.
///
/// Several keys may share a target. Canonical descriptors also resolve to
/// themselves, so re-normalizing canonical text is a no-op.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MappingTable {
    entries: BTreeMap<String, String>,
    lines: HashMap<String, usize>,
    canonical: BTreeMap<String, String>,
}

impl MappingTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `raw -> canonical`. `line` is only used in error messages.
    pub fn insert(
        &mut self,
        raw: &str,
        canonical: &str,
        line: usize,
    ) -> Result<(), VocabularyError> {
        let key = match_key(raw);
        if key.is_empty() {
            return Err(VocabularyError::EmptyKey { line });
        }
        let target = canonical.split_whitespace().collect::<Vec<_>>().join(" ");
        if target.is_empty() {
            return Err(VocabularyError::EmptyCanonical { line });
        }
        if target.contains(';') {
            return Err(VocabularyError::SeparatorInCanonical { line, text: target });
        }
        if let Some(existing) = self.entries.get(&key) {
            if *existing != target {
                return Err(VocabularyError::Conflict {
                    first: existing.clone(),
                    first_line: self.lines[&key],
                    second: target,
                    second_line: line,
                    key,
                });
            }
            return Ok(());
        }
        self.canonical
            .entry(match_key(&target))
            .or_insert_with(|| target.clone());
        self.lines.insert(key.clone(), line);
        self.entries.insert(key, target);
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, VocabularyError> {
        let mut table = MappingTable::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (raw, canonical) = line
                .split_once("->")
                .ok_or(VocabularyError::MissingArrow { line: line_no })?;
            table.insert(raw, canonical, line_no)?;
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Looks up an already-normalized match key.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .get(key)
            .or_else(|| self.canonical.get(key))
            .map(String::as_str)
    }

    /// Resolves a raw keyword to its canonical descriptor, if mapped.
    pub fn resolve(&self, raw: &str) -> Option<&str> {
        self.get(&match_key(raw))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

pub fn load_mapping(path: impl AsRef<Path>) -> Result<MappingTable, VocabularyError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| VocabularyError::Io {
        path: path.to_owned(),
        source,
    })?;
    MappingTable::parse(&text)
}

/// Canonical descriptor sets per record and their occurrence counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OccurrenceIndex {
    /// Record id and descriptor set, in record order.
    pub per_record: Vec<(String, BTreeSet<String>)>,
    pub totals: BTreeMap<String, usize>,
    /// Match keys of raw keywords that had no mapping entry, with counts.
    pub unmapped: BTreeMap<String, usize>,
    /// Raw keyword tokens seen, before per-record deduplication.
    pub token_count: usize,
}

impl OccurrenceIndex {
    /// Builds an index directly from descriptor sets, recomputing totals.
    pub fn from_sets<I, S>(sets: I) -> Self
    where
        I: IntoIterator<Item = (S, BTreeSet<String>)>,
        S: Into<String>,
    {
        let per_record: Vec<(String, BTreeSet<String>)> =
            sets.into_iter().map(|(id, set)| (id.into(), set)).collect();
        let mut idx = OccurrenceIndex {
            token_count: per_record.iter().map(|(_, s)| s.len()).sum(),
            per_record,
            ..Default::default()
        };
        idx.recount();
        idx
    }

    fn recount(&mut self) {
        self.totals.clear();
        for (_, set) in &self.per_record {
            for d in set {
                *self.totals.entry(d.clone()).or_insert(0) += 1;
            }
        }
    }

    pub fn record_count(&self) -> usize {
        self.per_record.len()
    }

    pub fn descriptors(&self, id: &str) -> Option<&BTreeSet<String>> {
        self.per_record
            .iter()
            .find(|(rid, _)| rid == id)
            .map(|(_, s)| s)
    }

    pub fn total_occurrences(&self) -> usize {
        self.totals.values().sum()
    }

    /// Unmapped keywords by count descending, then key.
    pub fn unmapped_ranked(&self) -> Vec<(String, usize)> {
        rank(self.unmapped.iter().map(|(k, &c)| (k.clone(), c)))
    }
}

/// Maps every record's raw keywords to descriptors.
///
/// With `passthrough`, unmapped keywords enter the index as their match
/// key; otherwise they are left out. Unmapped keywords are tallied in
/// [`OccurrenceIndex::unmapped`] either way.
pub fn normalize(rs: &RecordSet, table: &MappingTable, passthrough: bool) -> OccurrenceIndex {
    let mut idx = OccurrenceIndex::default();
    for record in rs {
        let mut set = BTreeSet::new();
        for raw in &record.raw_keywords {
            let key = match_key(raw);
            if key.is_empty() {
                continue;
            }
            idx.token_count += 1;
            match table.get(&key) {
                Some(canonical) => {
                    set.insert(canonical.to_owned());
                }
                None => {
                    *idx.unmapped.entry(key.clone()).or_insert(0) += 1;
                    if passthrough {
                        set.insert(key);
                    }
                }
            }
        }
        idx.per_record.push((record.id.clone(), set));
    }
    idx.recount();
    idx
}

fn rank(items: impl Iterator<Item = (String, usize)>) -> Vec<(String, usize)> {
    let mut v: Vec<(String, usize)> = items.collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

/// Descriptors by occurrence count descending, ties by text; optionally
/// truncated to the first `n`.
pub fn descriptor_frequencies(idx: &OccurrenceIndex, n: Option<usize>) -> Vec<(String, usize)> {
    let mut ranked = rank(idx.totals.iter().map(|(d, &c)| (d.clone(), c)));
    if let Some(n) = n {
        ranked.truncate(n);
    }
    ranked
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoverageStats {
    pub min_occurrences: usize,
    pub descriptors_total: usize,
    pub occurrences_total: usize,
    pub descriptors_retained: usize,
    pub occurrences_retained: usize,
    pub percent_retained: u32,
    /// Set when there are no occurrences at all; the percentage is then 0.
    pub empty: bool,
}

/// How much of the descriptor universe survives a minimum-occurrence
/// threshold.
pub fn coverage_stats(idx: &OccurrenceIndex, min_occ: usize) -> CoverageStats {
    let occurrences_total = idx.total_occurrences();
    let retained = idx.totals.values().filter(|&&c| c >= min_occ);
    let (descriptors_retained, occurrences_retained) =
        retained.fold((0, 0), |(n, s), &c| (n + 1, s + c));
    CoverageStats {
        min_occurrences: min_occ,
        descriptors_total: idx.totals.len(),
        occurrences_total,
        descriptors_retained,
        occurrences_retained,
        percent_retained: percent_half_up(occurrences_retained as u64, occurrences_total as u64),
        empty: occurrences_total == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Record;

    fn record(id: &str, kws: &[&str]) -> Record {
        Record {
            id: id.into(),
            source: "BAD".into(),
            year: 2001,
            title: String::new(),
            class_a: None,
            class_b: None,
            raw_keywords: kws.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn match_key_folds_case_and_space() {
        assert_eq!(
            match_key("  Bibliotecas   Públicas "),
            "bibliotecas públicas"
        );
        // decomposed "u" + combining acute composes to the same key
        assert_eq!(
            match_key("Bibliotecas pu\u{301}blicas"),
            "bibliotecas públicas"
        );
    }

    #[test]
    fn mapping_lines() {
        let t = MappingTable::parse("# c\n\nBibliotecas públicas -> public libraries\n").unwrap();
        assert_eq!(t.get("bibliotecas públicas"), Some("public libraries"));
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn many_to_one_merge() {
        let t = MappingTable::parse(
            "TIC -> Information and Communication Technologies\nICT -> Information and Communication Technologies\n",
        )
        .unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.resolve("tic"), t.resolve("ICT"));
    }

    #[test]
    fn conflicting_keys_rejected() {
        let err = MappingTable::parse("x -> a\nX -> b\n").unwrap_err();
        assert!(matches!(
            err,
            VocabularyError::Conflict {
                first_line: 1,
                second_line: 2,
                ..
            }
        ));
        assert!(MappingTable::parse("x -> a\nX -> a\n").is_ok());
        assert!(matches!(
            MappingTable::parse("x -> \n").unwrap_err(),
            VocabularyError::EmptyCanonical { line: 1 }
        ));
        assert!(matches!(
            MappingTable::parse("no arrow\n").unwrap_err(),
            VocabularyError::MissingArrow { line: 1 }
        ));
    }

    #[test]
    fn merge_then_dedupe() {
        let t = MappingTable::parse("Bibliotecas públicas -> public libraries\n").unwrap();
        let rs = RecordSet::new(vec![record(
            "r",
            &["Bibliotecas públicas", "public libraries"],
        )]);
        let idx = normalize(&rs, &t, true);
        assert_eq!(
            idx.per_record[0].1,
            BTreeSet::from(["public libraries".to_string()])
        );
        assert_eq!(idx.totals["public libraries"], 1);
        assert_eq!(idx.token_count, 2);
    }

    #[test]
    fn empty_mapping_passthrough() {
        let rs = RecordSet::new(vec![record("r", &["Open  Access", "Portugal"])]);
        let idx = normalize(&rs, &MappingTable::new(), true);
        assert_eq!(
            idx.per_record[0].1,
            BTreeSet::from(["open access".to_string(), "portugal".to_string()])
        );
        let idx = normalize(&rs, &MappingTable::new(), false);
        assert!(idx.per_record[0].1.is_empty());
        assert_eq!(idx.unmapped.len(), 2);
    }

    #[test]
    fn ranking_and_ties() {
        let idx = OccurrenceIndex {
            totals: BTreeMap::from([("a".into(), 3), ("b".into(), 5)]),
            ..Default::default()
        };
        assert_eq!(
            descriptor_frequencies(&idx, None),
            vec![("b".into(), 5), ("a".into(), 3)]
        );
        let idx = OccurrenceIndex {
            totals: BTreeMap::from([("b".into(), 2), ("a".into(), 2)]),
            ..Default::default()
        };
        assert_eq!(descriptor_frequencies(&idx, Some(1)), vec![("a".into(), 2)]);
    }

    #[test]
    fn coverage_threshold_one_keeps_all() {
        let idx = OccurrenceIndex::from_sets([
            ("r1", BTreeSet::from(["a".to_string(), "b".to_string()])),
            ("r2", BTreeSet::from(["a".to_string()])),
        ]);
        let c = coverage_stats(&idx, 1);
        assert_eq!(
            (
                c.descriptors_retained,
                c.occurrences_retained,
                c.percent_retained
            ),
            (2, 3, 100)
        );
        let c = coverage_stats(&idx, 2);
        assert_eq!(
            (
                c.descriptors_retained,
                c.occurrences_retained,
                c.percent_retained
            ),
            (1, 2, 67)
        );
    }

    #[test]
    fn coverage_of_empty_index_is_flagged() {
        let c = coverage_stats(&OccurrenceIndex::default(), 5);
        assert!(c.empty);
        assert_eq!(c.percent_retained, 0);
    }
}
