//! Bibliographic records, controlled-vocabulary schemes and the
//! distribution reports built from them.
//!
//! A records file is a comma-separated table with the header
//! `id,source,year,title,class_a,class_b,keywords`. The `keywords` cell
//! holds the raw author keywords separated by `;`. Empty class cells mean
//! the record is unclassified in that scheme.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Column names of a records file, in order.
pub const RECORD_HEADER: [&str; 7] = [
    "id", "source", "year", "title", "class_a", "class_b", "keywords",
];

/// Row label used in reports for records without a class.
pub const UNCLASSIFIED: &str = "(unclassified)";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: expected header `{expected}`, found `{found}`")]
    Header {
        line: u64,
        expected: String,
        found: String,
    },
    #[error("line {line}, field `{field}`: {reason}")]
    Malformed {
        line: u64,
        field: &'static str,
        reason: String,
    },
    #[error("duplicate record id `{id}` on lines {first_line} and {second_line}")]
    DuplicateId {
        id: String,
        first_line: u64,
        second_line: u64,
    },
    #[error("line {line}: label `{label}` is not in scheme `{scheme}`")]
    UnknownLabel {
        line: u64,
        label: String,
        scheme: String,
    },
    #[error("line {line}: year {year} outside corpus range {range}")]
    YearOutOfRange {
        line: u64,
        year: i32,
        range: PeriodWindow,
    },
    #[error("scheme `{scheme}`: {reason}")]
    Scheme { scheme: String, reason: String },
    #[error("invalid period window: {0}")]
    Window(String),
    #[error("period windows {0} and {1} overlap")]
    OverlappingWindows(PeriodWindow, PeriodWindow),
}

/// A named, ordered set of class labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassScheme {
    name: String,
    labels: Vec<String>,
}

impl ClassScheme {
    pub fn new<I, S>(name: impl Into<String>, labels: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let name = name.into();
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(CorpusError::Scheme {
                scheme: name,
                reason: "no labels".into(),
            });
        }
        for (i, label) in labels.iter().enumerate() {
            if label.trim().is_empty() {
                return Err(CorpusError::Scheme {
                    scheme: name,
                    reason: "empty label".into(),
                });
            }
            if labels[..i].contains(label) {
                return Err(CorpusError::Scheme {
                    scheme: name,
                    reason: format!("label `{label}` listed twice"),
                });
            }
        }
        Ok(ClassScheme { name, labels })
    }

    /// Parses a scheme file body: one label per line, `#` starts a comment
    /// line, blank lines are skipped.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, CorpusError> {
        let labels = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        ClassScheme::new(name, labels)
    }

    pub fn load(name: impl Into<String>, path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_owned(),
            source,
        })?;
        ClassScheme::parse(name, &text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }
}

/// An inclusive range of calendar years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PeriodWindow {
    start: i32,
    end: i32,
}

impl PeriodWindow {
    pub fn new(start: i32, end: i32) -> Result<Self, CorpusError> {
        if start > end {
            return Err(CorpusError::Window(format!(
                "start {start} is after end {end}"
            )));
        }
        Ok(PeriodWindow { start, end })
    }

    pub fn start(&self) -> i32 {
        self.start
    }

    pub fn end(&self) -> i32 {
        self.end
    }

    pub fn contains(&self, year: i32) -> bool {
        self.start <= year && year <= self.end
    }

    pub fn overlaps(&self, other: &PeriodWindow) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl Default for PeriodWindow {
    /// The default corpus range, 2001 to 2012.
    fn default() -> Self {
        PeriodWindow {
            start: 2001,
            end: 2012,
        }
    }
}

impl fmt::Display for PeriodWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

impl FromStr for PeriodWindow {
    type Err = CorpusError;

    /// Accepts `2001-2006` or a single year `2004`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parse = |part: &str| {
            part.trim()
                .parse::<i32>()
                .map_err(|_| CorpusError::Window(format!("`{s}` is not a year range")))
        };
        match s.split_once('-') {
            Some((a, b)) => PeriodWindow::new(parse(a)?, parse(b)?),
            None => {
                let y = parse(s)?;
                PeriodWindow::new(y, y)
            }
        }
    }
}

/// One bibliographic item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub source: String,
    pub year: i32,
    pub title: String,
    pub class_a: Option<String>,
    pub class_b: Option<String>,
    pub raw_keywords: Vec<String>,
}

impl Record {
    /// Source tags compare case-insensitively (`WoS` matches `WOS`).
    pub fn has_source(&self, tag: &str) -> bool {
        self.source.eq_ignore_ascii_case(tag)
    }
}

/// A list of records plus a description of how it was derived.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordSet {
    pub records: Vec<Record>,
    pub provenance: Vec<String>,
    /// Records dropped by a period split because no window covered them.
    pub dropped: usize,
}

impl RecordSet {
    pub fn new(records: Vec<Record>) -> Self {
        RecordSet {
            records,
            provenance: Vec::new(),
            dropped: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Record> {
        self.records.iter()
    }

    pub fn get(&self, id: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.id == id)
    }
}

impl<'a> IntoIterator for &'a RecordSet {
    type Item = &'a Record;
    type IntoIter = std::slice::Iter<'a, Record>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

/// Options for [`parse_records`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub year_range: PeriodWindow,
}

pub fn parse_records(
    path: impl AsRef<Path>,
    schemes: (&ClassScheme, &ClassScheme),
    opts: ParseOptions,
) -> Result<RecordSet, CorpusError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut set = parse_records_from(&bytes[..], schemes, opts)?;
    set.provenance
        .insert(0, format!("parsed {}", path.display()));
    Ok(set)
}

/// Parses records from any reader. Row order is preserved.
pub fn parse_records_from<R: io::Read>(
    reader: R,
    (scheme_a, scheme_b): (&ClassScheme, &ClassScheme),
    opts: ParseOptions,
) -> Result<RecordSet, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = rdr.records();

    let expected = RECORD_HEADER.join(",");
    let header = match rows.next() {
        Some(row) => row.map_err(|e| csv_error(e, "header"))?,
        None => {
            return Err(CorpusError::Header {
                line: 1,
                expected,
                found: String::new(),
            })
        }
    };
    let found: Vec<&str> = header
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').trim())
        .collect();
    if found != RECORD_HEADER {
        return Err(CorpusError::Header {
            line: 1,
            expected,
            found: found.join(","),
        });
    }

    let mut records = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    for row in rows {
        let row = row.map_err(|e| csv_error(e, "row"))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != RECORD_HEADER.len() {
            return Err(CorpusError::Malformed {
                line,
                field: "row",
                reason: format!(
                    "expected {} fields, found {}",
                    RECORD_HEADER.len(),
                    row.len()
                ),
            });
        }
        let field = |i: usize| row.get(i).unwrap_or("").trim();

        let id = field(0);
        if id.is_empty() {
            return Err(malformed(line, "id", "empty"));
        }
        if let Some(&first_line) = seen.get(id) {
            return Err(CorpusError::DuplicateId {
                id: id.to_owned(),
                first_line,
                second_line: line,
            });
        }
        seen.insert(id.to_owned(), line);

        let source = field(1);
        if source.is_empty() {
            return Err(malformed(line, "source", "empty"));
        }
        let year: i32 = field(2)
            .parse()
            .map_err(|_| malformed(line, "year", &format!("`{}` is not an integer", field(2))))?;
        if !opts.year_range.contains(year) {
            return Err(CorpusError::YearOutOfRange {
                line,
                year,
                range: opts.year_range,
            });
        }

        let class = |value: &str, scheme: &ClassScheme| -> Result<Option<String>, CorpusError> {
            if value.is_empty() {
                return Ok(None);
            }
            if !scheme.contains(value) {
                return Err(CorpusError::UnknownLabel {
                    line,
                    label: value.to_owned(),
                    scheme: scheme.name().to_owned(),
                });
            }
            Ok(Some(value.to_owned()))
        };
        let class_a = class(field(4), scheme_a)?;
        let class_b = class(field(5), scheme_b)?;

        records.push(Record {
            id: id.to_owned(),
            source: source.to_owned(),
            year,
            title: field(3).to_owned(),
            class_a,
            class_b,
            raw_keywords: split_keywords(field(6)),
        });
    }
    Ok(RecordSet::new(records))
}

/// Splits a keywords cell on `;`, trimming entries and dropping empty ones.
pub fn split_keywords(cell: &str) -> Vec<String> {
    cell.split(';')
        .map(str::trim)
        .filter(|k| !k.is_empty())
        .map(str::to_owned)
        .collect()
}

fn malformed(line: u64, field: &'static str, reason: &str) -> CorpusError {
    CorpusError::Malformed {
        line,
        field,
        reason: reason.to_owned(),
    }
}

fn csv_error(err: csv::Error, field: &'static str) -> CorpusError {
    let line = err.position().map_or(0, |p| p.line());
    CorpusError::Malformed {
        line,
        field,
        reason: err.to_string(),
    }
}

/// Serializes records in the records-file format.
pub fn write_records_to<W: io::Write>(rs: &RecordSet, writer: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(RECORD_HEADER)?;
    for r in rs {
        let year = r.year.to_string();
        let keywords = r.raw_keywords.join("; ");
        w.write_record([
            r.id.as_str(),
            r.source.as_str(),
            year.as_str(),
            r.title.as_str(),
            r.class_a.as_deref().unwrap_or(""),
            r.class_b.as_deref().unwrap_or(""),
            keywords.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Keeps the records matching every given predicate.
pub fn filter_records(
    rs: &RecordSet,
    source: Option<&str>,
    years: Option<PeriodWindow>,
) -> RecordSet {
    let records = rs
        .iter()
        .filter(|r| source.is_none_or(|s| r.has_source(s)))
        .filter(|r| years.is_none_or(|w| w.contains(r.year)))
        .cloned()
        .collect();
    let mut provenance = rs.provenance.clone();
    if let Some(s) = source {
        provenance.push(format!("source = {s}"));
    }
    if let Some(w) = years {
        provenance.push(format!("years in {w}"));
    }
    RecordSet {
        records,
        provenance,
        dropped: rs.dropped,
    }
}

/// Splits records into one set per window. Records outside every window
/// are dropped; each output carries the dropped count.
pub fn split_periods(
    rs: &RecordSet,
    windows: &[PeriodWindow],
) -> Result<Vec<RecordSet>, CorpusError> {
    for (i, a) in windows.iter().enumerate() {
        if let Some(b) = windows[i + 1..].iter().find(|b| a.overlaps(b)) {
            return Err(CorpusError::OverlappingWindows(*a, *b));
        }
    }
    let dropped = rs
        .iter()
        .filter(|r| !windows.iter().any(|w| w.contains(r.year)))
        .count();
    Ok(windows
        .iter()
        .map(|w| {
            let mut part = filter_records(rs, None, Some(*w));
            part.dropped = dropped;
            part.provenance.push(format!(
                "split into {} windows, {dropped} records outside all",
                windows.len()
            ));
            part
        })
        .collect())
}

/// Round-half-up integer percentage of `part` in `whole`; 0 when `whole` is 0.
pub fn percent_half_up(part: u64, whole: u64) -> u32 {
    if whole == 0 {
        return 0;
    }
    ((200 * part + whole) / (2 * whole)) as u32
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistributionRow {
    pub label: String,
    pub count: usize,
    pub percent: u32,
}

/// Per-label record counts for one scheme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Distribution {
    pub scheme: String,
    pub rows: Vec<DistributionRow>,
    pub total: usize,
}

impl Distribution {
    pub fn count(&self, label: &str) -> Option<usize> {
        self.rows.iter().find(|r| r.label == label).map(|r| r.count)
    }
}

fn class_of(r: &Record, scheme_a: bool) -> Option<&str> {
    if scheme_a {
        r.class_a.as_deref()
    } else {
        r.class_b.as_deref()
    }
}

/// Which record column a scheme classifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeSlot {
    A,
    B,
}

/// Counts records per label in scheme order. Records with no class in
/// `slot` are counted under [`UNCLASSIFIED`], a row that only appears when
/// nonzero.
pub fn class_distribution(rs: &RecordSet, scheme: &ClassScheme, slot: SchemeSlot) -> Distribution {
    let use_a = slot == SchemeSlot::A;
    let mut counts = vec![0usize; scheme.labels().len()];
    let mut unclassified = 0;
    for r in rs {
        match class_of(r, use_a).and_then(|c| scheme.position(c)) {
            Some(i) => counts[i] += 1,
            None => unclassified += 1,
        }
    }
    let total = rs.len();
    let mut rows: Vec<DistributionRow> = scheme
        .labels()
        .iter()
        .zip(counts)
        .map(|(label, count)| DistributionRow {
            label: label.clone(),
            count,
            percent: percent_half_up(count as u64, total as u64),
        })
        .collect();
    if unclassified > 0 {
        rows.push(DistributionRow {
            label: UNCLASSIFIED.to_owned(),
            count: unclassified,
            percent: percent_half_up(unclassified as u64, total as u64),
        });
    }
    Distribution {
        scheme: scheme.name().to_owned(),
        rows,
        total,
    }
}

/// Contingency table of scheme A (rows) against scheme B (columns).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossTab {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl CrossTab {
    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        (0..self.col_labels.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }
}

/// Cross-tabulates the two class columns. An [`UNCLASSIFIED`] row or
/// column is appended when some record lacks that class, so marginals
/// always match [`class_distribution`].
pub fn class_crosstab(rs: &RecordSet, a: &ClassScheme, b: &ClassScheme) -> CrossTab {
    let index = |scheme: &ClassScheme, class: Option<&str>| {
        class
            .and_then(|c| scheme.position(c))
            .unwrap_or(scheme.labels().len())
    };
    let mut counts = vec![vec![0usize; b.labels().len() + 1]; a.labels().len() + 1];
    for r in rs {
        counts[index(a, r.class_a.as_deref())][index(b, r.class_b.as_deref())] += 1;
    }

    let mut row_labels = a.labels().to_vec();
    let mut col_labels = b.labels().to_vec();
    if counts.last().is_some_and(|row| row.iter().any(|&c| c > 0)) {
        row_labels.push(UNCLASSIFIED.to_owned());
    } else {
        counts.pop();
    }
    if counts.iter().any(|row| row[b.labels().len()] > 0) {
        col_labels.push(UNCLASSIFIED.to_owned());
    } else {
        for row in &mut counts {
            row.pop();
        }
    }
    CrossTab {
        row_labels,
        col_labels,
        counts,
    }
}

/// One distribution per named group (a period window or a source), sharing
/// the label rows of `scheme`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupedDistribution {
    pub groups: Vec<String>,
    pub columns: Vec<Distribution>,
}

impl GroupedDistribution {
    /// Label rows across all groups: scheme labels plus [`UNCLASSIFIED`]
    /// if any group has it.
    pub fn labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = Vec::new();
        for d in &self.columns {
            for r in &d.rows {
                if !labels.contains(&r.label) {
                    labels.push(r.label.clone());
                }
            }
        }
        labels
    }
}

pub fn grouped_distribution(
    groups: &[(String, RecordSet)],
    scheme: &ClassScheme,
    slot: SchemeSlot,
) -> GroupedDistribution {
    GroupedDistribution {
        groups: groups.iter().map(|(name, _)| name.clone()).collect(),
        columns: groups
            .iter()
            .map(|(_, rs)| class_distribution(rs, scheme, slot))
            .collect(),
    }
}

/// Distinct source tags in first-seen order.
pub fn sources(rs: &RecordSet) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in rs {
        if !out.iter().any(|s| s.eq_ignore_ascii_case(&r.source)) {
            out.push(r.source.clone());
        }
    }
    out
}
