//! End-to-end runs: configuration, the individual stages, and the run
//! manifest.
//!
//! Every stage reads its inputs from the previous stages' files in the
//! output directory and writes its own files there, so a full run and a
//! stage-by-stage run produce the same bytes.
//!
//! | stage     | reads                               | writes |
//! |-----------|-------------------------------------|--------|
//! | ingest    | records, schemes                    | `records.csv` |
//! | report    | `records.csv`, schemes              | `distribution_*.csv`, `crosstab.csv` |
//! | normalize | `records.csv`, mapping              | `descriptors.csv`, `frequencies.csv`, `unmapped.csv`, `coverage.csv` |
//! | net       | `descriptors.csv`                   | `vertices.csv`, `edges.csv` |
//! | cluster   | `vertices.csv`, `edges.csv`         | `clusters.csv`, `cluster_summary.csv` |
//! | layout    | `vertices.csv`, `edges.csv`         | `layout.csv` |
//! | export    | network, `clusters.csv`, `layout.csv` | `network.net`, `network.clu`, `map.svg` |
//! | compare   | `records.csv`, `descriptors.csv`    | `compare.csv` |

use std::collections::BTreeMap;
use std::error::Error as StdError;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::conet::{build_network, threshold_filter, CoNetwork};
use crate::corpus::{
    class_crosstab, class_distribution, filter_records, grouped_distribution, parse_records,
    sources, write_records_to, ClassScheme, ParseOptions, PeriodWindow, RecordSet, SchemeSlot,
};
use crate::exportio::tables::{self, save};
use crate::exportio::{
    compare_networks, write_label_map_svg, write_pajek_clu, write_pajek_net, SvgOptions,
};
use crate::mapping::{
    cluster_summary, detect_clusters, kamada_kawai, ClusterOptions, ClusterWeighting, EdgeLength,
    LayoutParams,
};
use crate::vocabulary::{
    coverage_stats, descriptor_frequencies, load_mapping, normalize as normalize_keywords,
};

/// Version recorded in manifests and printed by `--version`.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const RECORDS_FILE: &str = "records.csv";
pub const DESCRIPTORS_FILE: &str = "descriptors.csv";
pub const VERTICES_FILE: &str = "vertices.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const CLUSTERS_FILE: &str = "clusters.csv";
pub const LAYOUT_FILE: &str = "layout.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Broad class of a failure, mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad configuration or input files (exit code 1).
    Input,
    /// A stage could not complete (exit code 2).
    Pipeline,
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: &'static str,
    pub kind: ErrorKind,
    source: Box<dyn StdError + Send + Sync>,
}

impl PipelineError {
    fn new(
        stage: &'static str,
        kind: ErrorKind,
        source: impl Into<Box<dyn StdError + Send + Sync>>,
    ) -> Self {
        PipelineError {
            stage,
            kind,
            source: source.into(),
        }
    }

    fn input(stage: &'static str, source: impl Into<Box<dyn StdError + Send + Sync>>) -> Self {
        Self::new(stage, ErrorKind::Input, source)
    }

    fn failed(stage: &'static str, source: impl Into<Box<dyn StdError + Send + Sync>>) -> Self {
        Self::new(stage, ErrorKind::Pipeline, source)
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Input => 1,
            ErrorKind::Pipeline => 2,
        }
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage: {}", self.stage, self.source)
    }
}

impl StdError for PipelineError {
    fn source(&self) -> Option<&(dyn StdError + 'static)> {
        Some(self.source.as_ref())
    }
}

/// Everything a run needs. Build with [`RunConfig::new`], a config file
/// ([`RunConfig::from_file`]) and [`RunConfig::set`] overrides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub records: PathBuf,
    pub mapping: PathBuf,
    pub scheme_a: PathBuf,
    pub scheme_b: PathBuf,
    pub out_dir: PathBuf,
    pub min_occurrences: u32,
    /// Threshold for the per-side networks of a comparison; defaults to
    /// `min_occurrences`.
    pub compare_min_occurrences: Option<u32>,
    pub windows: Vec<PeriodWindow>,
    pub source: Option<String>,
    pub year_range: PeriodWindow,
    pub passthrough: bool,
    pub cluster: ClusterOptions,
    pub cluster_labels: Vec<String>,
    pub layout: LayoutParams,
    pub svg: SvgOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            records: PathBuf::new(),
            mapping: PathBuf::new(),
            scheme_a: PathBuf::new(),
            scheme_b: PathBuf::new(),
            out_dir: PathBuf::from("out"),
            min_occurrences: 5,
            compare_min_occurrences: None,
            windows: Vec::new(),
            source: None,
            year_range: PeriodWindow::default(),
            passthrough: true,
            cluster: ClusterOptions::default(),
            cluster_labels: Vec::new(),
            layout: LayoutParams::default(),
            svg: SvgOptions::default(),
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl StdError for ConfigError {}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(ConfigError(format!("invalid value `{value}` for `{key}`"))),
    }
}

impl RunConfig {
    pub fn new(
        records: impl Into<PathBuf>,
        mapping: impl Into<PathBuf>,
        scheme_a: impl Into<PathBuf>,
        scheme_b: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        RunConfig {
            records: records.into(),
            mapping: mapping.into(),
            scheme_a: scheme_a.into(),
            scheme_b: scheme_b.into(),
            out_dir: out_dir.into(),
            ..Default::default()
        }
    }

    /// Reads `key = value` lines (`#` comments). Relative paths are taken
    /// relative to the config file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text, base)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str, base: &Path) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!("config line {}: expected `key = value`", i + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let value = if is_path_key(key) && Path::new(value).is_relative() {
                base.join(value).to_string_lossy().into_owned()
            } else {
                value.to_owned()
            };
            self.set(key, &value)
                .map_err(|e| ConfigError(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Sets one option by its config-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "records" => self.records = value.into(),
            "mapping" => self.mapping = value.into(),
            "scheme_a" => self.scheme_a = value.into(),
            "scheme_b" => self.scheme_b = value.into(),
            "out_dir" => self.out_dir = value.into(),
            "min_occurrences" => self.min_occurrences = parse_value(key, value)?,
            "compare_min_occurrences" => {
                self.compare_min_occurrences = if value.is_empty() || value == "none" {
                    None
                } else {
                    Some(parse_value(key, value)?)
                }
            }
            "windows" => {
                self.windows = value
                    .split(',')
                    .map(str::trim)
                    .filter(|w| !w.is_empty())
                    .map(|w| parse_value(key, w))
                    .collect::<Result<_, _>>()?
            }
            "source" => {
                self.source = (!value.is_empty() && value != "all").then(|| value.to_owned())
            }
            "year_range" => self.year_range = parse_value(key, value)?,
            "passthrough" => self.passthrough = parse_bool(key, value)?,
            "resolution" => self.cluster.resolution = parse_value(key, value)?,
            "cluster_weighting" => {
                self.cluster.weighting = match value {
                    "similarity" | "association" => ClusterWeighting::Similarity,
                    "raw" => ClusterWeighting::Raw,
                    _ => return Err(ConfigError(format!("invalid value `{value}` for `{key}`"))),
                }
            }
            "cluster_labels" => {
                self.cluster_labels = value
                    .split('|')
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::to_owned)
                    .collect()
            }
            "layout.edge_scale" => self.layout.ideal_edge_scale = parse_value(key, value)?,
            "layout.max_iterations" => self.layout.max_iterations = parse_value(key, value)?,
            "layout.tolerance" => self.layout.gradient_tolerance = parse_value(key, value)?,
            "layout.edge_length" => {
                self.layout.edge_length = match value {
                    "inverse" | "inverse_weight" => EdgeLength::InverseWeight,
                    "unit" | "hop" => EdgeLength::Unit,
                    _ => return Err(ConfigError(format!("invalid value `{value}` for `{key}`"))),
                }
            }
            "layout.seed" => {
                self.layout.perturbation_seed = if value.is_empty() || value == "none" {
                    None
                } else {
                    Some(parse_value(key, value)?)
                }
            }
            "svg.size" => self.svg.size = parse_value(key, value)?,
            "svg.margin" => self.svg.margin = parse_value(key, value)?,
            "svg.min_radius" => self.svg.min_radius = parse_value(key, value)?,
            "svg.max_radius" => self.svg.max_radius = parse_value(key, value)?,
            "svg.edge_floor" => self.svg.edge_floor = parse_value(key, value)?,
            _ => return Err(ConfigError(format!("unknown option `{key}`"))),
        }
        Ok(())
    }

    /// Checks option ranges; input files are checked by the stages that
    /// read them.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.min_occurrences < 1 || self.compare_min_occurrences == Some(0) {
            return Err(ConfigError("min_occurrences must be at least 1".into()));
        }
        if !(self.cluster.resolution > 0.0 && self.cluster.resolution.is_finite()) {
            return Err(ConfigError("resolution must be positive".into()));
        }
        if self.layout.gradient_tolerance.is_nan()
            || self.layout.gradient_tolerance <= 0.0
            || self.layout.max_iterations < 1
        {
            return Err(ConfigError(
                "layout tolerance must be positive and max_iterations at least 1".into(),
            ));
        }
        if !self.layout.ideal_edge_scale.is_finite() || self.layout.ideal_edge_scale <= 0.0 {
            return Err(ConfigError("layout.edge_scale must be positive".into()));
        }
        if self.svg.size <= 2.0 * self.svg.margin {
            return Err(ConfigError("svg.size must exceed twice the margin".into()));
        }
        for (i, a) in self.windows.iter().enumerate() {
            if let Some(b) = self.windows[i + 1..].iter().find(|b| a.overlaps(b)) {
                return Err(ConfigError(format!("windows {a} and {b} overlap")));
            }
        }
        Ok(())
    }

    /// Option values as `key = value` pairs, in config-file syntax.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let path = |p: &Path| p.display().to_string();
        let windows: Vec<String> = self.windows.iter().map(ToString::to_string).collect();
        let weighting = match self.cluster.weighting {
            ClusterWeighting::Similarity => "similarity",
            ClusterWeighting::Raw => "raw",
        };
        let edge_length = match self.layout.edge_length {
            EdgeLength::InverseWeight => "inverse",
            EdgeLength::Unit => "unit",
        };
        [
            ("records", path(&self.records)),
            ("mapping", path(&self.mapping)),
            ("scheme_a", path(&self.scheme_a)),
            ("scheme_b", path(&self.scheme_b)),
            ("out_dir", path(&self.out_dir)),
            ("min_occurrences", self.min_occurrences.to_string()),
            (
                "compare_min_occurrences",
                self.compare_min_occurrences
                    .map_or_else(|| "none".into(), |v| v.to_string()),
            ),
            ("windows", windows.join(", ")),
            (
                "source",
                self.source.clone().unwrap_or_else(|| "all".into()),
            ),
            ("year_range", self.year_range.to_string()),
            ("passthrough", self.passthrough.to_string()),
            ("resolution", self.cluster.resolution.to_string()),
            ("cluster_weighting", weighting.into()),
            ("cluster_labels", self.cluster_labels.join(" | ")),
            (
                "layout.edge_scale",
                self.layout.ideal_edge_scale.to_string(),
            ),
            (
                "layout.max_iterations",
                self.layout.max_iterations.to_string(),
            ),
            (
                "layout.tolerance",
                self.layout.gradient_tolerance.to_string(),
            ),
            ("layout.edge_length", edge_length.into()),
            (
                "layout.seed",
                self.layout
                    .perturbation_seed
                    .map_or_else(|| "none".into(), |s| s.to_string()),
            ),
            ("svg.size", self.svg.size.to_string()),
            ("svg.margin", self.svg.margin.to_string()),
            ("svg.min_radius", self.svg.min_radius.to_string()),
            ("svg.max_radius", self.svg.max_radius.to_string()),
            ("svg.edge_floor", self.svg.edge_floor.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .collect()
    }

    fn out(&self, file: &str) -> PathBuf {
        self.out_dir.join(file)
    }
}

fn is_path_key(key: &str) -> bool {
    matches!(
        key,
        "records" | "mapping" | "scheme_a" | "scheme_b" | "out_dir"
    )
}

/// Counts and files produced by one stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: String,
    pub counts: BTreeMap<String, u64>,
    pub notes: BTreeMap<String, String>,
    pub files: Vec<String>,
}

impl StageReport {
    fn new(stage: &str) -> Self {
        StageReport {
            stage: stage.to_owned(),
            ..Default::default()
        }
    }

    fn count(&mut self, key: &str, value: usize) {
        self.counts.insert(key.to_owned(), value as u64);
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.insert(key.to_owned(), value.to_string());
    }

    fn write(
        &mut self,
        stage: &'static str,
        cfg: &RunConfig,
        file: &str,
        text: &str,
    ) -> Result<(), PipelineError> {
        save(cfg.out(file), text).map_err(|e| PipelineError::failed(stage, e))?;
        self.files.push(file.to_owned());
        Ok(())
    }
}

fn ensure_out_dir(stage: &'static str, cfg: &RunConfig) -> Result<(), PipelineError> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| {
        PipelineError::input(
            stage,
            ConfigError(format!(
                "cannot create output directory {}: {e}",
                cfg.out_dir.display()
            )),
        )
    })
}

/// Fails with a message naming `file` if an earlier stage has not
/// produced it.
fn require(
    stage: &'static str,
    cfg: &RunConfig,
    file: &str,
    producer: &str,
) -> Result<PathBuf, PipelineError> {
    let path = cfg.out(file);
    if path.is_file() {
        Ok(path)
    } else {
        Err(PipelineError::failed(
            stage,
            ConfigError(format!(
                "missing {}; run the `{producer}` stage first",
                path.display()
            )),
        ))
    }
}

fn load_schemes(
    stage: &'static str,
    cfg: &RunConfig,
) -> Result<(ClassScheme, ClassScheme), PipelineError> {
    let a = ClassScheme::load("A", &cfg.scheme_a).map_err(|e| PipelineError::input(stage, e))?;
    let b = ClassScheme::load("B", &cfg.scheme_b).map_err(|e| PipelineError::input(stage, e))?;
    Ok((a, b))
}

/// Reads `records.csv` from the output directory.
fn ingested(
    stage: &'static str,
    cfg: &RunConfig,
) -> Result<(RecordSet, ClassScheme, ClassScheme), PipelineError> {
    let path = require(stage, cfg, RECORDS_FILE, "ingest")?;
    let (a, b) = load_schemes(stage, cfg)?;
    let opts = ParseOptions {
        year_range: cfg.year_range,
    };
    let rs = parse_records(path, (&a, &b), opts).map_err(|e| PipelineError::failed(stage, e))?;
    Ok((rs, a, b))
}

/// Parses and validates the records file, applies the source filter and
/// writes the canonical `records.csv`.
pub fn ingest(cfg: &RunConfig) -> Result<StageReport, PipelineError> {
    const STAGE: &str = "ingest";
    ensure_out_dir(STAGE, cfg)?;
    let (a, b) = load_schemes(STAGE, cfg)?;
    let opts = ParseOptions {
        year_range: cfg.year_range,
    };
    let parsed =
        parse_records(&cfg.records, (&a, &b), opts).map_err(|e| PipelineError::input(STAGE, e))?;
    let rs = filter_records(&parsed, cfg.source.as_deref(), None);
    if rs.is_empty() {
        return Err(PipelineError::input(
            STAGE,
            ConfigError(format!(
                "no records to analyse in {}",
                cfg.records.display()
            )),
        ));
    }

    let mut report = StageReport::new(STAGE);
    report.count("records_parsed", parsed.len());
    report.count("records", rs.len());
    for source in sources(&rs) {
        let n = rs.iter().filter(|r| r.has_source(&source)).count();
        report.count(&format!("records_{source}"), n);
    }
    let mut text = Vec::new();
    write_records_to(&rs, &mut text).map_err(|e| PipelineError::failed(STAGE, e))?;
    report.write(
        STAGE,
        cfg,
        RECORDS_FILE,
        std::str::from_utf8(&text).expect("records are UTF-8"),
    )?;
    Ok(report)
}

/// Grouping of a distribution report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    None,
    Period,
    Source,
}

impl FromStr for GroupBy {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" | "all" => Ok(GroupBy::None),
            "period" | "window" => Ok(GroupBy::Period),
            "source" => Ok(GroupBy::Source),
            _ => Err(ConfigError(format!(
                "unknown grouping `{s}` (none, period, source)"
            ))),
        }
    }
}

/// Builds one distribution table; returns its file name and CSV text.
pub fn report_table(
    cfg: &RunConfig,
    slot: SchemeSlot,
    by: GroupBy,
) -> Result<(String, String), PipelineError> {
    const STAGE: &str = "report";
    let (rs, a, b) = ingested(STAGE, cfg)?;
    Ok(distribution_table(
        cfg,
        &rs,
        if slot == SchemeSlot::A { &a } else { &b },
        slot,
        by,
    ))
}

fn distribution_table(
    cfg: &RunConfig,
    rs: &RecordSet,
    scheme: &ClassScheme,
    slot: SchemeSlot,
    by: GroupBy,
) -> (String, String) {
    let suffix = if slot == SchemeSlot::A { "a" } else { "b" };
    match by {
        GroupBy::None => (
            format!("distribution_{suffix}.csv"),
            tables::distribution_csv(&class_distribution(rs, scheme, slot)),
        ),
        GroupBy::Period => {
            let groups: Vec<(String, RecordSet)> = cfg
                .windows
                .iter()
                .map(|w| (w.to_string(), filter_records(rs, None, Some(*w))))
                .collect();
            (
                format!("distribution_{suffix}_by_period.csv"),
                tables::grouped_distribution_csv(&grouped_distribution(&groups, scheme, slot)),
            )
        }
        GroupBy::Source => {
            let groups: Vec<(String, RecordSet)> = sources(rs)
                .into_iter()
                .map(|s| {
                    let part = filter_records(rs, Some(&s), None);
                    (s, part)
                })
                .collect();
            (
                format!("distribution_{suffix}_by_source.csv"),
                tables::grouped_distribution_csv(&grouped_distribution(&groups, scheme, slot)),
            )
        }
    }
}

/// Class distributions for both schemes (overall, by period when windows
/// are configured, and by source) and the scheme cross-tab.
pub fn report(cfg: &RunConfig) -> Result<StageReport, PipelineError> {
    const STAGE: &str = "report";
    let (rs, a, b) = ingested(STAGE, cfg)?;
    let mut report = StageReport::new(STAGE);
    let mut groupings = vec![GroupBy::None];
    if !cfg.windows.is_empty() {
        groupings.push(GroupBy::Period);
    }
    groupings.push(GroupBy::Source);
    for (scheme, slot) in [(&a, SchemeSlot::A), (&b, SchemeSlot::B)] {
        for &by in &groupings {
            let (file, text) = distribution_table(cfg, &rs, scheme, slot, by);
            report.write(STAGE, cfg, &file, &text)?;
        }
    }
    report.write(
        STAGE,
        cfg,
        "crosstab.csv",
        &tables::crosstab_csv(&class_crosstab(&rs, &a, &b)),
    )?;
    report.count("records", rs.len());
    Ok(report)
}

/// Canonicalizes keywords and writes descriptor sets and statistics.
pub fn normalize(cfg: &RunConfig) -> Result<StageReport, PipelineError> {
    const STAGE: &str = "normalize";
    let (rs, _, _) = ingested(STAGE, cfg)?;
    let table = load_mapping(&cfg.mapping).map_err(|e| PipelineError::input(STAGE, e))?;
    let idx = normalize_keywords(&rs, &table, cfg.passthrough);
    let stats = coverage_stats(&idx, cfg.min_occurrences as usize);

    let mut report = StageReport::new(STAGE);
    report.write(
        STAGE,
        cfg,
        DESCRIPTORS_FILE,
        &tables::descriptor_sets_csv(&idx),
    )?;
    report.write(
        STAGE,
        cfg,
        "frequencies.csv",
        &tables::frequencies_csv(&descriptor_frequencies(&idx, None)),
    )?;
    report.write(STAGE, cfg, "unmapped.csv", &tables::unmapped_csv(&idx))?;
    report.write(
        STAGE,
        cfg,
        "coverage.csv",
        &tables::coverage_csv(&stats, idx.token_count),
    )?;
    report.count("keyword_tokens", idx.token_count);
    report.count("unmapped_keywords", idx.unmapped.len());
    report.count("descriptors_total", stats.descriptors_total);
    report.count("occurrences_total", stats.occurrences_total);
    report.count("descriptors_retained", stats.descriptors_retained);
    report.count("occurrences_retained", stats.occurrences_retained);
    report.count("percent_retained", stats.percent_retained as usize);
    Ok(report)
}

/// Builds the co-occurrence network and keeps descriptors with at least
/// `min_occurrences` occurrences.
pub fn net(cfg: &RunConfig) -> Result<StageReport, PipelineError> {
    const STAGE: &str = "net";
    let path = require(STAGE, cfg, DESCRIPTORS_FILE, "normalize")?;
    let idx =
        tables::read_descriptor_sets_csv(path).map_err(|e| PipelineError::failed(STAGE, e))?;
    let full = build_network(&idx);
    let kept = threshold_filter(&full, cfg.min_occurrences);

    let mut report = StageReport::new(STAGE);
    report.write(STAGE, cfg, VERTICES_FILE, &tables::vertices_csv(&kept))?;
    report.write(STAGE, cfg, EDGES_FILE, &tables::edges_csv(&kept))?;
    report.count("vertices_all", full.vertex_count());
    report.count("edges_all", full.edge_count());
    report.count("vertices", kept.vertex_count());
    report.count("edges", kept.edge_count());
    report.count("components", kept.components().len());
    Ok(report)
}

fn thresholded(stage: &'static str, cfg: &RunConfig) -> Result<CoNetwork, PipelineError> {
    let vertices = require(stage, cfg, VERTICES_FILE, "net")?;
    let edges = require(stage, cfg, EDGES_FILE, "net")?;
    tables::read_network_csv(vertices, edges).map_err(|e| PipelineError::failed(stage, e))
}

pub fn cluster(cfg: &RunConfig) -> Result<StageReport, PipelineError> {
    const STAGE: &str = "cluster";
    let network = thresholded(STAGE, cfg)?;
    let partition =
        detect_clusters(&network, cfg.cluster).map_err(|e| PipelineError::failed(STAGE, e))?;
    let summary = cluster_summary(&partition, &network, &cfg.cluster_labels);

    let mut report = StageReport::new(STAGE);
    report.write(
        STAGE,
        cfg,
        CLUSTERS_FILE,
        &tables::clusters_csv(&network, &partition),
    )?;
    report.write(
        STAGE,
        cfg,
        "cluster_summary.csv",
        &tables::cluster_summary_csv(&summary),
    )?;
    report.count("clusters", partition.cluster_count());
    report.note("modularity", format!("{:.6}", partition.modularity));
    Ok(report)
}

pub fn layout(cfg: &RunConfig) -> Result<StageReport, PipelineError> {
    const STAGE: &str = "layout";
    let network = thresholded(STAGE, cfg)?;
    let map = kamada_kawai(&network, &cfg.layout);

    let mut report = StageReport::new(STAGE);
    report.write(STAGE, cfg, LAYOUT_FILE, &tables::layout_csv(&network, &map))?;
    report.count("iterations", map.iterations);
    report.note("converged", map.converged);
    report.note("final_stress", format!("{:.6}", map.final_stress));
    Ok(report)
}

pub fn export(cfg: &RunConfig) -> Result<StageReport, PipelineError> {
    const STAGE: &str = "export";
    let network = thresholded(STAGE, cfg)?;
    let partition =
        tables::read_clusters_csv(require(STAGE, cfg, CLUSTERS_FILE, "cluster")?, &network)
            .map_err(|e| PipelineError::failed(STAGE, e))?;
    let map = tables::read_layout_csv(require(STAGE, cfg, LAYOUT_FILE, "layout")?, &network)
        .map_err(|e| PipelineError::failed(STAGE, e))?;

    let fail = |e| PipelineError::failed(STAGE, e);
    write_pajek_net(&network, Some(&map), cfg.out("network.net")).map_err(fail)?;
    write_pajek_clu(&partition, cfg.out("network.clu")).map_err(fail)?;
    write_label_map_svg(&network, &map, &partition, &cfg.svg, cfg.out("map.svg")).map_err(fail)?;

    let mut report = StageReport::new(STAGE);
    report.files = vec!["network.net".into(), "network.clu".into(), "map.svg".into()];
    let drawn = network
        .edges()
        .iter()
        .filter(|e| e.weight >= cfg.svg.edge_floor)
        .count();
    report.count("svg_circles", network.vertex_count());
    report.count("svg_lines", drawn);
    Ok(report)
}

/// One side of a comparison: a source tag, a period, or both, written as
/// dot-separated parts such as `bad.window1`, `wos`, `2007-2012` or
/// `bad.2001-2006`. `windowN` refers to the N-th configured window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideSpec {
    pub label: String,
    pub source: Option<String>,
    pub years: Option<PeriodWindow>,
}

impl SideSpec {
    pub fn parse(spec: &str, windows: &[PeriodWindow]) -> Result<Self, ConfigError> {
        let mut side = SideSpec {
            label: spec.to_owned(),
            source: None,
            years: None,
        };
        for part in spec.split('.').map(str::trim).filter(|p| !p.is_empty()) {
            let lower = part.to_ascii_lowercase();
            if let Some(n) = lower.strip_prefix("window") {
                let k: usize = n
                    .parse()
                    .map_err(|_| ConfigError(format!("bad window reference `{part}`")))?;
                let w = k
                    .checked_sub(1)
                    .and_then(|i| windows.get(i))
                    .ok_or_else(|| {
                        ConfigError(format!(
                            "`{part}`: only {} windows configured",
                            windows.len()
                        ))
                    })?;
                side.years = Some(*w);
            } else if part.starts_with(|c: char| c.is_ascii_digit()) {
                side.years = Some(part.parse().map_err(|e| ConfigError(format!("{e}")))?);
            } else if lower != "all" {
                side.source = Some(part.to_owned());
            }
        }
        Ok(side)
    }
}

fn side_network(
    rs: &RecordSet,
    idx: &crate::vocabulary::OccurrenceIndex,
    side: &SideSpec,
    min_occ: u32,
) -> CoNetwork {
    let subset = filter_records(rs, side.source.as_deref(), side.years);
    let ids: std::collections::HashSet<&str> = subset.iter().map(|r| r.id.as_str()).collect();
    let part = crate::vocabulary::OccurrenceIndex::from_sets(
        idx.per_record
            .iter()
            .filter(|(id, _)| ids.contains(id.as_str()))
            .map(|(id, set)| (id.clone(), set.clone())),
    );
    threshold_filter(&build_network(&part), min_occ)
}

/// Compares the thresholded networks of two record subsets.
pub fn compare(cfg: &RunConfig, a: &SideSpec, b: &SideSpec) -> Result<StageReport, PipelineError> {
    const STAGE: &str = "compare";
    let (rs, _, _) = ingested(STAGE, cfg)?;
    let idx = tables::read_descriptor_sets_csv(require(STAGE, cfg, DESCRIPTORS_FILE, "normalize")?)
        .map_err(|e| PipelineError::failed(STAGE, e))?;
    let min_occ = cfg.compare_min_occurrences.unwrap_or(cfg.min_occurrences);
    let net_a = side_network(&rs, &idx, a, min_occ);
    let net_b = side_network(&rs, &idx, b, min_occ);
    let cmp = compare_networks(&net_a, &net_b, (&a.label, &b.label));

    let mut report = StageReport::new(STAGE);
    report.write(STAGE, cfg, "compare.csv", &tables::compare_csv(&cmp))?;
    report.count("appeared", cmp.appeared.len());
    report.count("vanished", cmp.vanished.len());
    report.count("persisted", cmp.persisted.len());
    report.note("sides", format!("{} vs {}", a.label, b.label));
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Record of a run: what went in, what came out, and when.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<InputDigest>,
    pub stages: Vec<StageReport>,
    pub started_at: String,
    pub finished_at: String,
}

impl RunManifest {
    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.stage == name)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn digest(role: &str, path: &Path) -> Result<InputDigest, PipelineError> {
    let bytes = fs::read(path).map_err(|e| {
        PipelineError::input(
            "ingest",
            ConfigError(format!("cannot read {} file {}: {e}", role, path.display())),
        )
    })?;
    Ok(InputDigest {
        role: role.to_owned(),
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Runs every stage in order and writes `manifest.json`. The compare stage
/// runs when exactly two or more windows are configured, comparing the
/// first two.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunManifest, PipelineError> {
    let started_at = now();
    cfg.validate()
        .map_err(|e| PipelineError::input("config", e))?;
    let inputs = vec![
        digest("records", &cfg.records)?,
        digest("mapping", &cfg.mapping)?,
        digest("scheme_a", &cfg.scheme_a)?,
        digest("scheme_b", &cfg.scheme_b)?,
    ];

    let mut stages = vec![
        ingest(cfg)?,
        report(cfg)?,
        normalize(cfg)?,
        net(cfg)?,
        cluster(cfg)?,
        layout(cfg)?,
        export(cfg)?,
    ];
    if cfg.windows.len() >= 2 {
        let side = |k: usize| SideSpec {
            label: cfg.windows[k].to_string(),
            source: None,
            years: Some(cfg.windows[k]),
        };
        stages.push(compare(cfg, &side(0), &side(1))?);
    }

    let manifest = RunManifest {
        tool: "coword".into(),
        version: VERSION.into(),
        config: cfg.echo(),
        inputs,
        stages,
        started_at,
        finished_at: now(),
    };
    save(cfg.out(MANIFEST_FILE), &manifest.to_json())
        .map_err(|e| PipelineError::failed("manifest", e))?;
    Ok(manifest)
}
