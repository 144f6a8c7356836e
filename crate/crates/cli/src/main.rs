use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coword::corpus::SchemeSlot;
use coword::pipeline::{self, GroupBy, PipelineError, RunConfig, SideSpec, StageReport};

/// Co-word analysis of a bibliographic corpus: class distributions,
/// keyword co-occurrence networks, clusters and label maps.
///
/// Options are read from the config file (`key = value` lines), then
/// overridden by flags. Every subcommand runs one stage and reads the
/// earlier stages' files from the output directory.
#[derive(Parser, Debug)]
#[command(name = "coword", version = pipeline::VERSION)]
struct Cli {
    #[command(flatten)]
    opts: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Overrides {
    /// Config file with `key = value` lines; relative paths resolve against its directory.
    #[arg(short, long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Records CSV.
    #[arg(long, global = true, value_name = "FILE")]
    records: Option<PathBuf>,

    /// Keyword mapping table (`raw -> canonical` lines).
    #[arg(long, global = true, value_name = "FILE")]
    mapping: Option<PathBuf>,

    /// Label list for classification scheme A.
    #[arg(long, global = true, value_name = "FILE")]
    scheme_a: Option<PathBuf>,

    /// Label list for classification scheme B.
    #[arg(long, global = true, value_name = "FILE")]
    scheme_b: Option<PathBuf>,

    /// Directory for all stage outputs.
    #[arg(short, long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// Minimum occurrences for a descriptor to enter the network.
    #[arg(long = "min-occ", global = true, value_name = "N")]
    min_occ: Option<u32>,

    /// Comma-separated period windows, e.g. `2001-2006,2007-2012`.
    #[arg(long, global = true, value_name = "LIST")]
    windows: Option<String>,

    /// Keep only records from this source.
    #[arg(long, global = true, value_name = "TAG")]
    source: Option<String>,

    /// Modularity resolution.
    #[arg(long, global = true, value_name = "GAMMA")]
    resolution: Option<f64>,

    /// Any config key, e.g. `--set layout.edge_length=unit`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate the records file and write records.csv.
    Ingest,
    /// Class distributions and the scheme cross-tab.
    Report {
        /// Print a single table for scheme `a` or `b` instead of writing all reports.
        #[arg(long, value_name = "a|b")]
        scheme: Option<String>,
        /// Grouping for the single table: none, period or source.
        #[arg(long, default_value = "none", requires = "scheme")]
        by: String,
    },
    /// Map raw keywords to descriptors; write frequencies and coverage.
    Normalize,
    /// Build and threshold the co-occurrence network.
    Net,
    /// Detect clusters by modularity.
    Cluster,
    /// Compute the Kamada-Kawai layout.
    Layout,
    /// Write Pajek .net/.clu files and the SVG label map.
    Export,
    /// Compare the networks of two record subsets.
    Compare {
        /// First side, e.g. `bad.window1`, `wos` or `2001-2006`.
        #[arg(long = "a", value_name = "SPEC")]
        side_a: String,
        /// Second side.
        #[arg(long = "b", value_name = "SPEC")]
        side_b: String,
    },
    /// Run every stage and write manifest.json.
    Run,
}

fn input_error(e: impl std::fmt::Display) -> (i32, String) {
    (1, format!("error: {e}"))
}

fn load_config(o: &Overrides) -> Result<RunConfig, (i32, String)> {
    let mut cfg = match &o.config {
        Some(path) => RunConfig::from_file(path).map_err(input_error)?,
        None => RunConfig::default(),
    };
    let paths = [
        ("records", &o.records),
        ("mapping", &o.mapping),
        ("scheme_a", &o.scheme_a),
        ("scheme_b", &o.scheme_b),
        ("out_dir", &o.out_dir),
    ];
    for (key, value) in paths {
        if let Some(p) = value {
            cfg.set(key, &p.to_string_lossy()).map_err(input_error)?;
        }
    }
    let scalars = [
        ("min_occurrences", o.min_occ.map(|v| v.to_string())),
        ("windows", o.windows.clone()),
        ("source", o.source.clone()),
        ("resolution", o.resolution.map(|v| v.to_string())),
    ];
    for (key, value) in scalars {
        if let Some(v) = value {
            cfg.set(key, &v).map_err(input_error)?;
        }
    }
    for kv in &o.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| input_error(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim()).map_err(input_error)?;
    }
    cfg.validate().map_err(input_error)?;
    Ok(cfg)
}

fn summarize(r: &StageReport) {
    let mut parts: Vec<String> = r.counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    parts.extend(r.notes.iter().map(|(k, v)| format!("{k}={v}")));
    println!("{}: {}", r.stage, parts.join(" "));
}

fn stage_error(e: PipelineError) -> (i32, String) {
    (e.exit_code(), format!("error: {e}"))
}

fn execute(cli: Cli) -> Result<(), (i32, String)> {
    let cfg = load_config(&cli.opts)?;
    let report = match cli.command {
        Command::Ingest => pipeline::ingest(&cfg),
        Command::Report {
            scheme: Some(s),
            by,
        } => {
            let slot = match s.to_ascii_lowercase().as_str() {
                "a" => SchemeSlot::A,
                "b" => SchemeSlot::B,
                _ => return Err(input_error(format!("unknown scheme `{s}` (a or b)"))),
            };
            let by: GroupBy = by.parse().map_err(input_error)?;
            let (file, text) = pipeline::report_table(&cfg, slot, by).map_err(stage_error)?;
            coword::exportio::tables::save(cfg.out_dir.join(&file), &text)
                .map_err(|e| (2, format!("error: report stage: {e}")))?;
            print!("{text}");
            return Ok(());
        }
        Command::Report { scheme: None, .. } => pipeline::report(&cfg),
        Command::Normalize => pipeline::normalize(&cfg),
        Command::Net => pipeline::net(&cfg),
        Command::Cluster => pipeline::cluster(&cfg),
        Command::Layout => pipeline::layout(&cfg),
        Command::Export => pipeline::export(&cfg),
        Command::Compare { side_a, side_b } => {
            let a = SideSpec::parse(&side_a, &cfg.windows).map_err(input_error)?;
            let b = SideSpec::parse(&side_b, &cfg.windows).map_err(input_error)?;
            pipeline::compare(&cfg, &a, &b)
        }
        Command::Run => {
            let manifest = pipeline::run_pipeline(&cfg).map_err(stage_error)?;
            for stage in &manifest.stages {
                summarize(stage);
            }
            return Ok(());
        }
    };
    summarize(&report.map_err(stage_error)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("{message}");
            ExitCode::from(code as u8)
        }
    }
}
