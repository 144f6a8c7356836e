//! Writers and readers for everything the toolkit emits: Pajek network
//! and partition files, SVG label maps, CSV tables and the two-network
//! comparison report. All text output is UTF-8 with LF line endings.

mod compare;
mod pajek;
mod svg;
pub mod tables;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use compare::{compare_networks, CompareReport, LinkDelta, SideSummary};
pub use pajek::{
    format_pajek_clu, format_pajek_net, parse_pajek_clu, parse_pajek_net, read_pajek_clu,
    read_pajek_net, write_pajek_clu, write_pajek_net, PajekNetwork,
};
pub use svg::{render_label_map_svg, write_label_map_svg, SvgOptions, PALETTE};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: edge references vertex {id} but there are {n} vertices")]
    DanglingEdge { line: usize, id: usize, n: usize },
    #[error("label `{0}` contains a double quote and cannot be written to Pajek")]
    UnquotableLabel(String),
    #[error("{what} covers {found} vertices, network has {expected}")]
    SizeMismatch {
        what: &'static str,
        found: usize,
        expected: usize,
    },
    #[error(transparent)]
    Network(#[from] crate::conet::NetworkError),
}

pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<(), ExportError> {
    fs::write(path, contents).map_err(|source| ExportError::Io {
        path: path.to_owned(),
        source,
    })
}

pub(crate) fn read_file(path: &Path) -> Result<String, ExportError> {
    fs::read_to_string(path).map_err(|source| ExportError::Io {
        path: path.to_owned(),
        source,
    })
}
