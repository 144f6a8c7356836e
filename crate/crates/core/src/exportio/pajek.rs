//! The vertex/edge subset of the Pajek `.net` format, and `.clu`
//! partition files.
//!
//! ```text
//! *Vertices 3
//! 1 "public libraries" 0.250000 0.500000
//! 2 "Portugal" 0.750000 0.500000
//! 3 "reading" 0.500000 0.100000
//! *Edges
//! 1 2 4
//! 1 3 1
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{read_file, write_file, ExportError};
use crate::conet::{CoNetwork, Edge};
use crate::mapping::{ClusterPartition, LayoutMap};

/// A network read back from a `.net` file.
#[derive(Debug, Clone, PartialEq)]
pub struct PajekNetwork {
    /// Vertex weights are not stored in `.net` files, so they are external.
    pub network: CoNetwork,
    pub layout: Option<LayoutMap>,
}

pub fn format_pajek_net(
    net: &CoNetwork,
    layout: Option<&LayoutMap>,
) -> Result<String, ExportError> {
    if let Some(l) = layout {
        if l.len() != net.vertex_count() {
            return Err(ExportError::SizeMismatch {
                what: "layout",
                found: l.len(),
                expected: net.vertex_count(),
            });
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "*Vertices {}", net.vertex_count());
    for (i, v) in net.vertices().iter().enumerate() {
        if v.label.contains('"') {
            return Err(ExportError::UnquotableLabel(v.label.clone()));
        }
        let _ = write!(out, "{} \"{}\"", i + 1, v.label);
        if let Some(l) = layout {
            let [x, y] = l.coords[i];
            let _ = write!(out, " {x:.6} {y:.6}");
        }
        out.push('\n');
    }
    out.push_str("*Edges\n");
    for e in net.edges() {
        let _ = writeln!(out, "{} {} {}", e.source + 1, e.target + 1, e.weight);
    }
    Ok(out)
}

/// Writes `net` as a `.net` file, with coordinates when `layout` is given.
pub fn write_pajek_net(
    net: &CoNetwork,
    layout: Option<&LayoutMap>,
    path: impl AsRef<Path>,
) -> Result<(), ExportError> {
    write_file(path.as_ref(), format_pajek_net(net, layout)?.as_bytes())
}

fn parse_err(line: usize, reason: impl Into<String>) -> ExportError {
    ExportError::Parse {
        line,
        reason: reason.into(),
    }
}

/// Parses a `*Vertices n` line, returning `n`.
fn vertices_header(line_no: usize, line: Option<&str>) -> Result<usize, ExportError> {
    let line = line.ok_or_else(|| parse_err(line_no, "missing `*Vertices` line"))?;
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(kw), Some(n), None) if kw.eq_ignore_ascii_case("*vertices") => n
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad vertex count `{n}`"))),
        _ => Err(parse_err(
            line_no,
            format!("expected `*Vertices n`, found `{line}`"),
        )),
    }
}

fn parse_vertex(
    line_no: usize,
    line: &str,
    expected_id: usize,
) -> Result<(String, Option<[f64; 2]>), ExportError> {
    let (id, rest) = line
        .trim_start()
        .split_once(char::is_whitespace)
        .ok_or_else(|| parse_err(line_no, "expected `id \"label\"`"))?;
    if id.parse::<usize>().ok() != Some(expected_id) {
        return Err(parse_err(
            line_no,
            format!("expected vertex id {expected_id}, found `{id}`"),
        ));
    }
    let rest = rest.trim_start();
    let body = rest
        .strip_prefix('"')
        .ok_or_else(|| parse_err(line_no, "label must be quoted"))?;
    let (label, tail) = body
        .split_once('"')
        .ok_or_else(|| parse_err(line_no, "unterminated label"))?;
    let nums: Vec<&str> = tail.split_whitespace().collect();
    let coords = match nums.as_slice() {
        [] => None,
        [x, y] => {
            let parse = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(line_no, format!("bad coordinate `{s}`")))
            };
            Some([parse(x)?, parse(y)?])
        }
        _ => return Err(parse_err(line_no, "expected two coordinates or none")),
    };
    Ok((label.to_owned(), coords))
}

pub fn parse_pajek_net(text: &str) -> Result<PajekNetwork, ExportError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let mut next_content = || lines.by_ref().find(|(_, l)| !l.trim().is_empty());

    let (first_no, first) = next_content().map_or((1, None), |(n, l)| (n, Some(l)));
    let n = vertices_header(first_no, first)?;

    let mut labels = Vec::with_capacity(n);
    let mut coords = Vec::with_capacity(n);
    for id in 1..=n {
        let (line_no, line) = next_content()
            .ok_or_else(|| parse_err(first_no + id, format!("missing vertex {id}")))?;
        let (label, xy) = parse_vertex(line_no, line, id)?;
        labels.push(label);
        coords.push(xy);
    }
    let with_coords = coords.iter().filter(|c| c.is_some()).count();
    if with_coords != 0 && with_coords != n {
        return Err(parse_err(
            first_no,
            "coordinates must be given for all vertices or none",
        ));
    }

    let (edges_no, edges_line) =
        next_content().ok_or_else(|| parse_err(first_no + n + 1, "missing `*Edges` line"))?;
    if !edges_line.trim().eq_ignore_ascii_case("*edges") {
        return Err(parse_err(
            edges_no,
            format!("expected `*Edges`, found `{edges_line}`"),
        ));
    }

    let mut edges = Vec::new();
    for (line_no, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [a, b, w] = fields.as_slice() else {
            return Err(parse_err(line_no, "expected `i j weight`"));
        };
        let id = |s: &str| -> Result<usize, ExportError> {
            let id: usize = s
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad vertex id `{s}`")))?;
            if id == 0 || id > n {
                return Err(ExportError::DanglingEdge {
                    line: line_no,
                    id,
                    n,
                });
            }
            Ok(id - 1)
        };
        let weight: u32 = w
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad edge weight `{w}`")))?;
        edges.push(Edge {
            source: id(a)?,
            target: id(b)?,
            weight,
        });
    }

    let network = CoNetwork::with_external_weights(labels, edges)?;
    let layout = (with_coords == n && n > 0).then(|| LayoutMap {
        coords: coords.into_iter().flatten().collect(),
        final_stress: 0.0,
        converged: true,
        iterations: 0,
    });
    Ok(PajekNetwork { network, layout })
}

pub fn read_pajek_net(path: impl AsRef<Path>) -> Result<PajekNetwork, ExportError> {
    parse_pajek_net(&read_file(path.as_ref())?)
}

pub fn format_pajek_clu(p: &ClusterPartition) -> String {
    let mut out = format!("*Vertices {}\n", p.len());
    for c in p.assignment() {
        let _ = writeln!(out, "{c}");
    }
    out
}

/// Writes `*Vertices n` followed by one cluster id per vertex.
pub fn write_pajek_clu(p: &ClusterPartition, path: impl AsRef<Path>) -> Result<(), ExportError> {
    write_file(path.as_ref(), format_pajek_clu(p).as_bytes())
}

pub fn parse_pajek_clu(text: &str) -> Result<ClusterPartition, ExportError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (first_no, first) = lines.next().map_or((1, None), |(n, l)| (n, Some(l)));
    let n = vertices_header(first_no, first)?;
    let assignment = lines
        .map(|(no, l)| {
            l.parse::<usize>()
                .map_err(|_| parse_err(no, format!("bad cluster id `{l}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if assignment.len() != n {
        return Err(parse_err(
            first_no,
            format!("header says {n} vertices, found {}", assignment.len()),
        ));
    }
    ClusterPartition::from_assignment(assignment).map_err(|e| parse_err(first_no, e.to_string()))
}

pub fn read_pajek_clu(path: impl AsRef<Path>) -> Result<ClusterPartition, ExportError> {
    parse_pajek_clu(&read_file(path.as_ref())?)
}
