use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{write_file, ExportError};
use crate::conet::CoNetwork;
use crate::mapping::{ClusterPartition, LayoutMap};

/// Qualitative fill colors, cycled by cluster id (cluster 1 is the first).
pub const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SvgOptions {
    /// Width and height of the square canvas, in pixels.
    pub size: f64,
    pub margin: f64,
    pub min_radius: f64,
    pub max_radius: f64,
    pub min_font: f64,
    pub max_font: f64,
    pub max_edge_width: f64,
    /// Edges lighter than this are not drawn.
    pub edge_floor: u32,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            size: 1000.0,
            margin: 80.0,
            min_radius: 3.0,
            max_radius: 24.0,
            min_font: 9.0,
            max_font: 22.0,
            max_edge_width: 5.0,
            edge_floor: 1,
        }
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// `max * sqrt(w / w_max)`, clamped below at `min`.
fn sqrt_scaled(weight: u32, max_weight: u32, min: f64, max: f64) -> f64 {
    if max_weight == 0 {
        return min;
    }
    (max * (f64::from(weight) / f64::from(max_weight)).sqrt()).max(min)
}

/// Renders the label view: one circle and one label per vertex, sized by
/// the square root of occurrence weight and filled by cluster, over edges
/// whose width grows with `ln(1 + weight)`.
pub fn render_label_map_svg(
    net: &CoNetwork,
    layout: &LayoutMap,
    partition: &ClusterPartition,
    opts: &SvgOptions,
) -> Result<String, ExportError> {
    let n = net.vertex_count();
    for (what, found) in [("layout", layout.len()), ("partition", partition.len())] {
        if found != n {
            return Err(ExportError::SizeMismatch {
                what,
                found,
                expected: n,
            });
        }
    }
    let inner = opts.size - 2.0 * opts.margin;
    let px = |i: usize| {
        let [x, y] = layout.coords[i];
        let clamp = |v: f64| {
            if v.is_finite() {
                v.clamp(0.0, 1.0)
            } else {
                0.5
            }
        };
        (
            opts.margin + clamp(x) * inner,
            opts.margin + clamp(y) * inner,
        )
    };
    let max_weight = net.vertices().iter().map(|v| v.weight).max().unwrap_or(0);
    let max_edge = net.edges().iter().map(|e| e.weight).max().unwrap_or(0);

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">",
        s = opts.size
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{s}\" height=\"{s}\" fill=\"#ffffff\"/>",
        s = opts.size
    );

    out.push_str(
        "<g class=\"edges\" stroke=\"#b4b4b4\" stroke-opacity=\"0.6\" stroke-linecap=\"round\">\n",
    );
    for e in net.edges().iter().filter(|e| e.weight >= opts.edge_floor) {
        let (x1, y1) = px(e.source);
        let (x2, y2) = px(e.target);
        let width = opts.max_edge_width * (1.0 + f64::from(e.weight)).ln()
            / (1.0 + f64::from(max_edge)).ln();
        let _ = writeln!(
            out,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke-width=\"{width:.2}\"/>"
        );
    }
    out.push_str("</g>\n");

    out.push_str("<g class=\"nodes\" fill-opacity=\"0.85\" stroke=\"#ffffff\">\n");
    for (i, v) in net.vertices().iter().enumerate() {
        let (x, y) = px(i);
        let r = sqrt_scaled(v.weight, max_weight, opts.min_radius, opts.max_radius);
        let color = PALETTE[(partition.cluster_of(i) - 1) % PALETTE.len()];
        let _ = writeln!(
            out,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.2}\" fill=\"{color}\"><title>{}</title></circle>",
            escape(&v.label)
        );
    }
    out.push_str("</g>\n");

    out.push_str(
        "<g class=\"labels\" font-family=\"Helvetica, Arial, sans-serif\" text-anchor=\"middle\" fill=\"#222222\">\n",
    );
    for (i, v) in net.vertices().iter().enumerate() {
        let (x, y) = px(i);
        let font = sqrt_scaled(v.weight, max_weight, opts.min_font, opts.max_font);
        let _ = writeln!(
            out,
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"{font:.2}\">{}</text>",
            y + font * 0.35,
            escape(&v.label)
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

pub fn write_label_map_svg(
    net: &CoNetwork,
    layout: &LayoutMap,
    partition: &ClusterPartition,
    opts: &SvgOptions,
    path: impl AsRef<Path>,
) -> Result<(), ExportError> {
    write_file(
        path.as_ref(),
        render_label_map_svg(net, layout, partition, opts)?.as_bytes(),
    )
}
