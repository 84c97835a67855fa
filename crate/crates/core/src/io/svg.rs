use std::collections::BTreeMap;
use std::fmt::Write;

use super::SolutionDocument;
use crate::conic::ConicSet;
use crate::error::{GcsError, Result};
use crate::expr::{set_membership, LinExpr};
use crate::model::{EdgeId, GcsGraph, VertexId};
use crate::solver::{solve_conic, ConicProgram, ConicStatus};

#[derive(Debug, Clone)]
pub struct PlotOptions {
    /// Draw the first two coordinates of higher-dimensional variables.
    pub project: bool,
    /// Width of the figure in pixels.
    pub width: f64,
    /// Support directions used to outline sets that are neither balls nor
    /// boxes.
    pub directions: usize,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            project: false,
            width: 480.0,
            directions: 72,
        }
    }
}

enum Outline {
    Circle([f64; 2], f64),
    Rect([f64; 2], [f64; 2]),
    Polygon(Vec<[f64; 2]>),
}

impl Outline {
    fn extent(&self) -> Vec<[f64; 2]> {
        match self {
            Outline::Circle(c, r) => vec![[c[0] - r, c[1] - r], [c[0] + r, c[1] + r]],
            Outline::Rect(lo, hi) => vec![*lo, *hi],
            Outline::Polygon(p) => p.clone(),
        }
    }
}

/// Support points of the projection of a set onto its first two coordinates.
fn support_polygon(set: &ConicSet, directions: usize) -> Option<Vec<[f64; 2]>> {
    let n = set.dim();
    let args: Vec<LinExpr> = (0..n).map(LinExpr::var).collect();
    let mut points: Vec<[f64; 2]> = Vec::new();
    for k in 0..directions {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / directions as f64;
        let mut p = ConicProgram::new(n);
        p.objective[0] = -theta.cos();
        p.objective[1] = -theta.sin();
        for c in set_membership(set, &args, &LinExpr::constant(1.0)) {
            p.add_constraint(c);
        }
        let sol = solve_conic(&p);
        match sol.status {
            ConicStatus::Optimal | ConicStatus::Inaccurate
                if sol.x.iter().all(|v| v.is_finite()) =>
            {
                let q = [sol.x[0], sol.x[1]];
                if points
                    .last()
                    .is_none_or(|l| (l[0] - q[0]).hypot(l[1] - q[1]) > 1e-9)
                {
                    points.push(q);
                }
            }
            _ => return None,
        }
    }
    Some(points)
}

fn outline(set: &ConicSet, opts: &PlotOptions) -> Option<Outline> {
    if set.dim() == 2 {
        if let Some((c, r)) = set.as_ball() {
            return Some(Outline::Circle([c[0], c[1]], r));
        }
        if let Some((lo, hi)) = set.as_box() {
            return Some(Outline::Rect([lo[0], lo[1]], [hi[0], hi[1]]));
        }
    }
    support_polygon(set, opts.directions).map(Outline::Polygon)
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// SVG 1.1 figure: vertex sets, points of selected vertices and segments of
/// selected edges. Vertex variables must be two-dimensional unless
/// `opts.project` is set.
pub fn export_plot(
    graph: &GcsGraph,
    solution: Option<&SolutionDocument>,
    opts: &PlotOptions,
) -> Result<String> {
    for (_, v) in graph.vertices() {
        if v.dim < 2 || (v.dim > 2 && !opts.project) {
            return Err(GcsError::Plot(format!(
                "vertex `{}` has dimension {}; plots need two coordinates{}",
                v.name,
                v.dim,
                if v.dim > 2 { " (use projection)" } else { "" }
            )));
        }
    }
    let mut outlines = Vec::new();
    for v in graph.vertex_ids() {
        let set = graph.vertex_set(v)?;
        match outline(&set, opts) {
            Some(o) => outlines.push((v, o)),
            None => log::warn!(
                "set of `{}` is unbounded and is not drawn",
                graph.vertex(v).name
            ),
        }
    }
    let (edges, x): (Vec<EdgeId>, BTreeMap<VertexId, Vec<f64>>) = match solution {
        Some(s) => s.resolve(graph)?,
        None => (Vec::new(), BTreeMap::new()),
    };
    let points: BTreeMap<VertexId, [f64; 2]> = x
        .iter()
        .filter(|(_, p)| p.len() >= 2)
        .map(|(&v, p)| (v, [p[0], p[1]]))
        .collect();

    let mut all: Vec<[f64; 2]> = outlines.iter().flat_map(|(_, o)| o.extent()).collect();
    all.extend(points.values().copied());
    if all.is_empty() {
        all.push([0.0, 0.0]);
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &all {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-6);
    let margin = 0.05 * span;
    let scale = opts.width / (span + 2.0 * margin);
    let height = ((hi[1] - lo[1]) + 2.0 * margin) * scale;
    let width = ((hi[0] - lo[0]) + 2.0 * margin) * scale;
    let tx = |p: [f64; 2]| {
        [
            (p[0] - lo[0] + margin) * scale,
            (hi[1] - p[1] + margin) * scale,
        ]
    };

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        fmt(width),
        fmt(height),
        fmt(width),
        fmt(height)
    );
    let style = r##"fill="#dbe8f5" stroke="#3a6ea5" stroke-width="1""##;
    for (v, o) in &outlines {
        let name = xml_escape(&graph.vertex(*v).name);
        match o {
            Outline::Circle(c, r) => {
                let p = tx(*c);
                let _ = writeln!(
                    out,
                    r#"  <circle class="set" data-vertex="{name}" cx="{}" cy="{}" r="{}" {style}/>"#,
                    fmt(p[0]),
                    fmt(p[1]),
                    fmt(r * scale)
                );
            }
            Outline::Rect(a, b) => {
                let p = tx([a[0], b[1]]);
                let _ = writeln!(
                    out,
                    r#"  <rect class="set" data-vertex="{name}" x="{}" y="{}" width="{}" height="{}" {style}/>"#,
                    fmt(p[0]),
                    fmt(p[1]),
                    fmt((b[0] - a[0]) * scale),
                    fmt((b[1] - a[1]) * scale)
                );
            }
            Outline::Polygon(pts) => {
                let list: Vec<String> = pts
                    .iter()
                    .map(|&q| {
                        let p = tx(q);
                        format!("{},{}", fmt(p[0]), fmt(p[1]))
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    r#"  <polygon class="set" data-vertex="{name}" points="{}" {style}/>"#,
                    list.join(" ")
                );
            }
        }
    }
    for e in &edges {
        let edge = graph.edge(*e);
        if let (Some(&a), Some(&b)) = (points.get(&edge.tail), points.get(&edge.head)) {
            let (a, b) = (tx(a), tx(b));
            let _ = writeln!(
                out,
                r##"  <line class="edge" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#c0392b" stroke-width="2"/>"##,
                fmt(a[0]),
                fmt(a[1]),
                fmt(b[0]),
                fmt(b[1])
            );
        }
    }
    for (v, p) in &points {
        let p = tx(*p);
        let _ = writeln!(
            out,
            r##"  <circle class="point" data-vertex="{}" cx="{}" cy="{}" r="3" fill="#000000"/>"##,
            xml_escape(&graph.vertex(*v).name),
            fmt(p[0]),
            fmt(p[1])
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
