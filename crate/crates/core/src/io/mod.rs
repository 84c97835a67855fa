//! JSON problem and solution documents, and SVG figures for planar instances.

mod svg;

pub use svg::{export_plot, PlotOptions};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::conic::{AtomKind, Cone, ConicSet, CostAtom};
use crate::error::{GcsError, Result};
use crate::ilp::{AffineConstraint, BinaryVar, IlpDescription, Sense};
use crate::model::{EdgeId, GcsGraph, VertexId, VertexPoints};
use crate::problems::{ProblemKind, ProblemSpec};
use crate::solver::{SolveResult, SolveStatus, SubtourPolicy, SubtourSeparator};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub format_version: u32,
    pub graph: GraphDoc,
    pub problem: ProblemDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub directed: bool,
    pub vertices: Vec<VertexDoc>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub name: String,
    pub dim: usize,
    #[serde(default)]
    pub constraints: Vec<SetDoc>,
    #[serde(default)]
    pub costs: Vec<AtomDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub tail: String,
    pub head: String,
    #[serde(default)]
    pub aux_dim: usize,
    #[serde(default)]
    pub constraints: Vec<SetDoc>,
    #[serde(default)]
    pub costs: Vec<AtomDoc>,
}

/// A convex set. Shorthands may act on a subset of coordinates through
/// `coords`; raw rows always span the whole variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetDoc {
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coords: Option<Vec<usize>>,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coords: Option<Vec<usize>>,
    },
    Point {
        point: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coords: Option<Vec<usize>>,
    },
    /// `a x ≤ b`.
    Halfspaces {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coords: Option<Vec<usize>>,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coords: Option<Vec<usize>>,
    },
    /// `c x + d ∈ K₁ × … × K_m`.
    Conic {
        c: Vec<Vec<f64>>,
        d: Vec<f64>,
        cones: Vec<Cone>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomMap {
    Identity,
    /// `x_head − x_tail` on an edge.
    Difference,
}

/// A cost atom `weight · g(a x + b)`. Without `a`, the map comes from `of`,
/// `c` (linear) or `value` (constant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub kind: AtomKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub of: Option<AtomMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemDoc {
    Spp {
        source: String,
        target: String,
    },
    Tsp,
    Mstp,
    Msap {
        root: String,
    },
    Flp {
        facilities: Vec<String>,
        clients: Vec<String>,
    },
    Bmp {
        facilities: Vec<String>,
        clients: Vec<String>,
    },
    Custom {
        ilp: Vec<AffineDoc>,
        #[serde(default)]
        separators: Vec<SeparatorDoc>,
        #[serde(default)]
        fixed: BTreeMap<String, bool>,
        #[serde(default)]
        requires_nonnegative_costs: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SenseDoc {
    Geq,
    Leq,
    Eq,
}

/// `Σ terms + const  (sense)  0`, with terms keyed `v:<name>` or
/// `e:<tail>|<head>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineDoc {
    pub terms: BTreeMap<String, f64>,
    #[serde(rename = "const", default)]
    pub constant: f64,
    pub sense: SenseDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
}

/// A built-in separator: `tsp_subtour`, `mstp_subtour` or `msap_cutset`
/// (which needs a root).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeparatorDoc {
    Name(String),
    Full {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        root: Option<String>,
    },
}

fn doc_err(path: impl Into<String>, message: impl Into<String>) -> GcsError {
    GcsError::Document {
        path: path.into(),
        message: message.into(),
    }
}

/// Reads JSON text with path and line diagnostics.
pub fn read_problem(text: &str) -> Result<ProblemDocument> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        doc_err(
            if path == "." { "$".into() } else { path },
            e.into_inner().to_string(),
        )
    })
}

fn matrix(rows: &[Vec<f64>], cols: usize, path: &str) -> Result<DMatrix<f64>> {
    for (i, r) in rows.iter().enumerate() {
        if r.len() != cols {
            return Err(doc_err(
                format!("{path}[{i}]"),
                format!("row has {} entries, expected {cols}", r.len()),
            ));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn with_coords(
    set: ConicSet,
    coords: &Option<Vec<usize>>,
    dim: usize,
    path: &str,
) -> Result<ConicSet> {
    match coords {
        None => {
            if set.dim() != dim {
                return Err(doc_err(
                    path,
                    format!("set has dimension {}, variable has {dim}", set.dim()),
                ));
            }
            Ok(set)
        }
        Some(cols) => set
            .remap(dim, cols)
            .map_err(|e| doc_err(format!("{path}.coords"), e.to_string())),
    }
}

fn parse_set(doc: &SetDoc, dim: usize, path: &str) -> Result<ConicSet> {
    let wrap = |r: Result<ConicSet>| r.map_err(|e| doc_err(path, e.to_string()));
    match doc {
        SetDoc::Ball {
            center,
            radius,
            coords,
        } => with_coords(wrap(ConicSet::ball(center, *radius))?, coords, dim, path),
        SetDoc::Box {
            lower,
            upper,
            coords,
        } => with_coords(wrap(ConicSet::axis_box(lower, upper))?, coords, dim, path),
        SetDoc::Point { point, coords } => {
            with_coords(wrap(ConicSet::point(point))?, coords, dim, path)
        }
        SetDoc::Halfspaces { a, b, coords } => {
            with_coords(wrap(ConicSet::halfspaces(a, b))?, coords, dim, path)
        }
        SetDoc::Polygon { vertices, coords } => {
            with_coords(wrap(ConicSet::polygon(vertices))?, coords, dim, path)
        }
        SetDoc::Conic { c, d, cones } => {
            let m = matrix(c, dim, &format!("{path}.c"))?;
            wrap(ConicSet::new(
                m,
                DVector::from_column_slice(d),
                cones.clone(),
            ))
        }
    }
}

fn set_to_doc(set: &ConicSet) -> SetDoc {
    let c = set.c();
    SetDoc::Conic {
        c: (0..c.nrows())
            .map(|i| c.row(i).iter().copied().collect())
            .collect(),
        d: set.d().iter().copied().collect(),
        cones: set.cones().to_vec(),
    }
}

/// `edge` is `Some((vertex_dim, aux_dim))` when the atom sits on an edge.
fn parse_atom(
    doc: &AtomDoc,
    dim: usize,
    edge: Option<(usize, usize)>,
    path: &str,
) -> Result<CostAtom> {
    let wrap = |r: Result<CostAtom>| r.map_err(|e| doc_err(path, e.to_string()));
    let weight = doc.weight.unwrap_or(1.0);
    if let Some(a) = &doc.a {
        let m = matrix(a, dim, &format!("{path}.a"))?;
        let b = doc.b.clone().unwrap_or_else(|| vec![0.0; m.nrows()]);
        return wrap(CostAtom::new(doc.kind, m, DVector::from_vec(b), weight));
    }
    if let Some(c) = &doc.c {
        if doc.kind != AtomKind::Linear {
            return Err(doc_err(
                format!("{path}.c"),
                "`c` only applies to linear atoms",
            ));
        }
        return wrap(CostAtom::linear(c).and_then(|a| a.with_weight(weight)));
    }
    if let Some(value) = doc.value {
        if doc.kind != AtomKind::Constant {
            return Err(doc_err(
                format!("{path}.value"),
                "`value` only applies to constant atoms",
            ));
        }
        return wrap(CostAtom::constant(dim, value).and_then(|a| a.with_weight(weight)));
    }
    let base = match (doc.of, edge) {
        (Some(AtomMap::Identity), _) => wrap(CostAtom::of_identity(doc.kind, dim))?,
        (Some(AtomMap::Difference), Some((n, aux))) => {
            wrap(CostAtom::of_difference(doc.kind, n, aux))?
        }
        (Some(AtomMap::Difference), None) => {
            return Err(doc_err(format!("{path}.of"), "`difference` needs an edge"))
        }
        (None, _) => return Err(doc_err(path, "atom needs one of `a`, `c`, `value` or `of`")),
    };
    let b = doc.b.clone().unwrap_or_else(|| vec![0.0; base.a().nrows()]);
    wrap(CostAtom::new(
        doc.kind,
        base.a().clone(),
        DVector::from_vec(b),
        weight,
    ))
}

fn atom_to_doc(atom: &CostAtom) -> AtomDoc {
    let a = atom.a();
    AtomDoc {
        kind: atom.kind(),
        a: Some(
            (0..a.nrows())
                .map(|i| a.row(i).iter().copied().collect())
                .collect(),
        ),
        b: Some(atom.b().iter().copied().collect()),
        weight: Some(atom.weight()),
        of: None,
        c: None,
        value: None,
    }
}

fn lookup(graph: &GcsGraph, name: &str, path: &str) -> Result<VertexId> {
    graph
        .vertex_id(name)
        .map_err(|_| doc_err(path, format!("unknown vertex `{name}`")))
}

fn lookup_all(graph: &GcsGraph, names: &[String], path: &str) -> Result<Vec<VertexId>> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| lookup(graph, n, &format!("{path}[{i}]")))
        .collect()
}

fn parse_var(graph: &GcsGraph, key: &str, path: &str) -> Result<BinaryVar> {
    if let Some(name) = key.strip_prefix("v:") {
        return Ok(BinaryVar::Vertex(lookup(graph, name, path)?));
    }
    if let Some(rest) = key.strip_prefix("e:") {
        if let Some((t, h)) = rest.split_once('|') {
            let (t, h) = (lookup(graph, t, path)?, lookup(graph, h, path)?);
            return graph
                .find_edge(t, h)
                .map(BinaryVar::Edge)
                .ok_or_else(|| doc_err(path, format!("unknown edge `{rest}`")));
        }
    }
    Err(doc_err(
        path,
        format!("term `{key}` is neither `v:<name>` nor `e:<tail>|<head>`"),
    ))
}

fn parse_separator(graph: &GcsGraph, doc: &SeparatorDoc, path: &str) -> Result<SubtourSeparator> {
    let (name, root) = match doc {
        SeparatorDoc::Name(n) => (n.as_str(), None),
        SeparatorDoc::Full { name, root } => (name.as_str(), root.as_deref()),
    };
    match (name, root) {
        ("tsp_subtour", None) => Ok(SubtourSeparator::tsp()),
        ("mstp_subtour", None) => Ok(SubtourSeparator::mstp()),
        ("msap_cutset", Some(r)) => Ok(SubtourSeparator::msap(lookup(
            graph,
            r,
            &format!("{path}.root"),
        )?)),
        ("msap_cutset", None) => Err(doc_err(path, "`msap_cutset` needs a `root`")),
        (other, _) => Err(doc_err(
            path,
            format!(
                "unknown separator `{other}`; built-ins are tsp_subtour, mstp_subtour, msap_cutset"
            ),
        )),
    }
}

/// Builds the graph and problem described by a document.
pub fn parse(doc: &ProblemDocument) -> Result<(GcsGraph, ProblemSpec)> {
    if doc.format_version != FORMAT_VERSION {
        return Err(doc_err(
            "format_version",
            format!(
                "unsupported version {}, expected {FORMAT_VERSION}",
                doc.format_version
            ),
        ));
    }
    let mut g = GcsGraph::new(doc.graph.directed);
    for (i, v) in doc.graph.vertices.iter().enumerate() {
        let path = format!("graph.vertices[{i}]");
        if v.name.contains('|') {
            return Err(doc_err(
                format!("{path}.name"),
                "vertex names may not contain `|`",
            ));
        }
        let id = g
            .add_vertex(v.name.clone(), v.dim)
            .map_err(|e| doc_err(&path, e.to_string()))?;
        for (k, s) in v.constraints.iter().enumerate() {
            let p = format!("{path}.constraints[{k}]");
            let set = parse_set(s, v.dim, &p)?;
            g.add_vertex_constraint(id, set)
                .map_err(|e| doc_err(&p, e.to_string()))?;
        }
        for (k, a) in v.costs.iter().enumerate() {
            let p = format!("{path}.costs[{k}]");
            let atom = parse_atom(a, v.dim, None, &p)?;
            g.add_vertex_cost(id, atom)
                .map_err(|e| doc_err(&p, e.to_string()))?;
        }
    }
    for (i, e) in doc.graph.edges.iter().enumerate() {
        let path = format!("graph.edges[{i}]");
        let t = lookup(&g, &e.tail, &format!("{path}.tail"))?;
        let h = lookup(&g, &e.head, &format!("{path}.head"))?;
        let id = g
            .add_edge(t, h, e.aux_dim)
            .map_err(|err| doc_err(&path, err.to_string()))?;
        let dim = g
            .edge_dim(id)
            .map_err(|err| doc_err(&path, err.to_string()))?;
        let (nt, nh) = (g.vertex(t).dim, g.vertex(h).dim);
        let diff = (nt == nh).then_some((nt, e.aux_dim));
        for (k, s) in e.constraints.iter().enumerate() {
            let p = format!("{path}.constraints[{k}]");
            let set = parse_set(s, dim, &p)?;
            g.add_edge_constraint(id, set)
                .map_err(|err| doc_err(&p, err.to_string()))?;
        }
        for (k, a) in e.costs.iter().enumerate() {
            let p = format!("{path}.costs[{k}]");
            if a.of == Some(AtomMap::Difference) && diff.is_none() {
                return Err(doc_err(
                    &p,
                    "`difference` needs endpoints of equal dimension",
                ));
            }
            let atom = parse_atom(a, dim, diff, &p)?;
            g.add_edge_cost(id, atom)
                .map_err(|err| doc_err(&p, err.to_string()))?;
        }
    }
    let kind = match &doc.problem {
        ProblemDoc::Spp { source, target } => ProblemKind::Spp {
            source: lookup(&g, source, "problem.source")?,
            target: lookup(&g, target, "problem.target")?,
        },
        ProblemDoc::Tsp => ProblemKind::Tsp,
        ProblemDoc::Mstp => ProblemKind::Mstp,
        ProblemDoc::Msap { root } => ProblemKind::Msap {
            root: lookup(&g, root, "problem.root")?,
        },
        ProblemDoc::Flp {
            facilities,
            clients,
        } => ProblemKind::Flp {
            facilities: lookup_all(&g, facilities, "problem.facilities")?,
            clients: lookup_all(&g, clients, "problem.clients")?,
        },
        ProblemDoc::Bmp {
            facilities,
            clients,
        } => ProblemKind::Bmp {
            facilities: lookup_all(&g, facilities, "problem.facilities")?,
            clients: lookup_all(&g, clients, "problem.clients")?,
        },
        ProblemDoc::Custom {
            ilp,
            separators,
            fixed,
            requires_nonnegative_costs,
        } => {
            let mut desc = IlpDescription::default();
            for (i, c) in ilp.iter().enumerate() {
                let path = format!("problem.ilp[{i}]");
                let terms = c
                    .terms
                    .iter()
                    .map(|(k, &v)| Ok((parse_var(&g, k, &format!("{path}.terms.{k}"))?, v)))
                    .collect::<Result<Vec<_>>>()?;
                let built = match c.sense {
                    SenseDoc::Geq => AffineConstraint::geq(terms, c.constant),
                    SenseDoc::Leq => AffineConstraint::leq(terms, c.constant),
                    SenseDoc::Eq => AffineConstraint::eq(terms, c.constant),
                }
                .map_err(|e| doc_err(&path, e.to_string()))?;
                desc.push(match &c.family {
                    Some(f) => built.with_family(f.clone()),
                    None => built,
                });
            }
            for (i, s) in separators.iter().enumerate() {
                desc.separators.push(std::sync::Arc::new(parse_separator(
                    &g,
                    s,
                    &format!("problem.separators[{i}]"),
                )?));
            }
            for (k, &v) in fixed {
                desc.fixed
                    .insert(parse_var(&g, k, &format!("problem.fixed.{k}"))?, v);
            }
            desc.requires_nonnegative_costs = *requires_nonnegative_costs;
            ProblemKind::Custom(desc)
        }
    };
    Ok((g, ProblemSpec::new(kind)))
}

/// Reads and builds a problem from JSON text.
pub fn parse_str(text: &str) -> Result<(GcsGraph, ProblemSpec)> {
    parse(&read_problem(text)?)
}

fn var_key(graph: &GcsGraph, var: BinaryVar) -> String {
    var.label(graph)
}

fn names(graph: &GcsGraph, vs: &[VertexId]) -> Vec<String> {
    vs.iter().map(|&v| graph.vertex(v).name.clone()).collect()
}

/// Canonical document: sets as raw conic rows and atoms with explicit maps.
pub fn serialize(graph: &GcsGraph, spec: &ProblemSpec) -> Result<ProblemDocument> {
    let vertices = graph
        .vertices()
        .map(|(_, v)| VertexDoc {
            name: v.name.clone(),
            dim: v.dim,
            constraints: v.constraints.iter().map(set_to_doc).collect(),
            costs: v.costs.iter().map(atom_to_doc).collect(),
        })
        .collect();
    let edges = graph
        .edges()
        .map(|(_, e)| EdgeDoc {
            tail: graph.vertex(e.tail).name.clone(),
            head: graph.vertex(e.head).name.clone(),
            aux_dim: e.aux_dim,
            constraints: e.constraints.iter().map(set_to_doc).collect(),
            costs: e.costs.iter().map(atom_to_doc).collect(),
        })
        .collect();
    let problem = match &spec.kind {
        ProblemKind::Spp { source, target } => ProblemDoc::Spp {
            source: graph.vertex(*source).name.clone(),
            target: graph.vertex(*target).name.clone(),
        },
        ProblemKind::Tsp => ProblemDoc::Tsp,
        ProblemKind::Mstp => ProblemDoc::Mstp,
        ProblemKind::Msap { root } => ProblemDoc::Msap {
            root: graph.vertex(*root).name.clone(),
        },
        ProblemKind::Flp {
            facilities,
            clients,
        } => ProblemDoc::Flp {
            facilities: names(graph, facilities),
            clients: names(graph, clients),
        },
        ProblemKind::Bmp {
            facilities,
            clients,
        } => ProblemDoc::Bmp {
            facilities: names(graph, facilities),
            clients: names(graph, clients),
        },
        ProblemKind::Custom(ilp) => {
            let rows = ilp
                .constraints
                .iter()
                .map(|c| AffineDoc {
                    terms: c
                        .terms
                        .iter()
                        .map(|(&k, &v)| (var_key(graph, k), v))
                        .collect(),
                    constant: c.constant,
                    sense: match c.sense {
                        Sense::Geq => SenseDoc::Geq,
                        Sense::Eq => SenseDoc::Eq,
                    },
                    family: c.family.clone(),
                })
                .collect();
            let separators = ilp
                .separators
                .iter()
                .map(|s| match s.builtin() {
                    Some(SubtourPolicy::Arborescence(root)) => Ok(SeparatorDoc::Full {
                        name: s.name().to_string(),
                        root: Some(graph.vertex(root).name.clone()),
                    }),
                    Some(_) => Ok(SeparatorDoc::Full {
                        name: s.name().to_string(),
                        root: None,
                    }),
                    None => Err(GcsError::InvalidProblem(format!(
                        "separator `{}` is not a built-in and cannot be stored",
                        s.name()
                    ))),
                })
                .collect::<Result<_>>()?;
            ProblemDoc::Custom {
                ilp: rows,
                separators,
                fixed: ilp
                    .fixed
                    .iter()
                    .map(|(&k, &v)| (var_key(graph, k), v))
                    .collect(),
                requires_nonnegative_costs: ilp.requires_nonnegative_costs,
            }
        }
    };
    Ok(ProblemDocument {
        format_version: FORMAT_VERSION,
        graph: GraphDoc {
            directed: graph.is_directed(),
            vertices,
            edges,
        },
        problem,
    })
}

/// Pretty JSON with sorted keys and shortest round-trip floats.
pub fn to_canonical_json<T: Serialize>(doc: &T) -> Result<String> {
    let value = serde_json::to_value(doc).map_err(|e| doc_err("$", e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&value).map_err(|e| doc_err("$", e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Canonical JSON text of a graph and problem.
pub fn canonical_problem(graph: &GcsGraph, spec: &ProblemSpec) -> Result<String> {
    to_canonical_json(&serialize(graph, spec)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingDoc {
    pub elapsed_seconds: f64,
    pub nodes: usize,
    pub cuts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub format_version: u32,
    pub status: String,
    pub value: Option<f64>,
    pub relaxation_value: Option<f64>,
    pub lower_bound: Option<f64>,
    pub gap: Option<f64>,
    pub subgraph: Option<SubgraphDoc>,
    /// Only selected vertices appear.
    #[serde(default)]
    pub x: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub edge_aux: BTreeMap<String, Vec<f64>>,
    pub timing: Option<TimingDoc>,
    /// Path of the bound-trace CSV, when one was written.
    #[serde(default)]
    pub bound_trace: Option<String>,
    #[serde(default)]
    pub flagged: bool,
    #[serde(default)]
    pub diagnostic: Option<String>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::UnboundedRelaxation => "unbounded_relaxation",
        SolveStatus::Limit => "limit",
    }
}

impl SolutionDocument {
    pub fn from_result(graph: &GcsGraph, r: &SolveResult, trace_path: Option<String>) -> Self {
        let subgraph = r.subgraph.as_ref().map(|s| SubgraphDoc {
            vertices: s
                .selected_vertices()
                .map(|v| graph.vertex(v).name.clone())
                .collect(),
            edges: s.selected_edges().map(|e| graph.edge_key(e)).collect(),
        });
        Self {
            format_version: FORMAT_VERSION,
            status: status_name(r.status).into(),
            value: finite(r.value),
            relaxation_value: finite(r.relaxation_value),
            lower_bound: finite(r.lower_bound()),
            gap: finite(r.gap()),
            subgraph,
            x: r.x
                .iter()
                .map(|(&v, x)| (graph.vertex(v).name.clone(), x.clone()))
                .collect(),
            edge_aux: r
                .edge_aux
                .iter()
                .map(|(&e, x)| (graph.edge_key(e), x.clone()))
                .collect(),
            timing: Some(TimingDoc {
                elapsed_seconds: r.elapsed_seconds,
                nodes: r.nodes,
                cuts: r.cuts.len(),
            }),
            bound_trace: trace_path,
            flagged: r.flagged,
            diagnostic: r.diagnostic.clone(),
        }
    }

    pub fn read(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| doc_err(e.path().to_string(), e.into_inner().to_string()))
    }

    /// Selected edges and vertex points resolved against a graph.
    pub fn resolve(&self, graph: &GcsGraph) -> Result<(Vec<EdgeId>, VertexPoints)> {
        let mut edges = Vec::new();
        if let Some(s) = &self.subgraph {
            for (i, key) in s.edges.iter().enumerate() {
                let path = format!("subgraph.edges[{i}]");
                match parse_var(graph, &format!("e:{key}"), &path)? {
                    BinaryVar::Edge(e) => edges.push(e),
                    BinaryVar::Vertex(_) => unreachable!("edge key parsed as vertex"),
                }
            }
        }
        let x = self
            .x
            .iter()
            .map(|(name, x)| Ok((lookup(graph, name, &format!("x.{name}"))?, x.clone())))
            .collect::<Result<_>>()?;
        Ok((edges, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::generate;

    #[test]
    fn demo_round_trip_is_byte_identical() {
        let d = generate::demo_spp();
        let text = canonical_problem(&d.graph, &d.spec).unwrap();
        let (g, spec) = parse_str(&text).unwrap();
        assert_eq!(g.num_vertices(), 9);
        assert_eq!(g.num_edges(), 12);
        assert_eq!(canonical_problem(&g, &spec).unwrap(), text);
    }

    #[test]
    fn unknown_vertex_names_the_path() {
        let text = r#"{"format_version":1,"graph":{"directed":true,
            "vertices":[{"name":"a","dim":1},{"name":"b","dim":1}],
            "edges":[{"tail":"a","head":"zz"}]},
            "problem":{"kind":"spp","source":"a","target":"b"}}"#;
        let err = parse_str(text).unwrap_err().to_string();
        assert!(err.contains("graph.edges[0].head"), "{err}");
        assert!(err.contains("zz"), "{err}");
    }

    #[test]
    fn schema_errors_carry_location() {
        let text = "{\"format_version\":1,\n\"graph\":{\"directed\":\"yes\",\"vertices\":[]},\"problem\":{\"kind\":\"tsp\"}}";
        let err = parse_str(text).unwrap_err().to_string();
        assert!(err.contains("graph.directed"), "{err}");
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn shorthands_expand() {
        let text = r#"{"format_version":1,"graph":{"directed":false,
            "vertices":[
              {"name":"a","dim":3,"constraints":[{"type":"ball","center":[0,0],"radius":1,"coords":[0,2]},
                                                 {"type":"box","lower":[-1],"upper":[1],"coords":[1]}],
               "costs":[{"kind":"l2","of":"identity"},{"kind":"linear","c":[1,0,0]},{"kind":"constant","value":2}]},
              {"name":"b","dim":3,"constraints":[{"type":"point","point":[1,2,3]}]},
              {"name":"c","dim":2,"constraints":[{"type":"polygon","vertices":[[0,0],[1,0],[0,1]]},
                                                 {"type":"halfspaces","a":[[1,1]],"b":[0.5]}]}],
            "edges":[{"tail":"a","head":"b","costs":[{"kind":"squared_l2","of":"difference","weight":2}]}]},
            "problem":{"kind":"custom","ilp":[{"terms":{"v:a":1,"e:b|a":-1},"const":0,"sense":"geq"}],
                       "separators":["tsp_subtour"],"fixed":{"v:b":true}}}"#;
        let (g, spec) = parse_str(text).unwrap();
        assert_eq!(g.vertex(VertexId(0)).costs.len(), 3);
        assert!(g
            .vertex_set(VertexId(0))
            .unwrap()
            .contains(&[0.6, -1.0, 0.8], 1e-9)
            .unwrap());
        assert!(!g
            .vertex_set(VertexId(0))
            .unwrap()
            .contains(&[0.8, 0.0, 0.8], 1e-9)
            .unwrap());
        let ProblemKind::Custom(ilp) = &spec.kind else {
            panic!()
        };
        assert_eq!(ilp.constraints.len(), 1);
        assert_eq!(ilp.separators[0].name(), "tsp_subtour");
        let text2 = canonical_problem(&g, &spec).unwrap();
        let (g2, spec2) = parse_str(&text2).unwrap();
        assert_eq!(canonical_problem(&g2, &spec2).unwrap(), text2);
    }

    #[test]
    fn unknown_separator_is_rejected() {
        let text = r#"{"format_version":1,"graph":{"directed":true,"vertices":[{"name":"a","dim":1}]},
            "problem":{"kind":"custom","ilp":[],"separators":["my_callback"]}}"#;
        assert!(parse_str(text)
            .unwrap_err()
            .to_string()
            .contains("my_callback"));
    }
}
